//! `dobrushin`: command-line front end for interface experiments.
//!
//! Results go to stdout as JSON unless `--out` names a file or directory.
//! The only environment variable read is `DOBRUSHIN_WORKERS`, the size of
//! the worker pool (default: all cores).

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use dobrushin::experiment::validate::{validate, Level};
use dobrushin::experiment::{repulsion_sweep, run_experiment, workers_from_env, ExperimentSpec, SweepConfig};
use dobrushin::oracle::{cached_interface_marginal, enumerate_configs, enumerate_standard_wall_collections};
use dobrushin::spin::SpinSnapshot;
use dobrushin::{
    build_alpha_table, compute_h_star, decompose, estimate_alpha, excess_energy, extract_interface, fit_alpha_rate,
    spin_from_interface, AlphaMethod, AlphaRun, AlphaTable, BoxDims, Error, FloorConstraint, Interface, Result,
    SpinConfig,
};

#[derive(Parser)]
#[command(name = "dobrushin", version, about = "Ising interfaces under Dobrushin boundary conditions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every chain of an experiment spec (TOML) into a run directory.
    Simulate {
        spec: PathBuf,
        /// Run directory [default: the spec's output_dir, else runs/<name>]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive enumeration on tiny boxes.
    Enumerate {
        #[command(subcommand)]
        what: EnumerateCmd,
    },
    /// Interface of a spin snapshot, as a sorted JSON face list.
    DumpInterface {
        /// Snapshot JSON (a run's final-*.json or a bare spin snapshot)
        snapshot: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Walls of an interface with excess, projection, nesting parent and cluster.
    DumpWalls {
        #[command(flatten)]
        input: InterfaceInput,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate α_h for a range of heights and write an alpha table.
    Alpha(AlphaArgs),
    /// Critical height h* from an alpha table.
    Hstar {
        #[arg(long)]
        table: PathBuf,
        /// Base side length n
        #[arg(long)]
        n: u32,
        /// Inverse temperature [default: the table's]
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Floor sweep around h*, one run per floor plus the unconditioned baseline.
    RepulsionSweep {
        #[arg(long)]
        table: PathBuf,
        /// Sweep configuration (TOML)
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the validation suites; nonzero exit on any failure.
    Validate {
        #[arg(long, value_enum, default_value_t = LevelArg::Fast)]
        level: LevelArg,
        /// Also write the JSON report here
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum EnumerateCmd {
    /// Exact interface marginal of a box, with its log partition function.
    Configs {
        #[command(flatten)]
        dims: DimsArgs,
        #[arg(long)]
        beta: f64,
        /// none, interface:H or plus-below:H
        #[arg(long, default_value = "none")]
        constraint: FloorConstraint,
        /// Read or store the result in this directory
        #[arg(long)]
        cache: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Admissible standard wall collections on a small base up to an excess cap.
    Walls {
        #[arg(long)]
        n: u32,
        /// Second base side [default: n]
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        cap: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct DimsArgs {
    #[arg(long)]
    n: u32,
    /// Second base side [default: n]
    #[arg(long)]
    m: Option<u32>,
    /// Box height (even)
    #[arg(long)]
    h: u32,
}

impl DimsArgs {
    fn dims(&self) -> Result<BoxDims> {
        BoxDims::new(self.n, self.m.unwrap_or(self.n), self.h)
    }
}

#[derive(Args)]
struct InterfaceInput {
    /// Spin snapshot JSON
    #[arg(long, required_unless_present = "interface", conflicts_with = "interface")]
    snapshot: Option<PathBuf>,
    /// Interface JSON face list; needs --dims
    #[arg(long, requires = "dims")]
    interface: Option<PathBuf>,
    /// Box of the interface as N,M,H
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<u32>>,
}

#[derive(Args)]
struct AlphaArgs {
    /// Side of the cubic estimation box
    #[arg(long, default_value_t = 8)]
    box_size: u32,
    #[arg(long)]
    beta: f64,
    /// Heights to estimate
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    heights: Vec<u32>,
    /// Sampling sweeps per stage after burn-in (one sweep = box volume steps)
    #[arg(long, default_value_t = 2000)]
    sweeps: u64,
    #[arg(long, default_value_t = 200)]
    burn_in_sweeps: u64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    batches: u32,
    /// Estimate every height directly instead of by splitting
    #[arg(long)]
    direct: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

fn emit_text(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            // a closed pipe (`| head`) is not an error
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::io(Path::new("<stdout>"), e)),
            _ => Ok(()),
        },
    }
}

fn emit(out: Option<&Path>, value: &Value) -> Result<()> {
    emit_text(out, &(serde_json::to_string_pretty(value).expect("json") + "\n"))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn load_snapshot(path: &Path) -> Result<SpinConfig> {
    let v: Value = serde_json::from_str(&read(path)?).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let inner = v.get("state").cloned().unwrap_or(v);
    let snap: SpinSnapshot =
        serde_json::from_value(inner).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    SpinConfig::from_snapshot(&snap)
}

fn load_interface(input: &InterfaceInput) -> Result<Interface> {
    if let Some(p) = &input.snapshot {
        return Ok(extract_interface(&load_snapshot(p)?));
    }
    let p = input.interface.as_ref().expect("clap group");
    let d = input.dims.as_deref().expect("clap requires");
    if d.len() != 3 {
        return Err(Error::Parse("--dims takes N,M,H".into()));
    }
    let iface = Interface::from_json(BoxDims::new(d[0], d[1], d[2])?, &read(p)?)?;
    spin_from_interface(&iface)?;
    Ok(iface)
}

fn walls_json(iface: &Interface) -> Value {
    let deco = decompose(iface);
    let clusters: Vec<Vec<usize>> = (0..deco.walls.len()).map(|i| deco.wall_cluster(i).members).collect();
    let walls: Vec<Value> = deco
        .walls
        .iter()
        .enumerate()
        .map(|(i, w)| {
            // smallest root whose cluster holds this wall
            let cluster_id = (0..deco.walls.len()).find(|&r| clusters[r].contains(&i)).unwrap_or(i);
            json!({
                "id": i,
                "faces": w.faces,
                "excess": excess_energy(w),
                "projection": w.projection,
                "supporting_ceiling_height": w.supporting_ceiling_height,
                "parent": deco.wall_parent[i],
                "cluster_id": cluster_id,
                "cluster": clusters[i],
            })
        })
        .collect();
    let ceilings: Vec<Value> = deco
        .ceilings
        .iter()
        .enumerate()
        .map(|(c, ceil)| json!({"height": ceil.height, "area": ceil.area(), "parent": deco.ceiling_parent[c]}))
        .collect();
    json!({"dims": iface.dims(), "excess": deco.total_excess(), "walls": walls, "ceilings": ceilings})
}

fn alpha(a: &AlphaArgs) -> Result<Value> {
    let dims = BoxDims::cube(a.box_size)?;
    let vol = dims.num_cells() as u64;
    let run = AlphaRun {
        dims,
        beta: a.beta,
        steps: (a.burn_in_sweeps + a.sweeps) * vol,
        burn_in: a.burn_in_sweeps * vol,
        thin: vol,
        seed: a.seed,
        batches: a.batches,
    };
    let table = if a.direct {
        let mut t = AlphaTable::new(a.beta);
        for &h in &a.heights {
            t.insert(estimate_alpha(h, AlphaMethod::Direct, run)?);
        }
        t
    } else {
        build_alpha_table(&a.heights, run)?
    };
    if let Some(p) = &a.out {
        table.save(p)?;
    }
    Ok(serde_json::to_value(&table).expect("json"))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { spec, out } => {
            let s = ExperimentSpec::load(&spec)?;
            let dir = out
                .or_else(|| s.output_dir.as_ref().map(PathBuf::from))
                .unwrap_or_else(|| Path::new("runs").join(&s.name));
            let m = run_experiment(&s, &dir, workers_from_env()?)?;
            eprintln!("{} chains written to {}", m.runs.len(), dir.display());
            Ok(())
        }
        Command::Enumerate { what: EnumerateCmd::Configs { dims, beta, constraint, cache, out } } => {
            let d = dims.dims()?;
            let marginal = match cache {
                Some(dir) => cached_interface_marginal(&dir, d, beta, constraint)?,
                None => enumerate_configs(d, beta, constraint)?.interface_marginal(),
            };
            let entries: Vec<Value> =
                marginal.entries.iter().map(|(i, p)| json!({"faces": i.faces(), "probability": p})).collect();
            emit(
                out.as_deref(),
                &json!({
                    "dims": d, "beta": beta, "constraint": constraint.to_string(),
                    "log_partition": marginal.log_partition, "interfaces": entries.len(), "entries": entries,
                }),
            )
        }
        Command::Enumerate { what: EnumerateCmd::Walls { n, m, cap, out } } => {
            let colls = enumerate_standard_wall_collections(n, m.unwrap_or(n), cap)?;
            let list: Vec<Value> = colls
                .iter()
                .map(|c| json!({"excess": c.total_excess(), "walls": c.walls.iter().map(|w| &w.faces).collect::<Vec<_>>()}))
                .collect();
            emit(out.as_deref(), &json!({"n": n, "m": m.unwrap_or(n), "cap": cap, "count": list.len(), "collections": list}))
        }
        Command::DumpInterface { snapshot, out } => {
            let iface = extract_interface(&load_snapshot(&snapshot)?);
            emit_text(out.as_deref(), &(iface.to_json() + "\n"))
        }
        Command::DumpWalls { input, out } => emit(out.as_deref(), &walls_json(&load_interface(&input)?)),
        Command::Alpha(a) => {
            let v = alpha(&a)?;
            if a.out.is_none() {
                emit(None, &v)?;
            }
            Ok(())
        }
        Command::Hstar { table, n, beta } => {
            let t = AlphaTable::load(&table)?;
            let hs = compute_h_star(&t, n, beta.unwrap_or(t.beta))?;
            let fit = fit_alpha_rate(&t).ok();
            emit(None, &json!({"h_star": hs, "rate_fit": fit}))
        }
        Command::RepulsionSweep { table, config, out } => {
            let t = AlphaTable::load(&table)?;
            let cfg = SweepConfig::load(&config)?;
            let (hs, rows) = repulsion_sweep(&t, &cfg, &out, workers_from_env()?)?;
            eprintln!("h* = {} ({} runs) written to {}", hs.h_star, rows.len(), out.display());
            Ok(())
        }
        Command::Validate { level, out } => {
            let level = match level {
                LevelArg::Fast => Level::Fast,
                LevelArg::Full => Level::Full,
            };
            let report = validate(level);
            let v = serde_json::to_value(&report).expect("json");
            emit(None, &v)?;
            if let Some(p) = out {
                emit(Some(&p), &v)?;
            }
            if report.passed {
                Ok(())
            } else {
                let failed: Vec<&str> = report.suites.iter().filter(|s| !s.passed).map(|s| s.name.as_str()).collect();
                Err(Error::Validation(format!("failed suites: {}", failed.join(", "))))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
