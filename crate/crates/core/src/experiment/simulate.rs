use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{chain_seed, constraint_label, write_file, ChainSpec, ConstraintSpec, ExperimentSpec, ModelSpec, CODE_VERSION};
use crate::error::{Error, Result};
use crate::geometry::BoxDims;
use crate::interface::Interface;
use crate::observables::{height_histogram, nonzero_sites, repelled_sites};
use crate::sampler::{drive_chain, start_config, Chain, FloorConstraint};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub label: String,
    pub constraint: FloorConstraint,
    pub seed: u64,
    pub replica: u32,
    pub chain_seed: u64,
    /// Paths relative to the run directory.
    pub stream: String,
    pub snapshot: String,
    pub records: u64,
    pub flagged_records: u64,
    pub proposals: u64,
    pub accepted: u64,
    pub rejected_floor: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub name: String,
    pub spec_hash: String,
    pub code_version: String,
    pub model: ModelSpec,
    pub dims: BoxDims,
    pub constraint: ConstraintSpec,
    pub chain: ChainSpec,
    pub columns: Vec<String>,
    pub runs: Vec<RunRecord>,
}

impl RunManifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join("manifest.json");
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

/// Header of a raw stream for the given observable columns.
pub(crate) fn stream_header(dims: BoxDims, columns: &[&str]) -> Vec<String> {
    let mut out = vec!["step".to_string(), "energy".to_string()];
    for &c in columns {
        if c == "histogram" {
            let top = dims.h as i32 / 2;
            out.extend((-top..=top).map(|z| format!("hist_{z}")));
        } else {
            out.push(c.to_string());
        }
    }
    out.push("flagged".into());
    out
}

fn stream_row(
    line: &mut String,
    chain: &Chain,
    iface: &Interface,
    flagged: bool,
    columns: &[&str],
    repelled: Option<(u32, u32, u32)>,
) {
    let dims = iface.dims();
    let hist = height_histogram(iface);
    write!(line, "{},{}", chain.steps(), chain.energy()).unwrap();
    for &c in columns {
        match c {
            "zero_fraction" => write!(line, ",{}", hist.zero_fraction()),
            "mean_height" => write!(line, ",{}", hist.mean_height()),
            "min_height" => write!(line, ",{}", iface.min_height()),
            "max_height" => write!(line, ",{}", iface.max_height()),
            "interface_faces" => write!(line, ",{}", iface.len()),
            "nonzero_sites" => write!(line, ",{}", nonzero_sites(iface)),
            "repelled_sites" => {
                let (hs, fh, k) = repelled.expect("validated spec");
                write!(line, ",{}", repelled_sites(iface, hs, fh, k))
            }
            "wall_excess" => write!(line, ",{}", iface.len() - dims.num_columns()),
            "histogram" => {
                let top = dims.h as i32 / 2;
                for z in -top..=top {
                    write!(line, ",{}", hist.by_height.get(&z).copied().unwrap_or(0)).unwrap();
                }
                Ok(())
            }
            _ => unreachable!("validated column"),
        }
        .unwrap();
    }
    writeln!(line, ",{}", flagged as u8).unwrap();
}

struct Job {
    constraint: FloorConstraint,
    seed: u64,
    replica: u32,
}

fn run_job(spec: &ExperimentSpec, hash: &str, job: &Job, out: &Path, columns: &[&str]) -> Result<RunRecord> {
    let params = spec.model.params()?;
    let label = constraint_label(job.constraint);
    let cs = chain_seed(job.seed, job.replica);
    let start = start_config(params.dims, spec.chain.start_lift)?;
    let mut chain = Chain::new(params, job.constraint, &start, cs, spec.model.update)?;
    let floor = job.constraint.floor().unwrap_or(0);
    let repelled = spec.observables.h_star.map(|hs| (hs, floor, spec.observables.k));

    let mut text = format!("# spec_hash: {hash}\n");
    text.push_str(&stream_header(params.dims, columns).join(","));
    text.push('\n');
    let report = drive_chain(&mut chain, spec.chain.schedule(), |c, iface, flagged| {
        stream_row(&mut text, c, iface, flagged, columns, repelled);
        Ok(())
    })?;

    let base = format!("seed{}-rep{}", job.seed, job.replica);
    let stream = format!("{label}/{base}.csv");
    let snapshot = format!("{label}/final-{base}.json");
    write_file(&out.join(&stream), text.as_bytes())?;
    let snap = serde_json::json!({
        "spec_hash": hash,
        "constraint": job.constraint,
        "chain_seed": cs,
        "steps": chain.steps(),
        "energy": chain.energy(),
        "state": chain.config().to_snapshot(params.beta),
    });
    write_file(&out.join(&snapshot), (serde_json::to_string_pretty(&snap).expect("json") + "\n").as_bytes())?;
    Ok(RunRecord {
        label,
        constraint: job.constraint,
        seed: job.seed,
        replica: job.replica,
        chain_seed: cs,
        stream,
        snapshot,
        records: report.records,
        flagged_records: report.flagged_records,
        proposals: report.stats.proposals,
        accepted: report.stats.accepted,
        rejected_floor: report.stats.rejected_floor,
    })
}

/// Runs every (constraint, seed, replica) chain of `spec` into `out` on a
/// pool of `workers` threads, then writes the manifest and the summary.
pub fn run_experiment(spec: &ExperimentSpec, out: &Path, workers: usize) -> Result<RunManifest> {
    spec.validate()?;
    let hash = spec.hash();
    let columns = spec.observables.columns()?;
    let mut jobs = Vec::new();
    for c in spec.constraint.constraints() {
        for &seed in &spec.chain.seeds {
            for replica in 0..spec.chain.replicas {
                jobs.push(Job { constraint: c, seed, replica });
            }
        }
    }
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidQuery(format!("worker pool: {e}")))?;
    let runs = pool.install(|| {
        jobs.par_iter().map(|j| run_job(spec, &hash, j, out, &columns)).collect::<Result<Vec<_>>>()
    })?;
    let manifest = RunManifest {
        name: spec.name.clone(),
        spec_hash: hash,
        code_version: CODE_VERSION.to_string(),
        model: spec.model.clone(),
        dims: spec.model.dims()?,
        constraint: spec.constraint.clone(),
        chain: spec.chain.clone(),
        columns: columns.iter().map(|s| s.to_string()).collect(),
        runs,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    write_file(&out.join("manifest.json"), text.as_bytes())?;
    let rows = super::reduce_run_dir(out)?;
    super::write_summary(out, &manifest.spec_hash, &rows)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::tests::SMALL;

    fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
        let mut out = Vec::new();
        let mut stack = vec![dir.to_path_buf()];
        while let Some(d) = stack.pop() {
            for e in std::fs::read_dir(&d).unwrap() {
                let p = e.unwrap().path();
                if p.is_dir() {
                    stack.push(p);
                } else {
                    out.push((p.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&p).unwrap()));
                }
            }
        }
        out.sort();
        out
    }

    #[test]
    fn replays_byte_identically() {
        let spec = ExperimentSpec::from_toml(SMALL).unwrap();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let m = run_experiment(&spec, a.path(), 2).unwrap();
        run_experiment(&spec, b.path(), 1).unwrap();
        let fa = read_all(a.path());
        assert_eq!(fa, read_all(b.path()));
        // 3 constraints x 2 seeds, each with a stream and a snapshot
        assert_eq!(fa.len(), 12 + 2);
        assert_eq!(m.runs.len(), 6);
        for r in &m.runs {
            assert_eq!(r.records, 30);
            let text = std::fs::read_to_string(a.path().join(&r.stream)).unwrap();
            assert!(text.starts_with(&format!("# spec_hash: {}\n", m.spec_hash)));
            assert_eq!(text.lines().count(), 32);
        }
        let dirs: Vec<_> = ["floor-0", "floor-1", "unconditioned"].iter().map(|d| a.path().join(d)).collect();
        assert!(dirs.iter().all(|d| d.is_dir()));
    }

    #[test]
    fn seeds_differ_and_floor_holds() {
        let spec = ExperimentSpec::from_toml(SMALL).unwrap();
        let a = tempfile::tempdir().unwrap();
        let m = run_experiment(&spec, a.path(), 1).unwrap();
        let read = |r: &RunRecord| std::fs::read_to_string(a.path().join(&r.stream)).unwrap();
        let s7 = m.runs.iter().find(|r| r.seed == 7 && r.label == "unconditioned").unwrap();
        let s8 = m.runs.iter().find(|r| r.seed == 8 && r.label == "unconditioned").unwrap();
        assert_ne!(read(s7).lines().skip(2).collect::<Vec<_>>(), read(s8).lines().skip(2).collect::<Vec<_>>());
        let header: Vec<String> = read(s7).lines().nth(1).unwrap().split(',').map(String::from).collect();
        let min_col = header.iter().position(|c| c == "min_height").unwrap();
        for r in m.runs.iter().filter(|r| r.label == "floor-0") {
            for line in read(r).lines().skip(2) {
                let v: i32 = line.split(',').nth(min_col).unwrap().parse().unwrap();
                assert!(v >= 0);
            }
        }
    }
}
