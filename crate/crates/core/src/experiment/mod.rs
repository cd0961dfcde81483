//! Declarative, seeded batch experiments with CSV and JSON output.
//!
//! A run directory holds `manifest.json`, one subdirectory per constraint
//! (`unconditioned`, `floor-<h>`), and inside each a raw observable stream
//! and a final snapshot per chain. `summary.csv` is produced by a reducer
//! that reads only the raw streams, so re-running it reproduces the file.

mod reduce;
mod simulate;
mod sweep;
pub mod validate;

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::BoxDims;
use crate::sampler::{ChainSchedule, FloorConstraint, UpdateRule};
use crate::spin::ModelParams;

pub use reduce::{reduce_run_dir, write_summary, SummaryRow};
pub use simulate::{run_experiment, RunRecord, RunManifest};
pub use sweep::{default_floors, repulsion_sweep, SweepConfig, SweepRow};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub n: u32,
    #[serde(default)]
    pub m: Option<u32>,
    pub h: u32,
    pub beta: f64,
    #[serde(default)]
    pub update: UpdateRule,
}

impl ModelSpec {
    pub fn dims(&self) -> Result<BoxDims> {
        BoxDims::new(self.n, self.m.unwrap_or(self.n), self.h)
    }

    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.dims()?, self.beta)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FloorMode {
    #[default]
    Interface,
    PlusBelow,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSpec {
    #[serde(default)]
    pub mode: FloorMode,
    /// Floor heights `h`; each gives one run subdirectory.
    #[serde(default)]
    pub floors: Vec<u32>,
    /// Also run without a floor.
    #[serde(default)]
    pub unconditioned: bool,
}

impl ConstraintSpec {
    /// Constraints in run order: unconditioned first, then floors ascending.
    pub fn constraints(&self) -> Vec<FloorConstraint> {
        let mut floors = self.floors.clone();
        floors.sort_unstable();
        floors.dedup();
        let mut out = Vec::new();
        if self.unconditioned || floors.is_empty() {
            out.push(FloorConstraint::None);
        }
        out.extend(floors.into_iter().map(|h| match self.mode {
            FloorMode::Interface => FloorConstraint::InterfaceConditioned(h),
            FloorMode::PlusBelow => FloorConstraint::PlusBelow(h),
        }));
        out
    }
}

/// Subdirectory name of a constraint.
pub fn constraint_label(c: FloorConstraint) -> String {
    match c {
        FloorConstraint::None => "unconditioned".into(),
        FloorConstraint::InterfaceConditioned(h) => format!("floor-{h}"),
        FloorConstraint::PlusBelow(h) => format!("plus-below-{h}"),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub steps: u64,
    pub burn_in: u64,
    pub thin: u64,
    pub seeds: Vec<u64>,
    #[serde(default = "one")]
    pub replicas: u32,
    /// Full consistency audit period; 0 disables it.
    #[serde(default)]
    pub audit_every: u64,
    /// Start from the flat interface lifted by this many layers.
    #[serde(default)]
    pub start_lift: u32,
}

fn one() -> u32 {
    1
}

impl ChainSpec {
    pub fn schedule(&self) -> ChainSchedule {
        ChainSchedule { steps: self.steps, burn_in: self.burn_in, thin: self.thin, audit_every: self.audit_every }
    }
}

/// Columns a raw stream can carry besides `step`, `energy` and `flagged`.
pub const OBSERVABLE_NAMES: [&str; 9] = [
    "zero_fraction",
    "mean_height",
    "min_height",
    "max_height",
    "interface_faces",
    "nonzero_sites",
    "repelled_sites",
    "wall_excess",
    "histogram",
];

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableSpec {
    /// Subset of [`OBSERVABLE_NAMES`]; empty means all that apply.
    #[serde(default)]
    pub requested: Vec<String>,
    /// `h*` for the repelled-site count.
    #[serde(default)]
    pub h_star: Option<u32>,
    #[serde(default)]
    pub k: u32,
}

impl ObservableSpec {
    pub fn columns(&self) -> Result<Vec<&'static str>> {
        for r in &self.requested {
            if !OBSERVABLE_NAMES.contains(&r.as_str()) {
                return Err(Error::Parse(format!("unknown observable `{r}`")));
            }
        }
        let wants_repelled = self.requested.iter().any(|r| r == "repelled_sites");
        if wants_repelled && self.h_star.is_none() {
            return Err(Error::Parse("repelled_sites needs observables.h_star".into()));
        }
        Ok(OBSERVABLE_NAMES
            .into_iter()
            .filter(|name| {
                if self.requested.is_empty() {
                    *name != "repelled_sites" || self.h_star.is_some()
                } else {
                    self.requested.iter().any(|r| r == name)
                }
            })
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub model: ModelSpec,
    #[serde(default)]
    pub constraint: ConstraintSpec,
    pub chain: ChainSpec,
    #[serde(default)]
    pub observables: ObservableSpec,
    /// Where results go when the command line does not say otherwise.
    #[serde(default)]
    pub output_dir: Option<String>,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.model.params()?;
        let c = &self.chain;
        if c.steps <= c.burn_in || c.thin == 0 {
            return Err(Error::Parse("chain needs steps > burn_in and thin >= 1".into()));
        }
        if c.seeds.is_empty() || c.replicas == 0 {
            return Err(Error::Parse("chain needs at least one seed and one replica".into()));
        }
        self.observables.columns()?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, embedded in every output.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(self).expect("spec serializes"));
        h.update(CODE_VERSION.as_bytes());
        hex::encode(h.finalize())
    }
}

/// Seed of replica `r` of seed `s`; shared by every constraint of a run so
/// that floors are compared on common random numbers.
pub fn chain_seed(seed: u64, replica: u32) -> u64 {
    if replica == 0 {
        return seed;
    }
    let mut z = seed ^ (replica as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Worker count from `DOBRUSHIN_WORKERS`, defaulting to the available cores.
pub fn workers_from_env() -> Result<usize> {
    match std::env::var("DOBRUSHIN_WORKERS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::Parse(format!("DOBRUSHIN_WORKERS must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

pub(crate) fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const SMALL: &str = r#"
name = "small"

[model]
n = 3
h = 4
beta = 0.8

[constraint]
floors = [1, 0]
unconditioned = true

[chain]
steps = 4000
burn_in = 1000
thin = 100
seeds = [7, 8]
audit_every = 1000
"#;

    #[test]
    fn parses_and_hashes() {
        let s = ExperimentSpec::from_toml(SMALL).unwrap();
        assert_eq!(s.model.dims().unwrap(), BoxDims::new(3, 3, 4).unwrap());
        assert_eq!(
            s.constraint.constraints(),
            vec![
                FloorConstraint::None,
                FloorConstraint::InterfaceConditioned(0),
                FloorConstraint::InterfaceConditioned(1)
            ]
        );
        assert_eq!(s.chain.replicas, 1);
        let again = ExperimentSpec::from_toml(&s.to_toml()).unwrap();
        assert_eq!(again, s);
        assert_eq!(again.hash(), s.hash());
        let mut other = s.clone();
        other.chain.seeds.push(9);
        assert_ne!(other.hash(), s.hash());
    }

    #[test]
    fn rejects_bad_specs() {
        for bad in [
            "name = 1",
            &SMALL.replace("h = 4", "h = 3"),
            &SMALL.replace("thin = 100", "thin = 0"),
            &SMALL.replace("seeds = [7, 8]", "seeds = []"),
            &SMALL.replace("beta = 0.8", "beta = 0.8\ncolour = 1"),
            &format!("{SMALL}\n[observables]\nrequested = [\"repelled_sites\"]\n"),
            &format!("{SMALL}\n[observables]\nrequested = [\"nonsense\"]\n"),
        ] {
            let e = ExperimentSpec::from_toml(bad).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{bad}: {e}");
        }
    }

    #[test]
    fn observable_columns() {
        let o = ObservableSpec::default();
        assert!(!o.columns().unwrap().contains(&"repelled_sites"));
        let o = ObservableSpec { h_star: Some(2), ..Default::default() };
        assert!(o.columns().unwrap().contains(&"repelled_sites"));
        let o = ObservableSpec { requested: vec!["mean_height".into()], ..Default::default() };
        assert_eq!(o.columns().unwrap(), vec!["mean_height"]);
    }

    #[test]
    fn replica_seeds() {
        assert_eq!(chain_seed(7, 0), 7);
        assert_ne!(chain_seed(7, 1), chain_seed(7, 2));
        assert_ne!(chain_seed(7, 1), 7);
    }
}
