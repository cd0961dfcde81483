use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    reduce_run_dir, run_experiment, write_file, ChainSpec, ConstraintSpec, ExperimentSpec, FloorMode, ModelSpec,
    ObservableSpec, SummaryRow,
};
use crate::alpha::{compute_h_star, AlphaTable, HStarResult};
use crate::error::{Error, Result};
use crate::sampler::UpdateRule;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub name: String,
    pub n: u32,
    /// Box height.
    pub h: u32,
    pub beta: f64,
    #[serde(default)]
    pub update: UpdateRule,
    #[serde(default)]
    pub mode: FloorMode,
    /// Defaults to [`default_floors`] around the computed `h*`.
    #[serde(default)]
    pub floors: Option<Vec<u32>>,
    pub chain: ChainSpec,
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub label: String,
    pub floor: Option<u32>,
    /// `floor − h*`.
    pub offset: Option<i64>,
    pub stats: Vec<SummaryRow>,
}

/// Floors `0, h*−2, h*, h*+2`, dropping negatives and repeats.
pub fn default_floors(h_star: u32) -> Vec<u32> {
    let mut v: Vec<u32> = [0, h_star as i64 - 2, h_star as i64, h_star as i64 + 2]
        .into_iter()
        .filter(|&x| x >= 0)
        .map(|x| x as u32)
        .collect();
    v.sort_unstable();
    v.dedup();
    v
}

const SWEEP_OBSERVABLES: [&str; 4] = ["zero_fraction", "mean_height", "nonzero_sites", "repelled_sites"];

/// Floor sweep around `h*`: one unconditioned run plus one run per floor,
/// summarised per floor and annotated with `h*`.
pub fn repulsion_sweep(
    table: &AlphaTable,
    cfg: &SweepConfig,
    out: &Path,
    workers: usize,
) -> Result<(HStarResult, Vec<SweepRow>)> {
    let hs = compute_h_star(table, cfg.n, cfg.beta)?;
    let floors = cfg.floors.clone().unwrap_or_else(|| default_floors(hs.h_star));
    let spec = ExperimentSpec {
        name: cfg.name.clone(),
        model: ModelSpec { n: cfg.n, m: None, h: cfg.h, beta: cfg.beta, update: cfg.update },
        constraint: ConstraintSpec { mode: cfg.mode, floors, unconditioned: true },
        chain: cfg.chain.clone(),
        observables: ObservableSpec { requested: Vec::new(), h_star: Some(hs.h_star), k: 0 },
        output_dir: None,
    };
    let manifest = run_experiment(&spec, out, workers)?;
    let summary = reduce_run_dir(out)?;

    let mut rows = Vec::new();
    for c in spec.constraint.constraints() {
        let label = super::constraint_label(c);
        let floor = c.floor();
        rows.push(SweepRow {
            label: label.clone(),
            floor,
            offset: floor.map(|f| f as i64 - hs.h_star as i64),
            stats: summary.iter().filter(|r| r.label == label).cloned().collect(),
        });
    }

    let mut text = format!(
        "# spec_hash: {}\n# h_star: {}\n# threshold: {}\n# gamma: {}\nlabel,floor,floor_minus_h_star",
        manifest.spec_hash, hs.h_star, hs.threshold, hs.gamma
    );
    for o in SWEEP_OBSERVABLES {
        write!(text, ",{o}_mean,{o}_se").unwrap();
    }
    text.push('\n');
    for r in &rows {
        let opt = |x: Option<i64>| x.map_or(String::new(), |v| v.to_string());
        write!(text, "{},{},{}", r.label, opt(r.floor.map(i64::from)), opt(r.offset)).unwrap();
        for o in SWEEP_OBSERVABLES {
            match r.stats.iter().find(|s| s.observable == o) {
                Some(s) => write!(text, ",{},{}", s.mean, s.std_err).unwrap(),
                None => text.push_str(",,"),
            }
        }
        text.push('\n');
    }
    write_file(&out.join("sweep.csv"), text.as_bytes())?;

    let mut hist = format!("# spec_hash: {}\nlabel,height,mean_count,std_err\n", manifest.spec_hash);
    for r in &rows {
        for s in r.stats.iter().filter(|s| s.observable.starts_with("hist_")) {
            writeln!(hist, "{},{},{},{}", r.label, &s.observable[5..], s.mean, s.std_err).unwrap();
        }
    }
    write_file(&out.join("sweep_histogram.csv"), hist.as_bytes())?;
    Ok((hs, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_layout() {
        assert_eq!(default_floors(4), vec![0, 2, 4, 6]);
        assert_eq!(default_floors(1), vec![0, 1, 3]);
        assert_eq!(default_floors(2), vec![0, 2, 4]);
    }

    #[test]
    fn sweep_writes_annotated_tables() {
        let table = AlphaTable::from_values(0.9, &[(1, 2.0), (2, 5.0), (3, 9.0)]);
        let cfg = SweepConfig {
            name: "sweep".into(),
            n: 4,
            h: 8,
            beta: 0.9,
            update: UpdateRule::Metropolis,
            mode: FloorMode::Interface,
            floors: None,
            chain: ChainSpec {
                steps: 3000,
                burn_in: 500,
                thin: 50,
                seeds: vec![1, 2],
                replicas: 1,
                audit_every: 0,
                start_lift: 0,
            },
        };
        assert_eq!(SweepConfig::from_toml(&toml::to_string(&cfg).unwrap()).unwrap(), cfg);
        let dir = tempfile::tempdir().unwrap();
        let (hs, rows) = repulsion_sweep(&table, &cfg, dir.path(), 1).unwrap();
        // ln 4 − 1.8 ≈ −0.41, crossed at h = 1
        assert_eq!(hs.h_star, 1);
        let labels: Vec<_> = rows.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(labels, vec!["unconditioned", "floor-0", "floor-1", "floor-3"]);
        let text = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
        assert!(text.contains("# h_star: 1\n"));
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 5);
        let hist = std::fs::read_to_string(dir.path().join("sweep_histogram.csv")).unwrap();
        assert_eq!(hist.lines().count(), 2 + 4 * 9);
    }
}
