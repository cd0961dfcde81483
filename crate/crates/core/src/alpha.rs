//! Monte Carlo estimates of the plus-connection rates `α_h`, the critical
//! floor height `h*` and the asymptotic slope `α`.
//!
//! `α_h = −ln P(E_h)` where `E_h` asks for a path of plus cells, consecutive
//! cells sharing at least a corner, from the cell just above the origin to the
//! layer at height `h − ½`, staying in the upper half-space. The infinite-volume
//! probability is approximated at the centre of a finite box under the
//! Dobrushin boundary condition.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoxDims, CellId};
use crate::sampler::{Chain, FloorConstraint, UpdateRule};
use crate::spin::{ModelParams, SpinConfig};

/// Reusable breadth-first search for the event `E_h`.
#[derive(Clone, Debug)]
pub struct ConnectionProbe {
    dims: BoxDims,
    target: i32,
    start: usize,
    stamp: Vec<u32>,
    generation: u32,
    queue: Vec<usize>,
}

impl ConnectionProbe {
    pub fn new(dims: BoxDims, h: u32) -> Result<Self> {
        let top = *dims.x3_range().end();
        if h == 0 || h as i32 - 1 > top {
            return Err(Error::InvalidQuery(format!("connection height {h} needs a box reaching height {h}")));
        }
        let start = dims.cell_index(CellId::new(0, 0, 0)).expect("box holds the centre cell");
        Ok(ConnectionProbe {
            dims,
            target: h as i32 - 1,
            start,
            stamp: vec![0; dims.num_cells()],
            generation: 0,
            queue: Vec::new(),
        })
    }

    pub fn height(&self) -> u32 {
        (self.target + 1) as u32
    }

    /// Evaluates `E_h` on the spins given by dense cell index.
    pub fn check<F: Fn(usize) -> i8>(&mut self, spin: F) -> bool {
        if spin(self.start) < 0 {
            return false;
        }
        if self.target == 0 {
            return true;
        }
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.fill(0);
            self.generation = 1;
        }
        let gen = self.generation;
        self.queue.clear();
        self.queue.push(self.start);
        self.stamp[self.start] = gen;
        let mut head = 0;
        while head < self.queue.len() {
            let c = self.dims.cell_at(self.queue[head]);
            head += 1;
            for dz in -1..=1 {
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let nb = CellId::new(c.x1 + dx, c.x2 + dy, c.x3 + dz);
                        if nb.x3 < 0 {
                            continue;
                        }
                        let Some(j) = self.dims.cell_index(nb) else { continue };
                        if self.stamp[j] == gen || spin(j) < 0 {
                            continue;
                        }
                        if nb.x3 == self.target {
                            return true;
                        }
                        self.stamp[j] = gen;
                        self.queue.push(j);
                    }
                }
            }
        }
        false
    }
}

pub fn plus_connection_event(config: &SpinConfig, h: u32) -> Result<bool> {
    let mut probe = ConnectionProbe::new(config.dims(), h)?;
    Ok(probe.check(|i| config.spins()[i]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaMethod {
    /// Frequency of `E_h` along one unconditioned chain.
    Direct,
    /// Product of `P(E_{k+1} | E_k)`, each from a chain confined to `E_k`.
    Splitting,
}

/// Sampling plan shared by every stage of an estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaRun {
    pub dims: BoxDims,
    pub beta: f64,
    pub steps: u64,
    pub burn_in: u64,
    pub thin: u64,
    pub seed: u64,
    pub batches: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaEntry {
    pub h: u32,
    pub alpha: f64,
    pub std_err: f64,
    /// Records per stage and successes per stage.
    pub samples: Vec<u64>,
    pub successes: Vec<u64>,
    pub method: AlphaMethod,
    /// Set when some stage saw no success: `alpha` is then a one-sided
    /// lower bound from the rule of three, not a point estimate.
    pub lower_bound: bool,
    pub run: AlphaRun,
}

impl AlphaEntry {
    pub fn ci95(&self) -> (f64, f64) {
        (self.alpha - 1.96 * self.std_err, self.alpha + 1.96 * self.std_err)
    }
}

/// Fraction of successes with a batch-means standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
struct StageEstimate {
    p: f64,
    se: f64,
    samples: u64,
    successes: u64,
}

fn batch_estimate(hits: &[bool], batches: u32) -> StageEstimate {
    let n = hits.len() as u64;
    let successes = hits.iter().filter(|&&b| b).count() as u64;
    let p = successes as f64 / n.max(1) as f64;
    let b = (batches as usize).clamp(2, hits.len().max(2));
    let size = hits.len() / b;
    let se = if size == 0 {
        (p * (1.0 - p) / n.max(1) as f64).sqrt()
    } else {
        let means: Vec<f64> = (0..b)
            .map(|k| hits[k * size..(k + 1) * size].iter().filter(|&&x| x).count() as f64 / size as f64)
            .collect();
        let m = means.iter().sum::<f64>() / b as f64;
        let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (b - 1) as f64;
        // never report less than the independent-sample error
        (var / b as f64).sqrt().max((p * (1.0 - p) / n.max(1) as f64).sqrt())
    };
    StageEstimate { p, se, samples: n, successes }
}

fn stage_seed(seed: u64, stage: u32) -> u64 {
    // splitmix64 finaliser
    let mut z = seed.wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(stage as u64 + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Runs one stage: the chain is confined to `E_given` (if any) and the
/// frequency of `E_target` is recorded.
fn run_stage(run: &AlphaRun, given: Option<u32>, target: u32, stage: u32) -> Result<StageEstimate> {
    if run.steps <= run.burn_in || run.thin == 0 {
        return Err(Error::InvalidQuery("need steps > burn_in and thin >= 1".into()));
    }
    let params = ModelParams::new(run.dims, run.beta)?;
    let mut start = SpinConfig::ground_state(run.dims);
    if let Some(k) = given {
        for z in 0..k as i32 {
            start.set(CellId::new(0, 0, z), 1)?;
        }
    }
    let mut chain = Chain::new(params, FloorConstraint::None, &start, stage_seed(run.seed, stage), UpdateRule::Metropolis)?;
    let mut probe = ConnectionProbe::new(run.dims, target)?;
    let mut guard_probe = match given {
        Some(k) => Some(ConnectionProbe::new(run.dims, k)?),
        None => None,
    };
    let dims = run.dims;
    let mut hits = Vec::with_capacity(((run.steps - run.burn_in) / run.thin) as usize);
    for t in 1..=run.steps {
        match guard_probe.as_mut() {
            None => {
                chain.step();
            }
            Some(gp) => {
                chain.step_guarded(|c, i| {
                    // only a plus cell turning minus in the upper half can cut a path
                    c.spin(i) > 0 || dims.cell_at(i).x3 < 0 || gp.check(|j| c.spin(j))
                });
            }
        }
        if t > run.burn_in && (t - run.burn_in).is_multiple_of(run.thin) {
            hits.push(probe.check(|j| chain.spin(j)));
        }
    }
    Ok(batch_estimate(&hits, run.batches))
}

fn combine(h: u32, method: AlphaMethod, run: AlphaRun, stages: &[StageEstimate]) -> AlphaEntry {
    let mut alpha = 0.0;
    let mut rel_var = 0.0;
    let mut lower_bound = false;
    for s in stages {
        if s.successes == 0 {
            // rule of three: p < 3/N at 95% confidence
            lower_bound = true;
            alpha += (s.samples.max(1) as f64 / 3.0).ln();
        } else {
            alpha -= s.p.ln();
            rel_var += (s.se / s.p).powi(2);
        }
    }
    AlphaEntry {
        h,
        alpha,
        std_err: rel_var.sqrt(),
        samples: stages.iter().map(|s| s.samples).collect(),
        successes: stages.iter().map(|s| s.successes).collect(),
        method,
        lower_bound,
        run,
    }
}

pub fn estimate_alpha(h: u32, method: AlphaMethod, run: AlphaRun) -> Result<AlphaEntry> {
    ModelParams::new(run.dims, run.beta)?;
    ConnectionProbe::new(run.dims, h)?;
    let stages = match method {
        AlphaMethod::Direct => vec![run_stage(&run, None, h, 0)?],
        AlphaMethod::Splitting => (1..=h)
            .into_par_iter()
            .map(|k| if k == 1 { run_stage(&run, None, 1, 0) } else { run_stage(&run, Some(k - 1), k, k - 1) })
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(combine(h, method, run, &stages))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaTable {
    pub beta: f64,
    pub entries: BTreeMap<u32, AlphaEntry>,
}

impl AlphaTable {
    pub fn new(beta: f64) -> Self {
        AlphaTable { beta, entries: BTreeMap::new() }
    }

    /// Table of bare values, for synthetic checks and hand-entered rates.
    pub fn from_values(beta: f64, values: &[(u32, f64)]) -> Self {
        let run = AlphaRun {
            dims: BoxDims { n: 0, m: 0, h: 0 },
            beta,
            steps: 0,
            burn_in: 0,
            thin: 0,
            seed: 0,
            batches: 0,
        };
        let entries = values
            .iter()
            .map(|&(h, a)| {
                let e = AlphaEntry {
                    h,
                    alpha: a,
                    std_err: 0.0,
                    samples: vec![],
                    successes: vec![],
                    method: AlphaMethod::Direct,
                    lower_bound: false,
                    run,
                };
                (h, e)
            })
            .collect();
        AlphaTable { beta, entries }
    }

    pub fn insert(&mut self, e: AlphaEntry) {
        self.entries.insert(e.h, e);
    }

    pub fn alpha(&self, h: u32) -> Option<f64> {
        self.entries.get(&h).map(|e| e.alpha)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("table serializes");
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

/// Estimates `α_h` for every `h` in `hs`; `h = 1` directly and larger `h` by
/// splitting, each with its own derived seed.
pub fn build_alpha_table(hs: &[u32], run: AlphaRun) -> Result<AlphaTable> {
    let entries = hs
        .par_iter()
        .map(|&h| {
            let method = if h == 1 { AlphaMethod::Direct } else { AlphaMethod::Splitting };
            estimate_alpha(h, method, AlphaRun { seed: stage_seed(run.seed, 1000 + h), ..run })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = AlphaTable::new(run.beta);
    for e in entries {
        t.insert(e);
    }
    Ok(t)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HStarResult {
    pub h_star: u32,
    pub threshold: f64,
    /// `ln n − α_{h*}`.
    pub lambda: f64,
    /// `n e^{−α_{h*}}`.
    pub gamma: f64,
    /// Whether `e^{−2β − e^{−4β}} ≤ γ < e^{2β}`.
    pub gamma_in_band: bool,
}

/// `h* = min{h ≥ 1 : α_h > ln n − 2β}`, scanning consecutive heights from 1.
pub fn compute_h_star(table: &AlphaTable, n: u32, beta: f64) -> Result<HStarResult> {
    let threshold = (n as f64).ln() - 2.0 * beta;
    let mut h = 1;
    while let Some(a) = table.alpha(h) {
        if a > threshold {
            let gamma = n as f64 * (-a).exp();
            let lo = (-2.0 * beta - (-4.0 * beta).exp()).exp();
            return Ok(HStarResult {
                h_star: h,
                threshold,
                lambda: (n as f64).ln() - a,
                gamma,
                gamma_in_band: lo <= gamma && gamma < (2.0 * beta).exp(),
            });
        }
        h += 1;
    }
    Err(Error::ThresholdNotCrossed { threshold, max_h: h - 1 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub ci95: (f64, f64),
    /// Leading-order prediction `4β`.
    pub reference: f64,
    /// `|slope − 4β| ≤ 0.25 · 4β`.
    pub within_25_percent: bool,
    /// `slope ≤ 4β + e^{−4β}`.
    pub below_upper_bound: bool,
}

/// Least-squares slope of `α_h` against `h`.
pub fn fit_alpha_rate(table: &AlphaTable) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = table.entries.values().map(|e| (e.h as f64, e.alpha)).collect();
    let n = pts.len() as f64;
    if pts.len() < 3 {
        return Err(Error::DegenerateTable(format!("need at least 3 entries, have {}", pts.len())));
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateTable("all entries share one height".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let slope_se = (rss / (n - 2.0) / sxx).sqrt();
    let reference = 4.0 * table.beta;
    Ok(RateFit {
        slope,
        intercept,
        slope_se,
        ci95: (slope - 1.96 * slope_se, slope + 1.96 * slope_se),
        reference,
        within_25_percent: (slope - reference).abs() <= 0.25 * reference,
        below_upper_bound: slope <= reference + (-reference).exp(),
    })
}

/// Difference between estimates on a box and on a larger box, in units of
/// their combined standard error.
pub fn finite_size_shift(small: &AlphaEntry, large: &AlphaEntry) -> f64 {
    let se = small.std_err.hypot(large.std_err);
    if se == 0.0 {
        return 0.0;
    }
    (large.alpha - small.alpha) / se
}
