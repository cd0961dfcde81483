//! Validation suites: exact bijection checks, wall identities, the shift map,
//! wall enumeration and sampler-versus-oracle agreement.
//!
//! The reconstruction routine is a parameter so that a deliberately broken
//! one can be shown to fail the bijection suite.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rayon::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{BoxDims, CellId, FaceId, ProjElement};
use crate::interface::{extract_interface, satisfies_floor, spin_from_interface, Interface};
use crate::oracle::{combine_standard_walls, enumerate_configs, enumerate_standard_wall_collections, total_variation};
use crate::sampler::{Chain, FloorConstraint, UpdateRule};
use crate::spin::{ModelParams, SpinConfig};
use crate::walls::{
    boundary_band, classify_faces, decompose, excess_energy, excess_rel, reconstruct, shift_up, standard_rep,
    standardize, StandardWallCollection, WallDecomposition,
};

pub type ReconstructFn = fn(&StandardWallCollection) -> Result<Interface>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Fast,
    Full,
}

impl std::str::FromStr for Level {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Level::Fast),
            "full" => Ok(Level::Full),
            _ => Err(crate::error::Error::Parse(format!("unknown validation level `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub checks: u64,
    /// The first few failures.
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn from_failures(name: &str, checks: u64, failures: Vec<String>) -> Self {
        SuiteResult {
            name: name.into(),
            passed: failures.is_empty(),
            checks,
            failures: failures.into_iter().take(20).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub level: Level,
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

/// Whether `reconstruct ∘ standard_rep` is the identity on `iface`.
pub fn bijection_failure(iface: &Interface, reconstruct: ReconstructFn) -> Option<String> {
    let rep = standard_rep(iface);
    match reconstruct(&rep) {
        Ok(back) if &back == iface => None,
        Ok(_) => Some(format!("round trip changed an interface with {} faces", iface.len())),
        Err(e) => Some(format!("round trip failed on an interface with {} faces: {e}", iface.len())),
    }
}

/// Excess-energy identities and cluster containment for every wall.
///
/// `𝔪(W)` is recomputed independently as the excess of the interface whose
/// only wall is the standardized `W`.
pub fn wall_identity_failures(iface: &Interface, deco: &WallDecomposition) -> Vec<String> {
    let mut out = Vec::new();
    let dims = iface.dims();
    if deco.total_excess() as i64 != excess_rel(iface, &Interface::flat(dims)) {
        out.push("wall excesses do not add up to the interface excess".into());
    }
    for (i, w) in deco.walls.iter().enumerate() {
        let m = excess_energy(w);
        let alone = standardize(w);
        let span = alone.faces.iter().map(|f| f.max_height().abs().max(f.min_height().abs())).max().unwrap_or(0);
        let tall = dims.with_min_height(2 * span as u32 + 2);
        match reconstruct(&StandardWallCollection::new(tall, vec![alone])) {
            Ok(j) if (j.len() - dims.num_columns()) as u64 == m => {}
            Ok(j) => out.push(format!("wall {i}: excess {m} but its lone interface has excess {}", j.len() - dims.num_columns())),
            Err(e) => out.push(format!("wall {i}: standardized wall does not reconstruct alone: {e}")),
        }
        if 2 * m < w.len() as u64 {
            out.push(format!("wall {i}: excess {m} below half of {} faces", w.len()));
        }
        if m < w.projection.len() as u64 {
            out.push(format!("wall {i}: excess {m} below projection size {}", w.projection.len()));
        }
        let hull: HashSet<ProjElement> = deco.hull_wall(i).into_iter().collect();
        for j in deco.wall_cluster(i).members {
            if !deco.walls[j].projection.iter().all(|e| hull.contains(e)) {
                out.push(format!("wall {i}: cluster member {j} leaves the hull"));
            }
        }
    }
    out
}

/// Shift-map properties for `Φ_k↑(I)`, with `I` read under the floor
/// `h = max(0, −min height)`.
pub fn shift_failures(iface: &Interface, k: u32) -> Vec<String> {
    let mut out = Vec::new();
    let s = shift_up(iface, k);
    if let Err(e) = spin_from_interface(&s) {
        out.push(format!("k={k}: image is not an interface: {e}"));
        return out;
    }
    let n = iface.dims().n.max(iface.dims().m) as i64;
    if excess_rel(&s, iface) > 4 * k as i64 * n {
        out.push(format!("k={k}: relative excess {} exceeds 4kn = {}", excess_rel(&s, iface), 4 * k as i64 * n));
    }
    let floor = (-iface.min_height()).max(0) as u32;
    debug_assert!(satisfies_floor(iface, floor));
    let band: HashSet<FaceId> = boundary_band(s.dims(), k).into_iter().collect();
    if let Some(f) = s.faces().iter().find(|f| !band.contains(f) && f.min_height() < k as i32 - floor as i32) {
        out.push(format!("k={k}: off-band face {f} below {}", k as i32 - floor as i32));
    }
    let (ceiling_faces, _) = classify_faces(&s);
    let image: HashSet<FaceId> = ceiling_faces.into_iter().collect();
    for c in decompose(iface).ceilings {
        if !c.faces.iter().all(|f| image.contains(&f.translate(0, 0, k as i32))) {
            out.push(format!("k={k}: shifted ceiling at height {} is not inside an image ceiling", c.height));
        }
    }
    out
}

/// Distinct interfaces of every configuration of a box.
pub fn all_interfaces(dims: BoxDims) -> Vec<Interface> {
    let set: BTreeSet<Interface> = (0..1u64 << dims.num_cells())
        .into_par_iter()
        .map(|b| extract_interface(&SpinConfig::from_bits(dims, b)))
        .collect();
    set.into_iter().collect()
}

/// Interfaces of random sparse perturbations of the ground state.
pub fn random_interfaces(dims: BoxDims, count: usize, seed: u64) -> Vec<Interface> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut c = SpinConfig::ground_state(dims);
            let flips = rng.random_range(0..3 * dims.num_columns().max(4));
            for _ in 0..flips {
                let x1 = rng.random_range(dims.x1_range());
                let x2 = rng.random_range(dims.x2_range());
                let x3 = rng.random_range(-2..2).clamp(*dims.x3_range().start(), *dims.x3_range().end());
                c.flip(CellId::new(x1, x2, x3)).expect("inside");
            }
            extract_interface(&c)
        })
        .collect()
}

/// Interfaces sampled from a Metropolis chain, one every `thin` steps.
pub fn sampled_interfaces(params: ModelParams, count: usize, thin: u64, seed: u64) -> Result<Vec<Interface>> {
    let g = SpinConfig::ground_state(params.dims);
    let mut chain = Chain::new(params, FloorConstraint::None, &g, seed, UpdateRule::Metropolis)?;
    chain.run(10 * thin);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        chain.run(thin);
        out.push(extract_interface(&chain.config()));
    }
    Ok(out)
}

/// Total-variation distance between the interface histogram of one chain and
/// the exact interface marginal. Every step is recorded, as a configuration,
/// and pushed forward to interfaces at the end.
pub fn sampler_oracle_tv(dims: BoxDims, beta: f64, constraint: FloorConstraint, steps: u64, seed: u64) -> Result<f64> {
    let exact = enumerate_configs(dims, beta, constraint)?;
    let params = ModelParams::new(dims, beta)?;
    let mut chain = Chain::new(params, constraint, &SpinConfig::ground_state(dims), seed, UpdateRule::Metropolis)?;
    let burn = (steps / 100).max(1000);
    chain.run(burn);
    let mut counts = vec![0u64; 1 << dims.num_cells()];
    for _ in 0..steps {
        chain.step();
        counts[chain.config_bits() as usize] += 1;
    }
    let mut emp: BTreeMap<Interface, f64> = BTreeMap::new();
    for (b, &c) in counts.iter().enumerate().filter(|(_, &c)| c > 0) {
        *emp.entry(extract_interface(&SpinConfig::from_bits(dims, b as u64))).or_default() += c as f64 / steps as f64;
    }
    Ok(total_variation(&exact.interface_marginal().as_map(), &emp))
}

fn suite_bijection(level: Level, reconstruct: ReconstructFn) -> SuiteResult {
    let boxes = match level {
        Level::Fast => vec![BoxDims::new(2, 2, 4).unwrap()],
        Level::Full => vec![BoxDims::new(2, 2, 4).unwrap(), BoxDims::new(3, 3, 2).unwrap()],
    };
    let mut checks = 0;
    let mut failures = Vec::new();
    for d in boxes {
        let f: Vec<String> = (0..1u64 << d.num_cells())
            .into_par_iter()
            .filter_map(|b| bijection_failure(&extract_interface(&SpinConfig::from_bits(d, b)), reconstruct))
            .collect();
        checks += 1u64 << d.num_cells();
        failures.extend(f);
    }
    SuiteResult::from_failures("bijection", checks, failures)
}

fn corpus(level: Level) -> Vec<Interface> {
    let mut out = all_interfaces(BoxDims::new(2, 2, 4).unwrap());
    let count = if level == Level::Fast { 150 } else { 1500 };
    out.extend(random_interfaces(BoxDims::new(6, 6, 6).unwrap(), count, 11));
    out.extend(random_interfaces(BoxDims::new(9, 9, 6).unwrap(), count / 3, 12));
    out
}

fn suite_walls(ifaces: &[Interface], reconstruct: ReconstructFn) -> SuiteResult {
    let failures: Vec<String> = ifaces
        .par_iter()
        .flat_map_iter(|i| {
            let mut f = wall_identity_failures(i, &decompose(i));
            f.extend(bijection_failure(i, reconstruct));
            f
        })
        .collect();
    SuiteResult::from_failures("wall-identities", ifaces.len() as u64, failures)
}

fn suite_shift(ifaces: &[Interface]) -> SuiteResult {
    let failures: Vec<String> =
        ifaces.par_iter().flat_map_iter(|i| (1..=3).flat_map(|k| shift_failures(i, k)).collect::<Vec<_>>()).collect();
    SuiteResult::from_failures("shift-map", 3 * ifaces.len() as u64, failures)
}

fn suite_enumeration(reconstruct: ReconstructFn) -> SuiteResult {
    let mut failures = Vec::new();
    let run = || -> Result<Vec<String>> {
        let mut f = Vec::new();
        let one = enumerate_standard_wall_collections(2, 2, 3)?;
        if one.len() != 1 {
            f.push(format!("cap 3: {} collections, expected 1", one.len()));
        }
        let nine = enumerate_standard_wall_collections(2, 2, 4)?;
        if nine.len() != 9 {
            f.push(format!("cap 4: {} collections, expected 9", nine.len()));
        }
        if combine_standard_walls(2, 2, 4)? != nine {
            f.push("cap 4: combining single walls gives a different list".into());
        }
        let mut seen = BTreeSet::new();
        for c in &nine {
            match reconstruct(c) {
                Ok(i) if spin_from_interface(&i).is_ok() => {
                    if !seen.insert(i) {
                        f.push("two collections reconstruct to one interface".into());
                    }
                }
                _ => f.push("a collection does not reconstruct to a valid interface".into()),
            }
        }
        Ok(f)
    };
    match run() {
        Ok(f) => failures.extend(f),
        Err(e) => failures.push(e.to_string()),
    }
    SuiteResult::from_failures("wall-enumeration", 4, failures)
}

fn suite_oracle(level: Level) -> SuiteResult {
    let steps = if level == Level::Fast { 1_000_000 } else { 10_000_000 };
    let d = BoxDims::new(2, 2, 2).unwrap();
    let mut cases = Vec::new();
    for beta in [0.3, 0.5, 1.0] {
        for c in [FloorConstraint::None, FloorConstraint::InterfaceConditioned(0), FloorConstraint::PlusBelow(0)] {
            cases.push((beta, c));
        }
    }
    let failures: Vec<String> = cases
        .par_iter()
        .enumerate()
        .filter_map(|(k, &(beta, c))| match sampler_oracle_tv(d, beta, c, steps, 100 + k as u64) {
            Ok(tv) if tv <= 0.02 => None,
            Ok(tv) => Some(format!("beta {beta}, {c}: TV {tv:.4} > 0.02")),
            Err(e) => Some(format!("beta {beta}, {c}: {e}")),
        })
        .collect();
    SuiteResult::from_failures("oracle-equivalence", cases.len() as u64, failures)
}

fn suite_sampler() -> SuiteResult {
    let mut failures = Vec::new();
    let mut checks = 0;
    let run = |failures: &mut Vec<String>, checks: &mut u64| -> Result<()> {
        // audits in every mode
        for c in [FloorConstraint::None, FloorConstraint::InterfaceConditioned(1), FloorConstraint::PlusBelow(1)] {
            let p = ModelParams::new(BoxDims::new(5, 5, 6)?, 0.7)?;
            let mut chain = Chain::new(p, c, &SpinConfig::ground_state(p.dims), 3, UpdateRule::Metropolis)?;
            for _ in 0..20 {
                chain.run(5_000);
                *checks += 1;
                if let Err(e) = chain.audit() {
                    failures.push(e.to_string());
                }
                if let FloorConstraint::PlusBelow(h) = c {
                    if !satisfies_floor(&extract_interface(&chain.config()), h) {
                        failures.push("plus-below sample violates the interface floor".into());
                    }
                }
            }
        }
        // every feasible configuration is reached at infinite temperature
        let d = BoxDims::new(2, 2, 2)?;
        for c in [FloorConstraint::InterfaceConditioned(0), FloorConstraint::PlusBelow(0)] {
            let support = enumerate_configs(d, 0.0, c)?.support_size();
            let p = ModelParams::new(d, 0.0)?;
            let mut chain = Chain::new(p, c, &SpinConfig::ground_state(d), 9, UpdateRule::Metropolis)?;
            let mut seen = HashSet::new();
            for _ in 0..200_000 {
                chain.step();
                seen.insert(chain.config_bits());
            }
            *checks += 1;
            if seen.len() != support {
                failures.push(format!("{c}: visited {} of {support} feasible configurations", seen.len()));
            }
        }
        Ok(())
    };
    if let Err(e) = run(&mut failures, &mut checks) {
        failures.push(e.to_string());
    }
    SuiteResult::from_failures("sampler-invariants", checks, failures)
}

pub fn validate(level: Level) -> ValidationReport {
    validate_with(level, reconstruct)
}

pub fn validate_with(level: Level, reconstruct: ReconstructFn) -> ValidationReport {
    let ifaces = corpus(level);
    let suites = vec![
        suite_bijection(level, reconstruct),
        suite_walls(&ifaces, reconstruct),
        suite_enumeration(reconstruct),
        suite_shift(&ifaces),
        suite_sampler(),
        suite_oracle(level),
    ];
    ValidationReport { level, passed: suites.iter().all(|s| s.passed), suites }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn broken(c: &StandardWallCollection) -> Result<Interface> {
        let i = reconstruct(c)?;
        // drops a face whenever there is a wall
        if c.walls.is_empty() {
            return Ok(i);
        }
        let mut faces = i.into_faces();
        faces.pop();
        Ok(Interface::from_faces(c.dims, faces))
    }

    #[test]
    fn bijection_suite_catches_mutation() {
        assert!(suite_bijection(Level::Fast, reconstruct).passed);
        let r = suite_bijection(Level::Fast, broken);
        assert!(!r.passed && !r.failures.is_empty());
        assert!(!suite_enumeration(broken).passed);
    }

    #[test]
    fn property_suites_pass() {
        let ifaces = random_interfaces(BoxDims::new(6, 6, 6).unwrap(), 40, 3);
        assert!(suite_walls(&ifaces, reconstruct).passed);
        assert!(suite_shift(&ifaces).passed);
        assert!(suite_enumeration(reconstruct).passed);
    }

    #[test]
    fn tv_small_on_short_chain() {
        let d = BoxDims::new(2, 2, 2).unwrap();
        let tv = sampler_oracle_tv(d, 0.5, FloorConstraint::InterfaceConditioned(0), 400_000, 1).unwrap();
        assert!(tv < 0.03, "{tv}");
    }
}
