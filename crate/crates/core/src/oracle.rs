//! Exhaustive enumeration on tiny boxes: exact Gibbs distributions, their
//! interface marginals, and the admissible standard wall collections of
//! bounded excess energy on a small base.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{Axis, BoxDims};
use crate::interface::{extract_interface, Interface};
use crate::sampler::FloorConstraint;
use crate::spin::{dobrushin_spin, SpinConfig};
use crate::walls::{admissible, reconstruct, standard_rep, StandardWallCollection};

pub const MAX_ORACLE_CELLS: usize = 24;
pub const MAX_WALL_CAP: u32 = 10;

/// Energy of a configuration given as a bit pattern, via popcounts.
#[derive(Clone, Debug)]
pub struct BitEnergy {
    all: u64,
    pairs: Vec<(u32, u64)>,
    plus_cost: Vec<u64>,
    minus_cost: Vec<u64>,
}

impl BitEnergy {
    pub fn new(dims: BoxDims) -> Result<Self> {
        let cells = dims.num_cells();
        if cells > MAX_ORACLE_CELLS {
            return Err(Error::OracleTooLarge(format!("{cells} cells exceeds the limit of {MAX_ORACLE_CELLS}")));
        }
        let all = if cells == 64 { u64::MAX } else { (1u64 << cells) - 1 };
        let strides = [1u32, dims.n, dims.n * dims.m];
        let mut pairs = Vec::new();
        for (k, axis) in Axis::ALL.into_iter().enumerate() {
            let mut mask = 0u64;
            for i in 0..cells {
                if dims.contains(dims.cell_at(i).offset(axis, 1)) {
                    mask |= 1 << i;
                }
            }
            pairs.push((strides[k], mask));
        }
        // out-of-box neighbours disagreeing with a plus (resp. minus) cell
        let mut plus_cost = vec![0u64; 6];
        let mut minus_cost = vec![0u64; 6];
        for i in 0..cells {
            let c = dims.cell_at(i);
            let outside = c.neighbors().into_iter().filter(|&nb| !dims.contains(nb));
            let (mut p, mut q) = (0, 0);
            for nb in outside {
                if dobrushin_spin(nb) < 0 {
                    p += 1;
                } else {
                    q += 1;
                }
            }
            for k in 0..p {
                plus_cost[k] |= 1 << i;
            }
            for k in 0..q {
                minus_cost[k] |= 1 << i;
            }
        }
        Ok(BitEnergy { all, pairs, plus_cost, minus_cost })
    }

    #[inline]
    pub fn energy(&self, bits: u64) -> u32 {
        let mut e = 0;
        for &(s, mask) in &self.pairs {
            e += ((bits ^ (bits >> s)) & mask).count_ones();
        }
        let minus = !bits & self.all;
        for k in 0..6 {
            e += (bits & self.plus_cost[k]).count_ones() + (minus & self.minus_cost[k]).count_ones();
        }
        e
    }
}

/// Exact Gibbs distribution over every configuration of a tiny box,
/// indexed by the bit pattern of [`SpinConfig::to_bits`].
#[derive(Clone, Debug)]
pub struct ExactDistribution {
    pub dims: BoxDims,
    pub beta: f64,
    pub constraint: FloorConstraint,
    /// `ln Z` over the feasible set.
    pub log_partition: f64,
    weights: Vec<f64>,
}

pub fn enumerate_configs(dims: BoxDims, beta: f64, constraint: FloorConstraint) -> Result<ExactDistribution> {
    dims.validate()?;
    let table = BitEnergy::new(dims)?;
    let total = 1u64 << dims.num_cells();
    let energies: Vec<Option<u32>> = (0..total)
        .into_par_iter()
        .map(|bits| {
            let ok = match constraint {
                FloorConstraint::None => true,
                _ => constraint.admits(&SpinConfig::from_bits(dims, bits)),
            };
            ok.then(|| table.energy(bits))
        })
        .collect();
    let ground = energies.iter().flatten().copied().min().ok_or_else(|| Error::Infeasible("empty support".into()))?;
    let mut weights: Vec<f64> = energies
        .par_iter()
        .map(|e| e.map_or(0.0, |e| (-beta * (e - ground) as f64).exp()))
        .collect();
    let z: f64 = weights.par_iter().sum();
    weights.par_iter_mut().for_each(|w| *w /= z);
    Ok(ExactDistribution { dims, beta, constraint, log_partition: z.ln() - beta * ground as f64, weights })
}

impl ExactDistribution {
    pub fn probability(&self, bits: u64) -> f64 {
        self.weights.get(bits as usize).copied().unwrap_or(0.0)
    }

    /// Configurations of positive weight.
    pub fn support(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.weights.iter().enumerate().filter(|(_, &w)| w > 0.0).map(|(b, &w)| (b as u64, w))
    }

    pub fn support_size(&self) -> usize {
        self.weights.iter().filter(|&&w| w > 0.0).count()
    }

    pub fn event_probability<F>(&self, event: F) -> f64
    where
        F: Fn(&SpinConfig) -> bool + Sync,
    {
        self.weights
            .par_iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(b, &w)| if event(&SpinConfig::from_bits(self.dims, b as u64)) { w } else { 0.0 })
            .sum()
    }

    /// Pushes the distribution forward to interfaces.
    pub fn interface_marginal(&self) -> InterfaceDistribution {
        let mut map: BTreeMap<Interface, f64> = BTreeMap::new();
        for (bits, w) in self.support() {
            *map.entry(extract_interface(&SpinConfig::from_bits(self.dims, bits))).or_default() += w;
        }
        InterfaceDistribution {
            dims: self.dims,
            beta: self.beta,
            constraint: self.constraint,
            log_partition: self.log_partition,
            entries: map.into_iter().collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterfaceDistribution {
    pub dims: BoxDims,
    pub beta: f64,
    pub constraint: FloorConstraint,
    pub log_partition: f64,
    /// Sorted by interface.
    pub entries: Vec<(Interface, f64)>,
}

impl InterfaceDistribution {
    pub fn probability(&self, iface: &Interface) -> f64 {
        self.entries
            .binary_search_by(|(i, _)| i.cmp(iface))
            .map_or(0.0, |k| self.entries[k].1)
    }

    pub fn as_map(&self) -> BTreeMap<Interface, f64> {
        self.entries.iter().cloned().collect()
    }

    /// Total-variation distance to an empirical histogram of interfaces.
    pub fn tv_to_counts(&self, counts: &BTreeMap<Interface, u64>) -> f64 {
        let n: u64 = counts.values().sum();
        let emp: BTreeMap<Interface, f64> =
            counts.iter().map(|(k, &c)| (k.clone(), c as f64 / n.max(1) as f64)).collect();
        total_variation(&self.as_map(), &emp)
    }

    /// Largest `|ln(P(I)/P(flat)) + β 𝔪(I)| / 𝔪(I)` over interfaces of positive
    /// excess: how far the exact measure strays from a bare Peierls weight.
    pub fn peierls_constant(&self) -> Option<f64> {
        let flat = self.probability(&Interface::flat(self.dims));
        if flat <= 0.0 {
            return None;
        }
        let base = self.dims.num_columns() as f64;
        self.entries
            .iter()
            .filter(|(i, p)| *p > 0.0 && i.len() as f64 > base)
            .map(|(i, p)| {
                let excess = i.len() as f64 - base;
                ((p / flat).ln() + self.beta * excess).abs() / excess
            })
            .reduce(f64::max)
    }
}

/// `½ Σ |p − q|` over the union of supports.
pub fn total_variation<K: Ord>(p: &BTreeMap<K, f64>, q: &BTreeMap<K, f64>) -> f64 {
    let mut sum = 0.0;
    for (k, a) in p {
        sum += (a - q.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, b) in q {
        if !p.contains_key(k) {
            sum += b.abs();
        }
    }
    sum / 2.0
}

#[derive(Serialize)]
struct CacheKey<'a> {
    dims: BoxDims,
    beta: f64,
    constraint: FloorConstraint,
    version: &'a str,
}

fn cache_file(dims: BoxDims, beta: f64, constraint: FloorConstraint) -> String {
    let key = CacheKey { dims, beta, constraint, version: env!("CARGO_PKG_VERSION") };
    let digest = Sha256::digest(serde_json::to_vec(&key).expect("key serializes"));
    format!("oracle-{}.json", &hex::encode(digest)[..16])
}

/// Interface marginal, read from `dir` when present and written there otherwise.
pub fn cached_interface_marginal(
    dir: &Path,
    dims: BoxDims,
    beta: f64,
    constraint: FloorConstraint,
) -> Result<InterfaceDistribution> {
    let path = dir.join(cache_file(dims, beta, constraint));
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(d) = serde_json::from_str::<InterfaceDistribution>(&text) {
            if d.dims == dims && d.beta == beta && d.constraint == constraint {
                return Ok(d);
            }
        }
    }
    let d = enumerate_configs(dims, beta, constraint)?.interface_marginal();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let text = serde_json::to_string(&d).expect("distribution serializes");
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(d)
}

/// Box used for wall enumeration on an `n × m` base: tall enough for every
/// interface of excess at most `cap`.
pub fn wall_box(n: u32, m: u32, cap: u32) -> Result<BoxDims> {
    BoxDims::new(n, m, 2 * (cap / 4) + 2)
}

/// Every interface on an `n × m` base with excess energy at most `cap`.
///
/// Each layer of the cells flipped from the ground state contributes its
/// planar perimeter `≥ 4√k` to the excess, so heights stay within `±⌊cap/4⌋`
/// and at most `⌊cap/4⌋²` cells flip.
pub fn enumerate_low_excess_interfaces(n: u32, m: u32, cap: u32) -> Result<Vec<Interface>> {
    if cap > MAX_WALL_CAP {
        return Err(Error::OracleTooLarge(format!("excess cap {cap} exceeds {MAX_WALL_CAP}")));
    }
    let dims = wall_box(n, m, cap)?;
    let t = (cap / 4) as i32;
    let cand: Vec<_> = (0..dims.num_cells()).map(|i| dims.cell_at(i)).filter(|c| (-t..t).contains(&c.x3)).collect();
    let max_flips = ((cap / 4) * (cap / 4)) as usize;
    let base = dims.num_columns() + cap as usize;
    let ground = SpinConfig::ground_state(dims);
    let mut found = BTreeSet::new();
    let mut chosen = Vec::new();
    fn rec(
        start: usize,
        cand: &[crate::geometry::CellId],
        max_flips: usize,
        chosen: &mut Vec<usize>,
        ground: &SpinConfig,
        limit: usize,
        found: &mut BTreeSet<Interface>,
    ) {
        let mut cfg = ground.clone();
        for &k in chosen.iter() {
            cfg.flip(cand[k]).expect("candidate inside box");
        }
        let iface = extract_interface(&cfg);
        if iface.len() <= limit && crate::spin::separating_faces(&cfg).len() == iface.len() {
            found.insert(iface);
        }
        if chosen.len() == max_flips {
            return;
        }
        for k in start..cand.len() {
            chosen.push(k);
            rec(k + 1, cand, max_flips, chosen, ground, limit, found);
            chosen.pop();
        }
    }
    rec(0, &cand, max_flips, &mut chosen, &ground, base, &mut found);
    Ok(found.into_iter().collect())
}

/// Admissible standard wall collections of total excess at most `cap`,
/// obtained as the standard representations of all low-excess interfaces.
pub fn enumerate_standard_wall_collections(n: u32, m: u32, cap: u32) -> Result<Vec<StandardWallCollection>> {
    let mut out: Vec<_> = enumerate_low_excess_interfaces(n, m, cap)?.iter().map(standard_rep).collect();
    out.sort();
    out.dedup();
    Ok(out)
}

/// Independent route to the same list: all admissible combinations of the
/// single standard walls, filtered by total excess and reconstructibility.
pub fn combine_standard_walls(n: u32, m: u32, cap: u32) -> Result<Vec<StandardWallCollection>> {
    let dims = wall_box(n, m, cap)?;
    let mut singles: Vec<_> = enumerate_standard_wall_collections(n, m, cap)?
        .into_iter()
        .filter(|c| c.walls.len() == 1)
        .map(|mut c| c.walls.pop().expect("one wall"))
        .collect();
    singles.sort();
    singles.dedup();
    let mut out = Vec::new();
    let mut stack = Vec::new();
    fn rec(
        start: usize,
        singles: &[crate::walls::Wall],
        dims: BoxDims,
        budget: u64,
        stack: &mut Vec<crate::walls::Wall>,
        out: &mut Vec<StandardWallCollection>,
    ) {
        let coll = StandardWallCollection::new(dims, stack.clone());
        if !admissible(&coll) {
            return;
        }
        if reconstruct(&coll).is_ok() {
            out.push(coll);
        }
        for k in start..singles.len() {
            let m = crate::walls::excess_energy(&singles[k]);
            if m <= budget {
                stack.push(singles[k].clone());
                rec(k + 1, singles, dims, budget - m, stack, out);
                stack.pop();
            }
        }
    }
    rec(0, &singles, dims, cap as u64, &mut stack, &mut out);
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CellId;
    use crate::spin::hamiltonian;

    #[test]
    fn bit_energy_matches_hamiltonian() {
        for d in [BoxDims::new(2, 2, 2).unwrap(), BoxDims::new(1, 3, 4).unwrap(), BoxDims::new(3, 2, 2).unwrap()] {
            let t = BitEnergy::new(d).unwrap();
            for bits in 0..1u64 << d.num_cells() {
                assert_eq!(t.energy(bits) as u64, hamiltonian(&SpinConfig::from_bits(d, bits)));
            }
        }
        assert!(matches!(BitEnergy::new(BoxDims::new(3, 3, 4).unwrap()), Err(Error::OracleTooLarge(_))));
    }

    #[test]
    fn infinite_temperature_is_uniform() {
        let d = BoxDims::new(1, 1, 2).unwrap();
        let e = enumerate_configs(d, 0.0, FloorConstraint::None).unwrap();
        assert_eq!(e.support_size(), 4);
        for (_, w) in e.support() {
            assert!((w - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn ground_state_mass_grows_with_beta() {
        let d = BoxDims::new(2, 2, 2).unwrap();
        let g = SpinConfig::ground_state(d).to_bits();
        let masses: Vec<f64> =
            [1.0, 2.0, 3.0].iter().map(|&b| enumerate_configs(d, b, FloorConstraint::None).unwrap().probability(g)).collect();
        assert!(masses[0] < masses[1] && masses[1] < masses[2] && masses[2] < 1.0);
        // direct computation of Z at beta = 3 from the energy spectrum
        let t = BitEnergy::new(d).unwrap();
        let z: f64 = (0..256u64).map(|b| (-3.0 * t.energy(b) as f64).exp()).sum();
        assert!((masses[2] / ((-3.0 * 4.0f64).exp() / z) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weights_normalize_and_events() {
        let d = BoxDims::new(2, 2, 2).unwrap();
        for c in [FloorConstraint::None, FloorConstraint::InterfaceConditioned(0), FloorConstraint::PlusBelow(0)] {
            let e = enumerate_configs(d, 0.7, c).unwrap();
            assert!((e.support().map(|(_, w)| w).sum::<f64>() - 1.0).abs() < 1e-12);
            assert!((e.event_probability(|_| true) - 1.0).abs() < 1e-12);
            let flat = Interface::flat(d);
            let p = e.event_probability(|s| extract_interface(s) == flat);
            let q = e.event_probability(|s| extract_interface(s) != flat);
            assert!((p + q - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn plus_at_center_regression() {
        let d = BoxDims::new(2, 2, 2).unwrap();
        let e = enumerate_configs(d, 1.0, FloorConstraint::None).unwrap();
        let c = CellId::new(0, 0, 0);
        let p = e.event_probability(|s| s.get(c) > 0);
        // independent sum over the energy spectrum
        let t = BitEnergy::new(d).unwrap();
        let i = d.cell_index(c).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for b in 0..256u64 {
            let w = (-(t.energy(b) as f64)).exp();
            den += w;
            if b >> i & 1 == 1 {
                num += w;
            }
        }
        assert!((p - num / den).abs() < 1e-14);
        assert!((p - 0.022_435_249_639_791).abs() < 1e-12, "{p}");
    }

    #[test]
    fn interface_floor_support() {
        let d = BoxDims::new(2, 2, 2).unwrap();
        let free = enumerate_configs(d, 0.5, FloorConstraint::None).unwrap();
        let cond = enumerate_configs(d, 0.5, FloorConstraint::InterfaceConditioned(0)).unwrap();
        for b in 0..256u64 {
            let dips = extract_interface(&SpinConfig::from_bits(d, b)).min_height() < 0;
            assert_eq!(cond.probability(b) > 0.0, !dips);
            if !dips {
                let ratio = cond.probability(b) / free.probability(b);
                assert!((ratio - (-cond.log_partition + free.log_partition).exp()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn marginal_matches_direct_grouping() {
        let d = BoxDims::new(2, 2, 2).unwrap();
        let e = enumerate_configs(d, 0.5, FloorConstraint::None).unwrap();
        let m = e.interface_marginal();
        let mut direct: BTreeMap<Interface, f64> = BTreeMap::new();
        let mut z = 0.0;
        for b in 0..256u64 {
            let s = SpinConfig::from_bits(d, b);
            let w = (-0.5 * hamiltonian(&s) as f64).exp();
            z += w;
            *direct.entry(extract_interface(&s)).or_default() += w;
        }
        direct.values_mut().for_each(|w| *w /= z);
        assert!(total_variation(&m.as_map(), &direct) < 1e-12);
        assert!(m.peierls_constant().unwrap().is_finite());
    }

    #[test]
    fn cache_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let d = BoxDims::new(2, 2, 2).unwrap();
        let a = cached_interface_marginal(dir.path(), d, 0.3, FloorConstraint::PlusBelow(0)).unwrap();
        let b = cached_interface_marginal(dir.path(), d, 0.3, FloorConstraint::PlusBelow(0)).unwrap();
        assert_eq!(a.entries.len(), b.entries.len());
        for ((i, p), (j, q)) in a.entries.iter().zip(&b.entries) {
            assert_eq!(i, j);
            assert!((p - q).abs() < 1e-15);
        }
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn wall_collections_on_small_base() {
        assert_eq!(enumerate_standard_wall_collections(2, 2, 3).unwrap().len(), 1);
        let nine = enumerate_standard_wall_collections(2, 2, 4).unwrap();
        assert_eq!(nine.len(), 9);
        assert_eq!(combine_standard_walls(2, 2, 4).unwrap(), nine);
        let ifaces: BTreeSet<_> = nine.iter().map(|c| reconstruct(c).unwrap()).collect();
        assert_eq!(ifaces.len(), 9);
        assert!(enumerate_standard_wall_collections(2, 2, 11).is_err());
    }

    #[test]
    fn wall_collections_larger_cap() {
        let direct = enumerate_standard_wall_collections(2, 2, 6).unwrap();
        assert_eq!(combine_standard_walls(2, 2, 6).unwrap(), direct);
        for c in &direct {
            assert!(c.total_excess() <= 6);
            assert_eq!(&standard_rep(&reconstruct(c).unwrap()), c);
        }
    }
}
