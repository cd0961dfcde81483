//! Per-sample interface statistics.
//!
//! A column `(x1, x2)` is read through its trace: the horizontal interface
//! faces on the vertical line through its centre, plus the vertical faces
//! standing on its four boundary edges. It is a singleton when the trace is a
//! single horizontal face.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::geometry::{BoxDims, ProjElement};
use crate::interface::Interface;
use crate::walls::{isodim_at_most, WallDecomposition};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnClass {
    SingletonAtZero,
    SingletonAt(i32),
    NonSingleton,
}

/// Column traces of an interface, indexed like [`BoxDims::column_index`].
#[derive(Clone, Debug)]
pub struct ColumnTraces {
    dims: BoxDims,
    horizontal: Vec<Vec<i32>>,
    walled: Vec<bool>,
}

impl ColumnTraces {
    pub fn new(iface: &Interface) -> Self {
        let dims = iface.dims();
        let mut horizontal = vec![Vec::new(); dims.num_columns()];
        let mut walled = vec![false; dims.num_columns()];
        for f in iface.faces() {
            match f.project() {
                ProjElement::Face { x1, x2 } => {
                    if let Some(c) = dims.column_index(x1, x2) {
                        horizontal[c].push(f.max_height());
                    }
                }
                e @ ProjElement::Edge { .. } => {
                    for (x1, x2) in edge_columns(e) {
                        if let Some(c) = dims.column_index(x1, x2) {
                            walled[c] = true;
                        }
                    }
                }
            }
        }
        ColumnTraces { dims, horizontal, walled }
    }

    pub fn class(&self, c: usize) -> ColumnClass {
        match (self.walled[c], self.horizontal[c].as_slice()) {
            (false, [0]) => ColumnClass::SingletonAtZero,
            (false, &[y]) => ColumnClass::SingletonAt(y),
            _ => ColumnClass::NonSingleton,
        }
    }

    pub fn classes(&self) -> impl Iterator<Item = ColumnClass> + '_ {
        (0..self.dims.num_columns()).map(|c| self.class(c))
    }
}

/// The two columns sharing a plane edge.
fn edge_columns(e: ProjElement) -> [(i32, i32); 2] {
    match e {
        ProjElement::Edge { x1, x2, dir: crate::geometry::EdgeDir::X } => [(x1, x2), (x1, x2 - 1)],
        ProjElement::Edge { x1, x2, dir: crate::geometry::EdgeDir::Y } => [(x1, x2), (x1 - 1, x2)],
        ProjElement::Face { x1, x2 } => [(x1, x2), (x1, x2)],
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeightHistogram {
    /// Horizontal interface faces per height.
    pub by_height: BTreeMap<i32, u64>,
    pub singleton_at_zero: u64,
    pub singleton_elsewhere: u64,
    pub non_singleton: u64,
}

impl HeightHistogram {
    pub fn columns(&self) -> u64 {
        self.singleton_at_zero + self.singleton_elsewhere + self.non_singleton
    }

    pub fn horizontal_faces(&self) -> u64 {
        self.by_height.values().sum()
    }

    /// Mean height of the horizontal faces.
    pub fn mean_height(&self) -> f64 {
        let n = self.horizontal_faces();
        if n == 0 {
            return 0.0;
        }
        self.by_height.iter().map(|(&h, &c)| h as f64 * c as f64).sum::<f64>() / n as f64
    }

    pub fn zero_fraction(&self) -> f64 {
        self.singleton_at_zero as f64 / self.columns().max(1) as f64
    }
}

pub fn height_histogram(iface: &Interface) -> HeightHistogram {
    let mut out = HeightHistogram::default();
    for f in iface.faces().iter().filter(|f| f.is_horizontal()) {
        *out.by_height.entry(f.max_height()).or_default() += 1;
    }
    for class in ColumnTraces::new(iface).classes() {
        match class {
            ColumnClass::SingletonAtZero => out.singleton_at_zero += 1,
            ColumnClass::SingletonAt(_) => out.singleton_elsewhere += 1,
            ColumnClass::NonSingleton => out.non_singleton += 1,
        }
    }
    out
}

/// Interface faces with a point strictly below `threshold`.
pub fn faces_below(iface: &Interface, threshold: i32) -> u64 {
    iface.faces().iter().filter(|f| f.min_height() < threshold).count() as u64
}

/// Threshold `h* − h − k` of the repelled-site set.
pub fn repulsion_threshold(h_star: u32, floor_h: u32, k: u32) -> i32 {
    h_star as i32 - floor_h as i32 - k as i32
}

/// Columns whose trace reaches below `h* − h − k` or is not a singleton.
pub fn repelled_sites(iface: &Interface, h_star: u32, floor_h: u32, k: u32) -> u64 {
    let t = repulsion_threshold(h_star, floor_h, k);
    ColumnTraces::new(iface)
        .classes()
        .filter(|c| match *c {
            ColumnClass::SingletonAtZero => 0 < t,
            ColumnClass::SingletonAt(y) => y < t,
            ColumnClass::NonSingleton => true,
        })
        .count() as u64
}

/// Columns whose trace is anything other than the single face at height 0.
pub fn nonzero_sites(iface: &Interface) -> u64 {
    ColumnTraces::new(iface).classes().filter(|&c| c != ColumnClass::SingletonAtZero).count() as u64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CeilingInfo {
    pub height: i32,
    pub area: usize,
    pub hull_area: usize,
    /// Area at least the requested threshold.
    pub large: bool,
    /// For large ceilings: whether the hull has isoperimetric dimension above `d`.
    pub isodim_exceeds: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CeilingProfile {
    pub by_height: BTreeMap<i32, usize>,
    pub ceilings: Vec<CeilingInfo>,
}

pub fn ceiling_area_profile(deco: &WallDecomposition, area_threshold: usize, d: f64) -> CeilingProfile {
    let mut ceilings = Vec::with_capacity(deco.ceilings.len());
    for (k, c) in deco.ceilings.iter().enumerate() {
        let hull: HashSet<(i32, i32)> = deco.hull_ceiling(k).into_iter().collect();
        let large = c.area() >= area_threshold;
        let isodim_exceeds = if large { isodim_at_most(&hull, d).ok().map(|ok| !ok) } else { None };
        ceilings.push(CeilingInfo { height: c.height, area: c.area(), hull_area: hull.len(), large, isodim_exceeds });
    }
    CeilingProfile { by_height: deco.area_by_height(), ceilings }
}

/// Total excess energy of all walls.
pub fn wall_face_budget(deco: &WallDecomposition) -> u64 {
    deco.total_excess()
}

/// The reference line `e^{−2β} n m` against which the wall budget is read.
pub fn wall_budget_line(dims: BoxDims, beta: f64) -> f64 {
    (-2.0 * beta).exp() * dims.num_columns() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillationStats {
    pub up: i32,
    pub down: i32,
    pub up_centered: i32,
    pub down_centered: i32,
}

/// Highest and lowest horizontal faces over the columns of `region`,
/// also relative to `reference`. `None` when no horizontal face lies there.
pub fn oscillation(iface: &Interface, region: &HashSet<(i32, i32)>, reference: i32) -> Option<OscillationStats> {
    let heights: Vec<i32> = iface
        .faces()
        .iter()
        .filter(|f| f.is_horizontal() && region.contains(&(f.anchor.x1, f.anchor.x2)))
        .map(|f| f.max_height())
        .collect();
    let up = *heights.iter().max()?;
    let down = *heights.iter().min()?;
    Some(OscillationStats { up, down, up_centered: up - reference, down_centered: down - reference })
}

/// The per-record numbers written to observable streams.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleObservables {
    pub zero_fraction: f64,
    pub mean_height: f64,
    pub min_height: i32,
    pub max_height: i32,
    pub interface_faces: u64,
    pub nonzero_sites: u64,
    pub repelled_sites: Option<u64>,
    pub wall_excess: u64,
}

/// Everything in [`SampleObservables`]; `repelled` carries `(h*, floor, k)`.
pub fn sample_observables(iface: &Interface, repelled: Option<(u32, u32, u32)>) -> SampleObservables {
    let hist = height_histogram(iface);
    SampleObservables {
        zero_fraction: hist.zero_fraction(),
        mean_height: hist.mean_height(),
        min_height: iface.min_height(),
        max_height: iface.max_height(),
        interface_faces: iface.len() as u64,
        nonzero_sites: hist.columns() - hist.singleton_at_zero,
        repelled_sites: repelled.map(|(hs, fh, k)| repelled_sites(iface, hs, fh, k)),
        wall_excess: iface.len() as u64 - iface.dims().num_columns() as u64,
    }
}

/// Column counts of each class, summed over samples.
pub fn merge_histograms<'a>(hs: impl IntoIterator<Item = &'a HeightHistogram>) -> HeightHistogram {
    let mut out = HeightHistogram::default();
    for h in hs {
        for (&k, &v) in &h.by_height {
            *out.by_height.entry(k).or_default() += v;
        }
        out.singleton_at_zero += h.singleton_at_zero;
        out.singleton_elsewhere += h.singleton_elsewhere;
        out.non_singleton += h.non_singleton;
    }
    out
}

/// Brute-force column trace: every face meeting the closed column, kept
/// when it is horizontal through the centre line or vertical on the boundary.
pub fn column_trace_reference(iface: &Interface, x1: i32, x2: i32) -> Vec<crate::geometry::FaceId> {
    let (cx, cy) = (2 * x1 + 1, 2 * x2 + 1);
    iface
        .faces()
        .iter()
        .copied()
        .filter(|f| {
            let v = f.vertices();
            let xs = v.iter().map(|p| 2 * p[0]);
            let ys = v.iter().map(|p| 2 * p[1]);
            let (xmin, xmax) = (xs.clone().min().unwrap(), xs.max().unwrap());
            let (ymin, ymax) = (ys.clone().min().unwrap(), ys.max().unwrap());
            if f.is_horizontal() {
                xmin < cx && cx < xmax && ymin < cy && cy < ymax
            } else {
                let on_x_side = xmin == xmax && (xmin == cx - 1 || xmin == cx + 1) && ymin == cy - 1 && ymax == cy + 1;
                let on_y_side = ymin == ymax && (ymin == cy - 1 || ymin == cy + 1) && xmin == cx - 1 && xmax == cx + 1;
                on_x_side || on_y_side
            }
        })
        .collect()
}

/// Count of horizontal faces per column, for callers that need raw traces.
pub fn horizontal_counts(iface: &Interface) -> HashMap<(i32, i32), usize> {
    let mut out = HashMap::new();
    for f in iface.faces().iter().filter(|f| f.is_horizontal()) {
        *out.entry((f.anchor.x1, f.anchor.x2)).or_default() += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CellId;
    use crate::interface::extract_interface;
    use crate::spin::SpinConfig;
    use crate::walls::{decompose, shift_up};
    use proptest::prelude::*;

    fn dims(n: u32) -> BoxDims {
        BoxDims::new(n, n, 6).unwrap()
    }

    fn bump(d: BoxDims, at: (i32, i32)) -> Interface {
        extract_interface(&SpinConfig::ground_state(d).flipped(CellId::new(at.0, at.1, 0)).unwrap())
    }

    #[test]
    fn flat_histogram() {
        let d = dims(4);
        let h = height_histogram(&Interface::flat(d));
        assert_eq!(h.by_height, BTreeMap::from([(0, 16)]));
        assert_eq!((h.singleton_at_zero, h.singleton_elsewhere, h.non_singleton), (16, 0, 0));
        assert_eq!(h.zero_fraction(), 1.0);
        assert_eq!(nonzero_sites(&Interface::flat(d)), 0);
    }

    #[test]
    fn bump_histogram_and_sites() {
        let d = dims(5);
        let i = bump(d, (0, 0));
        let h = height_histogram(&i);
        assert_eq!(h.by_height, BTreeMap::from([(0, 24), (1, 1)]));
        // the bump column and its four neighbours see the bump's side faces
        assert_eq!(h.non_singleton, 5);
        assert_eq!(nonzero_sites(&i), 5);
        assert_eq!(repelled_sites(&i, 0, 0, 0), 5);
        // at the box corner only two neighbours are inside
        assert_eq!(nonzero_sites(&bump(d, (-2, -2))), 3);
    }

    #[test]
    fn shifted_histogram() {
        let d = dims(4);
        let s = shift_up(&Interface::flat(d), 2);
        let h = height_histogram(&s);
        assert_eq!(h.by_height, BTreeMap::from([(2, 16)]));
        assert_eq!(nonzero_sites(&shift_up(&Interface::flat(d), 1)), 16);
        assert_eq!(h.mean_height(), 2.0);
    }

    #[test]
    fn repelled_threshold_examples() {
        let d = dims(4);
        let flat = Interface::flat(d);
        assert_eq!(repelled_sites(&flat, 3, 1, 2), 0);
        assert_eq!(repelled_sites(&flat, 2, 1, 3), 0);
        assert_eq!(repelled_sites(&flat, 4, 1, 2), 16);
    }

    #[test]
    fn ceiling_profile_and_budget() {
        let d = dims(5);
        let flat = Interface::flat(d);
        let deco = decompose(&flat);
        let p = ceiling_area_profile(&deco, 4, 2.0);
        assert_eq!(p.by_height, BTreeMap::from([(0, 25)]));
        assert_eq!(wall_face_budget(&deco), 0);
        let b = decompose(&bump(d, (0, 0)));
        assert_eq!(ceiling_area_profile(&b, 4, 2.0).by_height, BTreeMap::from([(0, 24), (1, 1)]));
        assert_eq!(wall_face_budget(&b), 4);
        // far-apart bumps add up
        let d = dims(9);
        let mut c = SpinConfig::ground_state(d);
        c.flip(CellId::new(-3, -3, 0)).unwrap();
        c.flip(CellId::new(3, 3, 0)).unwrap();
        assert_eq!(wall_face_budget(&decompose(&extract_interface(&c))), 8);
        assert!((wall_budget_line(d, 1.0) - 81.0 * (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn oscillation_on_bump() {
        let d = dims(5);
        let i = bump(d, (0, 0));
        let all: HashSet<_> = d.columns().collect();
        let o = oscillation(&i, &all, 0).unwrap();
        assert_eq!((o.up, o.down), (1, 0));
        let o = oscillation(&i, &all, 1).unwrap();
        assert_eq!((o.up_centered, o.down_centered), (0, -1));
        assert!(oscillation(&i, &HashSet::from([(9, 9)]), 0).is_none());
    }

    fn random_interface(d: BoxDims, cells: &[(i32, i32, i32)]) -> Interface {
        let mut c = SpinConfig::ground_state(d);
        for &(a, b, z) in cells {
            c.flip(CellId::new(a, b, z)).unwrap();
        }
        extract_interface(&c)
    }

    proptest! {
        #[test]
        fn traces_match_brute_force(cells in prop::collection::vec((-2i32..2, -2i32..2, -2i32..2), 0..12)) {
            let d = BoxDims::new(4, 4, 4).unwrap();
            let i = random_interface(d, &cells);
            let t = ColumnTraces::new(&i);
            let hist = height_histogram(&i);
            prop_assert_eq!(hist.columns(), 16);
            prop_assert_eq!(hist.horizontal_faces() as usize, i.faces().iter().filter(|f| f.is_horizontal()).count());
            let profile = ceiling_area_profile(&decompose(&i), 1, 2.0);
            prop_assert!(profile.by_height.values().sum::<usize>() as u64 <= hist.horizontal_faces());
            for (c, (x1, x2)) in d.columns().enumerate() {
                let r = column_trace_reference(&i, x1, x2);
                let expect = match r.as_slice() {
                    [f] if f.is_horizontal() && f.max_height() == 0 => ColumnClass::SingletonAtZero,
                    [f] if f.is_horizontal() => ColumnClass::SingletonAt(f.max_height()),
                    _ => ColumnClass::NonSingleton,
                };
                prop_assert_eq!(t.class(c), expect);
            }
            // symmetric under reflecting the base
            let mut mirrored = SpinConfig::ground_state(d);
            for &(a, b, z) in &cells {
                mirrored.flip(CellId::new(-a - 1, b, z)).unwrap();
            }
            prop_assert_eq!(nonzero_sites(&extract_interface(&mirrored)), nonzero_sites(&i));
            // a threshold at or below every face counts only non-singletons
            if i.min_height() >= 0 {
                prop_assert_eq!(repelled_sites(&i, 0, 0, 0), hist.non_singleton);
            }
        }
    }
}
