//! Walls and ceilings: decomposition, nesting, hulls, the standard-wall
//! bijection, excess energy, wall clusters and the upward shift map.

mod plane;
mod shift;
mod standard;

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::geometry::{project, BoxDims, FaceId, ProjElement};
use crate::interface::Interface;

pub use plane::{boundary_size, is_simply_connected, isodim_at_most, Region};
pub use shift::{boundary_band, shift_up};
pub use standard::{admissible, reconstruct, standard_rep, StandardWallCollection};

use plane::Regions;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Wall {
    pub faces: Vec<FaceId>,
    pub projection: Vec<ProjElement>,
    pub supporting_ceiling_height: i32,
}

impl Wall {
    /// Builds a wall from its faces; the projection is recomputed.
    pub fn new(mut faces: Vec<FaceId>, supporting_ceiling_height: i32) -> Self {
        faces.sort_unstable();
        faces.dedup();
        let mut projection: Vec<ProjElement> = faces.iter().map(|&f| project(f)).collect();
        projection.sort_unstable();
        projection.dedup();
        Wall { faces, projection, supporting_ceiling_height }
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn translate(&self, dz: i32) -> Wall {
        Wall {
            faces: self.faces.iter().map(|f| f.translate(0, 0, dz)).collect(),
            projection: self.projection.clone(),
            supporting_ceiling_height: self.supporting_ceiling_height + dz,
        }
    }

    /// Lattice vertices of the closed projection.
    pub fn projection_vertices(&self) -> HashSet<(i32, i32)> {
        self.projection.iter().flat_map(|e| e.vertices()).collect()
    }

    pub fn projected_faces(&self) -> usize {
        self.projection.iter().filter(|e| e.is_face()).count()
    }
}

/// `𝔪(W) = |W| - |faces of ρ(W)|`.
pub fn excess_energy(w: &Wall) -> u64 {
    (w.len() - w.projected_faces()) as u64
}

/// `𝔪(I; J) = |I| - |J|`.
pub fn excess_rel(i: &Interface, j: &Interface) -> i64 {
    i.len() as i64 - j.len() as i64
}

/// Vertical translate placing the supporting ceiling at height 0.
pub fn standardize(w: &Wall) -> Wall {
    w.translate(-w.supporting_ceiling_height)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ceiling {
    pub faces: Vec<FaceId>,
    pub height: i32,
}

impl Ceiling {
    pub fn area(&self) -> usize {
        self.faces.len()
    }

    pub fn columns(&self) -> HashSet<(i32, i32)> {
        self.faces.iter().map(|f| (f.anchor.x1, f.anchor.x2)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WallCluster {
    pub root: usize,
    /// Wall indices into the decomposition, sorted.
    pub members: Vec<usize>,
}

/// Splits interface faces into ceiling faces and wall faces.
pub fn classify_faces(iface: &Interface) -> (Vec<FaceId>, Vec<FaceId>) {
    let mut per_column: HashMap<(i32, i32), usize> = HashMap::new();
    for f in iface.faces().iter().filter(|f| f.is_horizontal()) {
        *per_column.entry((f.anchor.x1, f.anchor.x2)).or_default() += 1;
    }
    iface
        .faces()
        .iter()
        .partition(|f| f.is_horizontal() && per_column[&(f.anchor.x1, f.anchor.x2)] == 1)
}

fn star_components(faces: &[FaceId]) -> Vec<Vec<FaceId>> {
    let set: HashSet<FaceId> = faces.iter().copied().collect();
    let mut seen: HashSet<FaceId> = HashSet::with_capacity(faces.len());
    let mut out = Vec::new();
    let mut sorted = faces.to_vec();
    sorted.sort_unstable();
    for &f in &sorted {
        if !seen.insert(f) {
            continue;
        }
        let mut comp = vec![f];
        let mut queue = VecDeque::from([f]);
        while let Some(g) = queue.pop_front() {
            for nb in g.star_neighbors() {
                if set.contains(&nb) && seen.insert(nb) {
                    comp.push(nb);
                    queue.push_back(nb);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Walls, ceilings and their nesting structure.
#[derive(Clone, Debug)]
pub struct WallDecomposition {
    pub dims: BoxDims,
    pub walls: Vec<Wall>,
    pub ceilings: Vec<Ceiling>,
    /// Innermost wall strictly enclosing each wall.
    pub wall_parent: Vec<Option<usize>>,
    /// Number of walls enclosing each wall.
    pub wall_depth: Vec<usize>,
    /// Innermost wall enclosing each ceiling.
    pub ceiling_parent: Vec<Option<usize>>,
    /// Wall assigned to each base column (in `BoxDims::column_index` order).
    pub index_map: Vec<Option<usize>>,
    enclosing: Vec<Vec<usize>>,
    regions: Vec<Regions>,
}

pub fn decompose(iface: &Interface) -> WallDecomposition {
    let dims = iface.dims();
    let (ceiling_faces, wall_faces) = classify_faces(iface);

    let mut column_heights: HashMap<(i32, i32), Vec<i32>> = HashMap::new();
    for f in iface.faces().iter().filter(|f| f.is_horizontal()) {
        column_heights.entry((f.anchor.x1, f.anchor.x2)).or_default().push(f.anchor.x3 + 1);
    }
    let ceiling_height_at = |x: (i32, i32)| -> Option<i32> {
        if !dims.contains_column(x.0, x.1) {
            return Some(0);
        }
        match column_heights.get(&x).map(Vec::as_slice) {
            Some([h]) => Some(*h),
            _ => None,
        }
    };

    let mut walls = Vec::new();
    let mut regions = Vec::new();
    for comp in star_components(&wall_faces) {
        let mut w = Wall::new(comp, 0);
        let r = Regions::new(&w.projection);
        let verts = w.projection_vertices();
        w.supporting_ceiling_height = r
            .exterior_faces()
            .filter(|&(x, y)| [(x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1)].iter().any(|v| verts.contains(v)))
            .find_map(ceiling_height_at)
            .unwrap_or(0);
        walls.push(w);
        regions.push(r);
    }

    let ceilings: Vec<Ceiling> = star_components(&ceiling_faces)
        .into_iter()
        .map(|faces| Ceiling { height: faces[0].anchor.x3 + 1, faces })
        .collect();

    let nw = walls.len();
    let mut enclosing = vec![Vec::new(); nw];
    for j in 0..nw {
        let probe = walls[j].projection[0];
        for i in 0..nw {
            if i != j && matches!(regions[i].region(probe), Region::Finite(_)) {
                enclosing[j].push(i);
            }
        }
    }
    let wall_depth: Vec<usize> = enclosing.iter().map(Vec::len).collect();
    let innermost = |cands: &[usize]| cands.iter().copied().max_by_key(|&i| wall_depth[i]);
    let wall_parent = enclosing.iter().map(|e| innermost(e)).collect();

    let ceiling_parent = ceilings
        .iter()
        .map(|c| {
            let f = c.faces[0];
            let probe = ProjElement::Face { x1: f.anchor.x1, x2: f.anchor.x2 };
            let cands: Vec<usize> = (0..nw).filter(|&i| regions[i].is_interior(probe)).collect();
            innermost(&cands)
        })
        .collect();

    let mut index_map: Vec<Option<usize>> = vec![None; dims.num_columns()];
    let mut offer = |x: (i32, i32), i: usize, regions: &[Regions]| {
        let Some(k) = dims.column_index(x.0, x.1) else { return };
        if !regions[i].is_interior(ProjElement::Face { x1: x.0, x2: x.1 }) {
            return;
        }
        match index_map[k] {
            Some(j) if wall_depth[j] >= wall_depth[i] => {}
            _ => index_map[k] = Some(i),
        }
    };
    for (i, w) in walls.iter().enumerate() {
        for &e in &w.projection {
            match e {
                ProjElement::Face { x1, x2 } => offer((x1, x2), i, &regions),
                ProjElement::Edge { x1, x2, dir: crate::geometry::EdgeDir::X } => {
                    offer((x1, x2), i, &regions);
                    offer((x1, x2 - 1), i, &regions);
                }
                ProjElement::Edge { x1, x2, dir: crate::geometry::EdgeDir::Y } => {
                    offer((x1, x2), i, &regions);
                    offer((x1 - 1, x2), i, &regions);
                }
            }
        }
    }

    WallDecomposition { dims, walls, ceilings, wall_parent, wall_depth, ceiling_parent, index_map, enclosing, regions }
}

impl WallDecomposition {
    /// Where an element of the plane sits relative to wall `i`.
    pub fn region(&self, i: usize, e: ProjElement) -> Region {
        self.regions[i].region(e)
    }

    /// Whether wall `j` is nested in wall `i`.
    pub fn is_nested(&self, j: usize, i: usize) -> bool {
        self.enclosing[j].contains(&i)
    }

    /// Walls enclosing wall `j`.
    pub fn enclosing(&self, j: usize) -> &[usize] {
        &self.enclosing[j]
    }

    /// Walls nesting `x`, outermost first.
    pub fn nested_walls_at(&self, x: ProjElement) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.walls.len()).filter(|&i| self.regions[i].is_interior(x)).collect();
        out.sort_by_key(|&i| self.wall_depth[i]);
        out
    }

    /// Total excess energy of a set of walls.
    pub fn excess_of(&self, walls: &[usize]) -> u64 {
        walls.iter().map(|&i| excess_energy(&self.walls[i])).sum()
    }

    pub fn total_excess(&self) -> u64 {
        self.walls.iter().map(excess_energy).sum()
    }

    /// Minimal simply connected face set containing ceiling `c`.
    ///
    /// A height-0 ceiling touching the base perimeter continues into the
    /// plane outside the box, so its hull is the whole base.
    pub fn hull_ceiling(&self, c: usize) -> Vec<(i32, i32)> {
        let ceiling = &self.ceilings[c];
        let cols = ceiling.columns();
        let touches_outside = ceiling.height == 0
            && ceiling.faces.iter().any(|&f| self.dims.is_anchor_face(f));
        if touches_outside {
            return self.dims.columns().collect();
        }
        plane::fill_holes(&cols)
    }

    /// `ρ(W)` together with the bounded pieces of its complement.
    pub fn hull_wall(&self, i: usize) -> Vec<ProjElement> {
        let mut out = self.walls[i].projection.clone();
        out.extend(self.regions[i].finite_elements().map(|(e, _)| e));
        out.sort_unstable();
        out
    }

    /// Faces of the bounded pieces of `ρ(W)^c`, grouped by piece.
    pub fn interior_pieces(&self, i: usize) -> Vec<Vec<(i32, i32)>> {
        let r = &self.regions[i];
        let mut pieces = vec![Vec::new(); r.finite_count() as usize];
        for (e, k) in r.finite_elements() {
            if let ProjElement::Face { x1, x2 } = e {
                pieces[k as usize - 1].push((x1, x2));
            }
        }
        pieces
    }

    pub fn standardize(&self, i: usize) -> Wall {
        standardize(&self.walls[i])
    }

    /// Closure of `{root}` under close nesting.
    pub fn wall_cluster(&self, root: usize) -> WallCluster {
        let mut members = vec![root];
        let mut inside = vec![false; self.walls.len()];
        inside[root] = true;
        loop {
            let mut grew = false;
            for j in 0..self.walls.len() {
                if inside[j] {
                    continue;
                }
                let m = excess_energy(&self.walls[j]) as f64;
                let close = self.enclosing[j]
                    .iter()
                    .any(|&i| inside[i] && projection_distance(&self.walls[i], &self.walls[j]) <= m);
                if close {
                    inside[j] = true;
                    members.push(j);
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        members.sort_unstable();
        WallCluster { root, members }
    }

    /// Walls nesting column `x` that are themselves nested in `region`.
    pub fn nested_walls_in(&self, x: (i32, i32), region: &HashSet<(i32, i32)>) -> Vec<usize> {
        self.nested_walls_at(ProjElement::Face { x1: x.0, x2: x.1 })
            .into_iter()
            .filter(|&i| self.walls[i].projection.iter().all(|e| element_in_region(*e, region)))
            .collect()
    }

    /// Guard event: every column of `a` has nested walls (inside `s`) of
    /// total excess below `r`.
    pub fn guard_excess(&self, s: &HashSet<(i32, i32)>, a: &[(i32, i32)], r: u64) -> bool {
        a.iter().all(|&x| self.excess_of(&self.nested_walls_in(x, s)) < r)
    }

    /// Guard event: every column of `a` has nested walls (inside `s`) whose
    /// projections have diameter below `r`.
    pub fn guard_diameter(&self, s: &HashSet<(i32, i32)>, a: &[(i32, i32)], r: f64) -> bool {
        a.iter().all(|&x| {
            let verts: Vec<(i32, i32)> = self
                .nested_walls_in(x, s)
                .into_iter()
                .flat_map(|i| self.walls[i].projection_vertices())
                .collect();
            diameter(&verts) < r
        })
    }

    /// Ceiling area summed by height.
    pub fn area_by_height(&self) -> BTreeMap<i32, usize> {
        let mut out = BTreeMap::new();
        for c in &self.ceilings {
            *out.entry(c.height).or_default() += c.area();
        }
        out
    }
}

fn element_in_region(e: ProjElement, region: &HashSet<(i32, i32)>) -> bool {
    match e {
        ProjElement::Face { x1, x2 } => region.contains(&(x1, x2)),
        ProjElement::Edge { x1, x2, dir: crate::geometry::EdgeDir::X } => {
            region.contains(&(x1, x2)) && region.contains(&(x1, x2 - 1))
        }
        ProjElement::Edge { x1, x2, dir: crate::geometry::EdgeDir::Y } => {
            region.contains(&(x1, x2)) && region.contains(&(x1 - 1, x2))
        }
    }
}

fn diameter(points: &[(i32, i32)]) -> f64 {
    let mut best = 0i64;
    for (k, a) in points.iter().enumerate() {
        for b in &points[k + 1..] {
            let dx = (a.0 - b.0) as i64;
            let dy = (a.1 - b.1) as i64;
            best = best.max(dx * dx + dy * dy);
        }
    }
    (best as f64).sqrt()
}

/// Smallest Euclidean distance between midpoints of projection elements.
pub fn projection_distance(a: &Wall, b: &Wall) -> f64 {
    let mut best = f64::INFINITY;
    for &e in &a.projection {
        let (x, y) = e.midpoint();
        for &g in &b.projection {
            let (u, v) = g.midpoint();
            best = best.min((x - u).hypot(y - v));
        }
    }
    best
}

#[cfg(test)]
mod tests;
