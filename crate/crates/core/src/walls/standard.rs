//! Standard wall representation and reconstruction of interfaces from it.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::plane::{Region, Regions};
use super::{decompose, excess_energy, standardize, Wall};
use crate::error::{Error, Result};
use crate::geometry::{plane_face_edges, project, BoxDims, FaceId, ProjElement};
use crate::interface::{spin_from_interface, Interface};

/// Admissible collection of standard walls on a fixed box, sorted by faces.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StandardWallCollection {
    pub dims: BoxDims,
    pub walls: Vec<Wall>,
}

impl StandardWallCollection {
    pub fn new(dims: BoxDims, mut walls: Vec<Wall>) -> Self {
        walls.sort_by(|a, b| a.faces.cmp(&b.faces));
        StandardWallCollection { dims, walls }
    }

    pub fn empty(dims: BoxDims) -> Self {
        StandardWallCollection { dims, walls: Vec::new() }
    }

    pub fn total_excess(&self) -> u64 {
        self.walls.iter().map(excess_energy).sum()
    }
}

/// Standardized walls of an interface.
pub fn standard_rep(iface: &Interface) -> StandardWallCollection {
    let deco = decompose(iface);
    StandardWallCollection::new(iface.dims(), deco.walls.iter().map(standardize).collect())
}

/// Pairwise vertex-disjoint closed projections.
pub fn admissible(coll: &StandardWallCollection) -> bool {
    let mut owner: HashMap<(i32, i32), usize> = HashMap::new();
    for (i, w) in coll.walls.iter().enumerate() {
        for v in w.projection_vertices() {
            if let Some(&j) = owner.get(&v) {
                if j != i {
                    return false;
                }
            }
            owner.insert(v, i);
        }
    }
    true
}

/// Heights of the ceilings in the bounded pieces of `ρ(W)^c`, indexed by
/// piece number minus one.
///
/// Walking from the outside (height 0) across an edge `e` toggles the set of
/// heights crossed by the column line by the endpoints of the vertical faces
/// of `W` standing on `e`.
fn piece_offsets(w: &Wall, r: &Regions) -> Result<Vec<i32>> {
    let mut vertical: HashMap<ProjElement, Vec<i32>> = HashMap::new();
    let mut horizontal: HashMap<(i32, i32), Vec<i32>> = HashMap::new();
    for &f in &w.faces {
        if f.is_horizontal() {
            horizontal.entry((f.anchor.x1, f.anchor.x2)).or_default().push(f.anchor.x3 + 1);
        } else {
            let ends = vertical.entry(project(f)).or_default();
            for z in [f.anchor.x3, f.anchor.x3 + 1] {
                match ends.iter().position(|&q| q == z) {
                    Some(p) => {
                        ends.swap_remove(p);
                    }
                    None => ends.push(z),
                }
            }
        }
    }
    for v in horizontal.values_mut() {
        v.sort_unstable();
    }

    let (x0, y0, gw, gh) = r.face_grid();
    let idx = |x: i32, y: i32| ((y - y0) * gw + (x - x0)) as usize;
    let mut heights: Vec<Option<Vec<i32>>> = vec![None; (gw * gh) as usize];
    let mut queue = VecDeque::new();
    for y in y0..y0 + gh {
        for x in x0..x0 + gw {
            if x == x0 || y == y0 || x == x0 + gw - 1 || y == y0 + gh - 1 {
                heights[idx(x, y)] = Some(vec![0]);
                queue.push_back((x, y));
            }
        }
    }
    while let Some((x, y)) = queue.pop_front() {
        let here = heights[idx(x, y)].clone().expect("visited");
        let edges = plane_face_edges(x, y);
        let across = [(x, y - 1), (x, y + 1), (x - 1, y), (x + 1, y)];
        for (e, (a, b)) in edges.into_iter().zip(across) {
            if a < x0 || b < y0 || a >= x0 + gw || b >= y0 + gh {
                continue;
            }
            let mut next = here.clone();
            for &z in vertical.get(&e).map(Vec::as_slice).unwrap_or(&[]) {
                match next.iter().position(|&q| q == z) {
                    Some(p) => {
                        next.remove(p);
                    }
                    None => next.push(z),
                }
            }
            next.sort_unstable();
            match &heights[idx(a, b)] {
                None => {
                    heights[idx(a, b)] = Some(next);
                    queue.push_back((a, b));
                }
                Some(prev) if *prev != next => {
                    return Err(Error::InvalidCollection("inconsistent column heights around a wall".into()));
                }
                Some(_) => {}
            }
        }
    }

    let mut offsets: Vec<Option<i32>> = vec![None; r.finite_count() as usize];
    for y in y0..y0 + gh {
        for x in x0..x0 + gw {
            let hs = heights[idx(x, y)].as_ref().expect("grid is connected");
            match r.region(ProjElement::Face { x1: x, x2: y }) {
                Region::Blocked => {
                    if horizontal.get(&(x, y)) != Some(hs) {
                        return Err(Error::InvalidCollection("wall column does not match its faces".into()));
                    }
                }
                Region::Exterior => {}
                Region::Finite(k) => {
                    let [z] = hs.as_slice() else {
                        return Err(Error::InvalidCollection("ceiling column crossed more than once".into()));
                    };
                    let slot = &mut offsets[k as usize - 1];
                    if slot.is_some_and(|o| o != *z) {
                        return Err(Error::InvalidCollection("ceiling piece with two heights".into()));
                    }
                    *slot = Some(*z);
                }
            }
        }
    }
    offsets
        .into_iter()
        .map(|o| o.ok_or_else(|| Error::InvalidCollection("enclosed piece without a column".into())))
        .collect()
}

/// The unique interface whose standard wall representation is `coll`.
pub fn reconstruct(coll: &StandardWallCollection) -> Result<Interface> {
    let dims = coll.dims;
    if !admissible(coll) {
        return Err(Error::InvalidCollection("wall projections share a vertex".into()));
    }
    let regions: Vec<Regions> = coll.walls.iter().map(|w| Regions::new(&w.projection)).collect();
    let offsets: Vec<Vec<i32>> =
        coll.walls.iter().zip(&regions).map(|(w, r)| piece_offsets(w, r)).collect::<Result<_>>()?;

    let lift = |e: ProjElement, skip: Option<usize>| -> i32 {
        (0..coll.walls.len())
            .filter(|&i| Some(i) != skip)
            .map(|i| match regions[i].region(e) {
                Region::Finite(k) => offsets[i][k as usize - 1],
                _ => 0,
            })
            .sum()
    };

    let mut faces = Vec::new();
    let mut covered = std::collections::HashSet::new();
    for (j, w) in coll.walls.iter().enumerate() {
        let s = lift(w.projection[0], Some(j));
        faces.extend(w.faces.iter().map(|f| f.translate(0, 0, s)));
        covered.extend(w.projection.iter().filter(|e| e.is_face()).copied());
    }
    for (x1, x2) in dims.columns() {
        let e = ProjElement::Face { x1, x2 };
        if !covered.contains(&e) {
            faces.push(FaceId::horizontal(x1, x2, lift(e, None)));
        }
    }
    if let Some(f) = faces.iter().find(|&&f| !dims.contains_face(f)) {
        return Err(Error::InvalidCollection(format!("face {f} falls outside the box")));
    }
    let iface = Interface::from_faces(dims, faces);
    spin_from_interface(&iface).map_err(|e| Error::InvalidCollection(e.to_string()))?;
    if standard_rep(&iface) != *coll {
        return Err(Error::InvalidCollection("walls are not standard walls of one interface".into()));
    }
    Ok(iface)
}
