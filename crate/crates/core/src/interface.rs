//! The Dobrushin interface of a configuration and its canonical configuration.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoxDims, FaceGrid, FaceId};
use crate::spin::{dobrushin_spin, SpinConfig};

/// Interface faces restricted to the box, kept sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Interface {
    dims: BoxDims,
    faces: Vec<FaceId>,
}

impl Interface {
    /// Wraps a face set without checking that it is a valid interface.
    pub fn from_faces(dims: BoxDims, mut faces: Vec<FaceId>) -> Self {
        faces.sort_unstable();
        faces.dedup();
        Interface { dims, faces }
    }

    /// The flat interface at height 0.
    pub fn flat(dims: BoxDims) -> Self {
        let faces = dims.columns().map(|(x1, x2)| FaceId::horizontal(x1, x2, 0)).collect();
        Interface::from_faces(dims, faces)
    }

    pub fn dims(&self) -> BoxDims {
        self.dims
    }

    pub fn faces(&self) -> &[FaceId] {
        &self.faces
    }

    pub fn into_faces(self) -> Vec<FaceId> {
        self.faces
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn contains(&self, f: FaceId) -> bool {
        self.faces.binary_search(&f).is_ok()
    }

    pub fn reflect_vertical(&self) -> Self {
        Interface::from_faces(self.dims, self.faces.iter().map(|f| f.reflect_vertical()).collect())
    }

    pub fn min_height(&self) -> i32 {
        self.faces.iter().map(|f| f.min_height()).min().unwrap_or(0)
    }

    pub fn max_height(&self) -> i32 {
        self.faces.iter().map(|f| f.max_height()).max().unwrap_or(0)
    }

    /// Sorted face list as JSON, the on-disk interface format.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.faces).expect("faces serialize")
    }

    pub fn from_json(dims: BoxDims, s: &str) -> Result<Self> {
        let faces: Vec<FaceId> = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(Interface::from_faces(dims, faces))
    }
}

/// Faces of `member` *-connected to the height-0 plane outside the box.
pub(crate) fn anchored_component(grid: &FaceGrid, member: &[bool]) -> Vec<usize> {
    let dims = grid.dims();
    let mut seen = vec![false; grid.len()];
    let mut queue = VecDeque::new();
    for (i, &m) in member.iter().enumerate() {
        if m && dims.is_anchor_face(grid.face(i)) {
            seen[i] = true;
            queue.push_back(i);
        }
    }
    let mut out = Vec::new();
    while let Some(i) = queue.pop_front() {
        out.push(i);
        for nb in grid.face(i).star_neighbors() {
            if let Some(j) = grid.index(nb) {
                if member[j] && !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    out
}

/// Restriction to a face set of its component anchored outside the box.
pub(crate) fn anchored_faces(dims: BoxDims, faces: &[FaceId]) -> Result<Vec<FaceId>> {
    let grid = FaceGrid::new(dims);
    let mut member = vec![false; grid.len()];
    for &f in faces {
        let i = grid
            .index(f)
            .ok_or_else(|| Error::InvalidInterface(format!("face {f} lies outside the box")))?;
        member[i] = true;
    }
    Ok(anchored_component(&grid, &member).into_iter().map(|i| grid.face(i)).collect())
}

pub fn extract_interface(config: &SpinConfig) -> Interface {
    let grid = FaceGrid::new(config.dims());
    let member: Vec<bool> = grid
        .faces()
        .map(|f| {
            let (a, b) = f.cells();
            config.get(a) != config.get(b)
        })
        .collect();
    let faces = anchored_component(&grid, &member).into_iter().map(|i| grid.face(i)).collect();
    Interface::from_faces(config.dims(), faces)
}

/// The bubble-free configuration whose separating faces are exactly `iface`.
///
/// Spins are assigned breadth-first from a boundary cell, flipping across
/// exactly the interface faces; the result is then checked against the input.
pub fn spin_from_interface(iface: &Interface) -> Result<SpinConfig> {
    let dims = iface.dims;
    let n = dims.num_cells();
    let mut spins = vec![0i8; n];
    let start = dims.cell_at(0);
    let below = start.offset(crate::geometry::Axis::Z, -1);
    let first = FaceId::new(below, crate::geometry::Axis::Z);
    spins[0] = if iface.contains(first) { -dobrushin_spin(below) } else { dobrushin_spin(below) };
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let c = dims.cell_at(i);
        for (k, f) in c.faces().into_iter().enumerate() {
            let nb = c.neighbors()[k];
            let Some(j) = dims.cell_index(nb) else { continue };
            if spins[j] != 0 {
                continue;
            }
            spins[j] = if iface.contains(f) { -spins[i] } else { spins[i] };
            queue.push_back(j);
        }
    }
    let config = SpinConfig::from_spins(dims, spins)?;
    if extract_interface(&config).faces != iface.faces {
        return Err(Error::InvalidInterface(
            "face set is not the anchored separating set of any configuration".into(),
        ));
    }
    Ok(config)
}

/// Whether every point of every face lies at height `>= -floor_h`.
pub fn satisfies_floor(iface: &Interface, floor_h: u32) -> bool {
    let floor = -(floor_h as i32);
    iface.faces.iter().all(|f| f.min_height() >= floor)
}

/// Faces in `faces` that are not in the anchored component.
pub fn detached_faces(dims: BoxDims, faces: &[FaceId]) -> Result<Vec<FaceId>> {
    let keep: HashSet<FaceId> = anchored_faces(dims, faces)?.into_iter().collect();
    Ok(faces.iter().copied().filter(|f| !keep.contains(f)).collect())
}
