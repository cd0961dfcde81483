//! The upward shift map: lift the interface by `k` and close it up along the
//! box boundary.

use std::collections::HashSet;

use crate::geometry::{Axis, BoxDims, CellId, FaceId};
use crate::interface::{anchored_faces, Interface};

/// Vertical faces standing on the base perimeter between heights 0 and `k`.
pub fn boundary_band(dims: BoxDims, k: u32) -> Vec<FaceId> {
    let (x1r, x2r) = (dims.x1_range(), dims.x2_range());
    let mut out = Vec::new();
    for z in 0..k as i32 {
        for x2 in x2r.clone() {
            out.push(FaceId::new(CellId::new(x1r.start() - 1, x2, z), Axis::X));
            out.push(FaceId::new(CellId::new(*x1r.end(), x2, z), Axis::X));
        }
        for x1 in x1r.clone() {
            out.push(FaceId::new(CellId::new(x1, x2r.start() - 1, z), Axis::Y));
            out.push(FaceId::new(CellId::new(x1, *x2r.end(), z), Axis::Y));
        }
    }
    out.sort_unstable();
    out
}

/// `Φ_k↑(I)`: the shift of `I` by `(0,0,k)`, symmetric difference with the
/// boundary band, keeping only the component anchored outside the box.
///
/// The box grows vertically when the shifted faces need the room.
pub fn shift_up(iface: &Interface, k: u32) -> Interface {
    if k == 0 {
        return iface.clone();
    }
    let shifted: Vec<FaceId> = iface.faces().iter().map(|f| f.translate(0, 0, k as i32)).collect();
    let mut dims = iface.dims();
    while shifted.iter().any(|&f| !dims.contains_face(f)) {
        dims = dims.with_min_height(dims.h + 2);
    }
    let mut set: HashSet<FaceId> = shifted.into_iter().collect();
    for f in boundary_band(dims, k) {
        if !set.remove(&f) {
            set.insert(f);
        }
    }
    let faces: Vec<FaceId> = set.into_iter().collect();
    let kept = anchored_faces(dims, &faces).expect("all faces lie in the grown box");
    Interface::from_faces(dims, kept)
}
