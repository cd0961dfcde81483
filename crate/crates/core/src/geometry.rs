//! Integer-lattice geometry of ℤ³ restricted to centered boxes.
//!
//! Cells are addressed by the integer corner `(x1, x2, x3)`; the cell occupies
//! `[x1, x1+1] × [x2, x2+1] × [x3, x3+1]` and has midpoint
//! `(x1+½, x2+½, x3+½)`. Heights are carried doubled so that half-integer
//! midpoints stay exact.
//!
//! Box convention: a box of `n` cells along an axis spans cell corners
//! `-(n/2) ..= -(n/2) + n - 1` (integer division). For even `n` this is the
//! symmetric range `⟦-n/2, n/2⟧` of vertices; odd `n` puts the extra cell on
//! the positive side. The vertical extent `h` must be even, so the box holds
//! the cell layers at heights `±½, ±3/2, …, ±(h-1)/2` and exactly `n·m·h`
//! cells. The height-0 plane over the base therefore carries `n·m` faces.

use std::fmt;
use std::ops::RangeInclusive;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellId {
    pub x1: i32,
    pub x2: i32,
    pub x3: i32,
}

impl CellId {
    pub const fn new(x1: i32, x2: i32, x3: i32) -> Self {
        CellId { x1, x2, x3 }
    }

    /// Twice the height of the midpoint (always odd).
    pub const fn doubled_height(self) -> i32 {
        2 * self.x3 + 1
    }

    pub fn height(self) -> f64 {
        self.x3 as f64 + 0.5
    }

    pub const fn offset(self, axis: Axis, delta: i32) -> Self {
        match axis {
            Axis::X => CellId::new(self.x1 + delta, self.x2, self.x3),
            Axis::Y => CellId::new(self.x1, self.x2 + delta, self.x3),
            Axis::Z => CellId::new(self.x1, self.x2, self.x3 + delta),
        }
    }

    pub fn coord(self, axis: Axis) -> i32 {
        match axis {
            Axis::X => self.x1,
            Axis::Y => self.x2,
            Axis::Z => self.x3,
        }
    }

    /// The six faces bounding this cell.
    pub fn faces(self) -> [FaceId; 6] {
        [
            FaceId::new(self, Axis::X),
            FaceId::new(self.offset(Axis::X, -1), Axis::X),
            FaceId::new(self, Axis::Y),
            FaceId::new(self.offset(Axis::Y, -1), Axis::Y),
            FaceId::new(self, Axis::Z),
            FaceId::new(self.offset(Axis::Z, -1), Axis::Z),
        ]
    }

    /// The six face-adjacent cells.
    pub fn neighbors(self) -> [CellId; 6] {
        [
            self.offset(Axis::X, 1),
            self.offset(Axis::X, -1),
            self.offset(Axis::Y, 1),
            self.offset(Axis::Y, -1),
            self.offset(Axis::Z, 1),
            self.offset(Axis::Z, -1),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub const fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Axis> {
        Axis::ALL.get(i).copied()
    }
}

/// A unit face of ℤ³: the face between `anchor` and `anchor + e_axis`.
///
/// The encoding is canonical. `axis` is the face normal, so `Z` faces are
/// horizontal and sit at the integer height `anchor.x3 + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FaceId {
    pub anchor: CellId,
    pub axis: Axis,
}

impl FaceId {
    pub const fn new(anchor: CellId, axis: Axis) -> Self {
        FaceId { anchor, axis }
    }

    /// Horizontal face over column `(x1, x2)` at integer height `height`.
    pub const fn horizontal(x1: i32, x2: i32, height: i32) -> Self {
        FaceId::new(CellId::new(x1, x2, height - 1), Axis::Z)
    }

    pub fn is_horizontal(self) -> bool {
        self.axis == Axis::Z
    }

    /// The two cells separated by this face, lower coordinate first.
    pub fn cells(self) -> (CellId, CellId) {
        (self.anchor, self.anchor.offset(self.axis, 1))
    }

    /// Twice the height of the face midpoint.
    pub fn doubled_mid_height(self) -> i32 {
        match self.axis {
            Axis::Z => 2 * (self.anchor.x3 + 1),
            _ => 2 * self.anchor.x3 + 1,
        }
    }

    /// Lowest height attained by a point of the closed face.
    pub fn min_height(self) -> i32 {
        match self.axis {
            Axis::Z => self.anchor.x3 + 1,
            _ => self.anchor.x3,
        }
    }

    /// Highest height attained by a point of the closed face.
    pub fn max_height(self) -> i32 {
        self.anchor.x3 + 1
    }

    /// The four bounding vertices.
    pub fn vertices(self) -> [[i32; 3]; 4] {
        let p = [self.anchor.x1, self.anchor.x2, self.anchor.x3];
        let a = self.axis.index();
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        let mut out = [[0; 3]; 4];
        let mut k = 0;
        for db in 0..2 {
            for dc in 0..2 {
                let mut v = p;
                v[a] += 1;
                v[b] += db;
                v[c] += dc;
                out[k] = v;
                k += 1;
            }
        }
        out
    }

    pub fn translate(self, dx1: i32, dx2: i32, dx3: i32) -> Self {
        let a = self.anchor;
        FaceId::new(CellId::new(a.x1 + dx1, a.x2 + dx2, a.x3 + dx3), self.axis)
    }

    /// Vertical reflection `x3 ↦ -x3`.
    pub fn reflect_vertical(self) -> Self {
        let a = self.anchor;
        match self.axis {
            Axis::Z => FaceId::new(CellId::new(a.x1, a.x2, -a.x3 - 2), Axis::Z),
            _ => FaceId::new(CellId::new(a.x1, a.x2, -a.x3 - 1), self.axis),
        }
    }

    /// Every face sharing at least one bounding vertex with `self`.
    pub fn star_neighbors(self) -> impl Iterator<Item = FaceId> {
        star_offsets()[self.axis.index()]
            .iter()
            .map(move |&(axis, d)| self.anchor.offset3(d).face(axis))
    }

    pub fn project(self) -> ProjElement {
        project(self)
    }
}

impl CellId {
    fn offset3(self, d: [i32; 3]) -> CellId {
        CellId::new(self.x1 + d[0], self.x2 + d[1], self.x3 + d[2])
    }

    fn face(self, axis: Axis) -> FaceId {
        FaceId::new(self, axis)
    }
}

impl fmt::Display for FaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.anchor;
        write!(f, "({},{},{}){:?}", a.x1, a.x2, a.x3, self.axis)
    }
}

// Faces serialize as `[x1, x2, x3, axis]` with axis 0/1/2 for X/Y/Z.
impl Serialize for FaceId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let a = self.anchor;
        [a.x1, a.x2, a.x3, self.axis.index() as i32].serialize(s)
    }
}

impl<'de> Deserialize<'de> for FaceId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [x1, x2, x3, a] = <[i32; 4]>::deserialize(d)?;
        let axis = usize::try_from(a)
            .ok()
            .and_then(Axis::from_index)
            .ok_or_else(|| serde::de::Error::custom(format!("bad face axis {a}")))?;
        Ok(FaceId::new(CellId::new(x1, x2, x3), axis))
    }
}

type StarTable = [Vec<(Axis, [i32; 3])>; 3];

fn star_offsets() -> &'static StarTable {
    static TABLE: OnceLock<StarTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let build = |axis: Axis| {
            let f = FaceId::new(CellId::new(0, 0, 0), axis);
            let verts = f.vertices();
            let mut out = Vec::new();
            for other in Axis::ALL {
                for x in -1..=1 {
                    for y in -1..=1 {
                        for z in -1..=1 {
                            let g = FaceId::new(CellId::new(x, y, z), other);
                            if g != f && g.vertices().iter().any(|v| verts.contains(v)) {
                                out.push((other, [x, y, z]));
                            }
                        }
                    }
                }
            }
            out
        };
        [build(Axis::X), build(Axis::Y), build(Axis::Z)]
    })
}

/// Whether two distinct faces share a bounding vertex.
pub fn star_adjacent(a: FaceId, b: FaceId) -> Result<bool> {
    if a == b {
        return Err(Error::InvalidQuery(format!("star adjacency of {a} with itself")));
    }
    let d = [
        b.anchor.x1 - a.anchor.x1,
        b.anchor.x2 - a.anchor.x2,
        b.anchor.x3 - a.anchor.x3,
    ];
    Ok(star_offsets()[a.axis.index()].contains(&(b.axis, d)))
}

/// Direction of an edge of the height-0 plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeDir {
    /// From `(x1, x2)` to `(x1 + 1, x2)`.
    X,
    /// From `(x1, x2)` to `(x1, x2 + 1)`.
    Y,
}

/// A face or an edge of the height-0 plane 𝓛₀.
///
/// `Face { x1, x2 }` is the unit square with lower corner `(x1, x2)`, i.e.
/// the column of cells with those horizontal coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProjElement {
    Face { x1: i32, x2: i32 },
    Edge { x1: i32, x2: i32, dir: EdgeDir },
}

impl ProjElement {
    pub fn is_face(self) -> bool {
        matches!(self, ProjElement::Face { .. })
    }

    /// Midpoint in the plane.
    pub fn midpoint(self) -> (f64, f64) {
        match self {
            ProjElement::Face { x1, x2 } => (x1 as f64 + 0.5, x2 as f64 + 0.5),
            ProjElement::Edge { x1, x2, dir: EdgeDir::X } => (x1 as f64 + 0.5, x2 as f64),
            ProjElement::Edge { x1, x2, dir: EdgeDir::Y } => (x1 as f64, x2 as f64 + 0.5),
        }
    }

    /// Lattice vertices of the closed element.
    pub fn vertices(self) -> Vec<(i32, i32)> {
        match self {
            ProjElement::Face { x1, x2 } => {
                vec![(x1, x2), (x1 + 1, x2), (x1, x2 + 1), (x1 + 1, x2 + 1)]
            }
            ProjElement::Edge { x1, x2, dir: EdgeDir::X } => vec![(x1, x2), (x1 + 1, x2)],
            ProjElement::Edge { x1, x2, dir: EdgeDir::Y } => vec![(x1, x2), (x1, x2 + 1)],
        }
    }

    /// The four boundary edges of a face; empty for an edge.
    pub fn boundary_edges(self) -> Vec<ProjElement> {
        match self {
            ProjElement::Face { x1, x2 } => plane_face_edges(x1, x2).to_vec(),
            ProjElement::Edge { .. } => Vec::new(),
        }
    }
}

pub(crate) fn plane_face_edges(x1: i32, x2: i32) -> [ProjElement; 4] {
    [
        ProjElement::Edge { x1, x2, dir: EdgeDir::X },
        ProjElement::Edge { x1, x2: x2 + 1, dir: EdgeDir::X },
        ProjElement::Edge { x1, x2, dir: EdgeDir::Y },
        ProjElement::Edge { x1: x1 + 1, x2, dir: EdgeDir::Y },
    ]
}

/// Vertical projection onto 𝓛₀.
pub fn project(f: FaceId) -> ProjElement {
    let a = f.anchor;
    match f.axis {
        Axis::Z => ProjElement::Face { x1: a.x1, x2: a.x2 },
        Axis::X => ProjElement::Edge { x1: a.x1 + 1, x2: a.x2, dir: EdgeDir::Y },
        Axis::Y => ProjElement::Edge { x1: a.x1, x2: a.x2 + 1, dir: EdgeDir::X },
    }
}

/// Column and integer height of a horizontal face.
pub fn column_and_height(f: FaceId) -> Result<((i32, i32), i32)> {
    if !f.is_horizontal() {
        return Err(Error::InvalidQuery(format!("{f} is vertical and has no column")));
    }
    Ok(((f.anchor.x1, f.anchor.x2), f.anchor.x3 + 1))
}

/// Side lengths of a centered box, in cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BoxDims {
    pub n: u32,
    pub m: u32,
    pub h: u32,
}

impl BoxDims {
    pub fn new(n: u32, m: u32, h: u32) -> Result<Self> {
        let d = BoxDims { n, m, h };
        d.validate()?;
        Ok(d)
    }

    pub fn cube(n: u32) -> Result<Self> {
        BoxDims::new(n, n, n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::InvalidDims(format!("{self:?}: base sides must be positive")));
        }
        if self.h < 2 || !self.h.is_multiple_of(2) {
            return Err(Error::InvalidDims(format!(
                "{self:?}: vertical extent must be even and at least 2"
            )));
        }
        if self.n > 4096 || self.m > 4096 || self.h > 4096 {
            return Err(Error::InvalidDims(format!("{self:?}: too large")));
        }
        Ok(())
    }

    pub fn x1_range(&self) -> RangeInclusive<i32> {
        side_range(self.n)
    }

    pub fn x2_range(&self) -> RangeInclusive<i32> {
        side_range(self.m)
    }

    pub fn x3_range(&self) -> RangeInclusive<i32> {
        side_range(self.h)
    }

    pub(crate) fn lo(&self) -> [i32; 3] {
        [*self.x1_range().start(), *self.x2_range().start(), *self.x3_range().start()]
    }

    pub(crate) fn sides(&self) -> [usize; 3] {
        [self.n as usize, self.m as usize, self.h as usize]
    }

    pub fn num_cells(&self) -> usize {
        self.n as usize * self.m as usize * self.h as usize
    }

    pub fn num_columns(&self) -> usize {
        self.n as usize * self.m as usize
    }

    pub fn contains(&self, c: CellId) -> bool {
        self.x1_range().contains(&c.x1)
            && self.x2_range().contains(&c.x2)
            && self.x3_range().contains(&c.x3)
    }

    pub fn contains_column(&self, x1: i32, x2: i32) -> bool {
        self.x1_range().contains(&x1) && self.x2_range().contains(&x2)
    }

    /// Dense index: `x1` fastest, then `x2`, then `x3`.
    pub fn cell_index(&self, c: CellId) -> Option<usize> {
        if !self.contains(c) {
            return None;
        }
        let lo = self.lo();
        let (n, m) = (self.n as usize, self.m as usize);
        let i = (c.x1 - lo[0]) as usize;
        let j = (c.x2 - lo[1]) as usize;
        let k = (c.x3 - lo[2]) as usize;
        Some((k * m + j) * n + i)
    }

    pub fn cell_at(&self, index: usize) -> CellId {
        let lo = self.lo();
        let (n, m) = (self.n as usize, self.m as usize);
        let i = index % n;
        let j = (index / n) % m;
        let k = index / (n * m);
        CellId::new(lo[0] + i as i32, lo[1] + j as i32, lo[2] + k as i32)
    }

    pub fn column_index(&self, x1: i32, x2: i32) -> Option<usize> {
        if !self.contains_column(x1, x2) {
            return None;
        }
        let lo = self.lo();
        Some((x2 - lo[1]) as usize * self.n as usize + (x1 - lo[0]) as usize)
    }

    pub fn column_at(&self, index: usize) -> (i32, i32) {
        let lo = self.lo();
        let n = self.n as usize;
        (lo[0] + (index % n) as i32, lo[1] + (index / n) as i32)
    }

    /// Columns of the base in `column_index` order.
    pub fn columns(&self) -> impl Iterator<Item = (i32, i32)> + '_ {
        (0..self.num_columns()).map(move |i| self.column_at(i))
    }

    /// Whether the face has at least one bounding cell inside the box.
    pub fn contains_face(&self, f: FaceId) -> bool {
        let (a, b) = f.cells();
        self.contains(a) || self.contains(b)
    }

    /// Whether a lattice vertex at height 0 lies on the perimeter of the base.
    pub(crate) fn on_base_perimeter(&self, x1: i32, x2: i32) -> bool {
        let lo = self.lo();
        let hi1 = lo[0] + self.n as i32;
        let hi2 = lo[1] + self.m as i32;
        let in1 = (lo[0]..=hi1).contains(&x1);
        let in2 = (lo[1]..=hi2).contains(&x2);
        in1 && in2 && (x1 == lo[0] || x1 == hi1 || x2 == lo[1] || x2 == hi2)
    }

    /// Whether the face touches the height-0 plane outside the box, i.e. is
    /// star-adjacent to a face of 𝓛₀ that is not a box face.
    pub(crate) fn is_anchor_face(&self, f: FaceId) -> bool {
        f.vertices().iter().any(|v| v[2] == 0 && self.on_base_perimeter(v[0], v[1]))
    }

    /// Smallest valid box with the same base whose vertical extent is at least `h`.
    pub fn with_min_height(&self, h: u32) -> BoxDims {
        let h = h.max(self.h);
        BoxDims { h: h + h % 2, ..*self }
    }
}

fn side_range(n: u32) -> RangeInclusive<i32> {
    let lo = -((n / 2) as i32);
    lo..=lo + n as i32 - 1
}

/// All cells of the box in dense-index order.
pub fn cells_of_box(dims: BoxDims) -> Vec<CellId> {
    (0..dims.num_cells()).map(|i| dims.cell_at(i)).collect()
}

/// Dense indexing of the faces of a box (faces with a bounding cell inside).
#[derive(Clone, Debug)]
pub struct FaceGrid {
    dims: BoxDims,
    lo: [i32; 3],
    // per normal axis: extents along (x1, x2, x3) and the starting offset
    extent: [[usize; 3]; 3],
    start: [usize; 3],
    len: usize,
}

impl FaceGrid {
    pub fn new(dims: BoxDims) -> Self {
        let lo = dims.lo();
        let sides = dims.sides();
        let mut extent = [[0usize; 3]; 3];
        let mut start = [0usize; 3];
        let mut len = 0;
        for a in 0..3 {
            let mut e = sides;
            e[a] += 1;
            extent[a] = e;
            start[a] = len;
            len += e[0] * e[1] * e[2];
        }
        FaceGrid { dims, lo, extent, start, len }
    }

    pub fn dims(&self) -> BoxDims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn index(&self, f: FaceId) -> Option<usize> {
        let a = f.axis.index();
        let mut p = [f.anchor.x1 - self.lo[0], f.anchor.x2 - self.lo[1], f.anchor.x3 - self.lo[2]];
        p[a] += 1;
        let e = self.extent[a];
        if p.iter().any(|&x| x < 0) || p[0] as usize >= e[0] || p[1] as usize >= e[1] || p[2] as usize >= e[2] {
            return None;
        }
        Some(self.start[a] + (p[2] as usize * e[1] + p[1] as usize) * e[0] + p[0] as usize)
    }

    pub fn face(&self, index: usize) -> FaceId {
        let a = if index >= self.start[2] {
            2
        } else if index >= self.start[1] {
            1
        } else {
            0
        };
        let e = self.extent[a];
        let r = index - self.start[a];
        let mut p = [(r % e[0]) as i32, ((r / e[0]) % e[1]) as i32, (r / (e[0] * e[1])) as i32];
        p[a] -= 1;
        FaceId::new(
            CellId::new(p[0] + self.lo[0], p[1] + self.lo[1], p[2] + self.lo[2]),
            Axis::from_index(a).expect("axis"),
        )
    }

    pub fn faces(&self) -> impl Iterator<Item = FaceId> + '_ {
        (0..self.len).map(|i| self.face(i))
    }
}
