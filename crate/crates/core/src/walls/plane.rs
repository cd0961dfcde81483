//! Planar topology of projections onto the height-0 plane.
//!
//! A projection is treated as a closed subset of the plane (elements together
//! with their endpoints). Its complement splits into connected pieces; two
//! complement elements are joined when one is a face and the other an edge of
//! that face. Everything outside a one-face margin around the projection is in
//! the unbounded piece.

use std::collections::{HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::geometry::{plane_face_edges, EdgeDir, ProjElement};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    /// The element belongs to the projection itself.
    Blocked,
    /// The unbounded complementary piece.
    Exterior,
    /// A bounded complementary piece, numbered from 1.
    Finite(u32),
}

const BLOCKED: i32 = -1;
const UNSEEN: i32 = -2;

#[derive(Clone, Debug)]
pub(crate) struct Regions {
    x0: i32,
    y0: i32,
    w: i32,
    h: i32,
    labels: Vec<i32>,
    finite: u32,
}

impl Regions {
    pub(crate) fn new(blocked: &[ProjElement]) -> Self {
        let mut vx = (i32::MAX, i32::MIN);
        let mut vy = (i32::MAX, i32::MIN);
        for e in blocked {
            for (x, y) in e.vertices() {
                vx = (vx.0.min(x), vx.1.max(x));
                vy = (vy.0.min(y), vy.1.max(y));
            }
        }
        if blocked.is_empty() {
            vx = (0, 0);
            vy = (0, 0);
        }
        let (x0, y0) = (vx.0 - 1, vy.0 - 1);
        let (w, h) = (vx.1 - vx.0 + 2, vy.1 - vy.0 + 2);
        let total = (w * h + w * (h + 1) + (w + 1) * h) as usize;
        let mut r = Regions { x0, y0, w, h, labels: vec![UNSEEN; total], finite: 0 };
        for &e in blocked {
            let i = r.node(e).expect("projection inside its own margin");
            r.labels[i] = BLOCKED;
            // a closed face carries its boundary edges
            if let ProjElement::Face { x1, x2 } = e {
                for g in plane_face_edges(x1, x2) {
                    let j = r.node(g).expect("margin covers face edges");
                    r.labels[j] = BLOCKED;
                }
            }
        }
        let mut queue = VecDeque::new();
        for fy in 0..h {
            for fx in 0..w {
                if fx == 0 || fy == 0 || fx == w - 1 || fy == h - 1 {
                    let i = (fy * w + fx) as usize;
                    if r.labels[i] == UNSEEN {
                        r.labels[i] = 0;
                        queue.push_back(i);
                    }
                }
            }
        }
        r.flood(&mut queue, 0);
        for i in 0..total {
            if r.labels[i] == UNSEEN {
                r.finite += 1;
                let id = r.finite as i32;
                r.labels[i] = id;
                queue.push_back(i);
                r.flood(&mut queue, id);
            }
        }
        r
    }

    fn flood(&mut self, queue: &mut VecDeque<usize>, id: i32) {
        let mut nbs = Vec::with_capacity(4);
        while let Some(i) = queue.pop_front() {
            nbs.clear();
            self.adjacent(self.element(i), &mut nbs);
            for &j in &nbs {
                if self.labels[j] == UNSEEN {
                    self.labels[j] = id;
                    queue.push_back(j);
                }
            }
        }
    }

    fn adjacent(&self, e: ProjElement, out: &mut Vec<usize>) {
        match e {
            ProjElement::Face { x1, x2 } => {
                out.extend(plane_face_edges(x1, x2).iter().filter_map(|&g| self.node(g)));
            }
            ProjElement::Edge { x1, x2, dir: EdgeDir::X } => {
                out.extend([(x1, x2), (x1, x2 - 1)].iter().filter_map(|&(a, b)| self.node(ProjElement::Face { x1: a, x2: b })));
            }
            ProjElement::Edge { x1, x2, dir: EdgeDir::Y } => {
                out.extend([(x1, x2), (x1 - 1, x2)].iter().filter_map(|&(a, b)| self.node(ProjElement::Face { x1: a, x2: b })));
            }
        }
    }

    fn node(&self, e: ProjElement) -> Option<usize> {
        let (w, h) = (self.w, self.h);
        match e {
            ProjElement::Face { x1, x2 } => {
                let (fx, fy) = (x1 - self.x0, x2 - self.y0);
                (0..w).contains(&fx).then_some(())?;
                (0..h).contains(&fy).then_some(())?;
                Some((fy * w + fx) as usize)
            }
            ProjElement::Edge { x1, x2, dir: EdgeDir::X } => {
                let (fx, fy) = (x1 - self.x0, x2 - self.y0);
                (0..w).contains(&fx).then_some(())?;
                (0..=h).contains(&fy).then_some(())?;
                Some((w * h + fy * w + fx) as usize)
            }
            ProjElement::Edge { x1, x2, dir: EdgeDir::Y } => {
                let (fx, fy) = (x1 - self.x0, x2 - self.y0);
                (0..=w).contains(&fx).then_some(())?;
                (0..h).contains(&fy).then_some(())?;
                Some((w * h + w * (h + 1) + fy * (w + 1) + fx) as usize)
            }
        }
    }

    fn element(&self, i: usize) -> ProjElement {
        let (w, h) = (self.w, self.h);
        let i = i as i32;
        let faces = w * h;
        let xedges = w * (h + 1);
        if i < faces {
            ProjElement::Face { x1: self.x0 + i % w, x2: self.y0 + i / w }
        } else if i < faces + xedges {
            let r = i - faces;
            ProjElement::Edge { x1: self.x0 + r % w, x2: self.y0 + r / w, dir: EdgeDir::X }
        } else {
            let r = i - faces - xedges;
            ProjElement::Edge { x1: self.x0 + r % (w + 1), x2: self.y0 + r / (w + 1), dir: EdgeDir::Y }
        }
    }

    pub(crate) fn region(&self, e: ProjElement) -> Region {
        match self.node(e).map(|i| self.labels[i]) {
            None | Some(0) => Region::Exterior,
            Some(BLOCKED) => Region::Blocked,
            Some(k) => Region::Finite(k as u32),
        }
    }

    /// Interior in the nesting sense: blocked or in a bounded piece.
    pub(crate) fn is_interior(&self, e: ProjElement) -> bool {
        self.region(e) != Region::Exterior
    }

    pub(crate) fn finite_count(&self) -> u32 {
        self.finite
    }

    /// Elements of bounded pieces, with their piece number.
    pub(crate) fn finite_elements(&self) -> impl Iterator<Item = (ProjElement, u32)> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > 0)
            .map(|(i, &l)| (self.element(i), l as u32))
    }

    /// Faces of the margin grid in the unbounded piece.
    pub(crate) fn exterior_faces(&self) -> impl Iterator<Item = (i32, i32)> + '_ {
        (0..(self.w * self.h) as usize).filter(|&i| self.labels[i] == 0).map(|i| match self.element(i) {
            ProjElement::Face { x1, x2 } => (x1, x2),
            _ => unreachable!(),
        })
    }

    /// Column grid of the margin: origin and extent, for height propagation.
    pub(crate) fn face_grid(&self) -> (i32, i32, i32, i32) {
        (self.x0, self.y0, self.w, self.h)
    }
}

fn face_bbox(faces: &HashSet<(i32, i32)>) -> (i32, i32, i32, i32) {
    let x0 = faces.iter().map(|f| f.0).min().unwrap_or(0) - 1;
    let x1 = faces.iter().map(|f| f.0).max().unwrap_or(0) + 1;
    let y0 = faces.iter().map(|f| f.1).min().unwrap_or(0) - 1;
    let y1 = faces.iter().map(|f| f.1).max().unwrap_or(0) + 1;
    (x0, y0, x1, y1)
}

/// Bounded 4-connected pieces of the complement of a face set.
pub(crate) fn holes(faces: &HashSet<(i32, i32)>) -> Vec<Vec<(i32, i32)>> {
    let (x0, y0, x1, y1) = face_bbox(faces);
    let w = (x1 - x0 + 1) as usize;
    let h = (y1 - y0 + 1) as usize;
    let idx = |x: i32, y: i32| (y - y0) as usize * w + (x - x0) as usize;
    let mut label = vec![0u32; w * h];
    for &(x, y) in faces {
        label[idx(x, y)] = u32::MAX;
    }
    let mut queue = VecDeque::new();
    let mut next = 1;
    let mut out = Vec::new();
    for y in y0..=y1 {
        for x in x0..=x1 {
            if label[idx(x, y)] != 0 {
                continue;
            }
            label[idx(x, y)] = next;
            queue.push_back((x, y));
            let mut piece = Vec::new();
            let mut bounded = true;
            while let Some((a, b)) = queue.pop_front() {
                piece.push((a, b));
                if a == x0 || a == x1 || b == y0 || b == y1 {
                    bounded = false;
                }
                for (c, d) in [(a + 1, b), (a - 1, b), (a, b + 1), (a, b - 1)] {
                    if c < x0 || c > x1 || d < y0 || d > y1 {
                        continue;
                    }
                    let j = idx(c, d);
                    if label[j] == 0 {
                        label[j] = next;
                        queue.push_back((c, d));
                    }
                }
            }
            next += 1;
            if bounded {
                piece.sort_unstable();
                out.push(piece);
            }
        }
    }
    out
}

/// The face set together with all its holes.
pub(crate) fn fill_holes(faces: &HashSet<(i32, i32)>) -> Vec<(i32, i32)> {
    let mut out: Vec<(i32, i32)> = faces.iter().copied().collect();
    for piece in holes(faces) {
        out.extend(piece);
    }
    out.sort_unstable();
    out
}

/// Connected as a union of closed unit squares and without holes.
pub fn is_simply_connected(faces: &HashSet<(i32, i32)>) -> bool {
    let Some(&start) = faces.iter().next() else { return false };
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some((a, b)) = queue.pop_front() {
        for dx in -1..=1 {
            for dy in -1..=1 {
                let q = (a + dx, b + dy);
                if faces.contains(&q) && seen.insert(q) {
                    queue.push_back(q);
                }
            }
        }
    }
    seen.len() == faces.len() && holes(faces).is_empty()
}

/// Number of unit edges with exactly one side in the face set.
pub fn boundary_size(faces: &HashSet<(i32, i32)>) -> usize {
    faces
        .iter()
        .map(|&(x, y)| {
            [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)].iter().filter(|q| !faces.contains(q)).count()
        })
        .sum()
}

/// `isodim(S) <= d`, i.e. `|∂S| <= |S|^((d-1)/d)`.
///
/// Integer `d` is decided exactly as `|∂S|^d <= |S|^(d-1)`.
pub fn isodim_at_most(faces: &HashSet<(i32, i32)>, d: f64) -> Result<bool> {
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::InvalidQuery(format!("isoperimetric dimension must be positive, got {d}")));
    }
    if !is_simply_connected(faces) {
        return Err(Error::NotSimplyConnected);
    }
    let boundary = boundary_size(faces) as u64;
    let area = faces.len() as u64;
    if d.fract() == 0.0 && d <= 64.0 {
        use num_bigint::BigUint;
        let k = d as u32;
        return Ok(BigUint::from(boundary).pow(k) <= BigUint::from(area).pow(k - 1));
    }
    Ok(boundary as f64 <= (area as f64).powf((d - 1.0) / d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(k: i32) -> HashSet<(i32, i32)> {
        (0..k).flat_map(|x| (0..k).map(move |y| (x, y))).collect()
    }

    fn unit_square_edges() -> Vec<ProjElement> {
        plane_face_edges(0, 0).to_vec()
    }

    #[test]
    fn unit_loop_encloses_one_face() {
        let r = Regions::new(&unit_square_edges());
        assert_eq!(r.finite_count(), 1);
        assert_eq!(r.region(ProjElement::Face { x1: 0, x2: 0 }), Region::Finite(1));
        assert_eq!(r.region(ProjElement::Face { x1: 1, x2: 0 }), Region::Exterior);
        assert_eq!(r.region(ProjElement::Face { x1: 50, x2: 0 }), Region::Exterior);
        assert_eq!(r.region(unit_square_edges()[0]), Region::Blocked);
        let inner: Vec<_> = r.finite_elements().collect();
        assert_eq!(inner, vec![(ProjElement::Face { x1: 0, x2: 0 }, 1)]);
    }

    #[test]
    fn corner_touching_does_not_close() {
        // an open three-sided loop leaks through the missing edge
        let e = &unit_square_edges()[..3];
        let r = Regions::new(e);
        assert_eq!(r.finite_count(), 0);
    }

    #[test]
    fn blocked_face_separates_edges() {
        // a 3x3 block of faces with the middle missing: only the middle face
        // is enclosed, its edges being part of the closed ring
        let mut blocked = Vec::new();
        for x in 0..3 {
            for y in 0..3 {
                if (x, y) != (1, 1) {
                    blocked.push(ProjElement::Face { x1: x, x2: y });
                }
            }
        }
        let r = Regions::new(&blocked);
        assert_eq!(r.finite_count(), 1);
        assert_eq!(r.finite_elements().count(), 1);
    }

    #[test]
    fn hull_fills_holes() {
        let mut ring = square(3);
        ring.remove(&(1, 1));
        assert_eq!(holes(&ring), vec![vec![(1, 1)]]);
        assert_eq!(fill_holes(&ring).len(), 9);
        // diagonal contact does not enclose
        let diag: HashSet<_> = [(0, 0), (1, 1)].into_iter().collect();
        assert!(holes(&diag).is_empty());
        assert!(is_simply_connected(&diag));
        assert!(!is_simply_connected(&ring));
    }

    #[test]
    fn isodim_examples() {
        let s = square(16);
        assert_eq!(boundary_size(&s), 64);
        assert!(isodim_at_most(&s, 4.0).unwrap());
        assert!(!isodim_at_most(&s, 3.0).unwrap());
        assert!(!isodim_at_most(&s, 3.5).unwrap());
        assert!(isodim_at_most(&s, 4.5).unwrap());
        let one = square(1);
        for d in [1.0, 2.0, 4.0, 10.0, 64.0, 1000.0] {
            assert!(!isodim_at_most(&one, d).unwrap());
        }
        let mut ring = square(3);
        ring.remove(&(1, 1));
        assert!(matches!(isodim_at_most(&ring, 2.0), Err(Error::NotSimplyConnected)));
        assert!(isodim_at_most(&HashSet::new(), 2.0).is_err());
        assert!(isodim_at_most(&s, 0.0).is_err());
    }

    #[test]
    fn brute_force_minimal_hull() {
        // among all supersets of a ring inside its bounding box, the smallest
        // simply connected one is the filled ring
        let ring: HashSet<_> = [(0, 0), (1, 0), (2, 0), (0, 1), (2, 1), (0, 2), (1, 2), (2, 2), (3, 1)]
            .into_iter()
            .collect();
        let bbox: Vec<(i32, i32)> = (-1..5).flat_map(|x| (-1..4).map(move |y| (x, y))).collect();
        let free: Vec<(i32, i32)> = bbox.iter().copied().filter(|f| !ring.contains(f)).collect();
        let mut best: Option<usize> = None;
        let mut best_set = Vec::new();
        // supersets adding at most 2 faces suffice here
        for i in 0..free.len() {
            for j in i..free.len() {
                let mut s = ring.clone();
                s.insert(free[i]);
                s.insert(free[j]);
                if is_simply_connected(&s) && best.is_none_or(|b| s.len() < b) {
                    best = Some(s.len());
                    let mut v: Vec<_> = s.into_iter().collect();
                    v.sort_unstable();
                    best_set = v;
                }
            }
        }
        assert_eq!(best_set, fill_holes(&ring));
    }
}
