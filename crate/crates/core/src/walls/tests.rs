use std::collections::HashSet;

use proptest::prelude::*;

use super::*;
use crate::geometry::{plane_face_edges, CellId, EdgeDir};
use crate::interface::{extract_interface, satisfies_floor};
use crate::spin::SpinConfig;

fn dims(n: u32, h: u32) -> BoxDims {
    BoxDims::new(n, n, h).unwrap()
}

fn with_cells(d: BoxDims, cells: &[(i32, i32, i32)]) -> Interface {
    let mut c = SpinConfig::ground_state(d);
    for &(x, y, z) in cells {
        c.flip(CellId::new(x, y, z)).unwrap();
    }
    extract_interface(&c)
}

fn plateau(d: BoxDims, half: i32, extra: &[(i32, i32, i32)]) -> Interface {
    let mut cells: Vec<(i32, i32, i32)> = Vec::new();
    for x in -half..=half {
        for y in -half..=half {
            cells.push((x, y, 0));
        }
    }
    cells.extend_from_slice(extra);
    with_cells(d, &cells)
}

fn face(x1: i32, x2: i32) -> ProjElement {
    ProjElement::Face { x1, x2 }
}

#[test]
fn classification() {
    let d = dims(3, 4);
    let (c, w) = classify_faces(&Interface::flat(d));
    assert_eq!((c.len(), w.len()), (9, 0));
    let bump = with_cells(d, &[(0, 0, 0)]);
    let (c, w) = classify_faces(&bump);
    assert_eq!((c.len(), w.len()), (9, 4));
    assert!(c.contains(&FaceId::horizontal(0, 0, 1)));
    // an overhang puts two horizontal faces over the same column
    let d = dims(5, 6);
    let over = with_cells(d, &[(0, 0, 0), (0, 0, 1), (1, 0, 1)]);
    let (_, w) = classify_faces(&over);
    assert!(w.contains(&FaceId::horizontal(1, 0, 1)));
    assert!(w.contains(&FaceId::horizontal(1, 0, 2)));
}

#[test]
fn flat_and_bump_decomposition() {
    let d = dims(3, 4);
    let flat = decompose(&Interface::flat(d));
    assert!(flat.walls.is_empty());
    assert_eq!(flat.ceilings.len(), 1);
    assert_eq!(flat.ceilings[0].height, 0);
    assert!(flat.index_map.iter().all(Option::is_none));

    let deco = decompose(&with_cells(d, &[(0, 0, 0)]));
    assert_eq!(deco.walls.len(), 1);
    let w = &deco.walls[0];
    assert_eq!(w.len(), 4);
    assert_eq!(w.supporting_ceiling_height, 0);
    assert_eq!(excess_energy(w), 4);
    let mut heights: Vec<(i32, usize)> = deco.ceilings.iter().map(|c| (c.height, c.area())).collect();
    heights.sort_unstable();
    assert_eq!(heights, vec![(0, 8), (1, 1)]);
    for (c, p) in deco.ceilings.iter().zip(&deco.ceiling_parent) {
        assert_eq!(p.is_some(), c.height == 1);
    }
    let mut hull = plane_face_edges(0, 0).to_vec();
    hull.push(face(0, 0));
    hull.sort_unstable();
    assert_eq!(deco.hull_wall(0), hull);
    assert_eq!(standardize(w), *w);
    let center = d.column_index(0, 0).unwrap();
    for (k, slot) in deco.index_map.iter().enumerate() {
        assert_eq!(slot.is_some(), k == center);
    }
    assert_eq!(deco.nested_walls_at(face(0, 0)), vec![0]);
    assert!(deco.nested_walls_at(face(1, 1)).is_empty());
    assert_eq!(deco.wall_cluster(0).members, vec![0]);
}

#[test]
fn two_far_bumps() {
    let d = dims(7, 4);
    let deco = decompose(&with_cells(d, &[(-2, -2, 0), (2, 2, 0)]));
    assert_eq!(deco.walls.len(), 2);
    assert_eq!(deco.ceilings.len(), 3);
    assert_eq!(deco.total_excess(), 8);
    assert!(deco.wall_parent.iter().all(Option::is_none));
}

#[test]
fn bump_on_plateau() {
    let d = dims(9, 6);
    let iface = plateau(d, 2, &[(0, 0, 1)]);
    let deco = decompose(&iface);
    assert_eq!(deco.walls.len(), 2);
    let big = (0..2).max_by_key(|&i| deco.walls[i].len()).unwrap();
    let small = 1 - big;
    assert_eq!(deco.walls[big].len(), 20);
    assert_eq!(deco.walls[big].supporting_ceiling_height, 0);
    assert_eq!(deco.walls[small].supporting_ceiling_height, 1);
    assert_eq!(deco.wall_parent[small], Some(big));
    assert_eq!(deco.standardize(small), deco.walls[small].translate(-1));
    let st = deco.standardize(small);
    assert_eq!(standardize(&st), st);
    assert_eq!(deco.nested_walls_at(face(0, 0)), vec![big, small]);
    let profile: Vec<(i32, usize)> = deco.area_by_height().into_iter().collect();
    assert_eq!(profile, vec![(0, 81 - 25), (1, 24), (2, 1)]);

    // the height-1 ceiling is an annulus; its hull is the full 5x5 block,
    // which is also the bounded piece of the plateau wall's complement
    let annulus = deco.ceilings.iter().position(|c| c.height == 1).unwrap();
    let hull = deco.hull_ceiling(annulus);
    assert_eq!(hull.len(), 25);
    let mut piece = deco.interior_pieces(big).pop().unwrap();
    piece.sort_unstable();
    assert_eq!(piece, hull);
    assert_eq!(deco.ceiling_parent[annulus], Some(big));

    // close nesting: distance 2 does not exceed the bump's excess 4
    assert_eq!(deco.wall_cluster(big).members, vec![0, 1]);
    assert_eq!(projection_distance(&deco.walls[big], &deco.walls[small]), 2.0);
}

#[test]
fn wide_plateau_cluster_excludes_bump() {
    let d = dims(15, 6);
    let deco = decompose(&plateau(d, 5, &[(0, 0, 1)]));
    let big = (0..2).max_by_key(|&i| deco.walls[i].len()).unwrap();
    assert_eq!(projection_distance(&deco.walls[0], &deco.walls[1]), 5.0);
    assert_eq!(deco.wall_cluster(big).members, vec![big]);
}

#[test]
fn reconstruction_examples() {
    let d = dims(3, 4);
    assert_eq!(reconstruct(&StandardWallCollection::empty(d)).unwrap(), Interface::flat(d));
    let bump = with_cells(d, &[(0, 0, 0)]);
    let rep = standard_rep(&bump);
    assert_eq!(rep.walls.len(), 1);
    assert_eq!(reconstruct(&rep).unwrap(), bump);

    let d = dims(9, 6);
    let iface = plateau(d, 2, &[(0, 0, 1), (-2, 2, -1)]);
    assert_eq!(reconstruct(&standard_rep(&iface)).unwrap(), iface);
}

#[test]
fn inadmissible_collection_rejected() {
    let d = dims(3, 4);
    let a = standard_rep(&with_cells(d, &[(0, 0, 0)])).walls;
    let b = standard_rep(&with_cells(d, &[(1, 0, 0)])).walls;
    let coll = StandardWallCollection::new(d, [a, b].concat());
    assert!(!admissible(&coll));
    assert!(matches!(reconstruct(&coll), Err(crate::Error::InvalidCollection(_))));
}

#[test]
fn non_standard_wall_rejected() {
    let d = dims(3, 4);
    let w = standard_rep(&with_cells(d, &[(0, 0, 0)])).walls[0].translate(1);
    let coll = StandardWallCollection::new(d, vec![w]);
    assert!(reconstruct(&coll).is_err());
}

#[test]
fn excess_relations() {
    let d = dims(3, 4);
    let flat = Interface::flat(d);
    assert_eq!(excess_rel(&flat, &flat), 0);
    let bump = with_cells(d, &[(0, 0, 0)]);
    assert_eq!(excess_rel(&bump, &flat), 4);
    assert_eq!(decompose(&bump).total_excess(), 4);
}

#[test]
fn shift_examples() {
    let d = dims(2, 2);
    let flat = Interface::flat(d);
    let s = shift_up(&flat, 1);
    assert_eq!(s.len(), 12);
    assert_eq!(s.faces().iter().filter(|f| f.is_horizontal() && f.max_height() == 1).count(), 4);
    assert_eq!(s.faces().iter().filter(|f| !f.is_horizontal()).count(), 8);
    assert_eq!(s.len() - flat.len(), 8);
    assert!(crate::interface::spin_from_interface(&s).is_ok());

    for n in [3u32, 4, 6] {
        let flat = Interface::flat(dims(n, 4));
        let s = shift_up(&flat, 2);
        assert_eq!(s.len() - flat.len(), 8 * n as usize);
        assert!(s.faces().iter().filter(|f| f.is_horizontal()).all(|f| f.max_height() == 2));
    }

    let d = dims(5, 6);
    let bump = with_cells(d, &[(0, 0, 0)]);
    let s = shift_up(&bump, 1);
    assert!(s.contains(FaceId::horizontal(0, 0, 2)));
    let (img_ceiling, _) = classify_faces(&s);
    let img: HashSet<FaceId> = img_ceiling.into_iter().collect();
    for c in decompose(&bump).ceilings {
        assert!(c.faces.iter().all(|f| img.contains(&f.translate(0, 0, 1))));
    }
}

#[test]
fn shift_grows_box_when_needed() {
    let d = dims(2, 2);
    let s = shift_up(&Interface::flat(d), 3);
    assert!(s.dims().h >= 6);
    assert!(crate::interface::spin_from_interface(&s).is_ok());
}

fn check_invariants(iface: &Interface) -> Result<(), TestCaseError> {
    let deco = decompose(iface);
    prop_assert_eq!(deco.total_excess() as i64, excess_rel(iface, &Interface::flat(iface.dims())));
    for (i, w) in deco.walls.iter().enumerate() {
        let m = excess_energy(w);
        prop_assert!(2 * m >= w.len() as u64);
        prop_assert!(m >= w.projection.len() as u64);
        let hull: HashSet<ProjElement> = deco.hull_wall(i).into_iter().collect();
        for j in deco.wall_cluster(i).members {
            prop_assert!(deco.walls[j].projection.iter().all(|e| hull.contains(e)));
        }
        let faces: Vec<(i32, i32)> = deco.interior_pieces(i).concat();
        for a in &faces {
            for b in &faces {
                let dist = (((a.0 - b.0).pow(2) + (a.1 - b.1).pow(2)) as f64).sqrt();
                prop_assert!(dist <= m as f64);
            }
        }
    }
    let rep = standard_rep(iface);
    prop_assert_eq!(&reconstruct(&rep).unwrap(), iface);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn random_interfaces_satisfy_wall_identities(bits in any::<u64>()) {
        let d = BoxDims::new(3, 3, 4).unwrap();
        let iface = extract_interface(&SpinConfig::from_bits(d, bits & ((1 << 36) - 1)));
        check_invariants(&iface)?;
    }

    #[test]
    fn sparse_random_interfaces(cells in proptest::collection::vec((-3i32..3, -3i32..3, -2i32..2), 0..12)) {
        let d = BoxDims::new(6, 6, 6).unwrap();
        let iface = with_cells(d, &cells);
        check_invariants(&iface)?;
        for k in 1..=2u32 {
            let s = shift_up(&iface, k);
            prop_assert!(crate::interface::spin_from_interface(&s).is_ok());
            prop_assert!(s.len() as i64 - iface.len() as i64 <= 4 * k as i64 * 6);
            let floor = (-iface.min_height()).max(0) as u32;
            prop_assert!(satisfies_floor(&iface, floor));
            let band: HashSet<FaceId> = boundary_band(s.dims(), k).into_iter().collect();
            for f in s.faces() {
                if !band.contains(f) {
                    prop_assert!(f.min_height() >= k as i32 - floor as i32);
                }
            }
        }
    }
}

#[test]
fn edge_projection_convention() {
    let w = Wall::new(vec![FaceId::new(CellId::new(0, 0, 0), crate::geometry::Axis::Y)], 0);
    assert_eq!(w.projection, vec![ProjElement::Edge { x1: 0, x2: 1, dir: EdgeDir::X }]);
}
