//! Ising configurations on a box with Dobrushin boundary conditions.
//!
//! The Hamiltonian counts disagreeing nearest-neighbour pairs, so the inverse
//! temperature `beta` used throughout is twice the usual ferromagnetic
//! coupling `J` of `-J Σ σσ'`. The 3D critical point sits near `beta ≈ 0.44`
//! in these units; low-temperature experiments use `beta ≥ 0.9`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoxDims, CellId, FaceGrid, FaceId};

/// Boundary spin: minus strictly above height 0, plus strictly below.
pub fn dobrushin_spin(cell: CellId) -> i8 {
    if cell.x3 >= 0 {
        -1
    } else {
        1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub dims: BoxDims,
    pub beta: f64,
}

impl ModelParams {
    pub fn new(dims: BoxDims, beta: f64) -> Result<Self> {
        dims.validate()?;
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::InvalidQuery(format!("beta must be finite and nonnegative, got {beta}")));
        }
        Ok(ModelParams { dims, beta })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpinConfig {
    dims: BoxDims,
    spins: Vec<i8>,
}

impl SpinConfig {
    /// Every in-box cell takes its boundary value.
    pub fn ground_state(dims: BoxDims) -> Self {
        let spins = (0..dims.num_cells()).map(|i| dobrushin_spin(dims.cell_at(i))).collect();
        SpinConfig { dims, spins }
    }

    pub fn uniform(dims: BoxDims, spin: i8) -> Self {
        SpinConfig { dims, spins: vec![spin.signum(); dims.num_cells()] }
    }

    pub fn from_spins(dims: BoxDims, spins: Vec<i8>) -> Result<Self> {
        if spins.len() != dims.num_cells() {
            return Err(Error::InvalidQuery(format!(
                "{} spins for a box of {} cells",
                spins.len(),
                dims.num_cells()
            )));
        }
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidQuery("spins must be +1 or -1".into()));
        }
        Ok(SpinConfig { dims, spins })
    }

    /// Bit `i` set means cell `i` (dense order) is plus.
    pub fn from_bits(dims: BoxDims, bits: u64) -> Self {
        let spins = (0..dims.num_cells()).map(|i| if bits >> i & 1 == 1 { 1 } else { -1 }).collect();
        SpinConfig { dims, spins }
    }

    pub fn to_bits(&self) -> u64 {
        debug_assert!(self.spins.len() <= 64);
        self.spins
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &s)| if s > 0 { acc | 1 << i } else { acc })
    }

    pub fn dims(&self) -> BoxDims {
        self.dims
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    /// Spin of any cell of ℤ³; cells outside the box take the boundary value.
    pub fn get(&self, cell: CellId) -> i8 {
        match self.dims.cell_index(cell) {
            Some(i) => self.spins[i],
            None => dobrushin_spin(cell),
        }
    }

    pub fn set(&mut self, cell: CellId, spin: i8) -> Result<()> {
        let i = self.index_of(cell)?;
        self.spins[i] = spin.signum();
        Ok(())
    }

    pub fn flip(&mut self, cell: CellId) -> Result<()> {
        let i = self.index_of(cell)?;
        self.spins[i] = -self.spins[i];
        Ok(())
    }

    pub fn flipped(&self, cell: CellId) -> Result<Self> {
        let mut c = self.clone();
        c.flip(cell)?;
        Ok(c)
    }

    fn index_of(&self, cell: CellId) -> Result<usize> {
        self.dims.cell_index(cell).ok_or(Error::OutOfBox(cell.x1, cell.x2, cell.x3))
    }

    /// Global spin flip composed with `x3 ↦ -x3`.
    pub fn reflect_and_negate(&self) -> Self {
        let d = self.dims;
        let spins = (0..d.num_cells())
            .map(|i| {
                let c = d.cell_at(i);
                -self.get(CellId::new(c.x1, c.x2, -c.x3 - 1))
            })
            .collect();
        SpinConfig { dims: d, spins }
    }

    pub fn to_snapshot(&self, beta: f64) -> SpinSnapshot {
        SpinSnapshot { dims: self.dims, beta, spins: encode_rle(&self.spins) }
    }

    pub fn from_snapshot(s: &SpinSnapshot) -> Result<Self> {
        s.dims.validate()?;
        SpinConfig::from_spins(s.dims, decode_rle(&s.spins)?)
    }
}

/// JSON snapshot: spins in dense cell order, run-length encoded as `4+4-`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinSnapshot {
    pub dims: BoxDims,
    pub beta: f64,
    pub spins: String,
}

fn encode_rle(spins: &[i8]) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < spins.len() {
        let s = spins[i];
        let mut j = i;
        while j < spins.len() && spins[j] == s {
            j += 1;
        }
        out.push_str(&(j - i).to_string());
        out.push(if s > 0 { '+' } else { '-' });
        i = j;
    }
    out
}

fn decode_rle(s: &str) -> Result<Vec<i8>> {
    let mut out = Vec::new();
    let mut num = String::new();
    for ch in s.chars() {
        match ch {
            '0'..='9' => num.push(ch),
            '+' | '-' => {
                let k: usize = num
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad run length before '{ch}' in spin string")))?;
                out.extend(std::iter::repeat_n(if ch == '+' { 1 } else { -1 }, k));
                num.clear();
            }
            c if c.is_whitespace() => {}
            c => return Err(Error::Parse(format!("unexpected character '{c}' in spin string"))),
        }
    }
    if !num.is_empty() {
        return Err(Error::Parse("dangling run length in spin string".into()));
    }
    Ok(out)
}

/// Number of disagreeing nearest-neighbour pairs over every face with at least
/// one bounding cell in the box.
pub fn hamiltonian(config: &SpinConfig) -> u64 {
    let grid = FaceGrid::new(config.dims);
    grid.faces().filter(|&f| separates(config, f)).count() as u64
}

fn separates(config: &SpinConfig, f: FaceId) -> bool {
    let (a, b) = f.cells();
    config.get(a) != config.get(b)
}

/// Energy change from flipping one in-box cell.
pub fn delta_energy(config: &SpinConfig, cell: CellId) -> Result<i64> {
    let s = config.get(cell);
    if !config.dims.contains(cell) {
        return Err(Error::OutOfBox(cell.x1, cell.x2, cell.x3));
    }
    Ok(cell.neighbors().iter().map(|&nb| (s * config.get(nb)) as i64).sum())
}

/// All faces (in the box) separating cells of differing spin, sorted.
pub fn separating_faces(config: &SpinConfig) -> Vec<FaceId> {
    let grid = FaceGrid::new(config.dims);
    let mut out: Vec<FaceId> = grid.faces().filter(|&f| separates(config, f)).collect();
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn d222() -> BoxDims {
        BoxDims::new(2, 2, 2).unwrap()
    }

    #[test]
    fn boundary_spins() {
        assert_eq!(dobrushin_spin(CellId::new(0, 0, 0)), -1);
        assert_eq!(dobrushin_spin(CellId::new(0, 0, -1)), 1);
        assert_eq!(dobrushin_spin(CellId::new(5, -3, 3)), -1);
    }

    #[test]
    fn small_box_energies() {
        let g = SpinConfig::ground_state(d222());
        assert_eq!(hamiltonian(&g), 4);
        assert_eq!(separating_faces(&g).len(), 4);
        assert!(separating_faces(&g).iter().all(|f| f.is_horizontal() && f.anchor.x3 == -1));

        let one = g.flipped(CellId::new(0, 0, 0)).unwrap();
        assert_eq!(hamiltonian(&one), 8);

        // all plus: the 4 top faces and 8 upper lateral faces disagree with
        // the minus boundary; nothing else does
        let plus = SpinConfig::uniform(d222(), 1);
        assert_eq!(hamiltonian(&plus), 12);
        assert_eq!(separating_faces(&plus).len(), 12);
    }

    #[test]
    fn delta_examples() {
        let g = SpinConfig::ground_state(d222());
        let c = CellId::new(0, 0, 0);
        assert_eq!(delta_energy(&g, c).unwrap(), 4);
        let f = g.flipped(c).unwrap();
        assert_eq!(delta_energy(&f, c).unwrap(), -4);
        assert!(delta_energy(&g, CellId::new(3, 0, 0)).is_err());
    }

    #[test]
    fn delta_matches_recomputation_on_random_configs() {
        let d = BoxDims::new(2, 2, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let cfg = SpinConfig::from_bits(d, rng.random::<u64>() & 0xffff);
            let cell = d.cell_at(rng.random_range(0..d.num_cells()));
            let before = hamiltonian(&cfg) as i64;
            let after = hamiltonian(&cfg.flipped(cell).unwrap()) as i64;
            assert_eq!(after - before, delta_energy(&cfg, cell).unwrap());
        }
    }

    #[test]
    fn ground_state_has_no_bubbles() {
        for (n, m, h) in [(1, 1, 2), (3, 2, 4), (5, 5, 6)] {
            let g = SpinConfig::ground_state(BoxDims::new(n, m, h).unwrap());
            assert_eq!(hamiltonian(&g), separating_faces(&g).len() as u64);
            assert_eq!(hamiltonian(&g), (n * m) as u64);
        }
    }

    #[test]
    fn snapshot_roundtrip() {
        let d = BoxDims::new(2, 2, 2).unwrap();
        let g = SpinConfig::ground_state(d);
        let snap = g.to_snapshot(0.9);
        assert_eq!(snap.spins, "4+4-");
        let json = serde_json::to_string(&snap).unwrap();
        let back: SpinSnapshot = serde_json::from_str(&json).unwrap();
        assert_eq!(SpinConfig::from_snapshot(&back).unwrap(), g);
        assert!(decode_rle("3+x").is_err());
        assert!(decode_rle("3").is_err());
    }

    proptest! {
        #[test]
        fn reflection_symmetry_preserves_energy(bits in 0u64..(1 << 18)) {
            let d = BoxDims::new(3, 3, 2).unwrap();
            let c = SpinConfig::from_bits(d, bits);
            prop_assert_eq!(hamiltonian(&c), hamiltonian(&c.reflect_and_negate()));
        }

        #[test]
        fn rle_roundtrip(bits in any::<u64>()) {
            let d = BoxDims::new(4, 4, 4).unwrap();
            let c = SpinConfig::from_bits(d, bits);
            let back = SpinConfig::from_snapshot(&c.to_snapshot(1.0)).unwrap();
            prop_assert_eq!(back, c);
        }
    }
}
