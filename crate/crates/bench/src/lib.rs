//! Shared fixtures for the kernel benchmarks in `benches/`.

use dobrushin::{extract_interface, BoxDims, Chain, FloorConstraint, Interface, ModelParams, SpinConfig, UpdateRule};

/// An equilibrated chain on an `n × n × h` box.
pub fn warm_chain(n: u32, h: u32, beta: f64, constraint: FloorConstraint) -> Chain {
    let p = ModelParams::new(BoxDims::new(n, n, h).expect("valid box"), beta).expect("valid beta");
    let mut chain = Chain::new(p, constraint, &SpinConfig::ground_state(p.dims), 1, UpdateRule::Metropolis)
        .expect("ground state is feasible");
    chain.run(200 * p.dims.num_cells() as u64);
    chain
}

/// A typical rough interface: β = 0.8 on a 16 × 16 base.
pub fn sample_interface() -> Interface {
    extract_interface(&warm_chain(16, 10, 0.8, FloorConstraint::None).config())
}
