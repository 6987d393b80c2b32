//! Fixtures shared by the criterion benchmarks in `benches/`.

use higgslab_core::bundle::{random_connection, random_higgs_pair};
use higgslab_core::{Connection, HiggsState, PairSpec, TorusGeometry};

/// Unit flat torus of complex dimension `n` with `m` points per axis.
pub fn torus(n: usize, m: usize) -> TorusGeometry {
    TorusGeometry::unit(n, m).expect("valid grid")
}

/// Rank-2 complex-gauge-orbit pair with polystable model data.
pub fn orbit_state(geom: &TorusGeometry, seed: u64) -> HiggsState {
    let (a, theta) = random_higgs_pair(geom, &PairSpec::new(seed, 2, 2, 0.3)).expect("orbit pair");
    HiggsState::new(a, theta)
}

/// Rank-2 random unitary connection.
pub fn connection(geom: &TorusGeometry, seed: u64) -> Connection {
    random_connection(geom, 2, seed, 0.8, 1)
}
