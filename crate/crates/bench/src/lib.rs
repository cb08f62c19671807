//! Shared fixtures for the benchmarks in `benches/`.

use lunar3b::secular::PairGeometry;
use lunar3b::{DelaunayElements, JacobiState, LZParams, MassSystem};

/// A hierarchical, mutually inclined pair with `α = 1/15`.
pub fn lunar_pair() -> (MassSystem, DelaunayElements, DelaunayElements) {
    let ms = MassSystem::new(1.0, 0.5, 0.2).expect("valid masses");
    let geo = PairGeometry {
        a1: 1.0,
        e1: 0.3,
        g1: 0.5,
        a2: 15.0,
        e2: 0.2,
        g2: 0.7,
        mutual_inclination: 1.1,
        h: 0.0,
        l1: 0.1,
        l2: 0.3,
    };
    let (el1, el2) = geo.to_elements(&ms).expect("valid geometry");
    (ms, el1, el2)
}

pub fn lunar_state() -> (MassSystem, JacobiState) {
    let (ms, el1, el2) = lunar_pair();
    let s = JacobiState::from_elements(&el1, &el2, &ms).expect("valid elements");
    (ms, s)
}

/// Region 1 parameters used throughout the quadrupolar benchmarks.
pub fn reference_params() -> LZParams {
    LZParams::new(0.5, 0.2).expect("admissible")
}
