//! Fixtures shared by the benchmarks.

use nvconf::{build_state_pair, StatePair, C64};

/// Mixed-state pairs spread over the Bloch ball, one per branch of the
/// solver plus a generic interior point.
pub fn pairs() -> Vec<(&'static str, StatePair)> {
    let p = |nu: f64, phase: f64, eta0: f64| build_state_pair(nu, C64::from_polar(1.0, phase), eta0).expect("valid fixture");
    vec![
        ("interior", p(0.8, 2.1, 0.5)),
        ("skewed_priors", p(0.6, 1.3, 0.8)),
        ("near_identical", p(0.95, 0.05, 0.5)),
        ("orthogonal", p(1.0, std::f64::consts::PI, 0.5)),
    ]
}

/// Pulse counts used by the CPMG filter benchmark.
pub const PULSES: [u32; 4] = [2, 20, 200, 2000];
