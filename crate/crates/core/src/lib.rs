//! Maximum-confidence discrimination of the two qubit states left on an NV
//! center by a magnetic-field sensing sequence.
//!
//! - [`qmat`]: 2×2 and 3×3 complex matrices and closed-form Hermitian
//!   eigendecomposition.
//! - [`channel`]: dephasing and phase factors (ν, μ) for the noise and field
//!   models, and the resulting state pair.
//! - [`discrim`]: maximum-confidence and minimum-error measurements, the
//!   inconclusive-rate threshold, and a brute-force oracle.
//! - [`dilation`]: Neumark extension to a qutrit unitary and its two-level
//!   factorization.
//! - [`noise`]: Monte Carlo estimates of ν and of click statistics.

pub mod channel;
pub mod dilation;
pub mod discrim;
pub mod error;
pub mod noise;
pub mod qmat;

pub use channel::{build_state_pair, state_pair_at, FieldKind, FieldModel, NoiseModel, Protocol, StatePair, SwitchingFunction, GAMMA_NV};
pub use dilation::{decompose_two_level, dilate, Dilation, TwoLevel};
pub use discrim::{
    conditional_error, helstrom, helstrom_povm, mc_solve, threshold_measurement, Branch, McSolution, Outcome, Povm, ThresholdMeasurement,
};
pub use error::{Error, Result};
pub use qmat::{CMat2, CMat3, C64};
