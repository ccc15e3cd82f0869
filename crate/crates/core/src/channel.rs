//! Dephasing factor ν, field phase factor μ and the state pair they define.
//!
//! Units throughout: time in µs, frequency in MHz, field in µT, coupling
//! strengths in µs⁻¹. With γ = 0.028 µs⁻¹·µT⁻¹ every exponent is
//! dimensionless.

use std::f64::consts::PI;

use crate::error::{ensure, Error, Result};
use crate::qmat::{cr, CMat2, C64};

/// NV gyromagnetic ratio, 28 Hz/nT, in µs⁻¹·µT⁻¹.
pub const GAMMA_NV: f64 = 0.028;

/// Decoherence model producing ν.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseModel {
    /// ν = exp(−(T/T₂*)^p). p = 2 for a single NV, p = 1 for an ensemble.
    StretchedExp { t2_star: f64, p: f64 },
    /// Ornstein–Uhlenbeck bath with ⟨B(0)B(t)⟩ = κ² e^{−|t|/τ_c}; ν = exp(−κ² W(T)).
    OuCpmg { kappa: f64, tau_c: f64 },
    /// Ensemble decay under CPMG: ν = exp(−(N^{1−s} / (2 T₂ f))^p).
    EnsembleCpmg { t2: f64, s: f64, p: f64 },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::StretchedExp { t2_star, p } => {
                ensure(t2_star > 0.0, "T2_star", t2_star, "> 0")?;
                ensure(p > 0.0, "p", p, "> 0")
            }
            NoiseModel::OuCpmg { kappa, tau_c } => {
                ensure(kappa >= 0.0, "kappa", kappa, ">= 0")?;
                ensure(tau_c > 0.0, "tau_c", tau_c, "> 0")
            }
            NoiseModel::EnsembleCpmg { t2, s, p } => {
                ensure(t2 > 0.0, "T2", t2, "> 0")?;
                ensure((0.0..1.0).contains(&s), "s", s, "in [0, 1)")?;
                ensure(p > 0.0, "p", p, "> 0")
            }
        }
    }

    /// Dephasing factor for the given protocol.
    pub fn nu(&self, protocol: &Protocol) -> Result<f64> {
        self.validate()?;
        match (*self, *protocol) {
            (NoiseModel::StretchedExp { t2_star, p }, Protocol::Free { t }) => nu_stretched(t2_star, p, t),
            (NoiseModel::OuCpmg { kappa, tau_c }, proto) => {
                let xi = proto.switching()?;
                Ok((-kappa * kappa * w_integral(1.0 / tau_c, &xi)?).exp())
            }
            (NoiseModel::EnsembleCpmg { t2, s, p }, Protocol::Cpmg { n, tau }) => {
                nu_ensemble_cpmg(t2, s, p, n, 1.0 / (2.0 * tau))
            }
            (NoiseModel::EnsembleCpmg { .. }, Protocol::Free { t }) => {
                Err(Error::Domain { name: "T", value: t, expected: "a CPMG protocol for the ensemble CPMG model" })
            }
            (NoiseModel::StretchedExp { .. }, Protocol::Cpmg { n, .. }) => Err(Error::Domain {
                name: "N",
                value: n as f64,
                expected: "free evolution for the stretched-exponential model",
            }),
        }
    }
}

/// What the sensor does during the interrogation window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Protocol {
    /// Ramsey-style free evolution for time `t`.
    Free { t: f64 },
    /// `n` π-pulses spaced `tau` apart; total time `n·tau`.
    Cpmg { n: u32, tau: f64 },
}

impl Protocol {
    /// CPMG with pulses at the nodes of a field oscillating at `f`: τ = 1/(2f).
    pub fn cpmg_at_nodes(n: u32, f: f64) -> Result<Self> {
        ensure(f > 0.0, "f", f, "> 0")?;
        Ok(Protocol::Cpmg { n, tau: 1.0 / (2.0 * f) })
    }

    pub fn total_time(&self) -> f64 {
        match *self {
            Protocol::Free { t } => t,
            Protocol::Cpmg { n, tau } => n as f64 * tau,
        }
    }

    pub fn switching(&self) -> Result<SwitchingFunction> {
        match *self {
            Protocol::Free { t } => SwitchingFunction::free(t),
            Protocol::Cpmg { n, tau } => xi_cpmg(n, tau),
        }
    }
}

/// Piecewise-constant ±1 modulation ξ(t) on [0, total], starting at +1.
#[derive(Clone, Debug, PartialEq)]
pub struct SwitchingFunction {
    flips: Vec<f64>,
    total: f64,
}

impl SwitchingFunction {
    pub fn free(total: f64) -> Result<Self> {
        ensure(total >= 0.0 && total.is_finite(), "T", total, ">= 0")?;
        Ok(SwitchingFunction { flips: Vec::new(), total })
    }

    /// Sign flips must be sorted and lie strictly inside (0, total).
    pub fn new(flips: Vec<f64>, total: f64) -> Result<Self> {
        ensure(total >= 0.0 && total.is_finite(), "T", total, ">= 0")?;
        let mut prev = 0.0;
        for &t in &flips {
            ensure(t > prev && t < total, "flip time", t, "sorted and inside (0, T)")?;
            prev = t;
        }
        Ok(SwitchingFunction { flips, total })
    }

    pub fn flips(&self) -> &[f64] {
        &self.flips
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// ξ(t); the value at a flip instant is the value after the flip.
    pub fn sign_at(&self, t: f64) -> f64 {
        let k = self.flips.partition_point(|&f| f <= t);
        if k % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Constant-sign pieces as `(start, end, sign)`.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let n = self.flips.len();
        (0..=n).map(move |k| {
            let start = if k == 0 { 0.0 } else { self.flips[k - 1] };
            let end = if k == n { self.total } else { self.flips[k] };
            (start, end, if k % 2 == 0 { 1.0 } else { -1.0 })
        })
    }

    /// ∫₀^T ξ(t) dt
    pub fn integral(&self) -> f64 {
        self.segments().map(|(a, b, s)| s * (b - a)).sum()
    }
}

/// Switching function of the CPMG block [U(τ/2) R(π) U(τ) R(π) U(τ/2)]^{N/2}.
///
/// Flips sit at τ/2, 3τ/2, …, (N − ½)τ and the total time is Nτ.
pub fn xi_cpmg(n: u32, tau: f64) -> Result<SwitchingFunction> {
    ensure(n >= 2 && n % 2 == 0, "N", n as f64, "an even pulse count >= 2")?;
    ensure(tau > 0.0 && tau.is_finite(), "tau", tau, "> 0")?;
    let flips = (0..n).map(|k| (k as f64 + 0.5) * tau).collect();
    Ok(SwitchingFunction { flips, total: n as f64 * tau })
}

/// ν = exp(−(T/T₂*)^p)
pub fn nu_stretched(t2_star: f64, p: f64, t: f64) -> Result<f64> {
    ensure(t >= 0.0, "T", t, ">= 0")?;
    ensure(t2_star > 0.0, "T2_star", t2_star, "> 0")?;
    ensure(p > 0.0, "p", p, "> 0")?;
    Ok((-(t / t2_star).powf(p)).exp())
}

/// ν = exp(−(N^{1−s} / (2 T₂ f))^p)
pub fn nu_ensemble_cpmg(t2: f64, s: f64, p: f64, n: u32, f: f64) -> Result<f64> {
    ensure(n >= 2 && n % 2 == 0, "N", n as f64, "an even pulse count >= 2")?;
    ensure(f > 0.0, "f", f, "> 0")?;
    NoiseModel::EnsembleCpmg { t2, s, p }.validate()?;
    let x = (n as f64).powf(1.0 - s) / (2.0 * t2 * f);
    Ok((-x.powf(p)).exp())
}

/// x − 1 + e^{−x}, accurate for small x.
fn decay_excess(x: f64) -> f64 {
    if x < 1e-2 {
        // alternating series; next term is below 1e-16 relative
        let mut term = x * x / 2.0;
        let mut sum = term;
        for k in 3..10 {
            term *= -x / k as f64;
            sum += term;
        }
        sum
    } else {
        x + (-x).exp_m1()
    }
}

/// W(T) = ∫₀^T e^{−Rs} p(s) ds with p(s) = ∫₀^{T−s} ξ(t)ξ(t+s) dt.
///
/// ξ is piecewise constant, so the double integral splits into per-segment
/// self terms `(x − 1 + e^{−x})/R²` and cross terms between segments that
/// factor into exponentials. The cross terms are accumulated in one pass.
pub fn w_integral(rate: f64, xi: &SwitchingFunction) -> Result<f64> {
    ensure(rate > 0.0 && rate.is_finite(), "R", rate, "> 0")?;
    let r2 = rate * rate;
    let mut w = 0.0;
    // Σ_{i<j} sᵢ (1 − e^{−R Lᵢ}) e^{−R (aⱼ − bᵢ)} for the upcoming segment j
    let mut carry = 0.0;
    for (a, b, sign) in xi.segments() {
        let x = rate * (b - a);
        let fill = -(-x).exp_m1();
        w += decay_excess(x) / r2 + sign * fill * carry / r2;
        carry = carry * (-x).exp() + sign * fill;
    }
    Ok(w)
}

/// ν = exp(−κ² W(T)) for an Ornstein–Uhlenbeck bath.
pub fn nu_ou(kappa: f64, tau_c: f64, xi: &SwitchingFunction) -> Result<f64> {
    NoiseModel::OuCpmg { kappa, tau_c }.validate()?;
    Ok((-kappa * kappa * w_integral(1.0 / tau_c, xi)?).exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    /// B(t) = b₀, known exactly.
    StaticKnown,
    /// B(t) = b with b ~ Normal(b₀, σ_b²).
    StaticGaussian,
    /// B(t) = b cos(2πft) with amplitude b ~ Normal(b₀, σ_b²).
    OscillatingGaussian,
}

/// Target field to be detected.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldModel {
    pub kind: FieldKind,
    /// µT
    pub b0: f64,
    /// µT
    pub sigma_b: f64,
    /// MHz; only used for the oscillating kind.
    pub f: f64,
    /// 1 for single-quantum, 2 for double-quantum magnetometry.
    pub delta_ms: u8,
    /// µs⁻¹·µT⁻¹
    pub gamma: f64,
}

impl FieldModel {
    pub fn static_known(b0: f64) -> Self {
        FieldModel { kind: FieldKind::StaticKnown, b0, sigma_b: 0.0, f: 0.0, delta_ms: 1, gamma: GAMMA_NV }
    }

    pub fn static_gaussian(b0: f64, sigma_b: f64) -> Self {
        FieldModel { kind: FieldKind::StaticGaussian, sigma_b, ..Self::static_known(b0) }
    }

    pub fn oscillating(b0: f64, sigma_b: f64, f: f64) -> Self {
        FieldModel { kind: FieldKind::OscillatingGaussian, sigma_b, f, ..Self::static_known(b0) }
    }

    pub fn with_delta_ms(self, delta_ms: u8) -> Self {
        FieldModel { delta_ms, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.b0.is_finite(), "b0", self.b0, "finite")?;
        ensure(self.sigma_b >= 0.0, "sigma_b", self.sigma_b, ">= 0")?;
        ensure(self.gamma > 0.0, "gamma", self.gamma, "> 0")?;
        ensure(matches!(self.delta_ms, 1 | 2), "delta_ms", self.delta_ms as f64, "1 or 2")?;
        if self.kind == FieldKind::OscillatingGaussian {
            ensure(self.f > 0.0, "f", self.f, "> 0")?;
        }
        Ok(())
    }

    /// Phase factor for the given protocol.
    pub fn mu(&self, protocol: &Protocol) -> Result<C64> {
        match (self.kind, *protocol) {
            (FieldKind::OscillatingGaussian, Protocol::Cpmg { n, .. }) => mu_cpmg(self, n),
            (FieldKind::OscillatingGaussian, Protocol::Free { t }) => {
                Err(Error::Domain { name: "T", value: t, expected: "a CPMG protocol for an oscillating field" })
            }
            (_, Protocol::Free { t }) => mu_static(self, t),
            (_, Protocol::Cpmg { n, .. }) => Err(Error::Domain {
                name: "N",
                value: n as f64,
                expected: "free evolution for a static field (CPMG refocuses it)",
            }),
        }
    }
}

/// μ for a static field after free evolution time `t`.
///
/// Known field: e^{−i2πγbTΔm}. Gaussian field: the same phase at b₀, damped
/// by e^{−2π²γ²T²σ_b²Δm²}.
pub fn mu_static(field: &FieldModel, t: f64) -> Result<C64> {
    field.validate()?;
    ensure(t >= 0.0, "T", t, ">= 0")?;
    ensure(field.kind != FieldKind::OscillatingGaussian, "f", field.f, "a static field")?;
    let dm = field.delta_ms as f64;
    let phase = -2.0 * PI * field.gamma * field.b0 * t * dm;
    let damping = match field.kind {
        FieldKind::StaticGaussian => {
            let g = PI * field.gamma * t * field.sigma_b * dm;
            (-2.0 * g * g).exp()
        }
        _ => 1.0,
    };
    Ok(C64::from_polar(damping, phase))
}

/// μ = e^{−i2Nγb₀/f} e^{−2N²γ²σ_b²/f²} for CPMG with pulses at the field nodes.
pub fn mu_cpmg(field: &FieldModel, n: u32) -> Result<C64> {
    field.validate()?;
    ensure(field.kind == FieldKind::OscillatingGaussian, "f", field.f, "an oscillating field")?;
    let n = n as f64;
    let phase = -2.0 * n * field.gamma * field.b0 / field.f;
    let g = n * field.gamma * field.sigma_b / field.f;
    Ok(C64::from_polar((-2.0 * g * g).exp(), phase))
}

/// The two hypotheses: ρ₀ (no field) and ρ₁ (field present), with priors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StatePair {
    pub nu: f64,
    pub mu: C64,
    pub eta0: f64,
    pub rho0: CMat2,
    pub rho1: CMat2,
    /// η₀ρ₀ + η₁ρ₁
    pub rho: CMat2,
}

impl StatePair {
    pub fn eta1(&self) -> f64 {
        1.0 - self.eta0
    }

    pub fn eta(&self, j: usize) -> f64 {
        if j == 0 {
            self.eta0
        } else {
            self.eta1()
        }
    }

    pub fn state(&self, j: usize) -> &CMat2 {
        if j == 0 {
            &self.rho0
        } else {
            &self.rho1
        }
    }
}

/// ρ₀ = ½(1 ν; ν 1), ρ₁ = ½(1 νμ; νμ* 1).
///
/// ν = 0 is accepted: both states are then maximally mixed.
pub fn build_state_pair(nu: f64, mu: C64, eta0: f64) -> Result<StatePair> {
    ensure((0.0..=1.0).contains(&nu), "nu", nu, "in [0, 1]")?;
    ensure(mu.norm() <= 1.0 + 1e-12, "|mu|", mu.norm(), "<= 1")?;
    ensure(eta0 > 0.0 && eta0 < 1.0, "eta0", eta0, "in (0, 1)")?;
    let half = cr(0.5);
    let rho0 = CMat2::new(half, cr(0.5 * nu), cr(0.5 * nu), half);
    let coh = mu * (0.5 * nu);
    let rho1 = CMat2::new(half, coh, coh.conj(), half);
    let rho = rho0 * eta0 + rho1 * (1.0 - eta0);
    Ok(StatePair { nu, mu, eta0, rho0, rho1, rho })
}

/// State pair for a noise/field model at one protocol point.
pub fn state_pair_at(noise: &NoiseModel, field: &FieldModel, protocol: &Protocol, eta0: f64) -> Result<StatePair> {
    build_state_pair(noise.nu(protocol)?, field.mu(protocol)?, eta0)
}
