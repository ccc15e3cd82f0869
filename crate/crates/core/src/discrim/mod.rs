//! Maximum-confidence discrimination of the state pair.
//!
//! For two qubit states with priors η₀, η₁ and ρ = η₀ρ₀ + η₁ρ₁, the best
//! achievable confidence for outcome j is the largest eigenvalue of
//! ρ̃ⱼ = ηⱼ ρ^{−1/2} ρⱼ ρ^{−1/2}. On the support of ρ the two operators sum to
//! the identity, so both confidences follow from the spectrum of ρ̃₀ alone:
//! C₀ = γ_max and C₁ = 1 − γ_min. The optimal detectors point along
//! ρ^{−1/2}|γ⟩ for the two eigenvectors; their weights are then chosen to
//! minimize the inconclusive rate.
//!
//! Outcome labels are always `0`, `1` and `?`. With ρ_ij = ⟨γᵢ|ρ|γⱼ⟩ in the
//! eigenbasis of ρ̃₀ (γ₀ for γ_max), the weights are:
//!
//! | condition          | branch       | a   | b   | P_inc            |
//! |--------------------|--------------|-----|-----|------------------|
//! | \|ρ₀₁\| ≥ ρ₁₁       | `BoundaryA`  | 1   | 0   | 1 − det ρ / ρ₁₁  |
//! | \|ρ₀₁\| ≥ ρ₀₀       | `BoundaryB`  | 0   | 1   | 1 − det ρ / ρ₀₀  |
//! | otherwise          | `Interior`   | a₀  | b₀  | 2\|ρ₀₁\|          |
//!
//! This assignment is the one that agrees with the brute-force search in
//! [`povm_oracle`].

mod oracle;

use std::fmt;

pub use oracle::{oracle_confidences, povm_oracle, povm_oracle_with_slack, OracleResult, ORACLE_MIN_DENSITY};

use crate::channel::StatePair;
use crate::error::{ensure, Error, Result};
use crate::qmat::{
    fix_phase, herm_eig2, normalize2, psd_pow, psd_rank, CMat2, EigPair2, Ket2, DEGENERACY_TOL, ONE, ZERO,
};

/// Measurement outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Zero,
    One,
    Inconclusive,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::Zero, Outcome::One, Outcome::Inconclusive];

    pub fn index(self) -> usize {
        match self {
            Outcome::Zero => 0,
            Outcome::One => 1,
            Outcome::Inconclusive => 2,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Zero => "0",
            Outcome::One => "1",
            Outcome::Inconclusive => "?",
        })
    }
}

/// Three-outcome qubit measurement {Π₀, Π₁, Π_?}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Povm {
    pub pi0: CMat2,
    pub pi1: CMat2,
    pub pi_inc: CMat2,
}

impl Povm {
    /// Π₀ = a|v⟩⟨v|, Π₁ = b|w⟩⟨w|, Π_? = I − Π₀ − Π₁.
    pub fn from_rank_one(a: f64, v: &Ket2, b: f64, w: &Ket2) -> Self {
        let pi0 = CMat2::projector(v) * a;
        let pi1 = CMat2::projector(w) * b;
        Povm { pi0, pi1, pi_inc: CMat2::identity() - pi0 - pi1 }
    }

    /// Two-outcome measurement with Π₀ = `pi0`, Π₁ = I − `pi0` and no
    /// inconclusive outcome.
    pub fn two_outcome(pi0: CMat2) -> Self {
        Povm { pi0, pi1: CMat2::identity() - pi0, pi_inc: CMat2::zero() }
    }

    pub fn element(&self, k: Outcome) -> &CMat2 {
        match k {
            Outcome::Zero => &self.pi0,
            Outcome::One => &self.pi1,
            Outcome::Inconclusive => &self.pi_inc,
        }
    }

    /// Tr(ρ Π_k) for each outcome, in `Outcome::ALL` order.
    pub fn probabilities(&self, state: &CMat2) -> [f64; 3] {
        Outcome::ALL.map(|k| state.trace_with(self.element(k)))
    }

    /// Tr(ρ Π_?)
    pub fn inconclusive_rate(&self, pair: &StatePair) -> f64 {
        pair.rho.trace_with(&self.pi_inc)
    }

    /// Cⱼ = ηⱼ Tr(ρⱼ Πⱼ) / Tr(ρ Πⱼ); `None` when outcome j never fires.
    pub fn confidence(&self, pair: &StatePair, j: usize) -> Option<f64> {
        let pi = if j == 0 { &self.pi0 } else { &self.pi1 };
        let fire = pair.rho.trace_with(pi);
        (fire > 1e-14).then(|| (pair.eta(j) * pair.state(j).trace_with(pi) / fire).clamp(0.0, 1.0))
    }

    /// max |Π₀ + Π₁ + Π_? − I|
    pub fn completeness_error(&self) -> f64 {
        (self.pi0 + self.pi1 + self.pi_inc).max_abs_diff(&CMat2::identity())
    }

    /// Smallest eigenvalue over the three elements.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let mut lo = f64::INFINITY;
        for k in Outcome::ALL {
            lo = lo.min(herm_eig2(self.element(k))?.min());
        }
        Ok(lo)
    }

    /// (1 − λ)·self + λ·other
    pub fn mix(&self, other: &Povm, lambda: f64) -> Povm {
        let m = |x: &CMat2, y: &CMat2| *x * (1.0 - lambda) + *y * lambda;
        Povm {
            pi0: m(&self.pi0, &other.pi0),
            pi1: m(&self.pi1, &other.pi1),
            pi_inc: m(&self.pi_inc, &other.pi_inc),
        }
    }
}

/// Which regime of the optimal weights a solution falls in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    /// Both detectors have nonzero weight; Π_? is rank one.
    Interior,
    /// Only the `0` detector fires conclusively (a = 1, b = 0).
    BoundaryA,
    /// Only the `1` detector fires conclusively (a = 0, b = 1).
    BoundaryB,
    /// The states cannot be told apart; confidences equal the priors.
    Degenerate,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Interior => "interior",
            Branch::BoundaryA => "boundary_a",
            Branch::BoundaryB => "boundary_b",
            Branch::Degenerate => "degenerate",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Optimal maximum-confidence measurement for one state pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McSolution {
    pub c0_max: f64,
    pub c1_max: f64,
    pub p_inc_opt: f64,
    pub povm: Povm,
    pub branch: Branch,
    /// Eigendecomposition of ρ̃₀ (ascending, so `vectors[1]` is |γ₀⟩).
    pub gamma: EigPair2,
    /// ρ in the {|γ₀⟩, |γ₁⟩} basis.
    pub rho_g: CMat2,
    /// Weight of Π₀ = a|v⟩⟨v|.
    pub a: f64,
    /// Weight of Π₁ = b|w⟩⟨w|.
    pub b: f64,
    pub v: Ket2,
    pub w: Ket2,
}

const PLUS: Ket2 = [num_complex::Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0); 2];
const MINUS: Ket2 = [
    num_complex::Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
    num_complex::Complex64::new(-std::f64::consts::FRAC_1_SQRT_2, 0.0),
];

fn degenerate(pair: &StatePair, gamma: EigPair2) -> McSolution {
    McSolution {
        c0_max: pair.eta0,
        c1_max: pair.eta1(),
        p_inc_opt: 0.0,
        povm: Povm::from_rank_one(1.0, &PLUS, 1.0, &MINUS),
        branch: Branch::Degenerate,
        gamma,
        rho_g: pair.rho,
        a: 1.0,
        b: 1.0,
        v: PLUS,
        w: MINUS,
    }
}

fn symmetrized(m: CMat2) -> CMat2 {
    (m + m.adjoint()) * 0.5
}

/// Closed-form maximum-confidence measurement with minimal inconclusive rate.
pub fn mc_solve(pair: &StatePair) -> Result<McSolution> {
    ensure(pair.eta0 > 0.0 && pair.eta0 < 1.0, "eta0", pair.eta0, "in (0, 1)")?;
    let rho = pair.rho;
    if psd_rank(&rho)? < 2 {
        // ρ₀ = ρ₁ pure: nothing outside the common support to exploit
        let gamma = EigPair2 { values: [pair.eta0, pair.eta0], vectors: [[ONE, ZERO], [ZERO, ONE]] };
        return Ok(degenerate(pair, gamma));
    }

    let inv_sqrt = psd_pow(&rho, -0.5)?;
    let tilde0 = symmetrized(inv_sqrt * pair.rho0 * inv_sqrt * pair.eta0);
    let gamma = herm_eig2(&tilde0)?;
    if gamma.gap() <= DEGENERACY_TOL {
        return Ok(degenerate(pair, gamma));
    }

    let g_max = gamma.vectors[1];
    let g_min = gamma.vectors[0];
    let r00 = rho.expect(&g_max);
    let r11 = rho.expect(&g_min);
    let r01 = rho.sandwich(&g_max, &g_min);
    let rho_g = CMat2::new(r00.into(), r01, r01.conj(), r11.into());
    let coh = r01.norm();
    let det = rho.det().re;

    let (branch, a, b, p_inc) = if coh >= r11 {
        (Branch::BoundaryA, 1.0, 0.0, 1.0 - det / r11)
    } else if coh >= r00 {
        (Branch::BoundaryB, 0.0, 1.0, 1.0 - det / r00)
    } else {
        let denom = 1.0 - coh * coh / (r00 * r11);
        let a = (1.0 - coh / r00) / denom;
        let b = (1.0 - coh / r11) / denom;
        (Branch::Interior, a, b, 2.0 * coh)
    };

    let mut v = normalize2(&inv_sqrt.apply(&g_max)).ok_or(Error::NotPsd(0.0))?;
    let mut w = normalize2(&inv_sqrt.apply(&g_min)).ok_or(Error::NotPsd(0.0))?;
    fix_phase(&mut v);
    fix_phase(&mut w);

    Ok(McSolution {
        c0_max: gamma.max().clamp(0.0, 1.0),
        c1_max: (1.0 - gamma.min()).clamp(0.0, 1.0),
        p_inc_opt: p_inc.clamp(0.0, 1.0),
        povm: Povm::from_rank_one(a, &v, b, &w),
        branch,
        gamma,
        rho_g,
        a,
        b,
        v,
        w,
    })
}

/// η₀ρ₀ − η₁ρ₁
fn helstrom_operator(pair: &StatePair) -> CMat2 {
    pair.rho0 * pair.eta0 - pair.rho1 * pair.eta1()
}

/// Minimum-error probability ½(1 − ‖η₁ρ₁ − η₀ρ₀‖₁).
pub fn helstrom(pair: &StatePair) -> Result<f64> {
    let norm = crate::qmat::trace_norm_herm2(&helstrom_operator(pair))?;
    Ok((0.5 * (1.0 - norm)).max(0.0))
}

/// Minimum-error projective measurement: Π₀ projects onto the positive part
/// of η₀ρ₀ − η₁ρ₁.
pub fn helstrom_povm(pair: &StatePair) -> Result<Povm> {
    let eig = herm_eig2(&helstrom_operator(pair))?;
    Ok(Povm::two_outcome(eig.spectral_map(|x| if x > 0.0 { 1.0 } else { 0.0 })))
}

/// A measurement whose inconclusive rate has been capped.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdMeasurement {
    pub povm: Povm,
    pub c0: Option<f64>,
    pub c1: Option<f64>,
    pub p_inc: f64,
    /// Weight on the minimum-error measurement.
    pub lambda: f64,
}

/// Caps the inconclusive rate at `p_thresh` by mixing the optimal
/// measurement with the minimum-error one: Π(λ) = (1 − λ)Π^MC + λΠ^ME with
/// λ = 1 − p_thresh / P_inc^opt. The minimum-error measurement has no
/// inconclusive outcome, so Tr(ρΠ_?(λ)) = p_thresh.
pub fn threshold_measurement(sol: &McSolution, pair: &StatePair, p_thresh: f64) -> Result<ThresholdMeasurement> {
    ensure((0.0..=1.0).contains(&p_thresh), "p_inc_threshold", p_thresh, "in [0, 1]")?;
    let lambda = if sol.p_inc_opt <= p_thresh { 0.0 } else { 1.0 - p_thresh / sol.p_inc_opt };
    let povm = if lambda == 0.0 { sol.povm } else { sol.povm.mix(&helstrom_povm(pair)?, lambda) };
    Ok(ThresholdMeasurement {
        povm,
        c0: povm.confidence(pair, 0),
        c1: povm.confidence(pair, 1),
        p_inc: povm.inconclusive_rate(pair),
        lambda,
    })
}

/// Probability of a wrong call given a conclusive outcome:
/// [η₀Tr(ρ₀Π₁) + η₁Tr(ρ₁Π₀)] / (1 − Tr(ρΠ_?)).
pub fn conditional_error(povm: &Povm, pair: &StatePair) -> Result<f64> {
    let conclusive = 1.0 - povm.inconclusive_rate(pair);
    if conclusive <= 1e-12 {
        return Err(Error::AllInconclusive);
    }
    let wrong = pair.eta0 * pair.rho0.trace_with(&povm.pi1) + pair.eta1() * pair.rho1.trace_with(&povm.pi0);
    Ok((wrong / conclusive).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests;
