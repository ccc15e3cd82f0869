//! Neumark extension of a rank-one qubit POVM to a projective measurement
//! on a qutrit.
//!
//! Each element is written Π_k = |π_k⟩⟨π_k| and lifted to
//! |e_k⟩ = |π_k⟩ + c_k|2⟩ with ⟨e_k|e_k'⟩ = δ_kk'. The unitary U has rows
//! ⟨e_0|, ⟨e_1|, ⟨e_?|, so outcome `0` is read on level |0⟩, `1` on |1⟩ and
//! the inconclusive outcome on the ancilla level |2⟩.

use std::fmt;

use crate::channel::StatePair;
use crate::discrim::{Outcome, Povm};
use crate::error::{Error, Result};
use crate::qmat::{cr, fix_phase, herm_eig2, CMat2, CMat3, Ket2, Ket3, C64, ONE, ZERO};

/// Smallest eigenvalue above which a POVM element counts as rank two.
pub const RANK_TOL: f64 = 1e-9;
const IDENTITY_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dilation {
    pub u: CMat3,
    /// Ancilla amplitudes c₀, c₁, c₂ (c₀ real, ≥ 0).
    pub c: [C64; 3],
    /// |e_k⟩ in outcome order `0`, `1`, `?`.
    pub e: [Ket3; 3],
    /// |π_k⟩ with the same phases as `e`.
    pub pi: [Ket2; 3],
}

fn rank_one_factor(m: &CMat2, k: Outcome) -> Result<Ket2> {
    let eig = herm_eig2(m)?;
    if eig.min() < -RANK_TOL {
        return Err(Error::NotPsd(eig.min()));
    }
    if eig.min() > RANK_TOL {
        return Err(Error::DilationRank(k));
    }
    let s = eig.max().max(0.0).sqrt();
    let u = eig.vectors[1];
    Ok([u[0] * s, u[1] * s])
}

fn cross_conj(a: &Ket3, b: &Ket3) -> Ket3 {
    [
        (a[1] * b[2] - a[2] * b[1]).conj(),
        (a[2] * b[0] - a[0] * b[2]).conj(),
        (a[0] * b[1] - a[1] * b[0]).conj(),
    ]
}

/// Builds the 3×3 unitary realizing `povm` as a projective measurement.
pub fn dilate(povm: &Povm) -> Result<Dilation> {
    let completeness = povm.completeness_error();
    if completeness > 1e-9 {
        return Err(Error::Domain { name: "POVM completeness error", value: completeness, expected: "Π₀ + Π₁ + Π_? = I" });
    }
    let mut pi = [ZERO; 3].map(|_| [ZERO; 2]);
    for k in Outcome::ALL {
        pi[k.index()] = rank_one_factor(povm.element(k), k)?;
    }

    // rows of [π₀ π₁ π_?] are orthonormal; the ancilla row completes them.
    // Equals c_k = −⟨π₀|π_k⟩/c₀ with c₀ = (1 − ‖π₀‖²)^{1/2}, without the
    // division by a possibly small c₀.
    let r0 = [pi[0][0], pi[1][0], pi[2][0]];
    let r1 = [pi[0][1], pi[1][1], pi[2][1]];
    let mut c = cross_conj(&r0, &r1);
    let n = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in c.iter_mut() {
        *z /= n;
    }
    if c[0].norm() > 0.0 {
        let rot = c[0].conj() / c[0].norm();
        for z in c.iter_mut() {
            *z *= rot;
        }
        c[0] = cr(c[0].norm());
    }

    let mut e: [Ket3; 3] = std::array::from_fn(|k| [pi[k][0], pi[k][1], c[k]]);
    // c₀ already fixes the phase of |e₀⟩ unless it vanishes
    let first = if c[0].norm() > 0.0 { 1 } else { 0 };
    for k in first..3 {
        fix_phase(&mut e[k]);
    }
    for k in 0..3 {
        pi[k] = [e[k][0], e[k][1]];
        c[k] = e[k][2];
    }

    let u = CMat3::from_rows(e.map(|ek| ek.map(|z| z.conj())));
    Ok(Dilation { u, c, e, pi })
}

impl Dilation {
    /// ⟨e_k|(ρ ⊕ 0)|e_k⟩, the outcome probability in the extended space.
    pub fn probability(&self, state: &CMat2, k: Outcome) -> f64 {
        CMat3::embed(state).expect(&self.e[k.index()])
    }

    /// max over j, k of |Tr(ρⱼΠ_k) − ⟨e_k|(ρⱼ ⊕ 0)|e_k⟩|.
    pub fn born_residual(&self, povm: &Povm, pair: &StatePair) -> f64 {
        let mut worst = 0.0_f64;
        for j in 0..2 {
            let state = pair.state(j);
            for k in Outcome::ALL {
                worst = worst.max((state.trace_with(povm.element(k)) - self.probability(state, k)).abs());
            }
        }
        worst
    }
}

/// Unitary acting nontrivially on one pair of levels of a qutrit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoLevel {
    pub levels: (usize, usize),
    pub block: CMat2,
}

impl TwoLevel {
    pub fn to_matrix(&self) -> CMat3 {
        let mut m = CMat3::identity();
        let idx = [self.levels.0, self.levels.1];
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                m[(i, j)] = self.block[(a, b)];
            }
        }
        m
    }

    fn adjoint(&self) -> TwoLevel {
        TwoLevel { levels: self.levels, block: self.block.adjoint() }
    }

    fn is_identity(&self) -> bool {
        self.block.max_abs_diff(&CMat2::identity()) <= IDENTITY_TOL
    }
}

impl fmt::Display for TwoLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "levels ({}, {})", self.levels.0, self.levels.1)
    }
}

/// If `m` leaves one level untouched, returns it as a two-level factor.
fn as_two_level(m: &CMat3) -> Option<TwoLevel> {
    for (spare, levels) in [(2, (0, 1)), (0, (1, 2)), (1, (0, 2))] {
        let untouched = (m[(spare, spare)] - ONE).norm() <= IDENTITY_TOL
            && (0..3).filter(|&i| i != spare).all(|i| m[(i, spare)].norm() <= IDENTITY_TOL && m[(spare, i)].norm() <= IDENTITY_TOL);
        if untouched {
            let (i, j) = levels;
            let block = CMat2::new(m[(i, i)], m[(i, j)], m[(j, i)], m[(j, j)]);
            return Some(TwoLevel { levels, block });
        }
    }
    None
}

/// Givens block that maps (x, y) to (|x|² + |y|²)^{1/2}·(1, 0).
fn eliminator(x: C64, y: C64) -> CMat2 {
    let n = (x.norm_sqr() + y.norm_sqr()).sqrt();
    CMat2::new(x.conj() / n, y.conj() / n, -y / n, x / n)
}

/// Writes a 3×3 unitary as an ordered product of at most three two-level
/// unitaries; factors equal to the identity are dropped.
pub fn decompose_two_level(u: &CMat3) -> Result<Vec<TwoLevel>> {
    let err = u.unitarity_error();
    if err > 1e-10 || !err.is_finite() {
        return Err(Error::NotUnitary(err));
    }
    if u.max_abs_diff(&CMat3::identity()) <= IDENTITY_TOL {
        return Ok(Vec::new());
    }
    if let Some(single) = as_two_level(u) {
        return Ok(vec![single]);
    }

    let mut m = *u;
    let mut left = Vec::with_capacity(2);
    if m[(2, 0)].norm() > IDENTITY_TOL {
        let g = TwoLevel { levels: (1, 2), block: eliminator(m[(1, 0)], m[(2, 0)]) };
        m = g.to_matrix() * m;
        left.push(g);
    }
    let g = TwoLevel { levels: (0, 1), block: eliminator(m[(0, 0)], m[(1, 0)]) };
    m = g.to_matrix() * m;
    left.push(g);

    // column 0 is now |0⟩, so m = 1 ⊕ W
    let rest = TwoLevel { levels: (1, 2), block: CMat2::new(m[(1, 1)], m[(1, 2)], m[(2, 1)], m[(2, 2)]) };
    let mut factors: Vec<TwoLevel> = left.iter().map(TwoLevel::adjoint).collect();
    factors.push(rest);
    factors.retain(|f| !f.is_identity());
    Ok(factors)
}

/// Ordered product of two-level factors.
pub fn compose(factors: &[TwoLevel]) -> CMat3 {
    factors.iter().fold(CMat3::identity(), |acc, f| acc * f.to_matrix())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::channel::build_state_pair;
    use crate::discrim::mc_solve;
    use crate::qmat::{c, inner2};

    fn plus_minus() -> Povm {
        let h = FRAC_1_SQRT_2;
        Povm::from_rank_one(1.0, &[cr(h), cr(h)], 1.0, &[cr(h), cr(-h)])
    }

    #[test]
    fn projective_measurement_needs_no_ancilla() {
        let d = dilate(&plus_minus()).unwrap();
        assert!(d.c[0].norm() < 1e-15);
        assert!(d.u.unitarity_error() < 1e-15);
        let h = FRAC_1_SQRT_2;
        // Hadamard block on the qubit levels, ancilla untouched up to phase
        let want_block = CMat2::from_real([[h, h], [h, -h]]);
        let block = CMat2::new(d.u[(0, 0)], d.u[(0, 1)], d.u[(1, 0)], d.u[(1, 1)]);
        assert!(block.max_abs_diff(&want_block) < 1e-15);
        assert!((d.u[(2, 2)].norm() - 1.0).abs() < 1e-15);
        let factors = decompose_two_level(&d.u).unwrap();
        assert!(compose(&factors).max_abs_diff(&d.u) < 1e-12);
    }

    #[test]
    fn interior_solution_dilates() {
        let pair = build_state_pair(0.8, C64::from_polar(1.0, -PI / 4.0), 0.5).unwrap();
        let sol = mc_solve(&pair).unwrap();
        let d = dilate(&sol.povm).unwrap();
        assert!(d.u.unitarity_error() <= 1e-12);
        assert!(d.born_residual(&sol.povm, &pair) <= 1e-12);
        assert!(d.c[0].im == 0.0 && d.c[0].re > 0.0);
        // c_k = −⟨π₀|π_k⟩/c₀
        for k in 1..3 {
            let want = -inner2(&d.pi[0], &d.pi[k]) / d.c[0].re;
            assert!((d.c[k] - want).norm() < 1e-12);
        }
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((crate::qmat::inner3(&d.e[i], &d.e[j]) - cr(want)).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn rank_two_inconclusive_is_rejected() {
        let povm = Povm { pi0: CMat2::diag(0.3, 0.0), pi1: CMat2::diag(0.0, 0.3), pi_inc: CMat2::diag(0.7, 0.7) };
        assert_eq!(dilate(&povm), Err(Error::DilationRank(Outcome::Inconclusive)));
    }

    #[test]
    fn identity_has_no_factors() {
        assert!(decompose_two_level(&CMat3::identity()).unwrap().is_empty());
    }

    #[test]
    fn block_unitary_is_one_factor() {
        let block = CMat2::new(c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.8), c(0.6, 0.0));
        for levels in [(0, 1), (1, 2), (0, 2)] {
            let u = TwoLevel { levels, block }.to_matrix();
            let f = decompose_two_level(&u).unwrap();
            assert_eq!(f.len(), 1);
            assert_eq!(f[0].levels, levels);
        }
    }

    #[test]
    fn rejects_non_unitary() {
        let mut m = CMat3::identity();
        m[(0, 1)] = cr(0.1);
        assert!(matches!(decompose_two_level(&m), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn random_solver_outputs_dilate_and_decompose() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10_000 {
            let nu = 1.0 - rng.random::<f64>();
            let mu = C64::from_polar(rng.random::<f64>().sqrt(), rng.random_range(-PI..PI));
            let pair = build_state_pair(nu, mu, rng.random_range(0.1..0.9)).unwrap();
            let sol = mc_solve(&pair).unwrap();
            let d = dilate(&sol.povm).unwrap();
            assert!(d.u.unitarity_error() <= 1e-12);
            assert!(d.born_residual(&sol.povm, &pair) <= 1e-12);
            for j in 0..2 {
                let total: f64 = Outcome::ALL.iter().map(|&k| d.probability(pair.state(j), k)).sum();
                assert!((total - 1.0).abs() <= 1e-12);
            }
            let factors = decompose_two_level(&d.u).unwrap();
            assert!(factors.len() <= 3);
            assert!(compose(&factors).max_abs_diff(&d.u) <= 1e-10);
            assert_eq!(dilate(&sol.povm).unwrap(), d);
        }
    }
}
