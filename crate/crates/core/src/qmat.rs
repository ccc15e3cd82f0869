//! Dense 2×2 and 3×3 complex matrices.
//!
//! Only what the discrimination and dilation code needs: a closed-form
//! Hermitian eigensolver for qubits, spectral powers of PSD matrices with a
//! pseudo-inverse on the support, and the trace norm.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Column vector in C².
pub type Ket2 = [C64; 2];
/// Column vector in C³.
pub type Ket3 = [C64; 3];

/// Entrywise tolerance for Hermiticity checks, relative to `max(1, |M|max)`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues at or below this fraction of the largest are treated as zero.
pub const SUPPORT_CUTOFF: f64 = 1e-12;
/// Eigenvalue gap below which a 2×2 Hermitian matrix counts as scalar.
pub const DEGENERACY_TOL: f64 = 1e-12;
/// Components smaller than this are skipped when fixing the phase of a vector.
const PHASE_TOL: f64 = 1e-12;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// ⟨a|b⟩ for 2-vectors.
pub fn inner2(a: &Ket2, b: &Ket2) -> C64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

/// ⟨a|b⟩ for 3-vectors.
pub fn inner3(a: &Ket3, b: &Ket3) -> C64 {
    a[0].conj() * b[0] + a[1].conj() * b[1] + a[2].conj() * b[2]
}

pub fn norm2(a: &Ket2) -> f64 {
    (a[0].norm_sqr() + a[1].norm_sqr()).sqrt()
}

pub fn normalize2(a: &Ket2) -> Option<Ket2> {
    let n = norm2(a);
    (n > 0.0 && n.is_finite()).then(|| [a[0] / n, a[1] / n])
}

/// Multiplies `v` by a global phase so that its first component with
/// magnitude above the phase tolerance is real and non-negative.
pub fn fix_phase<const N: usize>(v: &mut [C64; N]) {
    let Some(k) = v.iter().position(|z| z.norm() > PHASE_TOL) else {
        return;
    };
    let lead = v[k];
    let rot = lead.conj() / lead.norm();
    for z in v.iter_mut() {
        *z *= rot;
    }
    v[k] = cr(lead.norm());
}

/// Row-major complex 2×2 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CMat2(pub [[C64; 2]; 2]);

impl CMat2 {
    pub const fn zero() -> Self {
        CMat2([[ZERO, ZERO], [ZERO, ZERO]])
    }

    pub const fn identity() -> Self {
        CMat2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn new(m00: C64, m01: C64, m10: C64, m11: C64) -> Self {
        CMat2([[m00, m01], [m10, m11]])
    }

    pub fn from_real(m: [[f64; 2]; 2]) -> Self {
        CMat2([[cr(m[0][0]), cr(m[0][1])], [cr(m[1][0]), cr(m[1][1])]])
    }

    pub fn diag(d0: f64, d1: f64) -> Self {
        CMat2([[cr(d0), ZERO], [ZERO, cr(d1)]])
    }

    /// |a⟩⟨b|
    pub fn outer(a: &Ket2, b: &Ket2) -> Self {
        CMat2([
            [a[0] * b[0].conj(), a[0] * b[1].conj()],
            [a[1] * b[0].conj(), a[1] * b[1].conj()],
        ])
    }

    /// |v⟩⟨v|
    pub fn projector(v: &Ket2) -> Self {
        Self::outer(v, v)
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        CMat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        let m = &self.0;
        CMat2([[f(m[0][0]), f(m[0][1])], [f(m[1][0]), f(m[1][1])]])
    }

    pub fn apply(&self, v: &Ket2) -> Ket2 {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    /// Re⟨v|M|v⟩
    pub fn expect(&self, v: &Ket2) -> f64 {
        inner2(v, &self.apply(v)).re
    }

    /// ⟨a|M|b⟩
    pub fn sandwich(&self, a: &Ket2, b: &Ket2) -> C64 {
        inner2(a, &self.apply(b))
    }

    /// Re Tr(self · other), the Born-rule probability for a state and an effect.
    pub fn trace_with(&self, other: &CMat2) -> f64 {
        let (a, b) = (&self.0, &other.0);
        (a[0][0] * b[0][0] + a[0][1] * b[1][0] + a[1][0] * b[0][1] + a[1][1] * b[1][1]).re
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMat2) -> f64 {
        (*self - *other).max_abs()
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_error() <= HERMITIAN_TOL * self.max_abs().max(1.0)
    }
}

impl Index<(usize, usize)> for CMat2 {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for CMat2 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.0[i][j]
    }
}

impl Add for CMat2 {
    type Output = CMat2;
    fn add(self, o: CMat2) -> CMat2 {
        let (a, b) = (&self.0, &o.0);
        CMat2([[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]])
    }
}

impl Sub for CMat2 {
    type Output = CMat2;
    fn sub(self, o: CMat2) -> CMat2 {
        self + (-o)
    }
}

impl Neg for CMat2 {
    type Output = CMat2;
    fn neg(self) -> CMat2 {
        self.map(|z| -z)
    }
}

impl Mul for CMat2 {
    type Output = CMat2;
    fn mul(self, o: CMat2) -> CMat2 {
        let (a, b) = (&self.0, &o.0);
        let mut out = CMat2::zero();
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }
}

impl Mul<f64> for CMat2 {
    type Output = CMat2;
    fn mul(self, s: f64) -> CMat2 {
        self.scale(s)
    }
}

impl Mul<C64> for CMat2 {
    type Output = CMat2;
    fn mul(self, s: C64) -> CMat2 {
        self.map(|z| z * s)
    }
}

/// Row-major complex 3×3 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CMat3(pub [[C64; 3]; 3]);

impl CMat3 {
    pub const fn zero() -> Self {
        CMat3([[ZERO; 3]; 3])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for k in 0..3 {
            m.0[k][k] = ONE;
        }
        m
    }

    pub fn from_rows(rows: [Ket3; 3]) -> Self {
        CMat3(rows)
    }

    pub fn from_columns(cols: [Ket3; 3]) -> Self {
        let mut m = Self::zero();
        for (j, col) in cols.iter().enumerate() {
            for i in 0..3 {
                m.0[i][j] = col[i];
            }
        }
        m
    }

    pub fn column(&self, j: usize) -> Ket3 {
        [self.0[0][j], self.0[1][j], self.0[2][j]]
    }

    /// ρ ⊕ 0: a qubit operator on the lower two levels, zero on the ancilla.
    pub fn embed(m: &CMat2) -> Self {
        let mut out = Self::zero();
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] = m.0[i][j];
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = self.0[j][i].conj();
            }
        }
        out
    }

    pub fn apply(&self, v: &Ket3) -> Ket3 {
        let m = &self.0;
        std::array::from_fn(|i| m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2])
    }

    /// Re⟨v|M|v⟩
    pub fn expect(&self, v: &Ket3) -> f64 {
        inner3(v, &self.apply(v)).re
    }

    pub fn max_abs_diff(&self, other: &CMat3) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        worst
    }

    /// max |U†U − I|, entrywise.
    pub fn unitarity_error(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&Self::identity())
    }
}

impl Index<(usize, usize)> for CMat3 {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for CMat3 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.0[i][j]
    }
}

impl Mul for CMat3 {
    type Output = CMat3;
    fn mul(self, o: CMat3) -> CMat3 {
        let mut out = CMat3::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = (0..3).map(|k| self.0[i][k] * o.0[k][j]).sum();
            }
        }
        out
    }
}

/// Eigendecomposition of a 2×2 Hermitian matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigPair2 {
    /// Ascending.
    pub values: [f64; 2],
    /// `vectors[i]` belongs to `values[i]`; orthonormal, phase-fixed.
    pub vectors: [Ket2; 2],
}

impl EigPair2 {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[1]
    }

    pub fn gap(&self) -> f64 {
        self.values[1] - self.values[0]
    }

    /// Σ f(λᵢ)|vᵢ⟩⟨vᵢ|
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> CMat2 {
        CMat2::projector(&self.vectors[0]) * f(self.values[0])
            + CMat2::projector(&self.vectors[1]) * f(self.values[1])
    }

    pub fn reconstruct(&self) -> CMat2 {
        self.spectral_map(|x| x)
    }
}

fn check_hermitian(m: &CMat2) -> Result<()> {
    let err = m.hermiticity_error();
    if err > HERMITIAN_TOL * m.max_abs().max(1.0) || !err.is_finite() {
        return Err(Error::NotHermitian(err));
    }
    Ok(())
}

/// Closed-form eigendecomposition of a 2×2 Hermitian matrix.
///
/// Eigenvalues come back ascending. Each eigenvector has its first
/// non-negligible component real and non-negative. When the gap is below
/// [`DEGENERACY_TOL`] (scaled by `max(1, |λ|max)`) the canonical basis is
/// returned.
pub fn herm_eig2(m: &CMat2) -> Result<EigPair2> {
    check_hermitian(m)?;
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = (m[(0, 1)] + m[(1, 0)].conj()) * 0.5;

    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let r = half.hypot(b.norm());
    let values = [mean - r, mean + r];

    let scale = values[0].abs().max(values[1].abs()).max(1.0);
    if 2.0 * r <= DEGENERACY_TOL * scale {
        return Ok(EigPair2 { values, vectors: [[ONE, ZERO], [ZERO, ONE]] });
    }

    // Pick whichever of the two equivalent forms avoids cancellation.
    let upper = if half >= 0.0 { [cr(half + r), b.conj()] } else { [b, cr(r - half)] };
    let n = norm2(&upper);
    let mut hi = [upper[0] / n, upper[1] / n];
    let mut lo = [-hi[1].conj(), hi[0].conj()];
    fix_phase(&mut hi);
    fix_phase(&mut lo);
    Ok(EigPair2 { values, vectors: [lo, hi] })
}

/// Spectral power of a PSD matrix, restricted to its support.
///
/// Eigenvalues at or below `SUPPORT_CUTOFF · λmax` are treated as exactly
/// zero, so negative exponents give the pseudo-inverse power.
pub fn psd_pow(m: &CMat2, exponent: f64) -> Result<CMat2> {
    let eig = herm_eig2(m)?;
    check_psd(&eig)?;
    let cutoff = SUPPORT_CUTOFF * eig.max().max(0.0);
    Ok(eig.spectral_map(|x| if x > cutoff { x.powf(exponent) } else { 0.0 }))
}

/// Orthogonal projector onto the support of a PSD matrix.
pub fn support_projector(m: &CMat2) -> Result<CMat2> {
    let eig = herm_eig2(m)?;
    check_psd(&eig)?;
    let cutoff = SUPPORT_CUTOFF * eig.max().max(0.0);
    Ok(eig.spectral_map(|x| if x > cutoff { 1.0 } else { 0.0 }))
}

/// Number of eigenvalues above the support cutoff.
pub fn psd_rank(m: &CMat2) -> Result<usize> {
    let eig = herm_eig2(m)?;
    check_psd(&eig)?;
    let cutoff = SUPPORT_CUTOFF * eig.max().max(0.0);
    Ok(eig.values.iter().filter(|&&x| x > cutoff).count())
}

pub(crate) fn check_psd(eig: &EigPair2) -> Result<()> {
    let floor = -SUPPORT_CUTOFF * eig.max().abs().max(1.0);
    if eig.min() < floor {
        return Err(Error::NotPsd(eig.min()));
    }
    Ok(())
}

/// ‖M‖₁ = Σ|λᵢ| for Hermitian M.
pub fn trace_norm_herm2(m: &CMat2) -> Result<f64> {
    let eig = herm_eig2(m)?;
    Ok(eig.values[0].abs() + eig.values[1].abs())
}
