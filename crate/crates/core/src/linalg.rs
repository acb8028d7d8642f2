//! Dense complex linear algebra helpers shared by every module.
//!
//! All matrices are `nalgebra::DMatrix<Complex64>`. Hermitian positive-definite
//! systems are solved through a Cholesky factorization; no routine in this crate
//! forms an explicit inverse.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `aᴴ b`
#[inline]
pub fn inner(a: &CVector, b: &CVector) -> Complex64 {
    a.dotc(b)
}

#[inline]
pub fn norm(a: &CVector) -> f64 {
    a.norm()
}

#[inline]
pub fn norm_sq(a: &CVector) -> f64 {
    a.norm_squared()
}

pub fn identity(m: usize) -> CMatrix {
    CMatrix::identity(m, m)
}

/// `x xᴴ`
pub fn outer(x: &CVector) -> CMatrix {
    x * x.adjoint()
}

/// `pᴴ A p`, which is real for Hermitian `A`.
pub fn quad_form(a: &CMatrix, p: &CVector) -> Complex64 {
    p.dotc(&(a * p))
}

/// Replaces `m` by `(m + mᴴ)/2`.
pub fn hermitize(m: &mut CMatrix) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)] = real(m[(i, i)].re);
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

pub fn add_diagonal(m: &mut CMatrix, value: f64) {
    for i in 0..m.nrows() {
        m[(i, i)] += value;
    }
}

pub fn trace_re(m: &CMatrix) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)].re).sum()
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn vec_is_finite(v: &CVector) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Cholesky factorization that rejects indefinite input.
///
/// nalgebra's complex factorization takes complex square roots of the pivots, so
/// a negative pivot does not fail on its own; the real part of each diagonal
/// entry of `L` is checked instead.
pub fn cholesky(a: &CMatrix) -> Option<Cholesky<Complex64, Dyn>> {
    let chol = a.clone().cholesky()?;
    let l = chol.l_dirty();
    let ok = (0..l.nrows()).all(|i| {
        let d = l[(i, i)];
        d.re > 0.0 && d.im.abs() <= 1e-12 * d.re && d.re.is_finite()
    });
    ok.then_some(chol)
}

/// Solves `A x = b` for Hermitian positive-definite `A`.
pub fn hpd_solve(a: &CMatrix, b: &CVector) -> Result<CVector> {
    if a.nrows() != a.ncols() || a.nrows() != b.len() {
        return Err(Error::param(format!(
            "dimension mismatch: {}x{} system with rhs of length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    if !is_finite(a) || !vec_is_finite(b) {
        return Err(Error::numeric("non-finite entries in linear system"));
    }
    let chol = cholesky(a).ok_or_else(|| Error::numeric("matrix is not positive definite"))?;
    let x = chol.solve(b);
    if !vec_is_finite(&x) {
        return Err(Error::numeric("non-finite solution"));
    }
    Ok(x)
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

pub fn min_eigenvalue(a: &CMatrix) -> f64 {
    hermitian_eigenvalues(a)
        .first()
        .copied()
        .unwrap_or(f64::NAN)
}

/// MVDR-type distortionless weights `A⁻¹a / (aᴴA⁻¹a)` for Hermitian positive-definite `A`.
pub fn distortionless_weights(a: &CMatrix, steering: &CVector) -> Result<CVector> {
    let z = hpd_solve(a, steering)?;
    let denom = inner(steering, &z);
    if denom.norm() < f64::MIN_POSITIVE || !denom.re.is_finite() {
        return Err(Error::numeric("zero distortionless denominator"));
    }
    Ok(z / denom.conj())
}
