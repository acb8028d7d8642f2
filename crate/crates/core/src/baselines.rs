//! Reference beamformers and the SINR figure of merit.

use crate::error::{Error, Result};
use crate::linalg::{add_diagonal, distortionless_weights, hermitian_eigenvalues, inner, quad_form, CMatrix, CVector};

/// Reported instead of `-∞` when the desired response is nulled.
pub const SINR_FLOOR_DB: f64 = -200.0;

pub fn to_db(x: f64) -> f64 {
    if x > 0.0 {
        (10.0 * x.log10()).max(SINR_FLOOR_DB)
    } else {
        SINR_FLOOR_DB
    }
}

/// Sample matrix inversion: `R̂⁻¹a / (aᴴR̂⁻¹a)`.
pub fn smi_weights(r_hat: &CMatrix, a_nominal: &CVector) -> Result<CVector> {
    distortionless_weights(r_hat, a_nominal)
}

/// SMI on `R̂ + loading·I`.
pub fn loaded_smi_weights(r_hat: &CMatrix, a_nominal: &CVector, loading: f64) -> Result<CVector> {
    if !(loading >= 0.0) {
        return Err(Error::param("loading must be >= 0"));
    }
    let mut r = r_hat.clone();
    add_diagonal(&mut r, loading);
    distortionless_weights(&r, a_nominal)
}

/// `10 log₁₀(σ²₁ a₁ᴴ R⁻¹ a₁)`
pub fn optimal_sinr(sigma1_sq: f64, a_true: &CVector, r_in_true: &CMatrix) -> Result<f64> {
    let z = crate::linalg::hpd_solve(r_in_true, a_true)?;
    Ok(to_db(sigma1_sq * inner(a_true, &z).re))
}

/// `σ²₁|wᴴa₁|² / (wᴴR_{I+N}w)` in dB.
pub fn output_sinr(w: &CVector, sigma1_sq: f64, a_true: &CVector, r_in_true: &CMatrix) -> Result<f64> {
    let den = quad_form(r_in_true, w).re;
    if !(den > 0.0) {
        return Err(Error::numeric("interference-plus-noise power is not positive"));
    }
    Ok(to_db(sigma1_sq * inner(w, a_true).norm_sqr() / den))
}

/// `wᴴR_s w / wᴴR_{I+N}w` in dB for a distributed (rank > 1) desired signal
/// with covariance `R_s`.
pub fn output_sinr_distributed(w: &CVector, r_signal: &CMatrix, r_in_true: &CMatrix) -> Result<f64> {
    let den = quad_form(r_in_true, w).re;
    if !(den > 0.0) {
        return Err(Error::numeric("interference-plus-noise power is not positive"));
    }
    Ok(to_db(quad_form(r_signal, w).re / den))
}

/// Largest generalized eigenvalue of `(R_s, R_{I+N})` in dB, together with the
/// weights that attain it.
pub fn optimal_distributed(r_signal: &CMatrix, r_in_true: &CMatrix) -> Result<(f64, CVector)> {
    let chol = crate::linalg::cholesky(r_in_true)
        .ok_or_else(|| Error::numeric("interference-plus-noise covariance is not positive definite"))?;
    let l = chol.l();
    // whitened signal covariance L⁻¹ R_s L⁻ᴴ
    let left = l
        .solve_lower_triangular(r_signal)
        .ok_or_else(|| Error::numeric("triangular solve failed"))?;
    let whitened = l
        .solve_lower_triangular(&left.adjoint())
        .ok_or_else(|| Error::numeric("triangular solve failed"))?
        .adjoint();
    let mut sym = whitened.clone();
    crate::linalg::hermitize(&mut sym);
    let eig = sym.clone().symmetric_eigen();
    let (idx, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::numeric("empty eigen-decomposition"))?;
    let u = eig.eigenvectors.column(idx).into_owned();
    let w = l
        .adjoint()
        .solve_upper_triangular(&u)
        .ok_or_else(|| Error::numeric("triangular solve failed"))?;
    let top = hermitian_eigenvalues(&sym).last().copied().unwrap_or(0.0);
    Ok((to_db(top), w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array_model::make_steering;
    use crate::linalg::{identity, outer, real, ONE};
    use crate::rng::RandomStream;

    fn cv(v: &[f64]) -> CVector {
        CVector::from_iterator(v.len(), v.iter().map(|&x| real(x)))
    }

    #[test]
    fn smi_examples() {
        let a = make_steering(4, 10.0).unwrap().elements;
        let w = smi_weights(&identity(4), &a).unwrap();
        assert!((w.clone() - &a / real(4.0)).norm() < 1e-14);
        let w = smi_weights(&CMatrix::from_diagonal(&cv(&[1.0, 2.0])), &cv(&[1.0, 1.0])).unwrap();
        assert!((w - cv(&[2.0 / 3.0, 1.0 / 3.0])).norm() < 1e-14);
        assert!(smi_weights(&CMatrix::zeros(3, 3), &cv(&[1.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn smi_is_distortionless() {
        let mut rng = RandomStream::from_seed(6);
        for _ in 0..20 {
            let b = CMatrix::from_fn(5, 5, |_, _| rng.complex_gaussian(1.0));
            let r = &b * b.adjoint() + identity(5) * real(0.1);
            let a = CVector::from_fn(5, |_, _| rng.complex_gaussian(1.0));
            let w = smi_weights(&r, &a).unwrap();
            assert!((inner(&w, &a) - ONE).norm() < 1e-10);
        }
    }

    #[test]
    fn loaded_smi_examples() {
        let a = make_steering(4, -5.0).unwrap().elements;
        let mut rng = RandomStream::from_seed(3);
        let b = CMatrix::from_fn(4, 4, |_, _| rng.complex_gaussian(1.0));
        let r = &b * b.adjoint() + identity(4);
        let w0 = loaded_smi_weights(&r, &a, 0.0).unwrap();
        assert!((w0 - smi_weights(&r, &a).unwrap()).norm() < 1e-14);
        let w = loaded_smi_weights(&CMatrix::zeros(4, 4), &a, 1.0).unwrap();
        assert!((w - &a / real(4.0)).norm() < 1e-14);
        assert!(loaded_smi_weights(&r, &a, -1.0).is_err());
    }

    #[test]
    fn optimal_sinr_noise_only() {
        let a = make_steering(10, 10.0).unwrap().elements;
        assert!((optimal_sinr(1.0, &a, &identity(10)).unwrap() - 10.0).abs() < 1e-10);
        assert!((optimal_sinr(10.0, &a, &identity(10)).unwrap() - 20.0).abs() < 1e-10);
    }

    #[test]
    fn orthogonal_interferer_costs_nothing() {
        // broadside and sin θ = 0.5 are orthogonal on a 4-element ULA
        let a = make_steering(4, 0.0).unwrap().elements;
        let b = make_steering(4, 30.0).unwrap().elements;
        assert!(inner(&a, &b).norm() < 1e-12);
        let r = identity(4) + outer(&b) * real(100.0);
        assert!((optimal_sinr(1.0, &a, &r).unwrap() - optimal_sinr(1.0, &a, &identity(4)).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn output_sinr_properties() {
        let a = make_steering(6, 10.0).unwrap().elements;
        let i1 = make_steering(6, 40.0).unwrap().elements;
        let r = identity(6) + outer(&i1) * real(10.0);
        let w_opt = smi_weights(&r, &a).unwrap();
        let opt = optimal_sinr(2.0, &a, &r).unwrap();
        assert!((output_sinr(&w_opt, 2.0, &a, &r).unwrap() - opt).abs() < 1e-10);
        let scaled = &w_opt * crate::linalg::c(-3.0, 2.0);
        assert!((output_sinr(&scaled, 2.0, &a, &r).unwrap() - opt).abs() < 1e-10);
        // a vector orthogonal to a: difference of two elements with equal phase weight
        let mut w_null = CVector::zeros(6);
        w_null[0] = a[0];
        w_null[1] = -a[1];
        w_null[2] = ONE * 0.0;
        let w_null = {
            let proj = &a * (inner(&a, &w_null) / real(6.0));
            w_null - proj
        };
        assert_eq!(output_sinr(&w_null, 2.0, &a, &r).unwrap(), SINR_FLOOR_DB);
    }

    #[test]
    fn output_never_beats_optimum() {
        let mut rng = RandomStream::from_seed(10);
        let a = make_steering(5, 10.0).unwrap().elements;
        let b = CMatrix::from_fn(5, 5, |_, _| rng.complex_gaussian(1.0));
        let r = &b * b.adjoint() + identity(5);
        let opt = optimal_sinr(1.5, &a, &r).unwrap();
        for _ in 0..200 {
            let w = CVector::from_fn(5, |_, _| rng.complex_gaussian(1.0));
            assert!(output_sinr(&w, 1.5, &a, &r).unwrap() <= opt + 1e-9);
        }
    }

    #[test]
    fn distributed_reduces_to_point_source() {
        let a = make_steering(5, 10.0).unwrap().elements;
        let i1 = make_steering(5, 45.0).unwrap().elements;
        let r = identity(5) + outer(&i1) * real(5.0);
        let rs = outer(&a) * real(2.0);
        let (opt, w) = optimal_distributed(&rs, &r).unwrap();
        assert!((opt - optimal_sinr(2.0, &a, &r).unwrap()).abs() < 1e-9);
        assert!((output_sinr_distributed(&w, &rs, &r).unwrap() - opt).abs() < 1e-9);
    }
}
