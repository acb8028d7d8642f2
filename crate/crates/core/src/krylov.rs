//! Orthonormal Krylov bases by Arnoldi iteration with modified Gram-Schmidt,
//! stopped at breakdown or at the minimum sufficient rank `K + 1`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{inner, is_finite, norm, vec_is_finite, CMatrix, CVector, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The orthogonalized residual vanished: span(T) is an invariant subspace.
    Breakdown,
    /// `K + 1` columns were produced.
    RankCap,
}

#[derive(Debug, Clone)]
pub struct KrylovBasis {
    /// `M × m`, orthonormal columns.
    pub t: CMatrix,
    /// Hessenberg coefficients, `(m + 1) × m`; `h[(l, j)] = ⟨R t_j, t_l⟩` and
    /// `h[(j + 1, j)]` holds the residual norm at step `j`.
    pub h: CMatrix,
    pub stop_reason: StopReason,
}

impl KrylovBasis {
    pub fn order(&self) -> usize {
        self.t.ncols()
    }

    /// `T Tᴴ v` without forming the projector.
    pub fn project(&self, v: &CVector) -> CVector {
        &self.t * (self.t.adjoint() * v)
    }
}

/// `P = T Tᴴ`
#[derive(Debug, Clone)]
pub struct Projector {
    pub p: CMatrix,
}

pub fn make_projector(basis: &KrylovBasis) -> Projector {
    Projector { p: &basis.t * basis.t.adjoint() }
}

/// Breakdown threshold scaled by the matrix size: `1e-8·‖R‖_F`.
pub fn default_breakdown_tol(r: &CMatrix) -> f64 {
    (1e-8 * r.norm()).max(f64::MIN_POSITIVE)
}

const REORTH_RATIO: f64 = 1e-4;

pub fn arnoldi_mgs(r: &CMatrix, t1: &CVector, sources: usize, breakdown_tol: f64) -> Result<KrylovBasis> {
    let m = r.nrows();
    if r.ncols() != m || t1.len() != m {
        return Err(Error::param("Arnoldi: matrix and start vector dimensions differ"));
    }
    if !(breakdown_tol > 0.0) {
        return Err(Error::param("Arnoldi: breakdown tolerance must be > 0"));
    }
    if !is_finite(r) || !vec_is_finite(t1) {
        return Err(Error::numeric("Arnoldi: non-finite input"));
    }
    if (norm(t1) - 1.0).abs() > 1e-8 {
        return Err(Error::param(format!("Arnoldi: start vector norm {} is not 1", norm(t1))));
    }
    let cap = (sources + 1).min(m).max(1);

    let mut basis: Vec<CVector> = vec![t1.clone()];
    let mut h = CMatrix::from_element(cap + 1, cap, ZERO);
    let stop_reason;
    let mut j = 0;
    loop {
        let mut u = r * &basis[j];
        let raw_norm = norm(&u);
        for (l, tl) in basis.iter().enumerate() {
            let coef = inner(tl, &u);
            h[(l, j)] = coef;
            u.axpy(-coef, tl, Complex64::new(1.0, 0.0));
        }
        if norm(&u) < REORTH_RATIO * raw_norm {
            for (l, tl) in basis.iter().enumerate() {
                let coef = inner(tl, &u);
                h[(l, j)] += coef;
                u.axpy(-coef, tl, Complex64::new(1.0, 0.0));
            }
        }
        let residual = norm(&u);
        if !residual.is_finite() {
            return Err(Error::numeric("Arnoldi: non-finite residual"));
        }
        h[(j + 1, j)] = Complex64::new(residual, 0.0);
        if residual <= breakdown_tol {
            stop_reason = StopReason::Breakdown;
            break;
        }
        if j + 1 >= cap {
            stop_reason = StopReason::RankCap;
            break;
        }
        basis.push(u / Complex64::new(residual, 0.0));
        j += 1;
    }
    let order = basis.len();
    let t = CMatrix::from_columns(&basis);
    let h = h.view((0, 0), (order + 1, order)).into_owned();
    Ok(KrylovBasis { t, h, stop_reason })
}
