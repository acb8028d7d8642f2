//! Inversion-free weight engines that run on top of the shared mismatch
//! estimator: stochastic gradient, conventional CG with inner iterations, and
//! the modified CG with one iteration per snapshot.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{inner, norm, norm_sq, quad_form, real, vec_is_finite, CMatrix, CVector, ONE};

/// Cost `J(â, v) = vᴴ(R̂ − σ̂²₁ââᴴ)v − âᴴv − vᴴâ`, the real form of the
/// joint steering/weight objective.
pub fn joint_cost(r_hat: &CMatrix, sigma1_sq: f64, a_hat: &CVector, v: &CVector) -> f64 {
    let quad = quad_form(r_hat, v).re - sigma1_sq * inner(v, a_hat).norm_sqr();
    quad - 2.0 * inner(a_hat, v).re
}

/// `g_â = −∂J/∂â* = σ̂²₁ v vᴴ â + v`
pub fn steering_neg_gradient(sigma1_sq: f64, a_hat: &CVector, v: &CVector) -> CVector {
    v * (real(sigma1_sq) * inner(v, a_hat)) + v
}

/// `g_v = −∂J/∂v* = â − (R̂ − σ̂²₁ââᴴ)v`
pub fn weight_neg_gradient(r_hat: &CMatrix, sigma1_sq: f64, a_hat: &CVector, v: &CVector) -> CVector {
    a_hat - (r_hat * v - a_hat * (real(sigma1_sq) * inner(a_hat, v)))
}

/// `(R̂ − σ̂²₁ââᴴ) p`
fn inc_times(r_hat: &CMatrix, sigma1_sq: f64, a_hat: &CVector, p: &CVector) -> CVector {
    r_hat * p - a_hat * (real(sigma1_sq) * inner(a_hat, p))
}

/// Rescales a refined steering vector to `target` norm, as the front end
/// does after every update; the steering step maximizes a concave cost along
/// its line and its length carries no information.
fn renormalize(a: &CVector, target: f64) -> CVector {
    let n = norm(a);
    if n > 0.0 && n.is_finite() {
        a * real(target / n)
    } else {
        a.clone()
    }
}

fn normalize_weights(v: &CVector, a_hat: &CVector) -> Result<CVector> {
    let denom = inner(a_hat, v);
    if !(denom.norm() > 0.0) || !denom.re.is_finite() {
        return Err(Error::numeric("weight normalization denominator vanished"));
    }
    let w = v / denom;
    if !vec_is_finite(&w) {
        return Err(Error::numeric("non-finite weights"));
    }
    Ok(w)
}

// ---------------------------------------------------------------- SG ----

#[derive(Debug, Clone)]
pub struct SgState {
    pub w: CVector,
    pub mu: f64,
}

/// One step of
/// `w ← (I − μσ̂²₁ââᴴ)w − μ(σ̂²₁â + y*(x − (âᴴx)â/(âᴴâ)))`.
pub fn sg_update(state: &SgState, a_hat: &CVector, sigma1_sq: f64, x: &CVector, y: Complex64) -> Result<SgState> {
    let mu = state.mu;
    if !(mu >= 0.0) || (sigma1_sq > 0.0 && mu * sigma1_sq >= 1.0) {
        return Err(Error::param(format!("step size {mu} violates 0 <= mu < 1/sigma1^2 = {}", 1.0 / sigma1_sq)));
    }
    let energy = norm_sq(a_hat);
    if !(energy > 0.0) {
        return Err(Error::param("steering estimate has zero norm"));
    }
    let w = &state.w;
    let s = real(sigma1_sq);
    let mut next = w - a_hat * (real(mu) * s * inner(a_hat, w));
    let blocked = x - a_hat * (inner(a_hat, x) / energy);
    next -= (a_hat * s + blocked * y.conj()) * real(mu);
    if !vec_is_finite(&next) {
        return Err(Error::numeric("SG weights became non-finite"));
    }
    Ok(SgState { w: next, mu })
}

// ---------------------------------------------------------------- CG ----

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgParams {
    /// Forgetting factor of the MCG gradient recursions.
    pub lambda: f64,
    pub eta_a: f64,
    pub eta_v: f64,
    /// Inner iterations per snapshot (CCG); MCG always runs one.
    pub n_inner: usize,
}

impl Default for CgParams {
    fn default() -> Self {
        Self { lambda: 0.998, eta_a: 0.1, eta_v: 0.1, n_inner: 5 }
    }
}

impl CgParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.5).contains(&self.eta_a) || !(0.0..=0.5).contains(&self.eta_v) {
            return Err(Error::param("eta constants must lie in [0, 0.5]"));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::param("forgetting factor must lie in (0, 1]"));
        }
        if self.n_inner == 0 {
            return Err(Error::param("CCG needs at least one inner iteration"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct CgState {
    pub params: CgParams,
    pub v: CVector,
    pub g_a: CVector,
    pub g_v: CVector,
    pub p_a: CVector,
    pub p_v: CVector,
}

impl CgState {
    /// `v = 1`; the CCG directions are rebuilt every snapshot.
    pub fn new_ccg(sensors: usize, params: CgParams) -> Result<Self> {
        params.validate()?;
        let ones = CVector::from_element(sensors, ONE);
        Ok(Self { params, v: ones.clone(), g_a: ones.clone(), g_v: ones.clone(), p_a: ones.clone(), p_v: ones })
    }

    /// `v(0) = 1`, `g_v(0) = p_v(1) = â(1)`, `g_â(0) = p_â(1) = v(0)`.
    pub fn new_mcg(initial_steering: &CVector, params: CgParams) -> Result<Self> {
        params.validate()?;
        let ones = CVector::from_element(initial_steering.len(), ONE);
        Ok(Self {
            params: CgParams { n_inner: 1, ..params },
            v: ones.clone(),
            g_a: ones.clone(),
            g_v: initial_steering.clone(),
            p_a: ones,
            p_v: initial_steering.clone(),
        })
    }
}

/// Diagnostics of one CG snapshot.
#[derive(Debug, Clone)]
pub struct CgStep {
    /// Steering estimate after the CG refinement. The weights stay
    /// normalized against the estimate handed in by the front end.
    pub a_refined: CVector,
    pub w: CVector,
    /// Inner iterations actually run.
    pub iterations: usize,
    /// `Re(p_vᴴ g_v(i))` with the direction used in this snapshot.
    pub pg_current: f64,
    /// `Re(p_vᴴ g_v(i−1))`.
    pub pg_previous: f64,
    pub restarted: bool,
}

const COLLAPSE: f64 = 1e-14;

fn nonzero(den: Complex64, scale: f64) -> bool {
    den.norm() > COLLAPSE * scale.max(f64::MIN_POSITIVE) && den.re.is_finite() && den.im.is_finite()
}

/// A quadratic line search only has a minimizer along directions of positive
/// curvature. Early snapshots can make `R̂ − σ̂²₁ââᴴ` indefinite.
fn convex(den: Complex64, scale: f64) -> bool {
    den.re > COLLAPSE * scale.max(f64::MIN_POSITIVE) && den.re.is_finite() && den.im.is_finite()
}

/// `−gᴴp / (σ̂²₁ pᴴvvᴴp)`
pub fn ccg_alpha_steering(g_prev: &CVector, p: &CVector, v: &CVector, sigma1_sq: f64) -> Option<Complex64> {
    let den = real(sigma1_sq) * inner(p, v) * inner(v, p);
    let scale = sigma1_sq * norm_sq(p) * norm_sq(v);
    nonzero(den, scale).then(|| -inner(g_prev, p) / den)
}

/// `gᴴp / (pᴴ(R̂ − σ̂²₁ââᴴ)p)`
pub fn ccg_alpha_weights(
    g_prev: &CVector,
    p: &CVector,
    r_hat: &CMatrix,
    sigma1_sq: f64,
    a_hat: &CVector,
) -> Option<Complex64> {
    let den = inner(p, &inc_times(r_hat, sigma1_sq, a_hat, p));
    let scale = r_hat.norm() * norm_sq(p);
    convex(den, scale).then(|| inner(g_prev, p) / den)
}

/// Fletcher-Reeves direction `g + (‖g‖²/‖g_prev‖²) p`, restarting at `g` when
/// the previous gradient has collapsed.
fn conjugate_direction(g: &CVector, g_prev: &CVector, p: &CVector) -> CVector {
    let den = norm_sq(g_prev);
    if den > COLLAPSE * norm_sq(g) && den > 0.0 {
        g + p * real(norm_sq(g) / den)
    } else {
        g.clone()
    }
}

/// Conventional CG: `N` inner iterations on `(â, v)` per snapshot, with `v`
/// carried to the next snapshot.
pub fn ccg_snapshot(
    state: &mut CgState,
    r_hat: &CMatrix,
    a_hat_in: &CVector,
    sigma1_sq: f64,
    _x: &CVector,
) -> Result<CgStep> {
    let s = sigma1_sq;
    let target = norm(a_hat_in);
    let mut a = a_hat_in.clone();
    let mut v = state.v.clone();
    let mut g_a = steering_neg_gradient(s, &a, &v);
    let mut g_v = weight_neg_gradient(r_hat, s, a_hat_in, &v);
    let mut p_a = g_a.clone();
    let mut p_v = g_v.clone();
    let pg_previous = inner(&p_v, &g_v).re;

    let mut iterations = 0;
    for _ in 0..state.params.n_inner {
        let alpha_a = ccg_alpha_steering(&g_a, &p_a, &v, s);
        let alpha_v = ccg_alpha_weights(&g_v, &p_v, r_hat, s, a_hat_in);
        if alpha_a.is_none() && alpha_v.is_none() {
            break;
        }
        // a collapsed step freezes that variable while the other keeps iterating
        if let Some(alpha) = alpha_a {
            a = renormalize(&(&a + &p_a * alpha), target);
        }
        let mut g_v_next = g_v.clone();
        if let Some(alpha) = alpha_v {
            v += &p_v * alpha;
            g_v_next -= inc_times(r_hat, s, a_hat_in, &p_v) * alpha;
        }
        let g_a_next = steering_neg_gradient(s, &a, &v);
        // a skipped step restarts its direction from the gradient
        p_a = match alpha_a {
            Some(_) => conjugate_direction(&g_a_next, &g_a, &p_a),
            None => g_a_next.clone(),
        };
        p_v = match alpha_v {
            Some(_) => conjugate_direction(&g_v_next, &g_v, &p_v),
            None => g_v_next.clone(),
        };
        g_a = g_a_next;
        g_v = g_v_next;
        iterations += 1;
        if !vec_is_finite(&v) || !vec_is_finite(&a) {
            return Err(Error::numeric("CCG iterates became non-finite"));
        }
    }
    let w = normalize_weights(&v, a_hat_in)?;
    state.v = v;
    state.g_a = g_a;
    state.g_v = g_v.clone();
    state.p_a = p_a;
    state.p_v = p_v.clone();
    Ok(CgStep {
        a_refined: a,
        w,
        iterations,
        pg_current: inner(&p_v, &g_v).re,
        pg_previous,
        restarted: false,
    })
}

/// Step sizes of the modified CG, placed inside the convergence bounds by
/// `η_â` and `η_v`.
pub fn mcg_alphas(
    state: &CgState,
    r_hat: &CMatrix,
    a_hat: &CVector,
    sigma1_sq: f64,
    x: &CVector,
) -> (Option<Complex64>, Option<Complex64>) {
    let CgParams { lambda, eta_a, eta_v, .. } = state.params;
    let (p_a, p_v, v) = (&state.p_a, &state.p_v, &state.v);
    let lam = real(lambda);

    let pa_v = inner(p_a, v);
    let pa_ga = inner(p_a, &state.g_a);
    let pa_xxa = inner(p_a, x) * inner(x, a_hat);
    let num_a = lam * (pa_v - pa_ga) - pa_v + pa_xxa + real(eta_a) * pa_ga;
    let den_a = real(sigma1_sq) * pa_v * inner(v, p_a);
    let alpha_a = nonzero(den_a, sigma1_sq * norm_sq(p_a) * norm_sq(v)).then(|| num_a / den_a);

    let pv_gv = inner(p_v, &state.g_v);
    let num_v = lam * (pv_gv - inner(p_v, a_hat)) - real(eta_v) * pv_gv;
    let den_v = inner(p_v, &inc_times(r_hat, sigma1_sq, a_hat, p_v));
    let alpha_v = convex(den_v, r_hat.norm() * norm_sq(p_v)).then(|| num_v / den_v);
    (alpha_a, alpha_v)
}

/// Modified CG: a single `(â, v)` update per snapshot with forgetting-factor
/// gradient recursions and Polak-Ribière directions.
pub fn mcg_snapshot(
    state: &mut CgState,
    r_hat: &CMatrix,
    a_hat_in: &CVector,
    sigma1_sq: f64,
    x: &CVector,
) -> Result<CgStep> {
    let s = sigma1_sq;
    let lambda = state.params.lambda;
    let (alpha_a, alpha_v) = mcg_alphas(state, r_hat, a_hat_in, s, x);
    let alpha_a = alpha_a.unwrap_or(Complex64::new(0.0, 0.0));
    let alpha_v = alpha_v.unwrap_or(Complex64::new(0.0, 0.0));

    let v_prev = state.v.clone();
    let a = renormalize(&(a_hat_in + &state.p_a * alpha_a), norm(a_hat_in));
    let v = &v_prev + &state.p_v * alpha_v;

    let g_a = &v * real(1.0 - lambda) + &state.g_a * real(lambda) + &v * (real(s) * alpha_a * inner(&v, &state.p_a))
        - x * inner(x, &a);
    let g_v = &a * real(1.0 - lambda) + &state.g_v * real(lambda)
        - inc_times(r_hat, s, a_hat_in, &state.p_v) * alpha_v
        - x * inner(x, &v_prev);

    let pg_previous = inner(&state.p_v, &state.g_v).re;
    let pg_current = inner(&state.p_v, &g_v).re;

    let mut restarted = false;
    let den_a = norm_sq(&state.g_a);
    let p_a = if den_a > COLLAPSE * norm_sq(&g_a) {
        let beta = inner(&(&g_a - &state.g_a), &g_a) / real(den_a);
        &g_a + &state.p_a * beta
    } else {
        restarted = true;
        g_a.clone()
    };
    let den_v = norm_sq(&state.g_v);
    let p_v = if den_v > COLLAPSE * norm_sq(&g_v) {
        let beta = inner(&(&g_v - &state.g_v), &g_v) / real(den_v);
        &g_v + &state.p_v * beta
    } else {
        restarted = true;
        g_v.clone()
    };

    if !vec_is_finite(&v) || !vec_is_finite(&a) || !vec_is_finite(&p_v) || !vec_is_finite(&p_a) {
        return Err(Error::numeric("MCG iterates became non-finite"));
    }
    let w = normalize_weights(&v, a_hat_in)?;
    state.v = v;
    state.g_a = g_a;
    state.g_v = g_v;
    state.p_a = p_a;
    state.p_v = p_v;
    Ok(CgStep { a_refined: a, w, iterations: 1, pg_current, pg_previous, restarted })
}
