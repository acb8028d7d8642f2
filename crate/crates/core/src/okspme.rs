//! Orthogonal Krylov subspace projection mismatch estimation.
//!
//! Every snapshot runs four steps: desired-power estimation, a Krylov basis
//! seeded by the residue of `R̂ â = b̂`, a projected cross-correlation update of
//! the steering estimate, and (for the direct method) an MVDR solve against the
//! estimated interference-plus-noise covariance. Steps 1–3 are shared with the
//! adaptive engines through [`MismatchEstimator`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::krylov::{arnoldi_mgs, default_breakdown_tol, make_projector, Projector};
use crate::linalg::{
    add_diagonal, distortionless_weights, hermitian_eigenvalues, hermitize, hpd_solve, inner, norm, norm_sq,
    outer, real, trace_re, vec_is_finite, CMatrix, CVector, ONE,
};
use crate::stats::{CovarianceTracker, TrackerMode};

/// Lower clamp applied to the desired-power estimate.
pub const POWER_FLOOR: f64 = 1e-8;
/// Residue or projection norms below this are treated as zero.
pub const TINY: f64 = 1e-12;

/// `max(floor, (|âᴴx|² − |âᴴâ|σ²_n) / |âᴴâ|²)`
pub fn estimate_power(a_hat: &CVector, x: &CVector, sigma_n_sq: f64) -> Result<f64> {
    let energy = norm_sq(a_hat);
    if !(energy > 0.0) {
        return Err(Error::param("steering estimate has zero norm"));
    }
    let proj = inner(a_hat, x).norm_sqr();
    let p = (proj - energy * sigma_n_sq) / (energy * energy);
    Ok(if p.is_nan() { POWER_FLOOR } else { p.max(POWER_FLOOR) })
}

/// `b̂ = â(âᴴâ)σ̂²₁ + (σ̂²_n + δ)â`
pub fn build_rhs(a_hat: &CVector, sigma1_sq: f64, sigma_n_sq: f64, delta: f64) -> CVector {
    a_hat * real(norm_sq(a_hat) * sigma1_sq + sigma_n_sq + delta)
}

#[derive(Debug, Clone)]
pub struct Residue {
    pub r: CVector,
    /// `r/‖r‖`, or `None` when the residue vanished and the subspace update
    /// should be skipped for this snapshot.
    pub t1: Option<CVector>,
}

/// `r = b̂ − R̂â`
pub fn residue(r_hat: &CMatrix, a_hat: &CVector, b: &CVector) -> Residue {
    let r = b - r_hat * a_hat;
    let n = norm(&r);
    let scale = norm(b).max(1.0);
    let t1 = (n > TINY * scale && n.is_finite()).then(|| &r / real(n));
    Residue { r, t1 }
}

/// `â + P d̂/‖P d̂‖`, rescaled to `target_norm`. A vanishing projection leaves
/// `â` untouched.
pub fn update_steering(a_hat: &CVector, projector: &Projector, d_hat: &CVector, target_norm: f64) -> CVector {
    let pd = &projector.p * d_hat;
    let n = norm(&pd);
    if !(n > TINY) || !n.is_finite() {
        return a_hat.clone();
    }
    let updated = a_hat + pd / real(n);
    let un = norm(&updated);
    if !(un > TINY) {
        return a_hat.clone();
    }
    updated * real(target_norm / un)
}

/// Estimated interference-plus-noise covariance.
#[derive(Debug, Clone)]
pub struct IncMatrix {
    pub r_in: CMatrix,
    /// Diagonal loading added to restore positive definiteness, zero if none.
    pub repair_loading: f64,
}

/// `R̂ − σ̂²₁ââᴴ`, loaded by `|λ_min| + 1e-6·tr(R̂)/M` when the subtraction
/// leaves a non-positive-definite matrix.
pub fn inc_matrix(r_hat: &CMatrix, a_hat: &CVector, sigma1_sq: f64) -> IncMatrix {
    let mut r_in = r_hat - outer(a_hat) * real(sigma1_sq);
    hermitize(&mut r_in);
    let mut repair_loading = 0.0;
    if crate::linalg::cholesky(&r_in).is_none() {
        let m = r_in.nrows() as f64;
        let lambda_min = hermitian_eigenvalues(&r_in).first().copied().unwrap_or(0.0);
        let floor = (1e-6 * trace_re(r_hat) / m).max(f64::MIN_POSITIVE);
        repair_loading = lambda_min.min(0.0).abs() + floor;
        add_diagonal(&mut r_in, repair_loading);
    }
    IncMatrix { r_in, repair_loading }
}

/// `R⁻¹â / (âᴴR⁻¹â)` through a Hermitian positive-definite solve.
pub fn mvdr_weights(inc: &IncMatrix, a_hat: &CVector) -> Result<CVector> {
    distortionless_weights(&inc.r_in, a_hat)
}

/// Where the noise power used by the power estimator comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// The scenario's true noise power.
    Oracle,
    /// Mean of the `M − K` smallest eigenvalues of the normalized `R̂`.
    Eigen,
}

/// Parameters shared by the mismatch-estimation front end of all variants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorParams {
    pub sensors: usize,
    /// Signal sources (desired plus interferers) used for the `K + 1` rank cap.
    pub sources: usize,
    /// User loading `δ` in `b̂`.
    pub delta: f64,
    pub tracker_mode: TrackerMode,
    /// Initial covariance loading `δ₀`.
    pub delta0: f64,
    pub noise_mode: NoiseMode,
    /// Renormalize `â` to unit norm instead of `√M`.
    pub unit_norm_steering: bool,
}

impl EstimatorParams {
    pub fn new(sensors: usize, sources: usize) -> Self {
        Self {
            sensors,
            sources,
            delta: 0.1,
            tracker_mode: TrackerMode::SampleMean,
            delta0: 0.1,
            noise_mode: NoiseMode::Oracle,
            unit_norm_steering: false,
        }
    }

    pub fn steering_norm(&self) -> f64 {
        if self.unit_norm_steering {
            1.0
        } else {
            (self.sensors as f64).sqrt()
        }
    }
}

/// What Steps 1–3 produced for one snapshot.
#[derive(Debug, Clone)]
pub struct FrontEndOutput {
    /// Beamformer output `y(i) = w(i−1)ᴴ x(i)`.
    pub y: Complex64,
    /// Steering estimate `â(i)` the snapshot was processed with.
    pub a_hat: CVector,
    pub sigma1_sq: f64,
    pub sigma_n_sq: f64,
    /// Krylov model order, zero when the residue vanished.
    pub order: usize,
}

/// Steps 1–3: covariance tracking, power estimation and Krylov-projected
/// steering update.
#[derive(Debug, Clone)]
pub struct MismatchEstimator {
    params: EstimatorParams,
    tracker: CovarianceTracker,
    a_hat: CVector,
    true_noise_power: f64,
}

impl MismatchEstimator {
    pub fn new(params: EstimatorParams, initial_guess: &CVector, true_noise_power: f64) -> Result<Self> {
        if initial_guess.len() != params.sensors {
            return Err(Error::param("initial guess length differs from sensor count"));
        }
        if params.sources == 0 {
            return Err(Error::param("source count must be >= 1"));
        }
        if !(params.delta >= 0.0) {
            return Err(Error::param("delta must be >= 0"));
        }
        let g = norm(initial_guess);
        if !(g > 0.0) {
            return Err(Error::param("initial guess has zero norm"));
        }
        let tracker = CovarianceTracker::new(params.sensors, params.tracker_mode, params.delta0)?;
        let a_hat = initial_guess * real(params.steering_norm() / g);
        Ok(Self { params, tracker, a_hat, true_noise_power })
    }

    pub fn params(&self) -> &EstimatorParams {
        &self.params
    }

    pub fn tracker(&self) -> &CovarianceTracker {
        &self.tracker
    }

    pub fn a_hat(&self) -> &CVector {
        &self.a_hat
    }

    pub fn set_sources(&mut self, sources: usize) {
        self.params.sources = sources.max(1);
    }

    /// `R̂` on the scale of one snapshot: the tracker's sample mean, or the
    /// forgetting-factor sum divided by its effective length `Σλᵏ`.
    pub fn normalized_r_hat(&self) -> CMatrix {
        match self.tracker.mode() {
            TrackerMode::SampleMean => self.tracker.r_hat().clone(),
            TrackerMode::Forgetting { lambda } => {
                let n = self.tracker.count() as i32;
                let weight = if lambda == 1.0 {
                    n.max(1) as f64
                } else {
                    ((1.0 - lambda.powi(n)) / (1.0 - lambda)).max(1.0)
                };
                self.tracker.r_hat() / real(weight)
            }
        }
    }

    fn noise_power(&self, r_norm: &CMatrix) -> f64 {
        match self.params.noise_mode {
            NoiseMode::Oracle => self.true_noise_power,
            NoiseMode::Eigen => {
                let ev = hermitian_eigenvalues(r_norm);
                let keep = ev.len().saturating_sub(self.params.sources).max(1);
                ev[..keep].iter().sum::<f64>() / keep as f64
            }
        }
    }

    /// Runs Steps 1–3 for snapshot `x`, with `w_prev` the weights of the
    /// previous snapshot. Returns the quantities Step 4 needs and advances the
    /// internal steering estimate.
    pub fn step(&mut self, x: &CVector, w_prev: &CVector) -> Result<FrontEndOutput> {
        let y = inner(w_prev, x);
        self.tracker.update(x, y)?;
        let r = self.normalized_r_hat();
        let sigma_n_sq = self.noise_power(&r);
        let a_hat = self.a_hat.clone();

        let sigma1_sq = estimate_power(&a_hat, x, sigma_n_sq)?;
        let b = build_rhs(&a_hat, sigma1_sq, sigma_n_sq, self.params.delta);
        let res = residue(&r, &a_hat, &b);
        let mut order = 0;
        if let Some(t1) = res.t1 {
            let basis = arnoldi_mgs(&r, &t1, self.params.sources, default_breakdown_tol(&r))?;
            order = basis.order();
            let projector = make_projector(&basis);
            self.a_hat = update_steering(&a_hat, &projector, self.tracker.d_hat(), self.params.steering_norm());
        }
        if !vec_is_finite(&self.a_hat) {
            return Err(Error::numeric("steering estimate became non-finite"));
        }
        Ok(FrontEndOutput { y, a_hat, sigma1_sq, sigma_n_sq, order })
    }
}

/// Direct OKSPME: Steps 1–3 followed by the MVDR solve of Step 4.
#[derive(Debug, Clone)]
pub struct OkspmeState {
    pub estimator: MismatchEstimator,
    pub w: CVector,
    pub sigma1_sq: f64,
}

impl OkspmeState {
    pub fn new(params: EstimatorParams, initial_guess: &CVector, true_noise_power: f64) -> Result<Self> {
        let estimator = MismatchEstimator::new(params, initial_guess, true_noise_power)?;
        Ok(Self { w: CVector::from_element(params.sensors, ONE), estimator, sigma1_sq: POWER_FLOOR })
    }
}

/// Per-snapshot result of the direct method.
#[derive(Debug, Clone)]
pub struct OkspmeStep {
    pub y: Complex64,
    /// The steering estimate the weights are distortionless towards.
    pub a_hat: CVector,
    pub order: usize,
    pub repair_loading: f64,
}

pub fn okspme_snapshot(state: &mut OkspmeState, x: &CVector) -> Result<OkspmeStep> {
    let front = state.estimator.step(x, &state.w)?;
    let r = state.estimator.normalized_r_hat();
    let inc = inc_matrix(&r, &front.a_hat, front.sigma1_sq);
    state.w = mvdr_weights(&inc, &front.a_hat)?;
    state.sigma1_sq = front.sigma1_sq;
    Ok(OkspmeStep { y: front.y, a_hat: front.a_hat, order: front.order, repair_loading: inc.repair_loading })
}

/// `R̂ w` for exact distortionless weights; used to check `R̂w = â/σ̂²₁` style
/// identities.
pub fn covariance_times_weights(r_hat: &CMatrix, a_hat: &CVector) -> Result<CVector> {
    let z = hpd_solve(r_hat, a_hat)?;
    let denom = inner(a_hat, &z);
    Ok(r_hat * (z / denom))
}
