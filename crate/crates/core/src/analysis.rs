//! Closed-form steering-error bounds and per-snapshot flop models.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundMethod {
    Sqp,
    Okspme,
}

impl FromStr for BoundMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sqp" => Ok(Self::Sqp),
            "okspme" => Ok(Self::Okspme),
            other => Err(Error::param(format!("unknown bound method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MseBounds {
    pub lower: f64,
    pub upper: f64,
    pub method: BoundMethod,
}

/// Sums an alternating/positive power series `Σ_k term_k` until terms vanish.
fn series(first: f64, mut next: impl FnMut(usize, f64) -> f64) -> f64 {
    let mut term = first;
    let mut sum = 0.0;
    for k in 0..64 {
        sum += term;
        if term.abs() <= f64::EPSILON * 1e-3 * sum.abs() {
            break;
        }
        term = next(k, term);
    }
    sum
}

/// `1 − sin θ/θ` without cancellation for small θ.
fn one_minus_sinc(t: f64) -> f64 {
    // θ²/3! − θ⁴/5! + θ⁶/7! − …
    let t2 = t * t;
    series(t2 / 6.0, |k, prev| {
        let n = 2 * k + 4;
        -prev * t2 / ((n * (n + 1)) as f64)
    })
}

/// `x − sin x`
fn x_minus_sin(x: f64) -> f64 {
    let x2 = x * x;
    series(x * x2 / 6.0, |k, prev| {
        let n = 2 * k + 4;
        -prev * x2 / ((n * (n + 1)) as f64)
    })
}

/// `tan x − x`, via its Taylor series near zero.
fn tan_minus_x(x: f64) -> f64 {
    if x.abs() < 0.05 {
        let x2 = x * x;
        // x³/3 + 2x⁵/15 + 17x⁷/315 + 62x⁹/2835 + 1382x¹¹/155925
        x * x2 * (1.0 / 3.0 + x2 * (2.0 / 15.0 + x2 * (17.0 / 315.0 + x2 * (62.0 / 2835.0 + x2 * 1382.0 / 155925.0))))
    } else {
        x.tan() - x
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < FRAC_PI_4 {
        Ok(())
    } else {
        Err(Error::param(format!("half-sector {theta} rad must lie in (0, π/4)")))
    }
}

/// Lower and upper bounds on the steering-vector MSE for a uniform sector of
/// half-width `theta` radians.
pub fn mse_bounds(theta: f64, a_norm_sq: f64, method: BoundMethod) -> Result<MseBounds> {
    check_theta(theta)?;
    if !(a_norm_sq >= 0.0) || !a_norm_sq.is_finite() {
        return Err(Error::param("‖a₁‖² must be finite and non-negative"));
    }
    let base = 2.0 * one_minus_sinc(theta);
    let (lower, upper) = match method {
        BoundMethod::Sqp => {
            let d = tan_minus_x(2.0 * theta);
            let tan = theta.tan();
            (base + theta * theta / 4.0, base + d * d / 4.0 + tan * tan)
        }
        BoundMethod::Okspme => {
            let half = (theta / 2.0).sin();
            let d = x_minus_sin(2.0 * theta);
            (base + half * half, base + d * d / 4.0 + theta * theta)
        }
    };
    Ok(MseBounds { lower: lower * a_norm_sq, upper: upper * a_norm_sq, method })
}

/// Mean, variance and mean square of the steering error norm `‖ε‖` when the
/// angular offset is uniform on `[0, θ]`.
pub fn epsilon_moments(theta: f64, a_norm: f64) -> Result<(f64, f64, f64)> {
    check_theta(theta)?;
    if !(a_norm >= 0.0) || !a_norm.is_finite() {
        return Err(Error::param("‖a₁‖ must be finite and non-negative"));
    }
    let s = (theta / 4.0).sin();
    let mean = 8.0 * a_norm * s * s / theta;
    let oms = one_minus_sinc(theta);
    let variance = 2.0 * a_norm * a_norm * (oms - 32.0 * s.powi(4) / (theta * theta));
    let mean_square = 2.0 * a_norm * a_norm * oms;
    Ok((mean, variance, mean_square))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlopAlgorithm {
    Locsme,
    Rcb,
    Sqp,
    Locme,
    Lcwc,
    Okspme,
    OkspmeSg,
    OkspmeCcg,
    OkspmeMcg,
}

impl FlopAlgorithm {
    pub const ALL: [FlopAlgorithm; 9] = [
        Self::Locsme,
        Self::Rcb,
        Self::Sqp,
        Self::Locme,
        Self::Lcwc,
        Self::Okspme,
        Self::OkspmeSg,
        Self::OkspmeCcg,
        Self::OkspmeMcg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Locsme => "locsme",
            Self::Rcb => "rcb",
            Self::Sqp => "sqp",
            Self::Locme => "locme",
            Self::Lcwc => "lcwc",
            Self::Okspme => "okspme",
            Self::OkspmeSg => "okspme-sg",
            Self::OkspmeCcg => "okspme-ccg",
            Self::OkspmeMcg => "okspme-mcg",
        }
    }

    pub fn needs_order(self) -> bool {
        matches!(self, Self::Okspme | Self::OkspmeSg | Self::OkspmeCcg | Self::OkspmeMcg)
    }

    pub fn needs_inner(self) -> bool {
        matches!(self, Self::Lcwc | Self::OkspmeCcg)
    }

    /// The count for this row is an order-of-growth label, not an exact tally.
    pub fn is_asymptotic(self) -> bool {
        self == Self::Sqp
    }
}

impl fmt::Display for FlopAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FlopAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|a| a.name() == key)
            .ok_or_else(|| Error::param(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlopModel {
    pub algorithm: FlopAlgorithm,
    pub m_sensors: u64,
    /// Krylov order `m`.
    pub order: Option<u64>,
    /// Inner iteration count `n`.
    pub inner: Option<u64>,
}

impl FlopModel {
    pub fn new(algorithm: FlopAlgorithm, m_sensors: u64) -> Self {
        Self { algorithm, m_sensors, order: None, inner: None }
    }

    pub fn with_order(mut self, m: u64) -> Self {
        self.order = Some(m);
        self
    }

    pub fn with_inner(mut self, n: u64) -> Self {
        self.inner = Some(n);
        self
    }
}

/// Flops per snapshot for one row of the complexity table.
pub fn flops(model: FlopModel) -> Result<u64> {
    let alg = model.algorithm;
    let big_m = model.m_sensors;
    if big_m < 2 {
        return Err(Error::param("flop models need M >= 2"));
    }
    let m = match (alg.needs_order(), model.order) {
        (true, None) => return Err(Error::param(format!("{alg} needs the Krylov order m"))),
        (_, o) => o.unwrap_or(0),
    };
    let n = match (alg.needs_inner(), model.inner) {
        (true, None) => return Err(Error::param(format!("{alg} needs the iteration count n"))),
        (_, i) => i.unwrap_or(0),
    };
    let m2 = big_m * big_m;
    let m3 = m2 * big_m;
    let count = match alg {
        FlopAlgorithm::Locsme => 4 * m3 + 3 * m2 + 20 * big_m,
        FlopAlgorithm::Rcb => 2 * m3 + 11 * m2,
        FlopAlgorithm::Sqp => (big_m as f64).powf(3.5).round() as u64,
        FlopAlgorithm::Locme => 2 * m3 + 4 * m2 + 5 * big_m,
        FlopAlgorithm::Lcwc => 2 * n * m2 + 7 * n * big_m,
        FlopAlgorithm::Okspme => m3 + (4 * m + 11) * m2 + (3 * m * m + 5 * m + 20) * big_m,
        FlopAlgorithm::OkspmeSg => (4 * m + 7) * m2 + (3 * m * m + 5 * m + 33) * big_m,
        FlopAlgorithm::OkspmeCcg => {
            (4 * m + 8 * n + 8) * m2 + (3 * m * m + 5 * m + 33 * n + 29) * big_m
        }
        FlopAlgorithm::OkspmeMcg => (4 * m + 14) * m2 + (3 * m * m + 5 * m + 86) * big_m,
    };
    Ok(count)
}
