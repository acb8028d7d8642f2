//! Running second-order statistics: the sample covariance matrix `R̂` and the
//! sample cross-correlation vector `d̂ = E[x y*]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{add_diagonal, hermitize, identity, real, CMatrix, CVector};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum TrackerMode {
    /// `R̂(i) = (δ₀I + Σ x xᴴ)/i`, `d̂(i) = (1/i)Σ x y*`.
    SampleMean,
    /// `R̂(i) = λR̂(i-1) + x xᴴ`, `d̂(i) = λd̂(i-1) + x y*`, unnormalized.
    Forgetting { lambda: f64 },
}

#[derive(Debug, Clone)]
pub struct CovarianceTracker {
    r_hat: CMatrix,
    d_hat: CVector,
    // unnormalized sums for the sample-mean mode
    r_sum: CMatrix,
    d_sum: CVector,
    count: usize,
    mode: TrackerMode,
    delta0: f64,
}

impl CovarianceTracker {
    pub fn new(sensors: usize, mode: TrackerMode, delta0: f64) -> Result<Self> {
        if sensors == 0 {
            return Err(Error::param("tracker needs at least one sensor"));
        }
        if let TrackerMode::Forgetting { lambda } = mode {
            if !(lambda > 0.0 && lambda <= 1.0) {
                return Err(Error::param(format!("forgetting factor {lambda} outside (0, 1]")));
            }
        }
        if !(delta0 >= 0.0) || !delta0.is_finite() {
            return Err(Error::param(format!("initial loading {delta0} must be finite and >= 0")));
        }
        let init = identity(sensors) * real(delta0);
        Ok(Self {
            r_hat: init.clone(),
            d_hat: CVector::zeros(sensors),
            r_sum: init,
            d_sum: CVector::zeros(sensors),
            count: 0,
            mode,
            delta0,
        })
    }

    pub fn sensors(&self) -> usize {
        self.d_hat.len()
    }

    pub fn r_hat(&self) -> &CMatrix {
        &self.r_hat
    }

    pub fn d_hat(&self) -> &CVector {
        &self.d_hat
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mode(&self) -> TrackerMode {
        self.mode
    }

    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    /// Absorbs snapshot `x` with beamformer output `y`.
    pub fn update(&mut self, x: &CVector, y: Complex64) -> Result<()> {
        if x.len() != self.sensors() {
            return Err(Error::param(format!(
                "snapshot length {} differs from sensor count {}",
                x.len(),
                self.sensors()
            )));
        }
        self.count += 1;
        match self.mode {
            TrackerMode::SampleMean => {
                self.r_sum.gerc(Complex64::new(1.0, 0.0), x, x, Complex64::new(1.0, 0.0));
                self.d_sum.axpy(y.conj(), x, Complex64::new(1.0, 0.0));
                hermitize(&mut self.r_sum);
                let inv = real(1.0 / self.count as f64);
                self.r_hat = &self.r_sum * inv;
                self.d_hat = &self.d_sum * inv;
            }
            TrackerMode::Forgetting { lambda } => {
                self.r_hat.gerc(Complex64::new(1.0, 0.0), x, x, real(lambda));
                self.d_hat.axpy(y.conj(), x, real(lambda));
                hermitize(&mut self.r_hat);
            }
        }
        Ok(())
    }

    /// Adds `value·I` to the current covariance estimate.
    pub fn load_diagonal(&mut self, value: f64) {
        add_diagonal(&mut self.r_hat, value);
        add_diagonal(&mut self.r_sum, value * self.count.max(1) as f64);
    }
}
