//! Uniform linear array model: steering vectors, local-scattering mismatch
//! and snapshot synthesis.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{outer, CMatrix, CVector, ZERO};
use crate::rng::RandomStream;

/// Array response of a half-wavelength ULA, plus the angle it was built from
/// when it is a plain (unscattered) response.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub elements: CVector,
    pub angle_deg: Option<f64>,
}

impl SteeringVector {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub doa_deg: f64,
    /// Linear power.
    pub power: f64,
    #[serde(default)]
    pub is_desired: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ScatteringKind {
    #[default]
    None,
    Coherent,
    Incoherent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScatteringSpec {
    pub kind: ScatteringKind,
    pub num_paths: usize,
    pub angle_mean_deg: f64,
    pub angle_std_deg: f64,
}

impl Default for ScatteringSpec {
    fn default() -> Self {
        Self {
            kind: ScatteringKind::None,
            num_paths: 4,
            angle_mean_deg: 10.0,
            angle_std_deg: 2.0,
        }
    }
}

impl ScatteringSpec {
    pub fn coherent() -> Self {
        Self { kind: ScatteringKind::Coherent, ..Self::default() }
    }

    pub fn incoherent() -> Self {
        Self { kind: ScatteringKind::Incoherent, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.angle_std_deg >= 0.0) || !self.angle_mean_deg.is_finite() {
            return Err(Error::param("scattering angle mean must be finite and std >= 0"));
        }
        Ok(())
    }

    /// Draws one scattered-path angle. The uniform law on
    /// `[mean - √3·std, mean + √3·std]` has exactly the configured mean and std.
    pub fn draw_angle(&self, rng: &mut RandomStream) -> f64 {
        let half = 3f64.sqrt() * self.angle_std_deg;
        rng.uniform(self.angle_mean_deg - half, self.angle_mean_deg + half)
    }
}

fn check_sensors(m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::param(format!("sensor count must be >= 2, got {m}")));
    }
    Ok(())
}

/// ULA response with element `k = exp(jπ k sin θ)`.
pub fn make_steering(m: usize, theta_deg: f64) -> Result<SteeringVector> {
    check_sensors(m)?;
    if !(-90.0..=90.0).contains(&theta_deg) {
        return Err(Error::param(format!("angle {theta_deg} deg outside [-90, 90]")));
    }
    Ok(SteeringVector { elements: steering_elements(m, theta_deg), angle_deg: Some(theta_deg) })
}

pub(crate) fn steering_elements(m: usize, theta_deg: f64) -> CVector {
    let phase = PI * theta_deg.to_radians().sin();
    CVector::from_fn(m, |k, _| num_complex::Complex64::from_polar(1.0, phase * k as f64))
}

/// `p + Σ e^{jφ_k} b(θ_k)` for explicit path angles and phases.
pub fn coherent_mismatch_with(
    nominal: &SteeringVector,
    angles_deg: &[f64],
    phases: &[f64],
) -> Result<SteeringVector> {
    if angles_deg.len() != phases.len() {
        return Err(Error::param("path angles and phases differ in length"));
    }
    let m = nominal.len();
    check_sensors(m)?;
    let mut a = nominal.elements.clone();
    for (&theta, &phi) in angles_deg.iter().zip(phases) {
        a += steering_elements(m, theta) * num_complex::Complex64::from_polar(1.0, phi);
    }
    let angle_deg = if angles_deg.is_empty() { nominal.angle_deg } else { None };
    Ok(SteeringVector { elements: a, angle_deg })
}

/// Coherent local scattering: path angles and phases drawn once, fixed for
/// the whole trial.
pub fn make_coherent_mismatch(
    nominal: &SteeringVector,
    spec: &ScatteringSpec,
    rng: &mut RandomStream,
) -> Result<SteeringVector> {
    spec.validate()?;
    if spec.kind != ScatteringKind::Coherent {
        return Err(Error::param("coherent mismatch requested with a non-coherent spec"));
    }
    let mut angles = Vec::with_capacity(spec.num_paths);
    let mut phases = Vec::with_capacity(spec.num_paths);
    for _ in 0..spec.num_paths {
        angles.push(spec.draw_angle(rng));
        phases.push(rng.phase());
    }
    coherent_mismatch_with(nominal, &angles, &phases)
}

/// Incoherent local scattering: fixed path geometry with i.i.d. unit-variance
/// complex Gaussian gains redrawn at every snapshot.
#[derive(Debug, Clone)]
pub struct IncoherentStream {
    direct: CVector,
    paths: Vec<CVector>,
    path_angles_deg: Vec<f64>,
    rng: RandomStream,
}

impl IncoherentStream {
    pub fn path_angles_deg(&self) -> &[f64] {
        &self.path_angles_deg
    }

    /// `g₀ p + Σ g_k b(θ_k)` for the given gains (`gains.len() == num_paths + 1`).
    pub fn compose(&self, gains: &[num_complex::Complex64]) -> Result<SteeringVector> {
        if gains.len() != self.paths.len() + 1 {
            return Err(Error::param(format!(
                "expected {} gains, got {}",
                self.paths.len() + 1,
                gains.len()
            )));
        }
        let mut a = &self.direct * gains[0];
        for (b, g) in self.paths.iter().zip(&gains[1..]) {
            a += b * *g;
        }
        Ok(SteeringVector { elements: a, angle_deg: None })
    }

    pub fn next_steering(&mut self) -> SteeringVector {
        let gains: Vec<_> = (0..=self.paths.len()).map(|_| self.rng.complex_gaussian(1.0)).collect();
        self.compose(&gains).expect("gain count matches path count")
    }

    /// `E[a aᴴ] = p pᴴ + Σ b_k b_kᴴ` for unit-variance gains.
    pub fn expected_covariance(&self) -> CMatrix {
        let mut r = outer(&self.direct);
        for b in &self.paths {
            r += outer(b);
        }
        r
    }
}

/// Builds the incoherent stream. Path angles come from `geometry_rng`, the
/// per-snapshot gains from `gain_rng`.
pub fn make_incoherent_mismatch_stream(
    nominal: &SteeringVector,
    spec: &ScatteringSpec,
    geometry_rng: &mut RandomStream,
    gain_rng: RandomStream,
) -> Result<IncoherentStream> {
    spec.validate()?;
    check_sensors(nominal.len())?;
    if spec.kind != ScatteringKind::Incoherent {
        return Err(Error::param("incoherent mismatch requested with a non-incoherent spec"));
    }
    let m = nominal.len();
    let path_angles_deg: Vec<f64> = (0..spec.num_paths).map(|_| spec.draw_angle(geometry_rng)).collect();
    let paths = path_angles_deg.iter().map(|&t| steering_elements(m, t)).collect();
    Ok(IncoherentStream { direct: nominal.elements.clone(), paths, path_angles_deg, rng: gain_rng })
}

/// Where the desired signal's steering vector comes from.
#[derive(Debug)]
pub enum DesiredSteering<'a> {
    Fixed(&'a SteeringVector),
    Stream(&'a mut IncoherentStream),
}

#[derive(Debug, Clone)]
pub struct SnapshotBatch {
    /// `M × count`, one column per snapshot.
    pub observations: CMatrix,
    /// One entry for a fixed desired response, one per snapshot for a stream.
    pub true_steering: Vec<SteeringVector>,
    pub noise_power: f64,
}

/// One array snapshot `Σ a_k s_k + n` with zero-mean complex Gaussian symbols
/// and circular Gaussian noise.
pub fn draw_snapshot(
    desired: &CVector,
    desired_power: f64,
    interferers: &[(CVector, f64)],
    noise_power: f64,
    rng: &mut RandomStream,
) -> CVector {
    let m = desired.len();
    let mut x = desired * rng.complex_gaussian(desired_power);
    for (a, p) in interferers {
        x += a * rng.complex_gaussian(*p);
    }
    if noise_power > 0.0 {
        for k in 0..m {
            x[k] += rng.complex_gaussian(noise_power);
        }
    } else {
        // keep the stream position independent of the noise power
        for _ in 0..m {
            rng.complex_gaussian(0.0);
        }
    }
    x
}

pub fn generate_snapshots(
    sensors: usize,
    sources: &[SourceConfig],
    desired_sv: DesiredSteering<'_>,
    noise_power: f64,
    count: usize,
    rng: &mut RandomStream,
) -> Result<SnapshotBatch> {
    check_sensors(sensors)?;
    if sources.is_empty() {
        return Err(Error::param("source list is empty"));
    }
    if count == 0 {
        return Err(Error::param("snapshot count must be >= 1"));
    }
    if !(noise_power >= 0.0) {
        return Err(Error::param("noise power must be >= 0"));
    }
    let desired: Vec<_> = sources.iter().filter(|s| s.is_desired).collect();
    if desired.len() != 1 {
        return Err(Error::param(format!("exactly one desired source required, found {}", desired.len())));
    }
    if sources.iter().any(|s| !(s.power >= 0.0)) {
        return Err(Error::param("source powers must be >= 0"));
    }
    let desired_power = desired[0].power;
    let interferers = sources
        .iter()
        .filter(|s| !s.is_desired)
        .map(|s| make_steering(sensors, s.doa_deg).map(|sv| (sv.elements, s.power)))
        .collect::<Result<Vec<_>>>()?;

    let mut observations = CMatrix::from_element(sensors, count, ZERO);
    let mut true_steering = Vec::new();
    match desired_sv {
        DesiredSteering::Fixed(sv) => {
            if sv.len() != sensors {
                return Err(Error::param("desired steering length differs from sensor count"));
            }
            for i in 0..count {
                let x = draw_snapshot(&sv.elements, desired_power, &interferers, noise_power, rng);
                observations.set_column(i, &x);
            }
            true_steering.push(sv.clone());
        }
        DesiredSteering::Stream(stream) => {
            for i in 0..count {
                let sv = stream.next_steering();
                if sv.len() != sensors {
                    return Err(Error::param("desired steering length differs from sensor count"));
                }
                let x = draw_snapshot(&sv.elements, desired_power, &interferers, noise_power, rng);
                observations.set_column(i, &x);
                true_steering.push(sv);
            }
        }
    }
    Ok(SnapshotBatch { observations, true_steering, noise_power })
}
