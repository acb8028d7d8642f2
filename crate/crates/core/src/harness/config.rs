//! Scenario configuration: one JSON document, unknown keys rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::adaptive::CgParams;
use crate::array_model::{ScatteringKind, ScatteringSpec};
use crate::error::{Error, Result};
use crate::okspme::{EstimatorParams, NoiseMode};
use crate::stats::TrackerMode;

/// A single SNR or a sweep over several.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SnrSetting {
    Single(f64),
    Sweep(Vec<f64>),
}

impl SnrSetting {
    pub fn points(&self) -> Vec<f64> {
        match self {
            SnrSetting::Single(v) => vec![*v],
            SnrSetting::Sweep(v) => v.clone(),
        }
    }

    pub fn is_sweep(&self) -> bool {
        matches!(self, SnrSetting::Sweep(_))
    }
}

/// Replaces the interferer set from `at_snapshot` (1-based) onwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleChange {
    pub at_snapshot: usize,
    pub interferer_doas_deg: Vec<f64>,
}

/// Settings of the shared steering-estimation front end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrontEndConfig {
    pub delta: f64,
    pub delta0: f64,
    pub noise_mode: NoiseMode,
    /// Falls back to the algorithm's own default when absent.
    pub tracker: Option<TrackerMode>,
}

impl Default for FrontEndConfig {
    fn default() -> Self {
        Self { delta: 0.1, delta0: 0.1, noise_mode: NoiseMode::Oracle, tracker: None }
    }
}

impl FrontEndConfig {
    pub fn estimator_params(&self, sensors: usize, sources: usize, default_mode: TrackerMode) -> EstimatorParams {
        EstimatorParams {
            delta: self.delta,
            delta0: self.delta0,
            noise_mode: self.noise_mode,
            tracker_mode: self.tracker.unwrap_or(default_mode),
            ..EstimatorParams::new(sensors, sources)
        }
    }
}

pub const CG_TRACKER: TrackerMode = TrackerMode::Forgetting { lambda: 0.998 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DirectConfig {
    pub front: FrontEndConfig,
}

impl Default for DirectConfig {
    fn default() -> Self {
        Self { front: FrontEndConfig::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SgConfig {
    pub front: FrontEndConfig,
    /// `μ = mu_scale / σ̄²₁`, with `σ̄²₁` the running mean of the power estimates.
    pub mu_scale: f64,
}

impl Default for SgConfig {
    fn default() -> Self {
        Self { front: FrontEndConfig::default(), mu_scale: 0.005 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CgConfig {
    pub front: FrontEndConfig,
    pub lambda: f64,
    pub eta_a: f64,
    pub eta_v: f64,
    pub n_inner: usize,
}

impl Default for CgConfig {
    fn default() -> Self {
        let d = CgParams::default();
        Self { front: FrontEndConfig::default(), lambda: d.lambda, eta_a: d.eta_a, eta_v: d.eta_v, n_inner: d.n_inner }
    }
}

impl CgConfig {
    pub fn params(&self) -> CgParams {
        CgParams { lambda: self.lambda, eta_a: self.eta_a, eta_v: self.eta_v, n_inner: self.n_inner }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SmiConfig {
    /// Decaying initial loading `δ₀/i` that keeps early sample covariances invertible.
    pub delta0: f64,
    /// Fixed loading in multiples of the noise power (loaded SMI only).
    pub loading_factor: f64,
}

impl Default for SmiConfig {
    fn default() -> Self {
        Self { delta0: 0.1, loading_factor: 10.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum AlgorithmConfig {
    Okspme(DirectConfig),
    OkspmeSg(SgConfig),
    OkspmeCcg(CgConfig),
    OkspmeMcg(CgConfig),
    Smi(SmiConfig),
    LoadedSmi(SmiConfig),
    Optimal,
}

impl AlgorithmConfig {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Okspme(_) => "okspme",
            Self::OkspmeSg(_) => "okspme_sg",
            Self::OkspmeCcg(_) => "okspme_ccg",
            Self::OkspmeMcg(_) => "okspme_mcg",
            Self::Smi(_) => "smi",
            Self::LoadedSmi(_) => "loaded_smi",
            Self::Optimal => "optimal",
        }
    }

    /// Every algorithm with default parameters.
    pub fn all() -> Vec<AlgorithmConfig> {
        vec![
            Self::Okspme(DirectConfig::default()),
            Self::OkspmeSg(SgConfig::default()),
            Self::OkspmeCcg(CgConfig::default()),
            Self::OkspmeMcg(CgConfig::default()),
            Self::Smi(SmiConfig::default()),
            Self::LoadedSmi(SmiConfig::default()),
            Self::Optimal,
        ]
    }

    fn validate(&self) -> Result<()> {
        let front = |f: &FrontEndConfig| -> Result<()> {
            if !(f.delta >= 0.0) || !(f.delta0 >= 0.0) {
                return Err(config("delta and delta0 must be >= 0"));
            }
            if let Some(TrackerMode::Forgetting { lambda }) = f.tracker {
                if !(lambda > 0.0 && lambda <= 1.0) {
                    return Err(config("tracker lambda must lie in (0, 1]"));
                }
            }
            Ok(())
        };
        match self {
            Self::Okspme(c) => front(&c.front),
            Self::OkspmeSg(c) => {
                front(&c.front)?;
                if !(c.mu_scale > 0.0 && c.mu_scale < 1.0) {
                    return Err(config("mu_scale must lie in (0, 1)"));
                }
                Ok(())
            }
            Self::OkspmeCcg(c) | Self::OkspmeMcg(c) => {
                front(&c.front)?;
                c.params().validate().map_err(|e| config(e.to_string()))
            }
            Self::Smi(c) | Self::LoadedSmi(c) => {
                if !(c.delta0 >= 0.0) || !(c.loading_factor >= 0.0) {
                    return Err(config("SMI loadings must be >= 0"));
                }
                Ok(())
            }
            Self::Optimal => Ok(()),
        }
    }
}

fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub sensors: usize,
    pub desired_doa_deg: f64,
    pub interferer_doas_deg: Vec<f64>,
    pub snr_db: SnrSetting,
    /// Interferer power relative to the desired signal, used when `inr_db` is absent.
    pub sir_db: f64,
    /// Interferer power relative to the noise.
    pub inr_db: Option<f64>,
    pub noise_power: f64,
    pub scattering: ScatteringSpec,
    pub sector_halfwidth_deg: f64,
    pub snapshots: usize,
    pub trials: usize,
    pub algorithms: Vec<AlgorithmConfig>,
    pub master_seed: u64,
    pub interferer_schedule: Vec<ScheduleChange>,
    /// Trailing snapshots averaged per trial for an SNR-sweep point.
    pub sweep_tail: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            sensors: 12,
            desired_doa_deg: 10.0,
            interferer_doas_deg: vec![30.0, 50.0],
            snr_db: SnrSetting::Single(10.0),
            sir_db: 0.0,
            inr_db: None,
            noise_power: 1.0,
            scattering: ScatteringSpec::default(),
            sector_halfwidth_deg: 5.0,
            snapshots: 300,
            trials: 100,
            algorithms: AlgorithmConfig::all(),
            master_seed: 1,
            interferer_schedule: Vec::new(),
            sweep_tail: 50,
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sensors < 2 {
            return Err(config("sensors must be >= 2"));
        }
        if self.snapshots == 0 || self.trials == 0 {
            return Err(config("snapshots and trials must be >= 1"));
        }
        if self.sweep_tail == 0 {
            return Err(config("sweep_tail must be >= 1"));
        }
        let points = self.snr_db.points();
        if points.is_empty() {
            return Err(config("snr_db sweep is empty"));
        }
        if points.iter().any(|v| !v.is_finite()) || !self.sir_db.is_finite() {
            return Err(config("SNR and SIR values must be finite"));
        }
        if self.inr_db.is_some_and(|v| !v.is_finite()) {
            return Err(config("inr_db must be finite"));
        }
        if !(self.noise_power > 0.0) || !self.noise_power.is_finite() {
            return Err(config("noise_power must be positive"));
        }
        if !(self.sector_halfwidth_deg >= 0.0 && self.sector_halfwidth_deg < 45.0) {
            return Err(config("sector_halfwidth_deg must lie in [0, 45)"));
        }
        let angle_ok = |a: &f64| (-90.0..=90.0).contains(a);
        let guess_range = [
            self.desired_doa_deg - self.sector_halfwidth_deg,
            self.desired_doa_deg + self.sector_halfwidth_deg,
        ];
        if !guess_range.iter().all(angle_ok) {
            return Err(config("desired direction and sector must lie within [-90, 90] deg"));
        }
        if !self.interferer_doas_deg.iter().all(angle_ok) {
            return Err(config("interferer directions must lie within [-90, 90] deg"));
        }
        self.scattering.validate().map_err(|e| config(e.to_string()))?;
        let mut last = 0;
        for change in &self.interferer_schedule {
            if change.at_snapshot <= last || change.at_snapshot > self.snapshots {
                return Err(config(format!(
                    "schedule change points must increase strictly within [1, {}]",
                    self.snapshots
                )));
            }
            if !change.interferer_doas_deg.iter().all(angle_ok) {
                return Err(config("scheduled interferer directions must lie within [-90, 90] deg"));
            }
            last = change.at_snapshot;
        }
        let mut names: Vec<_> = self.algorithms.iter().map(|a| a.name()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(config("each algorithm may appear at most once"));
        }
        for alg in &self.algorithms {
            alg.validate()?;
        }
        Ok(())
    }

    pub fn desired_power(&self, snr_db: f64) -> f64 {
        self.noise_power * 10f64.powf(snr_db / 10.0)
    }

    pub fn interferer_power(&self, snr_db: f64) -> f64 {
        match self.inr_db {
            Some(inr) => self.noise_power * 10f64.powf(inr / 10.0),
            None => self.desired_power(snr_db) * 10f64.powf(-self.sir_db / 10.0),
        }
    }

    /// Interferer directions in force at 1-based snapshot `i`.
    pub fn interferers_at(&self, i: usize) -> &[f64] {
        self.interferer_schedule
            .iter()
            .rev()
            .find(|c| c.at_snapshot <= i)
            .map_or(&self.interferer_doas_deg, |c| &c.interferer_doas_deg)
    }

    pub fn is_scattered(&self) -> bool {
        self.scattering.kind != ScatteringKind::None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_from_empty_document() {
        let cfg = ScenarioConfig::from_json("{}").unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
        assert_eq!(cfg.algorithms.len(), 7);
        assert_eq!(cfg.snapshots, 300);
        assert_eq!(cfg.trials, 100);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(ScenarioConfig::from_json(r#"{"snapshot": 10}"#), Err(Error::Config(_))));
        let bad = r#"{"algorithms": [{"name": "okspme_sg", "mu": 0.1}]}"#;
        assert!(ScenarioConfig::from_json(bad).is_err());
        let bad = r#"{"algorithms": [{"name": "okspme", "front": {"deltaa": 0.1}}]}"#;
        assert!(ScenarioConfig::from_json(bad).is_err());
        assert!(ScenarioConfig::from_json(r#"{"algorithms": [{"name": "capon"}]}"#).is_err());
    }

    #[test]
    fn algorithm_parameters_parse() {
        let text = r#"{
            "algorithms": [
                {"name": "okspme_mcg", "eta_v": 0.2, "front": {"tracker": {"mode": "sample_mean"}}},
                {"name": "okspme_sg", "mu_scale": 0.01},
                {"name": "optimal"}
            ]
        }"#;
        let cfg = ScenarioConfig::from_json(text).unwrap();
        match cfg.algorithms[0] {
            AlgorithmConfig::OkspmeMcg(c) => {
                assert_eq!(c.eta_v, 0.2);
                assert_eq!(c.front.tracker, Some(TrackerMode::SampleMean));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(cfg.algorithms[1], AlgorithmConfig::OkspmeSg(SgConfig { mu_scale, .. }) if mu_scale == 0.01));
    }

    #[test]
    fn snr_accepts_scalar_and_sweep() {
        let cfg = ScenarioConfig::from_json(r#"{"snr_db": [-10, 0, 10]}"#).unwrap();
        assert_eq!(cfg.snr_db.points(), vec![-10.0, 0.0, 10.0]);
        assert!(cfg.snr_db.is_sweep());
        assert!(ScenarioConfig::from_json(r#"{"snr_db": []}"#).is_err());
    }

    #[test]
    fn schedule_validation() {
        let ok = r#"{"interferer_schedule": [{"at_snapshot": 151, "interferer_doas_deg": [20, 30, 40, 50, 60]}]}"#;
        let cfg = ScenarioConfig::from_json(ok).unwrap();
        assert_eq!(cfg.interferers_at(150), &[30.0, 50.0]);
        assert_eq!(cfg.interferers_at(151).len(), 5);
        for bad in [
            r#"{"interferer_schedule": [{"at_snapshot": 0, "interferer_doas_deg": []}]}"#,
            r#"{"interferer_schedule": [{"at_snapshot": 301, "interferer_doas_deg": []}]}"#,
            r#"{"interferer_schedule": [{"at_snapshot": 20, "interferer_doas_deg": []},
                                        {"at_snapshot": 20, "interferer_doas_deg": []}]}"#,
        ] {
            assert!(ScenarioConfig::from_json(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn invalid_values_are_rejected() {
        for bad in [
            r#"{"snapshots": 0}"#,
            r#"{"trials": 0}"#,
            r#"{"sensors": 1}"#,
            r#"{"noise_power": 0}"#,
            r#"{"algorithms": [{"name": "okspme_ccg", "n_inner": 0}]}"#,
            r#"{"algorithms": [{"name": "smi"}, {"name": "smi"}]}"#,
            r#"{"scattering": {"kind": "coherent", "angle_std_deg": -1}}"#,
        ] {
            assert!(ScenarioConfig::from_json(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn power_rules() {
        let mut cfg = ScenarioConfig { noise_power: 2.0, ..ScenarioConfig::default() };
        assert!((cfg.desired_power(10.0) - 20.0).abs() < 1e-12);
        assert!((cfg.interferer_power(10.0) - 20.0).abs() < 1e-12);
        cfg.inr_db = Some(20.0);
        assert!((cfg.interferer_power(10.0) - 200.0).abs() < 1e-9);
    }
}
