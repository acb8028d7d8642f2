//! One Monte Carlo trial: every configured algorithm consumes the identical
//! snapshot stream and is judged by the output SINR with true quantities.

use crate::adaptive::{ccg_snapshot, mcg_snapshot, sg_update, CgState, SgState};
use crate::array_model::{
    draw_snapshot, make_coherent_mismatch, make_incoherent_mismatch_stream, make_steering, IncoherentStream,
    ScatteringKind, SteeringVector,
};
use crate::baselines::{
    loaded_smi_weights, optimal_distributed, optimal_sinr, output_sinr, output_sinr_distributed, smi_weights,
};
use crate::error::{Error, Result};
use crate::linalg::{distortionless_weights, identity, norm, norm_sq, outer, real, CMatrix, CVector, ONE};
use crate::okspme::{okspme_snapshot, MismatchEstimator, OkspmeState};
use crate::rng::{RandomStream, StreamRole};
use crate::stats::{CovarianceTracker, TrackerMode};

use super::config::{AlgorithmConfig, ScenarioConfig, CG_TRACKER};

/// Per-snapshot traces of one algorithm in one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmTrace {
    pub name: &'static str,
    pub sinr_db: Vec<f64>,
    pub steering_mse: Vec<f64>,
    /// Set when the algorithm hit a numeric failure; the traces are then
    /// truncated at the failing snapshot and the trial is excluded from its means.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub snr_db: f64,
    /// Optimum SINR per snapshot.
    pub optimum_db: Vec<f64>,
    pub traces: Vec<AlgorithmTrace>,
}

impl TrialRecord {
    pub fn trace(&self, name: &str) -> Option<&AlgorithmTrace> {
        self.traces.iter().find(|t| t.name == name)
    }
}

enum Engine {
    Direct(OkspmeState),
    Sg { est: MismatchEstimator, w: CVector, mu_scale: f64, power_sum: f64, steps: usize },
    Ccg { est: MismatchEstimator, cg: CgState, w: CVector },
    Mcg { est: MismatchEstimator, cg: CgState, w: CVector },
    Smi { tracker: CovarianceTracker, loading: Option<f64> },
    Optimal,
}

/// Weights and the steering estimate they are distortionless towards.
struct Output {
    w: CVector,
    a_hat: Option<CVector>,
}

impl Engine {
    fn new(cfg: &AlgorithmConfig, scenario: &ScenarioConfig, sources: usize, guess: &CVector) -> Result<Self> {
        let m = scenario.sensors;
        let noise = scenario.noise_power;
        let ones = CVector::from_element(m, ONE);
        Ok(match cfg {
            AlgorithmConfig::Okspme(c) => {
                let params = c.front.estimator_params(m, sources, TrackerMode::SampleMean);
                Engine::Direct(OkspmeState::new(params, guess, noise)?)
            }
            AlgorithmConfig::OkspmeSg(c) => {
                let params = c.front.estimator_params(m, sources, TrackerMode::SampleMean);
                let est = MismatchEstimator::new(params, guess, noise)?;
                Engine::Sg { est, w: ones, mu_scale: c.mu_scale, power_sum: 0.0, steps: 0 }
            }
            AlgorithmConfig::OkspmeCcg(c) => {
                let params = c.front.estimator_params(m, sources, CG_TRACKER);
                let est = MismatchEstimator::new(params, guess, noise)?;
                Engine::Ccg { est, cg: CgState::new_ccg(m, c.params())?, w: ones }
            }
            AlgorithmConfig::OkspmeMcg(c) => {
                let params = c.front.estimator_params(m, sources, CG_TRACKER);
                let est = MismatchEstimator::new(params, guess, noise)?;
                let a1 = est.a_hat().clone();
                Engine::Mcg { est, cg: CgState::new_mcg(&a1, c.params())?, w: ones }
            }
            AlgorithmConfig::Smi(c) => Engine::Smi {
                tracker: CovarianceTracker::new(m, TrackerMode::SampleMean, c.delta0)?,
                loading: None,
            },
            AlgorithmConfig::LoadedSmi(c) => Engine::Smi {
                tracker: CovarianceTracker::new(m, TrackerMode::SampleMean, c.delta0)?,
                loading: Some(c.loading_factor * noise),
            },
            AlgorithmConfig::Optimal => Engine::Optimal,
        })
    }

    fn set_sources(&mut self, sources: usize) {
        match self {
            Engine::Direct(s) => s.estimator.set_sources(sources),
            Engine::Sg { est, .. } | Engine::Ccg { est, .. } | Engine::Mcg { est, .. } => est.set_sources(sources),
            Engine::Smi { .. } | Engine::Optimal => {}
        }
    }

    fn step(&mut self, x: &CVector, presumed: &CVector, optimum_w: &CVector) -> Result<Output> {
        match self {
            Engine::Direct(state) => {
                let step = okspme_snapshot(state, x)?;
                Ok(Output { w: state.w.clone(), a_hat: Some(step.a_hat) })
            }
            Engine::Sg { est, w, mu_scale, power_sum, steps } => {
                let front = est.step(x, w)?;
                let s = front.sigma1_sq;
                *power_sum += s;
                *steps += 1;
                let smoothed = *power_sum / *steps as f64;
                // keep μσ̂²₁(i) below one even when the current estimate spikes, and
                // μ‖x‖² ≤ 1 so the data term cannot blow up while σ̂²₁ sits at its floor
                let mu = (*mu_scale / smoothed).min(0.5 / s).min(1.0 / norm_sq(x));
                let next = sg_update(&SgState { w: w.clone(), mu }, &front.a_hat, s, x, front.y)?;
                *w = next.w;
                Ok(Output { w: w.clone(), a_hat: Some(front.a_hat) })
            }
            Engine::Ccg { est, cg, w } => {
                let front = est.step(x, w)?;
                let step = ccg_snapshot(cg, est.tracker().r_hat(), &front.a_hat, front.sigma1_sq, x)?;
                *w = step.w;
                Ok(Output { w: w.clone(), a_hat: Some(front.a_hat) })
            }
            Engine::Mcg { est, cg, w } => {
                let front = est.step(x, w)?;
                let step = mcg_snapshot(cg, est.tracker().r_hat(), &front.a_hat, front.sigma1_sq, x)?;
                *w = step.w;
                Ok(Output { w: w.clone(), a_hat: Some(front.a_hat) })
            }
            Engine::Smi { tracker, loading } => {
                tracker.update(x, ONE)?;
                let w = match loading {
                    None => smi_weights(tracker.r_hat(), presumed)?,
                    Some(l) => loaded_smi_weights(tracker.r_hat(), presumed, *l)?,
                };
                Ok(Output { w, a_hat: Some(presumed.clone()) })
            }
            Engine::Optimal => Ok(Output { w: optimum_w.clone(), a_hat: None }),
        }
    }
}

/// True second-order statistics of the current interference environment.
struct Truth {
    r_in: CMatrix,
    optimum_db: f64,
    optimum_w: CVector,
}

enum Desired {
    Fixed(SteeringVector),
    Incoherent { stream: IncoherentStream, r_signal: CMatrix },
}

fn truth(cfg: &ScenarioConfig, snr_db: f64, doas: &[f64], desired: &Desired, sigma1_sq: f64) -> Result<Truth> {
    let m = cfg.sensors;
    let p_int = cfg.interferer_power(snr_db);
    let mut r_in = identity(m) * real(cfg.noise_power);
    for &doa in doas {
        r_in += outer(&make_steering(m, doa)?.elements) * real(p_int);
    }
    let (optimum_db, optimum_w) = match desired {
        Desired::Fixed(a1) => {
            let w = distortionless_weights(&r_in, &a1.elements)?;
            (optimal_sinr(sigma1_sq, &a1.elements, &r_in)?, w)
        }
        Desired::Incoherent { r_signal, .. } => optimal_distributed(r_signal, &r_in)?,
    };
    Ok(Truth { r_in, optimum_db, optimum_w })
}

/// `‖â·(‖a₁‖/‖â‖) − a₁‖²`
fn steering_mse(a_hat: &CVector, a1: &CVector) -> f64 {
    let n = norm(a_hat);
    if !(n > 0.0) {
        return norm_sq(a1);
    }
    norm_sq(&(a_hat * real(norm(a1) / n) - a1))
}

/// Runs trial `trial_index` of `cfg` at one SNR point.
pub fn run_trial(cfg: &ScenarioConfig, snr_db: f64, trial_index: u64) -> Result<TrialRecord> {
    let m = cfg.sensors;
    let seed = cfg.master_seed;
    let mut data_rng = RandomStream::new(seed, trial_index, StreamRole::Data);
    let mut scatter_rng = RandomStream::new(seed, trial_index, StreamRole::Scattering);
    let gain_rng = RandomStream::new(seed, trial_index, StreamRole::IncoherentGains);
    let mut guess_rng = RandomStream::new(seed, trial_index, StreamRole::InitialGuess);

    let sigma1_sq = cfg.desired_power(snr_db);
    let p_int = cfg.interferer_power(snr_db);
    let nominal = make_steering(m, cfg.desired_doa_deg)?;
    let mut desired = match cfg.scattering.kind {
        ScatteringKind::None => Desired::Fixed(nominal.clone()),
        ScatteringKind::Coherent => Desired::Fixed(make_coherent_mismatch(&nominal, &cfg.scattering, &mut scatter_rng)?),
        ScatteringKind::Incoherent => {
            let stream = make_incoherent_mismatch_stream(&nominal, &cfg.scattering, &mut scatter_rng, gain_rng)?;
            let r_signal = stream.expected_covariance() * real(sigma1_sq);
            Desired::Incoherent { stream, r_signal }
        }
    };
    // MSE reference: the realized response, or the direct path for a distributed source
    let reference = match &desired {
        Desired::Fixed(a1) => a1.elements.clone(),
        Desired::Incoherent { .. } => nominal.elements.clone(),
    };

    let h = cfg.sector_halfwidth_deg;
    let guess_deg = guess_rng.uniform(cfg.desired_doa_deg - h, cfg.desired_doa_deg + h);
    let presumed = make_steering(m, guess_deg)?.elements;

    let mut doas = cfg.interferers_at(1).to_vec();
    let mut engines = Vec::with_capacity(cfg.algorithms.len());
    let mut traces = Vec::with_capacity(cfg.algorithms.len());
    for alg in &cfg.algorithms {
        engines.push(Some(Engine::new(alg, cfg, doas.len() + 1, &presumed)?));
        traces.push(AlgorithmTrace {
            name: alg.name(),
            sinr_db: Vec::with_capacity(cfg.snapshots),
            steering_mse: Vec::with_capacity(cfg.snapshots),
            failure: None,
        });
    }

    let mut current = truth(cfg, snr_db, &doas, &desired, sigma1_sq)?;
    let mut optimum_db = Vec::with_capacity(cfg.snapshots);
    for i in 1..=cfg.snapshots {
        let now = cfg.interferers_at(i);
        if now != doas.as_slice() {
            doas = now.to_vec();
            current = truth(cfg, snr_db, &doas, &desired, sigma1_sq)?;
            for engine in engines.iter_mut().flatten() {
                engine.set_sources(doas.len() + 1);
            }
        }
        let interferers = doas
            .iter()
            .map(|&d| make_steering(m, d).map(|sv| (sv.elements, p_int)))
            .collect::<Result<Vec<_>>>()?;
        let a1 = match &mut desired {
            Desired::Fixed(a1) => a1.elements.clone(),
            Desired::Incoherent { stream, .. } => stream.next_steering().elements,
        };
        let x = draw_snapshot(&a1, sigma1_sq, &interferers, cfg.noise_power, &mut data_rng);
        optimum_db.push(current.optimum_db);

        for (slot, trace) in engines.iter_mut().zip(traces.iter_mut()) {
            let Some(engine) = slot else { continue };
            let measured = engine.step(&x, &presumed, &current.optimum_w).and_then(|out| {
                let sinr = match &desired {
                    Desired::Fixed(a1) => output_sinr(&out.w, sigma1_sq, &a1.elements, &current.r_in)?,
                    Desired::Incoherent { r_signal, .. } => output_sinr_distributed(&out.w, r_signal, &current.r_in)?,
                };
                let mse = out.a_hat.map_or(0.0, |a| steering_mse(&a, &reference));
                if !sinr.is_finite() || !mse.is_finite() {
                    return Err(Error::numeric("non-finite SINR or steering error"));
                }
                Ok((sinr, mse))
            });
            match measured {
                Ok((sinr, mse)) => {
                    trace.sinr_db.push(sinr);
                    trace.steering_mse.push(mse);
                }
                Err(e) => {
                    trace.failure = Some(format!("snapshot {i}: {e}"));
                    *slot = None;
                }
            }
        }
    }
    Ok(TrialRecord { trial_index, snr_db, optimum_db, traces })
}
