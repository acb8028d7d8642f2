//! Acceptance suite. Each test checks one criterion at its stated tolerance
//! and writes a single PASS/FAIL line to stderr (outside the capture, so the
//! verdicts show up in a plain `cargo test` log).

use std::io::Write;
use std::time::{Duration, Instant};

use okspme::adaptive::{
    ccg_snapshot, joint_cost, mcg_snapshot, steering_neg_gradient, weight_neg_gradient, CgParams, CgState,
};
use okspme::analysis::{epsilon_moments, flops, mse_bounds, BoundMethod, FlopAlgorithm, FlopModel};
use okspme::array_model::{draw_snapshot, make_coherent_mismatch, make_steering, ScatteringSpec};
use okspme::harness::experiment::to_csv;
use okspme::harness::{run_experiment, write_csv, AggregateResult, ScenarioConfig};
use okspme::krylov::{arnoldi_mgs, default_breakdown_tol, make_projector, StopReason};
use okspme::linalg::{c, identity, inner, max_abs_diff, norm, real, CMatrix, CVector};
use okspme::okspme::{okspme_snapshot, EstimatorParams, MismatchEstimator, OkspmeState};
use okspme::rng::{RandomStream, StreamRole};
use okspme::stats::TrackerMode;

const PROPOSED: [&str; 4] = ["okspme", "okspme_sg", "okspme_ccg", "okspme_mcg"];

fn report(id: u32, title: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {id:>2} [{verdict}] {title}: {detail}");
    assert!(pass, "criterion {id} ({title}) failed: {detail}");
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn scenario(json: &str) -> ScenarioConfig {
    ScenarioConfig::from_json(json).expect("scenario config")
}

/// Trial-mean SINR averaged over the last `tail` snapshots.
fn final_mean(result: &AggregateResult, algorithm: &str, tail: usize) -> f64 {
    let series = result.series(algorithm);
    assert!(!series.is_empty(), "no rows for {algorithm}");
    let start = series.len().saturating_sub(tail);
    let tail = &series[start..];
    tail.iter().map(|r| r.mean_sinr_db).sum::<f64>() / tail.len() as f64
}

/// Trial-mean SINR averaged over snapshots `first..=last`.
fn window_mean(result: &AggregateResult, algorithm: &str, first: usize, last: usize) -> f64 {
    let rows: Vec<_> = result
        .series(algorithm)
        .into_iter()
        .filter(|r| r.x_value >= first as f64 && r.x_value <= last as f64)
        .collect();
    rows.iter().map(|r| r.mean_sinr_db).sum::<f64>() / rows.len() as f64
}

fn failures(result: &AggregateResult) -> String {
    if result.total_failures() == 0 {
        return "no failed trials".into();
    }
    let parts: Vec<String> = result.failures.iter().filter(|(_, &n)| n > 0).map(|(k, n)| format!("{k}={n}")).collect();
    format!("failed trials {}", parts.join(" "))
}

fn random_vec(rng: &mut RandomStream, m: usize) -> CVector {
    CVector::from_fn(m, |_, _| rng.complex_gaussian(1.0))
}

fn random_hermitian(rng: &mut RandomStream, m: usize) -> CMatrix {
    let a = CMatrix::from_fn(m, m, |_, _| rng.complex_gaussian(1.0));
    (&a + a.adjoint()) * real(0.5)
}

fn random_hpd(rng: &mut RandomStream, m: usize) -> CMatrix {
    let a = CMatrix::from_fn(m, m, |_, _| rng.complex_gaussian(1.0));
    &a * a.adjoint() + identity(m) * real(0.5)
}

/// The per-snapshot flop polynomials, written out independently of the
/// library.
fn flop_polynomial(alg: FlopAlgorithm, big_m: u64, m: u64, n: u64) -> u64 {
    let mm = big_m;
    match alg {
        FlopAlgorithm::Locsme => 4 * mm.pow(3) + 3 * mm.pow(2) + 20 * mm,
        FlopAlgorithm::Rcb => 2 * mm.pow(3) + 11 * mm.pow(2),
        FlopAlgorithm::Sqp => (mm as f64).powf(3.5).round() as u64,
        FlopAlgorithm::Locme => 2 * mm.pow(3) + 4 * mm.pow(2) + 5 * mm,
        FlopAlgorithm::Lcwc => 2 * n * mm.pow(2) + 7 * n * mm,
        FlopAlgorithm::Okspme => mm.pow(3) + (4 * m + 11) * mm.pow(2) + (3 * m.pow(2) + 5 * m + 20) * mm,
        FlopAlgorithm::OkspmeSg => (4 * m + 7) * mm.pow(2) + (3 * m.pow(2) + 5 * m + 33) * mm,
        FlopAlgorithm::OkspmeCcg => (4 * m + 8 * n + 8) * mm.pow(2) + (3 * m.pow(2) + 5 * m + 33 * n + 29) * mm,
        FlopAlgorithm::OkspmeMcg => (4 * m + 14) * mm.pow(2) + (3 * m.pow(2) + 5 * m + 86) * mm,
    }
}

fn model(alg: FlopAlgorithm, big_m: u64, m: u64, n: u64) -> FlopModel {
    let mut model = FlopModel::new(alg, big_m);
    if alg.needs_order() {
        model = model.with_order(m);
    }
    if alg.needs_inner() {
        model = model.with_inner(n);
    }
    model
}

#[test]
fn criterion_01_flop_models() {
    let start = Instant::now();
    let mut mismatches = 0;
    for alg in FlopAlgorithm::ALL {
        for big_m in 2..=100u64 {
            for m in 1..=6u64 {
                for n in [1u64, 5, 50] {
                    if flops(model(alg, big_m, m, n)).unwrap() != flop_polynomial(alg, big_m, m, n) {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    let spot = [
        (FlopAlgorithm::Okspme, 4580),
        (FlopAlgorithm::OkspmeSg, 3310),
        (FlopAlgorithm::Lcwc, 13500),
    ]
    .iter()
    .all(|&(alg, expected)| flops(model(alg, 10, 4, 50)).unwrap() == expected);

    let count = |alg, big_m| flops(model(alg, big_m, 4, 5)).unwrap();
    let violations: Vec<u64> = (10..=100u64)
        .filter(|&big_m| {
            let sg = count(FlopAlgorithm::OkspmeSg, big_m);
            let mcg = count(FlopAlgorithm::OkspmeMcg, big_m);
            let ccg = count(FlopAlgorithm::OkspmeCcg, big_m);
            let direct = count(FlopAlgorithm::Okspme, big_m);
            !(sg < mcg && mcg < ccg && ccg < direct)
        })
        .collect();
    let elapsed = start.elapsed();
    let ordering = match (violations.first(), violations.last()) {
        (Some(lo), Some(hi)) => format!("SG<MCG<CCG<OKSPME violated for {} values of M in [{lo}, {hi}]", violations.len()),
        _ => "SG<MCG<CCG<OKSPME holds on [10, 100]".into(),
    };
    report(
        1,
        "flop models",
        mismatches == 0 && spot && violations.is_empty() && within(elapsed, 1.0),
        &format!("{mismatches} polynomial mismatches, spot values ok={spot}, {ordering}, {elapsed:.2?}"),
    );
}

#[test]
fn criterion_02_mse_bound_formulas() {
    let start = Instant::now();
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/mse_bounds_oracle.csv");
    let mut reader = csv::Reader::from_path(path).expect("oracle file");
    let (mut rows, mut worst, mut ordered) = (0, 0.0f64, true);
    for record in reader.records() {
        let record = record.unwrap();
        let field = |k: usize| record[k].parse::<f64>().unwrap();
        let (theta, a2) = (field(0), field(1));
        let sqp = mse_bounds(theta, a2, BoundMethod::Sqp).unwrap();
        let ok = mse_bounds(theta, a2, BoundMethod::Okspme).unwrap();
        for (got, want) in [(sqp.lower, field(2)), (sqp.upper, field(3)), (ok.lower, field(4)), (ok.upper, field(5))] {
            worst = worst.max((got - want).abs() / want.abs());
        }
        ordered &= ok.lower < sqp.lower && ok.upper < sqp.upper;
        rows += 1;
    }
    let elapsed = start.elapsed();
    report(
        2,
        "MSE bound formulas",
        rows == 100 && worst < 1e-12 && ordered && within(elapsed, 1.0),
        &format!("{rows} grid points, worst relative error {worst:.2e}, OKSPME below SQP pointwise={ordered}, {elapsed:.2?}"),
    );
}

#[test]
fn criterion_03_epsilon_moments() {
    let start = Instant::now();
    let draws = 1_000_000;
    let a_norm = 12f64.sqrt();
    let mut rng = RandomStream::new(2024, 0, StreamRole::Auxiliary);
    let mut worst = 0.0f64;
    for theta_deg in [5.0f64, 20.0, 40.0] {
        let theta = theta_deg.to_radians();
        let (mean, var, mean_sq) = epsilon_moments(theta, a_norm).unwrap();
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..draws {
            let tau = rng.uniform(0.0, theta);
            let e = 2.0 * a_norm * (tau / 2.0).sin();
            s1 += e;
            s2 += e * e;
        }
        let n = draws as f64;
        let mc_mean = s1 / n;
        let mc_sq = s2 / n;
        let mc_var = (s2 - s1 * s1 / n) / (n - 1.0);
        for (mc, closed) in [(mc_mean, mean), (mc_var, var), (mc_sq, mean_sq)] {
            worst = worst.max((mc - closed).abs() / closed);
        }
    }
    let elapsed = start.elapsed();
    report(
        3,
        "error-norm moments",
        worst < 2e-3 && within(elapsed, 5.0),
        &format!("worst relative deviation {:.3}% over 3 sectors at 1e6 draws, {elapsed:.2?}", 100.0 * worst),
    );
}

#[test]
fn criterion_04_krylov_invariants() {
    let start = Instant::now();
    let mut rng = RandomStream::new(4, 0, StreamRole::Auxiliary);
    let (mut worst_orth, mut worst_idem, mut cap_ok) = (0.0f64, 0.0f64, true);
    for _ in 0..500 {
        let m = 2 + (rng.uniform(0.0, 39.0) as usize).min(38);
        let k = (rng.uniform(0.0, m as f64) as usize).min(m - 1);
        let r = random_hermitian(&mut rng, m);
        let t1 = random_vec(&mut rng, m);
        let t1 = &t1 / real(norm(&t1));
        let basis = arnoldi_mgs(&r, &t1, k, default_breakdown_tol(&r)).unwrap();
        let order = basis.order();
        cap_ok &= order >= 1 && order <= k + 1;
        let gram = basis.t.adjoint() * &basis.t;
        worst_orth = worst_orth.max(max_abs_diff(&gram, &identity(order)));
        let p = make_projector(&basis).p;
        worst_idem = worst_idem.max(max_abs_diff(&(&p * &p), &p));
    }
    let mut scaled_identity_ok = true;
    for (i, scale) in [0.5, 1.0, 7.0, 1e3].into_iter().enumerate() {
        let m = 4 + 3 * i;
        let r = identity(m) * real(scale);
        let t1 = random_vec(&mut rng, m);
        let t1 = &t1 / real(norm(&t1));
        let basis = arnoldi_mgs(&r, &t1, 3, default_breakdown_tol(&r)).unwrap();
        scaled_identity_ok &= basis.order() == 1 && basis.stop_reason == StopReason::Breakdown;
    }
    let elapsed = start.elapsed();
    report(
        4,
        "Krylov invariants",
        worst_orth < 1e-10 && worst_idem < 1e-9 && cap_ok && scaled_identity_ok && within(elapsed, 10.0),
        &format!(
            "orthonormality {worst_orth:.1e}, idempotence {worst_idem:.1e}, m<=K+1={cap_ok}, R=cI gives m=1={scaled_identity_ok}, {elapsed:.2?}"
        ),
    );
}

/// `−∂J/∂z*` by central differences over real and imaginary parts.
fn fd_neg_gradient(f: impl Fn(&CVector) -> f64, z: &CVector) -> CVector {
    let h = 1e-6;
    CVector::from_fn(z.len(), |k, _| {
        let mut zp = z.clone();
        let mut zm = z.clone();
        zp[k] += real(h);
        zm[k] -= real(h);
        let dx = (f(&zp) - f(&zm)) / (2.0 * h);
        zp[k] = z[k] + c(0.0, h);
        zm[k] = z[k] - c(0.0, h);
        let dy = (f(&zp) - f(&zm)) / (2.0 * h);
        -c(dx, dy) * 0.5
    })
}

#[test]
fn criterion_05_gradient_checks() {
    let start = Instant::now();
    let mut rng = RandomStream::new(5, 0, StreamRole::Auxiliary);
    let (mut worst_a, mut worst_v, mut worst_rec) = (0.0f64, 0.0f64, 0.0f64);
    for instance in 0..100 {
        let m = 2 + instance % 5;
        let r = random_hpd(&mut rng, m) * real(20.0);
        let a = random_vec(&mut rng, m);
        let s = rng.uniform(0.05, 1.0);
        let v = random_vec(&mut rng, m);

        let g_a = steering_neg_gradient(s, &a, &v);
        let fd_a = fd_neg_gradient(|z| joint_cost(&r, s, z, &v), &a);
        worst_a = worst_a.max((&g_a - &fd_a).norm() / fd_a.norm());

        let g_v = weight_neg_gradient(&r, s, &a, &v);
        let fd_v = fd_neg_gradient(|z| joint_cost(&r, s, &a, z), &v);
        worst_v = worst_v.max((&g_v - &fd_v).norm() / fd_v.norm());

        // the weight gradient carried by the CG recursion, stopped short of
        // the exact solve (n < M) so the gradient is not round-off
        let n_inner = 1 + instance % (m - 1);
        let mut state = CgState::new_ccg(m, CgParams { n_inner, ..CgParams::default() }).unwrap();
        state.v = v.clone();
        ccg_snapshot(&mut state, &r, &a, s, &random_vec(&mut rng, m)).unwrap();
        let fd_v = fd_neg_gradient(|z| joint_cost(&r, s, &a, z), &state.v);
        worst_rec = worst_rec.max((&state.g_v - &fd_v).norm() / fd_v.norm());
    }
    let elapsed = start.elapsed();
    report(
        5,
        "gradient checks",
        worst_a < 1e-6 && worst_v < 1e-6 && worst_rec < 1e-6 && within(elapsed, 5.0),
        &format!(
            "worst relative error over 100 instances: steering {worst_a:.1e}, weights {worst_v:.1e}, CG-carried weights {worst_rec:.1e}, {elapsed:.2?}"
        ),
    );
}

/// One seeded 300-snapshot run of the criterion-9 scenario, feeding each
/// engine its own beamformer output.
struct ConstraintRun {
    okspme: f64,
    ccg: f64,
    mcg: f64,
    mcg_sandwich: (usize, usize),
}

fn constraint_run(seed: u64) -> ConstraintRun {
    let m = 12;
    let nominal = make_steering(m, 10.0).unwrap();
    let mut scatter = RandomStream::new(seed, 0, StreamRole::Scattering);
    let a1 = make_coherent_mismatch(&nominal, &ScatteringSpec::coherent(), &mut scatter).unwrap().elements;
    let interferers: Vec<(CVector, f64)> =
        [30.0, 50.0].iter().map(|&d| (make_steering(m, d).unwrap().elements, 10.0)).collect();
    let guess = make_steering(m, 12.0).unwrap().elements;
    let mut data = RandomStream::new(seed, 0, StreamRole::Data);

    let direct_params = EstimatorParams::new(m, 3);
    let cg_params = EstimatorParams { tracker_mode: TrackerMode::Forgetting { lambda: 0.998 }, ..direct_params };
    let mut direct = OkspmeState::new(direct_params, &guess, 1.0).unwrap();
    let mut ccg_front = MismatchEstimator::new(cg_params, &guess, 1.0).unwrap();
    let mut mcg_front = MismatchEstimator::new(cg_params, &guess, 1.0).unwrap();
    let mut ccg = CgState::new_ccg(m, CgParams::default()).unwrap();
    let mut mcg = CgState::new_mcg(&guess, CgParams::default()).unwrap();
    let ones = CVector::from_element(m, c(1.0, 0.0));
    let (mut w_ccg, mut w_mcg) = (ones.clone(), ones);

    let mut out = ConstraintRun { okspme: 0.0, ccg: 0.0, mcg: 0.0, mcg_sandwich: (0, 0) };
    let dev = |w: &CVector, a: &CVector| (inner(w, a) - c(1.0, 0.0)).norm();
    for _ in 0..300 {
        let x = draw_snapshot(&a1, 10.0, &interferers, 1.0, &mut data);

        let step = okspme_snapshot(&mut direct, &x).unwrap();
        out.okspme = out.okspme.max(dev(&direct.w, &step.a_hat));

        let front = ccg_front.step(&x, &w_ccg).unwrap();
        let step = ccg_snapshot(&mut ccg, ccg_front.tracker().r_hat(), &front.a_hat, front.sigma1_sq, &x).unwrap();
        out.ccg = out.ccg.max(dev(&step.w, &front.a_hat));
        w_ccg = step.w;

        let front = mcg_front.step(&x, &w_mcg).unwrap();
        let step = mcg_snapshot(&mut mcg, mcg_front.tracker().r_hat(), &front.a_hat, front.sigma1_sq, &x).unwrap();
        out.mcg = out.mcg.max(dev(&step.w, &front.a_hat));
        let tol = 1e-8 * step.pg_previous.abs().max(1.0);
        if step.pg_current >= -tol && step.pg_current <= 0.5 * step.pg_previous + tol {
            out.mcg_sandwich.0 += 1;
        }
        out.mcg_sandwich.1 += 1;
        w_mcg = step.w;
    }
    out
}

#[test]
fn criterion_06_constraint_satisfaction() {
    let run = constraint_run(6);
    let worst = run.okspme.max(run.ccg).max(run.mcg);
    report(
        6,
        "distortionless constraint",
        worst < 1e-10,
        &format!("max |wᴴâ − 1| over 300 snapshots: direct {:.1e}, CCG {:.1e}, MCG {:.1e}", run.okspme, run.ccg, run.mcg),
    );
}

#[test]
fn criterion_07_mcg_convergence_bound() {
    let run = constraint_run(7);
    let (held, total) = run.mcg_sandwich;
    let share = held as f64 / total as f64;
    report(
        7,
        "MCG convergence bound",
        share >= 0.95,
        &format!("0 <= Re(p_vᴴg_v(i)) <= 0.5 Re(p_vᴴg_v(i-1)) held on {held}/{total} snapshots ({:.1}%)", 100.0 * share),
    );
}

#[test]
fn criterion_08_no_mismatch_sanity() {
    let start = Instant::now();
    let cfg = scenario(
        r#"{"sensors": 10, "interferer_doas_deg": [], "snr_db": 0, "sector_halfwidth_deg": 0,
            "snapshots": 200, "trials": 100, "master_seed": 8,
            "algorithms": [{"name": "okspme"}, {"name": "smi"}, {"name": "optimal"}]}"#,
    );
    let result = run_experiment(&cfg, None).unwrap();
    let elapsed = start.elapsed();
    let opt = window_mean(&result, "optimal", 1, 200);
    let smi = result.series("smi");
    let direct = result.series("okspme");
    let gap20 = opt - smi[19].mean_sinr_db;
    let gap200 = opt - smi[199].mean_sinr_db;
    let behind: Vec<usize> =
        (19..200).filter(|&i| direct[i].mean_sinr_db < smi[i].mean_sinr_db).map(|i| i + 1).collect();
    report(
        8,
        "no-mismatch sanity",
        gap20 <= 3.5 && gap200 <= 1.0 && behind.is_empty() && result.total_failures() == 0 && within(elapsed, 30.0),
        &format!(
            "optimum {opt:.2} dB, SMI gap {gap20:.2} dB at 20 and {gap200:.2} dB at 200, OKSPME below SMI at {} snapshots >= 20, {}, {elapsed:.2?}",
            behind.len(),
            failures(&result)
        ),
    );
}

const FIG2: &str = r#""sensors": 12, "interferer_doas_deg": [30, 50], "snr_db": 10,
    "scattering": {"kind": "coherent"}, "snapshots": 300, "trials": 100"#;

#[test]
fn criterion_09_mismatch_robustness() {
    let start = Instant::now();
    let cfg = scenario(&format!(
        r#"{{{FIG2}, "master_seed": 9,
            "algorithms": [{{"name": "okspme"}}, {{"name": "smi"}}, {{"name": "optimal"}}]}}"#
    ));
    let result = run_experiment(&cfg, None).unwrap();
    let elapsed = start.elapsed();
    let (direct, smi, opt) =
        (final_mean(&result, "okspme", 50), final_mean(&result, "smi", 50), final_mean(&result, "optimal", 50));
    report(
        9,
        "mismatch robustness",
        direct - smi >= 3.0 && opt - direct <= 5.0 && within(elapsed, 180.0),
        &format!(
            "final-50 means: OKSPME {direct:.2}, SMI {smi:.2}, optimum {opt:.2} dB (margin over SMI {:.2}, gap to optimum {:.2}), {}, {elapsed:.2?}",
            direct - smi,
            opt - direct,
            failures(&result)
        ),
    );
}

#[test]
fn criterion_10_adaptive_variant_parity() {
    let start = Instant::now();
    let cfg = scenario(&format!(
        r#"{{{FIG2}, "master_seed": 10,
            "algorithms": [{{"name": "okspme"}}, {{"name": "okspme_sg"}}, {{"name": "okspme_ccg"}}, {{"name": "okspme_mcg"}}]}}"#
    ));
    let result = run_experiment(&cfg, None).unwrap();
    let elapsed = start.elapsed();
    let direct = final_mean(&result, "okspme", 50);
    let gap = |name| direct - final_mean(&result, name, 50);
    let (sg, ccg, mcg) = (gap("okspme_sg"), gap("okspme_ccg"), gap("okspme_mcg"));
    report(
        10,
        "adaptive-variant parity",
        ccg.abs() <= 2.0 && mcg.abs() <= 2.0 && sg.abs() <= 4.0 && within(elapsed, 180.0),
        &format!(
            "OKSPME final-50 mean {direct:.2} dB; shortfall CCG {ccg:.2}, MCG {mcg:.2}, SG {sg:.2} dB; {}, {elapsed:.2?}",
            failures(&result)
        ),
    );
}

#[test]
fn criterion_11_tracking() {
    let start = Instant::now();
    let cfg = scenario(&format!(
        r#"{{{FIG2}, "master_seed": 11,
            "interferer_schedule": [{{"at_snapshot": 151, "interferer_doas_deg": [20, 30, 40, 50, 60]}}],
            "algorithms": [{{"name": "okspme"}}, {{"name": "okspme_sg"}}, {{"name": "okspme_ccg"}}, {{"name": "okspme_mcg"}}]}}"#
    ));
    let result = run_experiment(&cfg, None).unwrap();
    let elapsed = start.elapsed();
    let mut lagging = Vec::new();
    let mut parts = Vec::new();
    for name in PROPOSED {
        let before = window_mean(&result, name, 126, 150);
        let after = window_mean(&result, name, 241, 250);
        if after < before - 3.0 {
            lagging.push(name);
        }
        parts.push(format!("{name} {before:.2}->{after:.2}"));
    }
    report(
        11,
        "tracking after interferer redistribution",
        lagging.is_empty() && within(elapsed, 180.0),
        &format!(
            "steady level (126-150) -> level (241-250) in dB: {}; not recovered: {lagging:?}; {}, {elapsed:.2?}",
            parts.join(", "),
            failures(&result)
        ),
    );
}

fn proposed_and_optimum() -> &'static str {
    r#"[{"name": "okspme"}, {"name": "okspme_sg"}, {"name": "okspme_ccg"}, {"name": "okspme_mcg"}, {"name": "optimal"}]"#
}

#[test]
fn criterion_12_large_array_degradation() {
    let start = Instant::now();
    let run = |m: usize| {
        let cfg = scenario(&format!(
            r#"{{"sensors": {m}, "interferer_doas_deg": [30, 50], "snr_db": 10, "scattering": {{"kind": "coherent"}},
                "trials": 100, "master_seed": 12, "algorithms": {}}}"#,
            proposed_and_optimum()
        ));
        run_experiment(&cfg, None).unwrap()
    };
    let (small, large) = (run(12), run(40));
    let elapsed = start.elapsed();
    let gap = |r: &AggregateResult, name| final_mean(r, "optimal", 50) - final_mean(r, name, 50);
    let mut wrong = Vec::new();
    let mut parts = Vec::new();
    for name in PROPOSED {
        let (g12, g40) = (gap(&small, name), gap(&large, name));
        if g40 <= g12 {
            wrong.push(name);
        }
        parts.push(format!("{name} {g12:.2}->{g40:.2}"));
    }
    report(
        12,
        "large-array degradation",
        wrong.is_empty() && within(elapsed, 300.0),
        &format!(
            "gap to optimum M=12 -> M=40 in dB: {}; gap did not grow: {wrong:?}; {} / {}, {elapsed:.2?}",
            parts.join(", "),
            failures(&small),
            failures(&large)
        ),
    );
}

#[test]
fn criterion_13_incoherent_vs_coherent() {
    let start = Instant::now();
    let run = |kind: &str| {
        let cfg = scenario(&format!(
            r#"{{"sensors": 40, "interferer_doas_deg": [30, 50], "snr_db": 10, "scattering": {{"kind": "{kind}"}},
                "trials": 100, "master_seed": 13}}"#
        ));
        run_experiment(&cfg, None).unwrap()
    };
    let (coherent, incoherent) = (run("coherent"), run("incoherent"));
    let elapsed = start.elapsed();
    let names = ["okspme", "okspme_sg", "okspme_ccg", "okspme_mcg", "smi", "loaded_smi"];
    let mut wrong = Vec::new();
    let mut parts = Vec::new();
    for name in names {
        let (co, inc) = (final_mean(&coherent, name, 50), final_mean(&incoherent, name, 50));
        if inc >= co {
            wrong.push(name);
        }
        parts.push(format!("{name} {co:.2}/{inc:.2}"));
    }
    report(
        13,
        "incoherent vs coherent scattering",
        wrong.is_empty() && within(elapsed, 300.0),
        &format!(
            "final-50 mean coherent/incoherent in dB: {}; not lower: {wrong:?}; {} / {}, {elapsed:.2?}",
            parts.join(", "),
            failures(&coherent),
            failures(&incoherent)
        ),
    );
}

#[test]
fn criterion_14_determinism() {
    let cfg = scenario(
        r#"{"sensors": 12, "interferer_doas_deg": [30, 50], "snr_db": 10, "scattering": {"kind": "coherent"},
            "snapshots": 120, "trials": 12, "master_seed": 14}"#,
    );
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for (k, threads) in [Some(4), Some(4), Some(1)].into_iter().enumerate() {
        let result = run_experiment(&cfg, threads).unwrap();
        let path = dir.path().join(format!("run{k}.csv"));
        write_csv(&result, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), to_csv(&result));
        files.push(std::fs::read(&path).unwrap());
    }
    let repeat = files[0] == files[1];
    let across_threads = files[0] == files[2];
    report(
        14,
        "determinism",
        repeat && across_threads,
        &format!(
            "repeat with 4 threads byte-identical={repeat}, 4 vs 1 thread byte-identical={across_threads}, {} bytes",
            files[0].len()
        ),
    );
}
