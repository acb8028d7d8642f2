//! Browser bindings. Each export takes plain numbers or a JSON scenario and
//! returns a JSON string the page plots on a canvas.

use okspme::analysis::{flops, mse_bounds, BoundMethod, FlopAlgorithm, FlopModel};
use okspme::harness::{run_experiment, ScenarioConfig};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Trials above this make the page unresponsive; the browser runs on one thread.
pub const MAX_TRIALS: usize = 50;

/// Runs a scenario on the calling thread and returns one SINR series per
/// algorithm plus the optimum, keyed by snapshot or SNR point.
pub fn sinr_traces(config_json: &str) -> Result<Value, String> {
    let cfg = ScenarioConfig::from_json(config_json).map_err(|e| e.to_string())?;
    if cfg.trials > MAX_TRIALS {
        return Err(format!("at most {MAX_TRIALS} trials in the browser, got {}", cfg.trials));
    }
    let result = run_experiment(&cfg, Some(1)).map_err(|e| e.to_string())?;
    let x_kind = result.rows.first().map(|r| r.x_kind.to_string()).unwrap_or_default();
    let series: Vec<Value> = cfg
        .algorithms
        .iter()
        .map(|a| a.name())
        .filter(|&name| name != "optimal")
        .map(|name| {
            let rows = result.series(name);
            json!({
                "name": name,
                "x": rows.iter().map(|r| r.x_value).collect::<Vec<_>>(),
                "sinr_db": rows.iter().map(|r| r.mean_sinr_db).collect::<Vec<_>>(),
                "failed_trials": result.failures.get(name).copied().unwrap_or(0),
            })
        })
        .collect();
    Ok(json!({
        "x_kind": x_kind,
        "series": series,
        "optimum": {
            "x": result.optimum_db.iter().map(|p| p.0).collect::<Vec<_>>(),
            "sinr_db": result.optimum_db.iter().map(|p| p.1).collect::<Vec<_>>(),
        },
    }))
}

/// Lower and upper steering MSE bounds of both methods on `points` sector
/// half-widths spread over (0, max_deg].
pub fn bound_curves(norm_sq: f64, max_deg: f64, points: usize) -> Result<Value, String> {
    if points < 2 {
        return Err("need at least two points".into());
    }
    let theta_deg: Vec<f64> = (1..=points).map(|k| max_deg * k as f64 / points as f64).collect();
    let curve = |method| -> Result<(Vec<f64>, Vec<f64>), String> {
        theta_deg
            .iter()
            .map(|t| mse_bounds(t.to_radians(), norm_sq, method).map(|b| (b.lower, b.upper)))
            .collect::<Result<Vec<_>, _>>()
            .map(|v| v.into_iter().unzip())
            .map_err(|e| e.to_string())
    };
    let (sqp_lower, sqp_upper) = curve(BoundMethod::Sqp)?;
    let (ok_lower, ok_upper) = curve(BoundMethod::Okspme)?;
    Ok(json!({
        "theta_deg": theta_deg,
        "sqp": {"lower": sqp_lower, "upper": sqp_upper},
        "okspme": {"lower": ok_lower, "upper": ok_upper},
    }))
}

/// Per-snapshot flop counts of every modelled algorithm for M = 2..=max_sensors.
pub fn flop_curves(order: u64, inner: u64, max_sensors: u64) -> Result<Value, String> {
    if max_sensors < 2 {
        return Err("need at least two sensors".into());
    }
    let sensors: Vec<u64> = (2..=max_sensors).collect();
    let series = FlopAlgorithm::ALL
        .into_iter()
        .map(|alg| {
            let counts = sensors
                .iter()
                .map(|&m| flops(FlopModel::new(alg, m).with_order(order).with_inner(inner)))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| e.to_string())?;
            Ok(json!({"name": alg.name(), "asymptotic": alg.is_asymptotic(), "flops": counts}))
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(json!({"sensors": sensors, "series": series}))
}

fn to_js(value: Result<Value, String>) -> Result<String, JsValue> {
    value.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn simulate(config_json: &str) -> Result<String, JsValue> {
    to_js(sinr_traces(config_json))
}

#[wasm_bindgen]
pub fn mse_bound_curves(norm_sq: f64, max_deg: f64, points: usize) -> Result<String, JsValue> {
    to_js(bound_curves(norm_sq, max_deg, points))
}

#[wasm_bindgen]
pub fn flop_counts(order: u64, inner: u64, max_sensors: u64) -> Result<String, JsValue> {
    to_js(flop_curves(order, inner, max_sensors))
}
