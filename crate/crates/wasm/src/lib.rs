//! Browser bindings. Every export returns a JSON string; failures come back as
//! `{"error": {"kind", "message"}}`.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use twocopy::bellmeas::{exact_distribution, sample_outcomes, Method};
use twocopy::detector::{efficiency_report, stabilizer_ancilla, unbiased_ancilla};
use twocopy::estimators::{concurrence_pure, plan_shots, purity, Source};
use twocopy::experiment::{error_json, StateSource};
use twocopy::states::{qubit_from_bloch, BlochVector};
use twocopy::{QubitMask, Result};

fn respond(r: Result<Value>) -> String {
    r.unwrap_or_else(|e| error_json(&e)).to_string()
}

/// Two-copy Bell distribution of a qubit with Bloch vector `(x, y, z)`.
#[wasm_bindgen]
pub fn bloch_distribution(x: f64, y: f64, z: f64) -> String {
    respond(bloch_distribution_value(x, y, z))
}

fn bloch_distribution_value(x: f64, y: f64, z: f64) -> Result<Value> {
    let v = BlochVector::new(x, y, z);
    let rho = qubit_from_bloch(v)?;
    let dist = exact_distribution(&rho, &rho, Method::ClosedForm)?;
    let outcomes: Vec<Value> = dist
        .outcomes()
        .map(|(o, p)| {
            let r = v.reflected(o.a as u8, o.b as u8);
            json!({ "a": o.a, "b": o.b, "prob": p, "reflected": [r.x, r.y, r.z] })
        })
        .collect();
    Ok(json!({ "bloch": [x, y, z], "purity": rho.purity(), "outcomes": outcomes }))
}

/// Sampled purity (and concurrence for pure states) at growing shot counts.
///
/// `state` takes the same state strings as the CLI: `bell`, `ghz:3`, `product-zero:2`,
/// `random:n:rank:seed`, `bloch:x,y,z`.
#[wasm_bindgen]
pub fn convergence(state: &str, shots: u32, seed: u64) -> String {
    respond(convergence_value(state, shots as usize, seed))
}

fn convergence_value(state: &str, shots: usize, seed: u64) -> Result<Value> {
    let spec: StateSource = state.parse()?;
    if matches!(spec, StateSource::File { .. }) {
        return Err(twocopy::Error::Parse(format!("unknown state string {state:?}")));
    }
    let rho = spec.load()?;
    let n = rho.n();
    let all = QubitMask::all(n);
    let dist = exact_distribution(&rho, &rho, Method::ClosedForm)?;
    let pure = rho.purity() > 1.0 - 1e-8 && n >= 2;
    let outcomes = sample_outcomes(&dist, shots.max(1), seed);

    let mut points = Vec::new();
    let mut m = 10usize.min(outcomes.len());
    loop {
        let prefix = &outcomes[..m];
        let p = purity(Source::Sampled(prefix), all)?;
        let mut point = json!({ "shots": m, "purity": p.value, "purity_err": p.std_error });
        if pure {
            let c = concurrence_pure(Source::Sampled(prefix))?;
            point["concurrence"] = json!(c.value);
            point["concurrence_err"] = if c.std_error.is_finite() { json!(c.std_error) } else { Value::Null };
        }
        points.push(point);
        if m == outcomes.len() {
            break;
        }
        m = (m * 2).min(outcomes.len());
    }
    let exact_c = if pure { Some(concurrence_pure(Source::Exact(&dist))?.value) } else { None };
    Ok(json!({
        "n": n,
        "exact": { "purity": purity(Source::Exact(&dist), all)?.value, "concurrence": exact_c },
        "points": points,
    }))
}

/// Worst-case shot amplification of the stabilizer and unbiased ancillas for `n = 1..=max_n`.
#[wasm_bindgen]
pub fn amplification(max_n: u32, delta: f64, epsilon: f64, p_conf: f64) -> String {
    respond(amplification_value(max_n as usize, delta, epsilon, p_conf))
}

fn amplification_value(max_n: usize, delta: f64, epsilon: f64, p_conf: f64) -> Result<Value> {
    let plan = plan_shots(delta, epsilon, p_conf)?;
    let mut rows = Vec::new();
    for n in 1..=max_n.min(4) {
        let stab = efficiency_report(&stabilizer_ancilla(n)?, &plan).summary;
        let unb = efficiency_report(&unbiased_ancilla(n)?, &plan).summary;
        rows.push(json!({
            "n": n,
            "labels": stab.total,
            "stabilizer_recoverable": stab.recoverable,
            "unbiased_worst_amplification": unb.worst_amplification,
            "unbiased_shots": unb.worst_amplification.map(|a| (a * plan.shots as f64).ceil()),
        }));
    }
    Ok(json!({ "copy_baseline_shots": plan.shots, "k": plan.k, "rows": rows }))
}
