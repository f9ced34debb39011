//! Experiment configuration and execution behind the command-line front end.
//!
//! A config is one JSON document; the report embeds the resolved config, one
//! entry per estimator result, task-specific details and the wall-clock
//! duration (always the last field).

use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::bellmeas::{bell_povm, exact_distribution, sample_outcomes, BellDistribution, BellOutcome, Method};
use crate::channels::{
    bell_map, map_fidelity, positivity_class, povm_to_ccpmvm_labeled, random_povm, two_copy_probability,
};
use crate::detector::{efficiency_report, estimate_c_ancilla, stabilizer_ancilla, unbiased_ancilla, AncillaSpec};
use crate::error::{Error, Result};
use crate::estimators::{
    concurrence_direct, concurrence_pure, estimate_csq, p_all, p_all_closed_form, plan_shots, purity,
    swap_expectation, Estimate, EstimatorReport, Flag, ShotPlan, Source,
};
use crate::linalg::max_abs_diff;
use crate::pauli::{PauliLabel, QubitMask};
use crate::states::{
    bell_pair, ghz, partial_trace, pauli_decompose, product_zero, qubit_from_bloch, random_state, BlochVector,
    DensityMatrix, PSD_TOL,
};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Tomography,
    Purity,
    PartialPurity,
    Concurrence,
    Pall,
    CcpmvmCheck,
    DetectorCompare,
    Distribution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedState {
    Ghz,
    Bell,
    ProductZero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateSource {
    Random { n: usize, rank: usize, seed: u64 },
    Bloch { x: f64, y: f64, z: f64 },
    File { path: PathBuf },
    Named { name: NamedState, n: usize },
}

impl StateSource {
    pub fn load(&self) -> Result<DensityMatrix> {
        match self {
            StateSource::Random { n, rank, seed } => random_state(*n, *rank, *seed),
            StateSource::Bloch { x, y, z } => qubit_from_bloch(BlochVector::new(*x, *y, *z)),
            StateSource::File { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
            }
            StateSource::Named { name, n } => match name {
                NamedState::Ghz => ghz(*n),
                NamedState::ProductZero => product_zero(*n),
                NamedState::Bell if *n == 2 => Ok(bell_pair()),
                NamedState::Bell => Err(Error::Argument(format!("the Bell state has 2 qubits, not {n}"))),
            },
        }
    }
}

/// Short textual state form: `ghz:3`, `bell`, `product-zero:2`,
/// `random:<n>:<rank>:<seed>`, `bloch:<x>,<y>,<z>`; anything else is a file path.
impl FromStr for StateSource {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("bad {what} in state string {s:?}"));
        let num = |x: &str| x.trim().parse::<usize>().map_err(|_| bad("integer"));
        let parts: Vec<&str> = s.split(':').collect();
        Ok(match parts.as_slice() {
            ["bell"] => StateSource::Named { name: NamedState::Bell, n: 2 },
            ["ghz", n] => StateSource::Named { name: NamedState::Ghz, n: num(n)? },
            ["product-zero", n] => StateSource::Named { name: NamedState::ProductZero, n: num(n)? },
            ["random", n, rank, seed] => StateSource::Random {
                n: num(n)?,
                rank: num(rank)?,
                seed: seed.trim().parse().map_err(|_| bad("seed"))?,
            },
            ["bloch", v] => {
                let xs: Vec<f64> = v
                    .split(',')
                    .map(|x| x.trim().parse::<f64>().map_err(|_| bad("Bloch component")))
                    .collect::<Result<_>>()?;
                match xs.as_slice() {
                    [x, y, z] => StateSource::Bloch { x: *x, y: *y, z: *z },
                    _ => return Err(bad("Bloch vector")),
                }
            }
            _ => StateSource::File { path: PathBuf::from(s) },
        })
    }
}

/// `"exact"` or a shot count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shots {
    Exact,
    Count(usize),
}

impl Serialize for Shots {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Shots::Exact => s.serialize_str("exact"),
            Shots::Count(c) => s.serialize_u64(*c as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Shots {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::String(s) if s == "exact" => Ok(Shots::Exact),
            Value::Number(n) => n
                .as_u64()
                .map(|c| Shots::Count(c as usize))
                .ok_or_else(|| serde::de::Error::custom("shots must be a nonnegative integer")),
            other => Err(serde::de::Error::custom(format!("shots must be \"exact\" or a count, got {other}"))),
        }
    }
}

impl FromStr for Shots {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "exact" {
            return Ok(Shots::Exact);
        }
        s.parse().map(Shots::Count).map_err(|_| Error::Parse(format!("shots must be \"exact\" or a count, got {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    pub delta: f64,
    pub epsilon: f64,
    pub p_conf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AncillaSource {
    StabilizerZero,
    Unbiased,
    State { state: StateSource },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PovmSource {
    Bell,
    Random { elements: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateSource>,
    /// Defaults to the plan's shot count when a plan is given, otherwise exact.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<Shots>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<PauliLabel>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masks: Option<Vec<QubitMask>>,
    /// Bell state `(m, n)` for `pall`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bell: Option<[u8; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ancilla: Option<AncillaSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub povm: Option<PovmSource>,
    /// Qubit count for `ccpmvm-check` when no state is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: String,
    pub config: ExperimentConfig,
    pub results: Vec<EstimatorReport>,
    pub details: Value,
    pub duration_ms: f64,
}

impl Report {
    /// The report serialized without its duration field.
    pub fn body(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut().expect("object").remove("duration_ms");
        v
    }
}

/// Default p_conf: `erf(√2)`, i.e. `k = 2`.
fn default_plan() -> PlanConfig {
    PlanConfig { delta: 0.1, epsilon: 0.1, p_conf: libm::erf(std::f64::consts::SQRT_2) }
}

fn require_state(config: &ExperimentConfig) -> Result<DensityMatrix> {
    config
        .state
        .as_ref()
        .ok_or_else(|| Error::Argument(format!("task {:?} needs a state", config.task)))?
        .load()
}

struct Ctx {
    shots: Shots,
    seed: u64,
}

impl Ctx {
    fn outcomes(&self, dist: &BellDistribution) -> Option<Vec<BellOutcome>> {
        match self.shots {
            Shots::Exact => None,
            Shots::Count(m) => Some(sample_outcomes(dist, m, self.seed)),
        }
    }
}

fn source<'a>(dist: &'a BellDistribution, outcomes: &'a Option<Vec<BellOutcome>>) -> Source<'a> {
    match outcomes {
        Some(o) => Source::Sampled(o),
        None => Source::Exact(dist),
    }
}

/// Runs one experiment. Identical configs give identical report bodies.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    let start = Instant::now();
    let mut resolved = config.clone();
    let plan = match config.plan {
        Some(p) => Some(plan_shots(p.delta, p.epsilon, p.p_conf)?),
        None => None,
    };
    let shots = config.shots.unwrap_or(match plan {
        Some(p) if config.task != Task::DetectorCompare => Shots::Count(p.shots as usize),
        _ => Shots::Exact,
    });
    resolved.shots = Some(shots);
    let ctx = Ctx { shots, seed: config.seed };
    let (results, details) = match config.task {
        Task::Tomography => tomography(config, &ctx, plan)?,
        Task::Purity => purity_task(config, &ctx, false)?,
        Task::PartialPurity => purity_task(config, &ctx, true)?,
        Task::Concurrence => concurrence_task(config, &ctx)?,
        Task::Pall => pall_task(config, &ctx)?,
        Task::CcpmvmCheck => ccpmvm_task(config)?,
        Task::DetectorCompare => detector_task(config, &ctx, plan)?,
        Task::Distribution => distribution_task(config, &ctx)?,
    };
    Ok(Report {
        schema_version: SCHEMA_VERSION.into(),
        config: resolved,
        results,
        details,
        duration_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

type TaskOutput = (Vec<EstimatorReport>, Value);

fn tomography(config: &ExperimentConfig, ctx: &Ctx, plan: Option<ShotPlan>) -> Result<TaskOutput> {
    let rho = require_state(config)?;
    let n = rho.n();
    let dist = exact_distribution(&rho, &rho, Method::ClosedForm)?;
    let outcomes = ctx.outcomes(&dist);
    let src = source(&dist, &outcomes);
    let labels: Vec<PauliLabel> = config.labels.clone().unwrap_or_else(|| PauliLabel::all(n).collect());
    let mut results = Vec::new();
    for label in labels {
        let csq = estimate_csq(src, label)?;
        let abs_c = csq.abs_from_square();
        results.push(csq.report("csq", json!({ "label": label })));
        let mut params = json!({ "label": label });
        if let Some(p) = plan {
            if abs_c.value > 0.0 {
                params["interval_half_width"] = json!(p.interval_half_width(csq.std_error, abs_c.value));
            }
        }
        results.push(abs_c.report("abs_c", params));
    }
    Ok((results, json!({ "n": n, "plan": plan })))
}

fn purity_task(config: &ExperimentConfig, ctx: &Ctx, partial: bool) -> Result<TaskOutput> {
    let rho = require_state(config)?;
    let n = rho.n();
    let masks: Vec<QubitMask> = match &config.masks {
        Some(m) => m.clone(),
        None if partial => {
            let proper: Vec<_> = (1..(1u64 << n) - 1).map(|b| QubitMask::new(n, b)).collect::<Result<_>>()?;
            if proper.is_empty() {
                return Err(Error::Argument("partial purities need at least two qubits".into()));
            }
            proper
        }
        None => std::iter::once(Ok(QubitMask::all(n)))
            .chain((1..=n).filter(|_| n > 1).map(|k| QubitMask::single(n, k)))
            .collect::<Result<_>>()?,
    };
    let dist = exact_distribution(&rho, &rho, Method::ClosedForm)?;
    let outcomes = ctx.outcomes(&dist);
    let src = source(&dist, &outcomes);
    let mut results = Vec::new();
    let mut oracle = Vec::new();
    for mask in masks {
        let e = purity(src, mask)?;
        results.push(e.report("purity", json!({ "mask": mask })));
        oracle.push(json!({ "mask": mask, "partial_trace_purity": partial_trace(&rho, mask)?.purity() }));
    }
    Ok((results, json!({ "n": n, "oracle": oracle, "swap_expectation": swap_expectation(&rho) })))
}

fn concurrence_task(config: &ExperimentConfig, ctx: &Ctx) -> Result<TaskOutput> {
    let rho = require_state(config)?;
    let n = rho.n();
    let dist = exact_distribution(&rho, &rho, Method::ClosedForm)?;
    let outcomes = ctx.outcomes(&dist);
    let src = source(&dist, &outcomes);
    let p = p_all(src, 1, 1, QubitMask::all(n))?;
    let c = concurrence_pure(src)?;
    let oracle = match concurrence_direct(&rho) {
        Ok(v) => json!(v),
        Err(e) => json!({ "unavailable": e.to_string() }),
    };
    Ok((
        vec![
            p.report("p_all", json!({ "m": 1, "n": 1, "mask": QubitMask::all(n) })),
            c.report("concurrence_pure", json!({})),
        ],
        json!({ "n": n, "purity": rho.purity(), "marginal_purity_oracle": oracle }),
    ))
}

fn pall_task(config: &ExperimentConfig, ctx: &Ctx) -> Result<TaskOutput> {
    let rho = require_state(config)?;
    let n = rho.n();
    let [m, nb] = config.bell.unwrap_or([1, 1]);
    if m > 1 || nb > 1 {
        return Err(Error::Argument(format!("Bell label ({m},{nb}) must be bits")));
    }
    let masks = config.masks.clone().unwrap_or_else(|| vec![QubitMask::all(n)]);
    let dist = exact_distribution(&rho, &rho, Method::ClosedForm)?;
    let outcomes = ctx.outcomes(&dist);
    let src = source(&dist, &outcomes);
    let mut results = Vec::new();
    for mask in masks {
        let e = p_all(src, m, nb, mask)?;
        results.push(e.report("p_all", json!({ "m": m, "n": nb, "mask": mask })));
    }
    let closed = p_all_closed_form(&pauli_decompose(&rho)?, m, nb);
    Ok((results, json!({ "n": n, "closed_form_full_mask": closed })))
}

fn ccpmvm_task(config: &ExperimentConfig) -> Result<TaskOutput> {
    let state = config.state.as_ref().map(StateSource::load).transpose()?;
    let n = match (&state, config.n) {
        (Some(s), _) => s.n(),
        (None, Some(n)) => n,
        (None, None) => 1,
    };
    let povm_source = config.povm.clone().unwrap_or(PovmSource::Bell);
    let (povm, bell): (Vec<(String, _)>, bool) = match &povm_source {
        PovmSource::Bell => (bell_povm(n)?.into_iter().map(|(o, e)| (o.to_string(), e)).collect(), true),
        PovmSource::Random { elements, seed } => (
            random_povm(n, *elements, *seed)?.into_iter().enumerate().map(|(i, e)| (i.to_string(), e)).collect(),
            false,
        ),
    };
    let family = povm_to_ccpmvm_labeled(povm)?;
    let rho = match state {
        Some(s) => s,
        None => random_state(n, 1 << n, config.seed)?,
    };
    let mut members = Vec::new();
    let mut results = Vec::new();
    let mut worst_fidelity_gap = 0.0f64;
    for (idx, m) in family.members.iter().enumerate() {
        let report = positivity_class(&m.map, PSD_TOL);
        let fidelity = map_fidelity(&m.map, &rho)?;
        let direct = two_copy_probability(&m.element, &rho)?;
        worst_fidelity_gap = worst_fidelity_gap.max((fidelity - direct).abs());
        let mut entry = json!({
            "label": m.label,
            "class": report.class,
            "ccp": report.is_ccp(),
            "min_eig_cp": report.min_eig_cp,
            "min_eig_ccp": report.min_eig_ccp,
        });
        if bell {
            let o = BellOutcome::from_index(n, idx);
            let closed = bell_map(n, o.a, o.b)?;
            entry["closed_form_deviation"] = json!(max_abs_diff(m.map.matrix(), closed.matrix()));
        }
        members.push(entry);
        let e = Estimate { value: fidelity, std_error: 0.0, shots: 0, flags: vec![Flag::Exact] };
        results.push(e.report("map_fidelity", json!({ "outcome": m.label })));
    }
    let all_ccp = members.iter().all(|m| m["ccp"] == json!(true));
    let details = json!({
        "n": n,
        "povm": povm_source,
        "members": members,
        "all_ccp": all_ccp,
        "depolarizing_deviation": family.depolarizing_deviation(),
        "max_fidelity_vs_two_copy_trace": worst_fidelity_gap,
        "closed_form": if bell { "C_{a,b}(rho) = T(b,a) rho^T T(b,a) / N" } else { "" },
    });
    Ok((results, details))
}

fn detector_task(config: &ExperimentConfig, ctx: &Ctx, plan: Option<ShotPlan>) -> Result<TaskOutput> {
    let rho = require_state(config)?;
    let n = rho.n();
    let plan = match plan {
        Some(p) => p,
        None => {
            let d = default_plan();
            plan_shots(d.delta, d.epsilon, d.p_conf)?
        }
    };
    let ancilla = match config.ancilla.clone().unwrap_or(AncillaSource::StabilizerZero) {
        AncillaSource::StabilizerZero => stabilizer_ancilla(n)?,
        AncillaSource::Unbiased => unbiased_ancilla(n)?,
        AncillaSource::State { state } => AncillaSpec::new(state.load()?)?,
    };
    if ancilla.n() != n {
        return Err(Error::Argument("ancilla and state differ in qubit count".into()));
    }
    let report = efficiency_report(&ancilla, &plan);
    let copy_dist = exact_distribution(&rho, &rho, Method::ClosedForm)?;
    let anc_dist = exact_distribution(&rho, &ancilla.rho0, Method::ClosedForm)?;
    let copy_outcomes = ctx.outcomes(&copy_dist);
    // the ancilla run draws from an independent stream
    let anc_outcomes = match ctx.shots {
        Shots::Exact => None,
        Shots::Count(m) => Some(sample_outcomes(&anc_dist, m, ctx.seed.wrapping_add(1))),
    };
    let labels: Vec<PauliLabel> = config.labels.clone().unwrap_or_else(|| PauliLabel::all(n).collect());
    let mut results = Vec::new();
    for label in labels {
        let copy = estimate_csq(source(&copy_dist, &copy_outcomes), label)?.abs_from_square();
        results.push(copy.report("abs_c_copy", json!({ "label": label })));
        match estimate_c_ancilla(source(&anc_dist, &anc_outcomes), &ancilla, label) {
            Ok(e) => results.push(e.report("c_ancilla", json!({ "label": label }))),
            Err(Error::Unrecoverable { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok((results, json!({ "n": n, "plan": plan, "efficiency": report, "min_abs_c0": ancilla.min_abs_c0 })))
}

fn distribution_task(config: &ExperimentConfig, ctx: &Ctx) -> Result<TaskOutput> {
    let rho = require_state(config)?;
    let closed = exact_distribution(&rho, &rho, Method::ClosedForm)?;
    let direct = exact_distribution(&rho, &rho, Method::Direct)?;
    let gap = closed
        .probabilities()
        .iter()
        .zip(direct.probabilities())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let mut details = json!({
        "distribution": closed.to_json(),
        "max_method_deviation": gap,
    });
    if let Some(outcomes) = ctx.outcomes(&closed) {
        let mut counts = vec![0u64; closed.probabilities().len()];
        for o in &outcomes {
            counts[o.index()] += 1;
        }
        details["empirical_counts"] = json!(counts);
    }
    Ok((Vec::new(), details))
}

/// Machine-readable error document.
pub fn error_json(err: &Error) -> Value {
    json!({ "error": { "kind": err.kind(), "message": err.to_string() } })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(text).unwrap()
    }

    #[test]
    fn bell_purities() {
        let r = run_experiment(&cfg(
            r#"{"task":"purity","state":{"kind":"named","name":"bell","n":2},"shots":"exact"}"#,
        ))
        .unwrap();
        let values: Vec<f64> = r.results.iter().map(|e| e.value).collect();
        assert_eq!(values.len(), 3);
        assert!((values[0] - 1.0).abs() < 1e-12);
        assert!((values[1] - 0.5).abs() < 1e-12 && (values[2] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ccpmvm_check_bell() {
        let r = run_experiment(&cfg(r#"{"task":"ccpmvm-check","n":1,"povm":{"kind":"bell"}}"#)).unwrap();
        let d = &r.details;
        assert_eq!(d["all_ccp"], json!(true));
        assert!(d["depolarizing_deviation"].as_f64().unwrap() < 1e-12);
        let members = d["members"].as_array().unwrap();
        assert_eq!(members.len(), 4);
        for m in members {
            assert!(m["closed_form_deviation"].as_f64().unwrap() < 1e-12);
        }
    }

    #[test]
    fn deterministic_bodies() {
        let c = cfg(r#"{"task":"tomography","state":{"kind":"random","n":2,"rank":2,"seed":3},"shots":500,"seed":9}"#);
        let a = serde_json::to_string(&run_experiment(&c).unwrap().body()).unwrap();
        let b = serde_json::to_string(&run_experiment(&c).unwrap().body()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn plan_sets_shots() {
        let r = run_experiment(&cfg(
            r#"{"task":"tomography","state":{"kind":"named","name":"ghz","n":2},"plan":{"delta":0.2,"epsilon":0.2,"p_conf":0.9},"labels":["q=11,p=00"]}"#,
        ))
        .unwrap();
        let want = plan_shots(0.2, 0.2, 0.9).unwrap().shots as usize;
        assert_eq!(r.config.shots, Some(Shots::Count(want)));
        assert_eq!(r.results[0].shots, want);
    }

    #[test]
    fn config_errors() {
        assert!(ExperimentConfig::from_json(r#"{"task":"nope"}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"task":"purity","bogus":1}"#).is_err());
        let missing = cfg(r#"{"task":"purity"}"#);
        assert!(matches!(run_experiment(&missing), Err(Error::Argument(_))));
        let bad_file = cfg(r#"{"task":"purity","state":{"kind":"file","path":"/nonexistent.json"}}"#);
        let err = run_experiment(&bad_file).unwrap_err();
        assert_eq!(error_json(&err)["error"]["kind"], "parse");
    }

    #[test]
    fn state_specs() {
        assert_eq!("bell".parse::<StateSource>().unwrap(), StateSource::Named { name: NamedState::Bell, n: 2 });
        assert_eq!(
            "random:2:1:7".parse::<StateSource>().unwrap(),
            StateSource::Random { n: 2, rank: 1, seed: 7 }
        );
        assert_eq!("bloch:0,0,1".parse::<StateSource>().unwrap(), StateSource::Bloch { x: 0.0, y: 0.0, z: 1.0 });
        assert!("bloch:0,1".parse::<StateSource>().is_err());
        assert!(matches!("state.json".parse::<StateSource>().unwrap(), StateSource::File { .. }));
    }

    #[test]
    fn every_task_runs() {
        let state = r#""state":{"kind":"named","name":"ghz","n":3}"#;
        for task in ["tomography", "purity", "partial-purity", "concurrence", "pall", "detector-compare", "distribution"]
        {
            for shots in [r#""exact""#, "2000"] {
                let text = format!(r#"{{"task":"{task}",{state},"shots":{shots},"seed":4}}"#);
                run_experiment(&cfg(&text)).unwrap_or_else(|e| panic!("{task}: {e}"));
            }
        }
        run_experiment(&cfg(r#"{"task":"ccpmvm-check","n":1,"povm":{"kind":"random","elements":4,"seed":2}}"#))
            .unwrap();
    }

    #[test]
    fn exact_and_sampled_agree() {
        let base = r#""state":{"kind":"random","n":2,"rank":1,"seed":11},"seed":5"#;
        for task in ["purity", "concurrence", "pall"] {
            let exact = run_experiment(&cfg(&format!(r#"{{"task":"{task}",{base},"shots":"exact"}}"#))).unwrap();
            let sampled = run_experiment(&cfg(&format!(r#"{{"task":"{task}",{base},"shots":200000}}"#))).unwrap();
            for (e, s) in exact.results.iter().zip(&sampled.results) {
                assert!((e.value - s.value).abs() <= 5.0 * s.std_error + 1e-12, "{task} {}", e.estimator);
            }
        }
    }
}
