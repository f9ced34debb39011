//! Acceptance suite: one pass/fail line per criterion, nonzero exit on any failure.

// `!(x <= tol)` is wanted: NaN must fail a check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use twocopy::bellmeas::{bell_povm, exact_distribution, sample_outcomes, BellOutcome, Method};
use twocopy::channels::{bell_map, map_fidelity, positivity_class, povm_to_ccpmvm, random_povm, two_copy_probability};
use twocopy::detector::{efficiency_report, estimate_c_ancilla, stabilizer_ancilla, unbiased_ancilla};
use twocopy::estimators::{
    all_orthogonal_weight, coarse_parity, coarse_parity_closed_form, concurrence_direct, concurrence_pure,
    estimate_csq, p_all, p_all_closed_form, parity_sign, plan_shots, purity, swap_expectation, PairSelector,
    Source,
};
use twocopy::experiment::{run_experiment, ExperimentConfig};
use twocopy::linalg::max_abs_diff;
use twocopy::states::{
    bell_pair, ghz, partial_trace, pauli_decompose, product_zero, qubit_from_bloch, random_state, BlochVector,
    DensityMatrix, PSD_TOL,
};
use twocopy::{PauliLabel, QubitMask};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'a str, Box<dyn Fn() -> Outcome>);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)*) => {
        if !$cond {
            return Err(format!($($msg)*));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn ccpmvm_round_trip() -> Outcome {
    let start = Instant::now();
    let mut worst_prob = 0.0f64;
    let mut worst_sum = 0.0f64;
    let mut worst_ccp = f64::INFINITY;
    for n in 1..=2 {
        for trial in 0..20u64 {
            let elements = 3 + (trial % 4) as usize;
            let povm = ok(random_povm(n, elements, 1000 * n as u64 + trial))?;
            let family = ok(povm_to_ccpmvm(&povm))?;
            worst_sum = worst_sum.max(family.depolarizing_deviation());
            for m in &family.members {
                worst_ccp = worst_ccp.min(positivity_class(&m.map, PSD_TOL).min_eig_ccp);
            }
            for s in 0..20u64 {
                let rho = ok(random_state(n, 1 + (s as usize % (1 << n)), 7000 + 100 * trial + s))?;
                for m in &family.members {
                    let direct = ok(two_copy_probability(&m.element, &rho))?;
                    let fid = ok(map_fidelity(&m.map, &rho))?;
                    worst_prob = worst_prob.max((direct - fid).abs());
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ensure!(worst_prob <= 1e-10, "probability mismatch {worst_prob:.2e}");
    ensure!(worst_sum <= 1e-10, "Σ C_μ deviates from ℰ by {worst_sum:.2e}");
    ensure!(worst_ccp >= -PSD_TOL, "ccP test failed, min eigenvalue {worst_ccp:.2e}");
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    Ok(format!(
        "max |ΔProb| {worst_prob:.1e}, Σ deviation {worst_sum:.1e}, min ccP eig {worst_ccp:.1e}, {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn bell_map_closed_form() -> Outcome {
    let povm: Vec<_> = ok(bell_povm(1))?.into_iter().map(|(_, e)| e).collect();
    let family = ok(povm_to_ccpmvm(&povm))?;
    let mut worst = 0.0f64;
    for (idx, m) in family.members.iter().enumerate() {
        let o = BellOutcome::from_index(1, idx);
        worst = worst.max(max_abs_diff(m.map.matrix(), ok(bell_map(1, o.a, o.b))?.matrix()));
    }
    ensure!(family.members.len() == 4, "expected four maps");
    ensure!(worst <= 1e-12, "max elementwise deviation {worst:.2e}");
    Ok(format!("four maps match T(b,a)ρᵀT(b,a)/2, max deviation {worst:.1e}"))
}

fn distribution_agreement() -> Outcome {
    let mut worst = 0.0f64;
    for n in 1..=3 {
        for s in 0..50u64 {
            let ra = ok(random_state(n, 1 + s as usize % (1 << n), 10_000 + s))?;
            let rb = ok(random_state(n, 1 + (s as usize + 1) % (1 << n), 20_000 + s))?;
            let d = ok(exact_distribution(&ra, &rb, Method::Direct))?;
            let c = ok(exact_distribution(&ra, &rb, Method::ClosedForm))?;
            for (x, y) in d.probabilities().iter().zip(c.probabilities()) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    ensure!(worst <= 1e-10, "direct vs closed form {worst:.2e}");
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let mut worst_bloch = 0.0f64;
    for _ in 0..100 {
        // uniform in the ball by rejection
        let p = loop {
            let v = BlochVector::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            if v.norm() <= 1.0 {
                break v;
            }
        };
        let rho = ok(qubit_from_bloch(p))?;
        let d = ok(exact_distribution(&rho, &rho, Method::Direct))?;
        for (o, prob) in d.outcomes() {
            let (a, b) = o.pair(1);
            worst_bloch = worst_bloch.max((prob - (1.0 + p.dot(&p.reflected(a, b))) / 4.0).abs());
        }
    }
    ensure!(worst_bloch <= 1e-12, "Bloch law deviation {worst_bloch:.2e}");
    Ok(format!("methods within {worst:.1e}, Bloch law within {worst_bloch:.1e}"))
}

fn tomography_pipeline() -> Outcome {
    let rho = ok(random_state(3, 1, 4242))?;
    let c = ok(pauli_decompose(&rho))?;
    let dist = ok(exact_distribution(&rho, &rho, Method::ClosedForm))?;
    let mut worst = 0.0f64;
    for label in PauliLabel::all(3) {
        let e = ok(estimate_csq(Source::Exact(&dist), label))?;
        worst = worst.max((e.value - c.get(label).powi(2)).abs());
    }
    ensure!(worst <= 1e-10, "exact c² mismatch {worst:.2e}");

    // 0.9545 is erf(√2) to four digits, i.e. k = 2
    let p_conf = libm::erf(std::f64::consts::SQRT_2);
    let plan = ok(plan_shots(0.1, 0.1, p_conf))?;
    ensure!(plan.shots == 10_000, "planned {} shots, expected 10000", plan.shots);
    let targets: Vec<PauliLabel> =
        PauliLabel::all(3).filter(|l| !l.is_identity() && c.get(*l).abs() >= plan.delta).collect();
    ensure!(!targets.is_empty(), "fixture has no |c| ≥ δ");
    let trials = 200;
    let mut covered = vec![0usize; targets.len()];
    for t in 0..trials {
        let shots = sample_outcomes(&dist, plan.shots as usize, 90_000 + t as u64);
        for (i, label) in targets.iter().enumerate() {
            let e = ok(estimate_csq(Source::Sampled(&shots), *label))?;
            if (c.get(*label).powi(2) - e.value).abs() <= plan.k * e.std_error {
                covered[i] += 1;
            }
        }
    }
    let threshold = p_conf - 3.0 * (p_conf * (1.0 - p_conf) / trials as f64).sqrt();
    let rate = |k: usize| k as f64 / trials as f64;
    // the gated label is fixed before sampling: largest |c| away from the identity
    let gated = (0..targets.len())
        .max_by(|&i, &j| c.get(targets[i]).abs().total_cmp(&c.get(targets[j]).abs()))
        .unwrap();
    let gated_cov = rate(covered[gated]);
    ensure!(gated_cov >= threshold, "coverage {gated_cov:.3} below {threshold:.3} for {}", targets[gated]);
    let pooled = covered.iter().sum::<usize>() as f64 / (trials * targets.len()) as f64;
    let worst_cov = covered.iter().map(|&k| rate(k)).fold(1.0, f64::min);
    Ok(format!(
        "exact within {worst:.1e}; coverage {gated_cov:.3} ≥ {threshold:.3} for {} at {} shots \
         (all {} labels with |c| ≥ 0.1: pooled {pooled:.3}, lowest {worst_cov:.3})",
        targets[gated],
        plan.shots,
        targets.len()
    ))
}

fn purity_checks() -> Outcome {
    let mut worst = 0.0f64;
    let mut worst_sigma = 0.0f64;
    for n in 1..=3 {
        for s in 0..5u64 {
            let rho = ok(random_state(n, 1 + s as usize % (1 << n), 300 + 10 * n as u64 + s))?;
            let dist = ok(exact_distribution(&rho, &rho, Method::Direct))?;
            let singlet = ok(coarse_parity(Source::Exact(&dist), &PairSelector::singlet(QubitMask::all(n))))?.value;
            let swap = swap_expectation(&rho);
            worst = worst.max((singlet - rho.purity()).abs()).max((swap - rho.purity()).abs());
            let shots = sample_outcomes(&dist, 100_000, 500 + s);
            for bits in 1..(1u64 << n) {
                let mask = ok(QubitMask::new(n, bits))?;
                let oracle = ok(partial_trace(&rho, mask))?.purity();
                let exact = ok(purity(Source::Exact(&dist), mask))?.value;
                worst = worst.max((exact - oracle).abs());
                let sampled = ok(purity(Source::Sampled(&shots), mask))?;
                let gap = (sampled.value - oracle).abs();
                let z = if sampled.std_error > 0.0 {
                    gap / sampled.std_error
                } else if gap <= 1e-12 {
                    0.0
                } else {
                    f64::INFINITY
                };
                worst_sigma = worst_sigma.max(z);
                ensure!(z <= 5.0, "n={n} mask {mask}: sampled purity {z:.2} σ away");
            }
        }
    }
    ensure!(worst <= 1e-10, "exact purity mismatch {worst:.2e}");
    Ok(format!("exact within {worst:.1e}; sampled worst {worst_sigma:.2}σ"))
}

fn concurrence_checks() -> Outcome {
    let mut cases: Vec<(&str, DensityMatrix, f64)> =
        vec![("bell", bell_pair(), 1.0), ("ghz3", ok(ghz(3))?, 1.5f64.sqrt())];
    for n in 2..=4 {
        let mut prod = ok(random_state(1, 1, 60))?;
        for k in 1..n {
            prod = ok(prod.tensor(&ok(random_state(1, 1, 60 + k as u64))?))?;
        }
        cases.push(("product", prod, 0.0));
    }
    cases.push(("product-zero", ok(product_zero(3))?, 0.0));
    let mut notes = Vec::new();
    for (i, (name, rho, want)) in cases.iter().enumerate() {
        let oracle = ok(concurrence_direct(rho))?;
        ensure!((oracle - want).abs() <= 1e-8, "{name}: marginal-purity formula gives {oracle}");
        let dist = ok(exact_distribution(rho, rho, Method::ClosedForm))?;
        let exact = ok(concurrence_pure(Source::Exact(&dist)))?.value;
        ensure!((exact - oracle).abs() <= 1e-8, "{name}: exact estimator {exact} vs {oracle}");
        let shots = sample_outcomes(&dist, 100_000, 700 + i as u64);
        let sampled = ok(concurrence_pure(Source::Sampled(&shots)))?;
        ensure!(
            (sampled.value - oracle).abs() <= 5.0 * sampled.std_error,
            "{name}: sampled {} ± {} vs {oracle}",
            sampled.value,
            sampled.std_error
        );
        notes.push(format!("{name} {:.4}±{:.4}", sampled.value, sampled.std_error));
    }
    Ok(notes.join(", "))
}

fn sign_formulas() -> Outcome {
    let mut worst = 0.0f64;
    for n in 1..=3 {
        let dim = (1u64 << n) as f64;
        let outcomes: Vec<BellOutcome> = (0..1usize << (2 * n)).map(|i| BellOutcome::from_index(n, i)).collect();
        for m in 0..2u8 {
            for nb in 0..2u8 {
                let sel = PairSelector::single_bell(m, nb, QubitMask::all(n));
                let none = |o: &BellOutcome| if (1..=n).any(|k| o.pair(k) == (m, nb)) { 0.0 } else { 1.0 };
                let mut plus = 0;
                for label in PauliLabel::all(n) {
                    // coefficient of c²_{q,p} in the exact distribution sums
                    let s_direct: f64 =
                        outcomes.iter().map(|o| sel.statistic(*o) * label.bell_kernel_sign(o.a, o.b)).sum::<f64>() / dim;
                    let f_direct: f64 = outcomes.iter().map(|o| none(o) * label.bell_kernel_sign(o.a, o.b)).sum();
                    worst = worst
                        .max((s_direct - parity_sign(label, m, nb)).abs())
                        .max((f_direct - all_orthogonal_weight(label, m, nb)).abs());
                    if parity_sign(label, m, nb) == 1.0 {
                        plus += 1;
                    }
                }
                let total = 1usize << (2 * n);
                if (m, nb) == (1, 1) {
                    ensure!(plus == total, "singlet s not identically +1 at n={n}");
                } else {
                    ensure!(2 * plus == total, "({m},{nb}) at n={n}: {plus} of {total} entries are +1");
                }
                for s in 0..5u64 {
                    let rho = ok(random_state(n, 1 + s as usize % (1 << n), 800 + s))?;
                    let c = ok(pauli_decompose(&rho))?;
                    let dist = ok(exact_distribution(&rho, &rho, Method::Direct))?;
                    let dp = ok(coarse_parity(Source::Exact(&dist), &sel))?.value;
                    let pa = ok(p_all(Source::Exact(&dist), m, nb, QubitMask::all(n)))?.value;
                    worst = worst
                        .max((dp - coarse_parity_closed_form(&c, m, nb)).abs())
                        .max((pa - p_all_closed_form(&c, m, nb)).abs());
                }
            }
        }
    }
    ensure!(worst <= 1e-10, "formula mismatch {worst:.2e}");
    Ok(format!("s and f formulas within {worst:.1e} for all (m,n), n ≤ 3"))
}

fn detector_dichotomy() -> Outcome {
    let plan = ok(plan_shots(0.1, 0.1, libm::erf(std::f64::consts::SQRT_2)))?;
    let stab = ok(stabilizer_ancilla(2))?;
    let r = efficiency_report(&stab, &plan);
    ensure!(r.summary.recoverable == 4, "{} recoverable labels", r.summary.recoverable);
    ensure!(!r.summary.universal, "stabilizer ancilla reported universal");
    ensure!(
        r.labels.iter().filter_map(|l| l.amplification).all(|a| (a - 1.0).abs() < 1e-12),
        "stabilizer amplification differs from 1"
    );
    let mut amps = Vec::new();
    for n in 1..=4 {
        let r = efficiency_report(&ok(unbiased_ancilla(n))?, &plan);
        amps.push(r.summary.worst_amplification.ok_or("no recoverable label")?);
    }
    ensure!(amps.windows(2).all(|w| w[1] > w[0]), "amplification not increasing: {amps:?}");

    let mut worst = 0.0f64;
    for s in 0..5u64 {
        let rho = ok(random_state(2, 1 + s as usize % 4, 900 + s))?;
        let c = ok(pauli_decompose(&rho))?;
        for anc in [&stab, &ok(unbiased_ancilla(2))?] {
            let dist = ok(exact_distribution(&rho, &anc.rho0, Method::Direct))?;
            for label in PauliLabel::all(2).filter(|l| anc.c0.get(*l).abs() > 1e-12) {
                let e = ok(estimate_c_ancilla(Source::Exact(&dist), anc, label))?;
                worst = worst.max((e.value - c.get(label)).abs());
            }
        }
    }
    ensure!(worst <= 1e-10, "signed recovery error {worst:.2e}");
    let amps: Vec<String> = amps.iter().map(|a| format!("{a:.2}")).collect();
    Ok(format!("stabilizer 4/16 recoverable; unbiased worst amplification {}; signed c within {worst:.1e}", amps.join(" < ")))
}

fn determinism() -> Outcome {
    let configs = [
        r#"{"task":"tomography","state":{"kind":"random","n":3,"rank":2,"seed":5},"plan":{"delta":0.2,"epsilon":0.2,"p_conf":0.9},"seed":17}"#,
        r#"{"task":"purity","state":{"kind":"named","name":"ghz","n":3},"shots":5000,"seed":2}"#,
        r#"{"task":"detector-compare","state":{"kind":"random","n":2,"rank":1,"seed":8},"ancilla":{"kind":"unbiased"},"shots":3000,"seed":4}"#,
        r#"{"task":"ccpmvm-check","n":1,"povm":{"kind":"random","elements":5,"seed":11},"seed":3}"#,
    ];
    for text in configs {
        let cfg = ok(ExperimentConfig::from_json(text))?;
        let a = ok(serde_json::to_string(&ok(run_experiment(&cfg))?.body()))?;
        let b = ok(serde_json::to_string(&ok(run_experiment(&cfg))?.body()))?;
        ensure!(a == b, "report bodies differ for {text}");
    }
    Ok(format!("{} configs reproduce byte-identical bodies", configs.len()))
}

fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

fn resource_envelope(suite_start: Instant) -> Outcome {
    // n = 4 workload: 256-dimensional two-copy matrices
    for s in 0..3u64 {
        let rho = ok(random_state(4, 1 + s as usize, 1100 + s))?;
        let d = ok(exact_distribution(&rho, &rho, Method::Direct))?;
        let c = ok(exact_distribution(&rho, &rho, Method::ClosedForm))?;
        let gap = d.probabilities().iter().zip(c.probabilities()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        ensure!(gap <= 1e-10, "n=4 method gap {gap:.2e}");
        let shots = sample_outcomes(&c, 100_000, s);
        ok(purity(Source::Sampled(&shots), QubitMask::all(4)))?;
    }
    let elapsed = suite_start.elapsed();
    ensure!(elapsed < Duration::from_secs(300), "suite took {elapsed:?}");
    let peak = peak_rss_bytes().ok_or("peak memory unavailable (no /proc/self/status)")?;
    ensure!(peak < 2 << 30, "peak memory {} MiB", peak >> 20);
    Ok(format!("suite {:.1}s, peak RSS {} MiB", elapsed.as_secs_f64(), peak >> 20))
}

fn main() {
    let suite_start = Instant::now();
    let criteria: Vec<Criterion> = vec![
        ("ccPMVM theorem round-trip", Box::new(ccpmvm_round_trip)),
        ("Bell-map closed form", Box::new(bell_map_closed_form)),
        ("distribution agreement", Box::new(distribution_agreement)),
        ("tomography pipeline", Box::new(tomography_pipeline)),
        ("purity and partial purity", Box::new(purity_checks)),
        ("concurrence", Box::new(concurrence_checks)),
        ("s/f sign formulas", Box::new(sign_formulas)),
        ("detector dichotomy", Box::new(detector_dichotomy)),
        ("determinism", Box::new(determinism)),
        ("resource envelope", Box::new(move || resource_envelope(suite_start))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {:>2}. {name}: {detail} ({secs:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {:>2}. {name}: {why} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
