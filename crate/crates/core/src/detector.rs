//! Ancilla-based universal detector: Bell measurements on `ρ ⊗ ρ₀` with a
//! known `ρ₀`, compared against the two-copy method.

use serde::Serialize;

use crate::bellmeas::{exact_distribution, Method};
use crate::error::{Error, Result};
use crate::estimators::{estimate_csq, Estimate, ShotPlan, Source};
use crate::linalg::{min_eigenvalue, CMatrix, ZERO};
use crate::pauli::{check_cap, pauli_matrix, PauliLabel};
use crate::states::{pauli_decompose, reconstruct, DensityMatrix, PauliCoefficients};

/// `|c⁰|` at or below this is treated as vanishing.
pub const RECOVERABLE_TOL: f64 = 1e-12;

/// A known ancilla state together with its Pauli coefficients.
#[derive(Debug, Clone)]
pub struct AncillaSpec {
    pub rho0: DensityMatrix,
    pub c0: PauliCoefficients,
    /// Smallest `|c⁰|` over non-identity labels; 0 if any vanish.
    pub min_abs_c0: f64,
}

impl AncillaSpec {
    pub fn new(rho0: DensityMatrix) -> Result<Self> {
        let c0 = pauli_decompose(&rho0)?;
        let min_abs_c0 = c0.c[1..]
            .iter()
            .map(|c| if c.abs() <= RECOVERABLE_TOL { 0.0 } else { c.abs() })
            .fold(f64::INFINITY, f64::min);
        Ok(Self { rho0, c0, min_abs_c0 })
    }

    pub fn n(&self) -> usize {
        self.rho0.n()
    }
}

/// `⟨T(q,p) ⊗ T(q,p)⟩` on `ρ ⊗ ρ₀`, from the exact joint Bell distribution.
pub fn ancilla_joint_expectation(rho: &DensityMatrix, ancilla: &AncillaSpec, label: PauliLabel) -> Result<f64> {
    if rho.n() != ancilla.n() || label.n() != rho.n() {
        return Err(Error::Argument("state, ancilla and label must share a qubit count".into()));
    }
    let dist = exact_distribution(rho, &ancilla.rho0, Method::Direct)?;
    Ok(estimate_csq(Source::Exact(&dist), label)?.value)
}

/// Signed `c_{q,p}` as the kernel mean divided by `c⁰_{q,p}`.
///
/// `source` must come from measuring `ρ ⊗ ρ₀`.
pub fn estimate_c_ancilla(source: Source<'_>, ancilla: &AncillaSpec, label: PauliLabel) -> Result<Estimate> {
    let c0 = ancilla.c0.get(label);
    if c0.abs() <= RECOVERABLE_TOL {
        return Err(Error::Unrecoverable { label: label.to_string() });
    }
    let raw = estimate_csq(source, label)?;
    Ok(Estimate {
        value: raw.value / c0,
        std_error: raw.std_error / c0.abs(),
        shots: raw.shots,
        flags: raw.flags,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LabelCost {
    pub label: PauliLabel,
    pub c0: f64,
    /// Variance amplification `1/(c⁰)²` relative to the copy method; `None` if unrecoverable.
    pub amplification: Option<f64>,
    pub shots_needed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EfficiencySummary {
    pub recoverable: usize,
    pub total: usize,
    pub universal: bool,
    pub worst_amplification: Option<f64>,
    pub copy_baseline_shots: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EfficiencyReport {
    pub labels: Vec<LabelCost>,
    pub summary: EfficiencySummary,
}

/// Shot cost of the ancilla detector per label, against the copy baseline.
pub fn efficiency_report(ancilla: &AncillaSpec, plan: &ShotPlan) -> EfficiencyReport {
    let n = ancilla.n();
    let labels: Vec<LabelCost> = PauliLabel::all(n)
        .map(|label| {
            let c0 = ancilla.c0.get(label);
            let (amplification, shots_needed) = if c0.abs() > RECOVERABLE_TOL {
                let amp = 1.0 / (c0 * c0);
                (Some(amp), Some((plan.shots as f64 * amp).ceil() as u64))
            } else {
                (None, None)
            };
            LabelCost { label, c0, amplification, shots_needed }
        })
        .collect();
    let recoverable = labels.iter().filter(|l| l.amplification.is_some()).count();
    let worst_amplification = labels.iter().filter_map(|l| l.amplification).reduce(f64::max);
    let total = labels.len();
    EfficiencyReport {
        summary: EfficiencySummary {
            recoverable,
            total,
            universal: recoverable == total,
            worst_amplification,
            copy_baseline_shots: plan.shots,
        },
        labels,
    }
}

/// `√((N·Tr ρ₀² − 1)/(N² − 1))`, the largest common `|c⁰|` an ancilla of the given purity allows.
pub fn unbiased_bound(n: usize, purity: f64) -> f64 {
    let dim = (1u64 << n) as f64;
    ((dim * purity - 1.0) / (dim * dim - 1.0)).max(0.0).sqrt()
}

/// Stabilizer ancilla `|0…0⟩⟨0…0|`: `c⁰ = 1` on the `N` pure-Z labels, 0 elsewhere.
pub fn stabilizer_ancilla(n: usize) -> Result<AncillaSpec> {
    AncillaSpec::new(crate::states::product_zero(n)?)
}

/// Ancilla with every non-identity `c⁰ = u`, `u` pushed to the PSD boundary.
///
/// `ρ₀ = (I + u M)/N` with `M = Σ_{(q,p)≠0} T(q,p)`, so `u = 1/|λ_min(M)|`.
pub fn unbiased_ancilla(n: usize) -> Result<AncillaSpec> {
    check_cap(n)?;
    let dim = 1usize << n;
    let mut sum = CMatrix::from_element(dim, dim, ZERO);
    for label in PauliLabel::all(n).skip(1) {
        sum += pauli_matrix(label)?;
    }
    let lambda = min_eigenvalue(&sum);
    debug_assert!(lambda < 0.0);
    let u = 1.0 / lambda.abs();
    let mut c = vec![u; 1 << (2 * n)];
    c[0] = 1.0;
    let rho0 = reconstruct(&PauliCoefficients::new(n, c)?)?;
    AncillaSpec::new(rho0)
}
