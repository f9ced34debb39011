//! Copy-based estimators read off joint Bell outcomes.
//!
//! Every estimator accepts a [`Source`]: either an exact distribution, giving
//! the exact expectation of the per-shot statistic, or a list of sampled
//! outcomes, giving the sample mean and its standard error.

use serde::Serialize;

use crate::bellmeas::{BellDistribution, BellOutcome};
use crate::error::{Error, Result};
use crate::linalg::kron;
use crate::pauli::{PauliLabel, QubitMask};
use crate::states::{partial_trace, DensityMatrix, PauliCoefficients};

/// Where outcome statistics come from.
#[derive(Debug, Clone, Copy)]
pub enum Source<'a> {
    Exact(&'a BellDistribution),
    Sampled(&'a [BellOutcome]),
}

impl<'a> Source<'a> {
    pub fn n(&self) -> Result<usize> {
        match self {
            Source::Exact(d) => Ok(d.n()),
            Source::Sampled(o) => o
                .first()
                .map(|o| o.n)
                .ok_or_else(|| Error::Argument("no outcomes to estimate from".into())),
        }
    }

    /// Mean of `statistic` with its standard error (population variance over √M).
    fn reduce(&self, statistic: impl Fn(BellOutcome) -> f64) -> Result<Estimate> {
        match self {
            Source::Exact(d) => Ok(Estimate {
                value: d.expectation(statistic),
                std_error: 0.0,
                shots: 0,
                flags: vec![Flag::Exact],
            }),
            Source::Sampled(outcomes) => {
                if outcomes.is_empty() {
                    return Err(Error::Argument("no outcomes to estimate from".into()));
                }
                let m = outcomes.len() as f64;
                let (mut sum, mut sq) = (0.0, 0.0);
                for &o in outcomes.iter() {
                    let x = statistic(o);
                    sum += x;
                    sq += x * x;
                }
                let mean = sum / m;
                let var = (sq / m - mean * mean).max(0.0);
                Ok(Estimate { value: mean, std_error: (var / m).sqrt(), shots: outcomes.len(), flags: vec![] })
            }
        }
    }

    fn check_n(&self, n: usize) -> Result<()> {
        let have = self.n()?;
        if have != n {
            return Err(Error::Argument(format!("outcomes are for {have} pairs, request is for {n}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flag {
    /// Computed from an exact distribution rather than samples.
    Exact,
    /// A negative sample mean was clamped to zero before a square root.
    ClampedNegative,
    /// The first-order error propagation broke down near the square-root branch point.
    ErrorUnbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub shots: usize,
    pub flags: Vec<Flag>,
}

impl Estimate {
    pub fn has_flag(&self, flag: Flag) -> bool {
        self.flags.contains(&flag)
    }

    pub fn report(&self, estimator: &str, params: serde_json::Value) -> EstimatorReport {
        EstimatorReport {
            estimator: estimator.to_string(),
            params,
            value: self.value,
            std_error: self.std_error,
            shots: self.shots,
            flags: self.flags.clone(),
        }
    }

    /// `|c| = √max(0, c²)` from a `c²` estimate, with `σ_{|c|} = σ / (2|c̃|)`.
    pub fn abs_from_square(&self) -> Estimate {
        let mut flags = self.flags.clone();
        if self.value < 0.0 {
            flags.push(Flag::ClampedNegative);
        }
        let value = self.value.max(0.0).sqrt();
        let std_error = if self.std_error == 0.0 {
            0.0
        } else if value == 0.0 {
            flags.push(Flag::ErrorUnbounded);
            f64::INFINITY
        } else {
            self.std_error / (2.0 * value)
        };
        Estimate { value, std_error, shots: self.shots, flags }
    }
}

/// Serialized estimator result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorReport {
    pub estimator: String,
    pub params: serde_json::Value,
    pub value: f64,
    pub std_error: f64,
    pub shots: usize,
    pub flags: Vec<Flag>,
}

/// `c²_{q,p}` as the mean of `(-1)^{a·q + b·p + q·p}`, the value of `T(q,p)⊗T(q,p)`.
pub fn estimate_csq(source: Source<'_>, label: PauliLabel) -> Result<Estimate> {
    source.check_n(label.n())?;
    source.reduce(|o| label.bell_kernel_sign(o.a, o.b))
}

/// Shot requirement for estimating every `|c| ≥ δ` to within `ε` with probability `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShotPlan {
    pub delta: f64,
    pub epsilon: f64,
    pub p_conf: f64,
    pub k: f64,
    pub shots: u64,
}

impl ShotPlan {
    /// Half-width `kσ / (2|c̃|)` of the confidence interval on `|c|`.
    pub fn interval_half_width(&self, csq_std_error: f64, abs_c: f64) -> f64 {
        self.k * csq_std_error / (2.0 * abs_c)
    }
}

/// Solves `p = erf(k/√2)` for `k` by bisection on `[0, 10]`.
pub fn confidence_multiplier(p_conf: f64) -> Result<f64> {
    if !(p_conf > 0.0 && p_conf < 1.0) {
        return Err(Error::Argument(format!("confidence {p_conf} must lie strictly between 0 and 1")));
    }
    let (mut lo, mut hi) = (0.0f64, 10.0f64);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if libm::erf(mid / std::f64::consts::SQRT_2) < p_conf {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `shots = ⌈k² / (4δ²ε²)⌉`; the qubit count plays no part.
pub fn plan_shots(delta: f64, epsilon: f64, p_conf: f64) -> Result<ShotPlan> {
    if !(delta > 0.0 && epsilon > 0.0) {
        return Err(Error::Argument("delta and epsilon must be positive".into()));
    }
    let k = confidence_multiplier(p_conf)?;
    let raw = k * k / (4.0 * delta * delta * epsilon * epsilon);
    // snap values within bisection noise of an integer before the ceiling
    let nearest = raw.round();
    let shots = if (raw - nearest).abs() <= 1e-9 * raw.max(1.0) { nearest } else { raw.ceil() };
    Ok(ShotPlan { delta, epsilon, p_conf, k, shots: shots as u64 })
}

/// Per-pair sign functions `h_k(a_k, b_k) ∈ {±1}`; the statistic is `Π_k h_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSelector {
    n: usize,
    /// `signs[k-1][2a + b]`
    signs: Vec<[f64; 4]>,
}

impl PairSelector {
    pub fn new(signs: Vec<[i8; 4]>) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::Argument("selector needs at least one pair".into()));
        }
        let mut out = Vec::with_capacity(signs.len());
        for (k, row) in signs.iter().enumerate() {
            if row.iter().any(|s| *s != 1 && *s != -1) {
                return Err(Error::Argument(format!("pair {} has a sign outside ±1", k + 1)));
            }
            out.push(row.map(f64::from));
        }
        Ok(Self { n: signs.len(), signs: out })
    }

    /// `-1` on Bell state `(m, n_bit)` for pairs in `mask`, `+1` elsewhere.
    pub fn single_bell(m: u8, n_bit: u8, mask: QubitMask) -> Self {
        let target = 2 * (m as usize & 1) + (n_bit as usize & 1);
        let signs = (1..=mask.n())
            .map(|k| {
                let mut row = [1.0; 4];
                if mask.contains(k) {
                    row[target] = -1.0;
                }
                row
            })
            .collect();
        Self { n: mask.n(), signs }
    }

    pub fn singlet(mask: QubitMask) -> Self {
        Self::single_bell(1, 1, mask)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn statistic(&self, o: BellOutcome) -> f64 {
        let mut s = 1.0;
        for (k, row) in self.signs.iter().enumerate() {
            let (a, b) = o.pair(k + 1);
            s *= row[2 * a as usize + b as usize];
        }
        s
    }
}

/// Expectation of `Π_k h_k(a_k, b_k)`.
pub fn coarse_parity(source: Source<'_>, selector: &PairSelector) -> Result<Estimate> {
    source.check_n(selector.n)?;
    source.reduce(|o| selector.statistic(o))
}

fn sign(exponent: usize) -> f64 {
    if exponent.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `s_{q,p} = (-1)^{(m+1)(α_x+α_y)} (-1)^{(n+1)(α_z+α_y)}`.
pub fn parity_sign(label: PauliLabel, m: u8, n_bit: u8) -> f64 {
    let w = label.weight_profile();
    sign((m as usize + 1) * (w.alpha_x + w.alpha_y) + (n_bit as usize + 1) * (w.alpha_z + w.alpha_y))
}

/// `f_{q,p} = 3^{α_0} s_{q,p}`.
pub fn all_orthogonal_weight(label: PauliLabel, m: u8, n_bit: u8) -> f64 {
    3f64.powi(label.weight_profile().alpha_0 as i32) * parity_sign(label, m, n_bit)
}

/// `ΔProb_{m,n} = (1/N) Σ s_{q,p} c²_{q,p}`.
pub fn coarse_parity_closed_form(coeffs: &PauliCoefficients, m: u8, n_bit: u8) -> f64 {
    let dim = (1u64 << coeffs.n) as f64;
    PauliLabel::all(coeffs.n)
        .zip(&coeffs.c)
        .map(|(l, c)| parity_sign(l, m, n_bit) * c * c)
        .sum::<f64>()
        / dim
}

/// `p^{(all)}_{m,n} = Σ f_{q,p} c²_{q,p} / N²`.
pub fn p_all_closed_form(coeffs: &PauliCoefficients, m: u8, n_bit: u8) -> f64 {
    let dim2 = (1u64 << (2 * coeffs.n)) as f64;
    PauliLabel::all(coeffs.n)
        .zip(&coeffs.c)
        .map(|(l, c)| all_orthogonal_weight(l, m, n_bit) * c * c)
        .sum::<f64>()
        / dim2
}

fn require_mask(source: &Source<'_>, keep: QubitMask) -> Result<()> {
    source.check_n(keep.n())?;
    if keep.is_empty() {
        return Err(Error::Argument("mask must select at least one qubit".into()));
    }
    Ok(())
}

/// `Tr ρ_J²` as the even-minus-odd singlet count over the pairs in `J`.
pub fn purity(source: Source<'_>, keep: QubitMask) -> Result<Estimate> {
    require_mask(&source, keep)?;
    coarse_parity(source, &PairSelector::singlet(keep))
}

/// Probability that no pair in `keep` shows Bell state `(m, n_bit)`.
pub fn p_all(source: Source<'_>, m: u8, n_bit: u8, keep: QubitMask) -> Result<Estimate> {
    require_mask(&source, keep)?;
    let target = (m & 1, n_bit & 1);
    let pairs: Vec<usize> = (1..=keep.n()).filter(|&k| keep.contains(k)).collect();
    source.reduce(|o| if pairs.iter().any(|&k| o.pair(k) == target) { 0.0 } else { 1.0 })
}

/// Pure-state multipartite concurrence `2√(1 − p^{(all)}_{1,1})`.
pub fn concurrence_pure(source: Source<'_>) -> Result<Estimate> {
    let n = source.n()?;
    let p = p_all(source, 1, 1, QubitMask::all(n))?;
    let gap = snap_roundoff(1.0 - p.value, 1.0);
    let mut flags = p.flags.clone();
    if gap < 0.0 {
        flags.push(Flag::ClampedNegative);
    }
    let value = 2.0 * gap.max(0.0).sqrt();
    let std_error = if p.std_error == 0.0 {
        0.0
    } else if gap <= p.std_error {
        flags.push(Flag::ErrorUnbounded);
        f64::INFINITY
    } else {
        p.std_error / gap.sqrt()
    };
    Ok(Estimate { value, std_error, shots: p.shots, flags })
}

/// Zeroes a difference of magnitude-`scale` terms that is within a few ulps of zero.
fn snap_roundoff(x: f64, scale: f64) -> f64 {
    if x.abs() <= 16.0 * f64::EPSILON * scale { 0.0 } else { x }
}

/// `2^{1-n/2} √((2^n − 2) − Σ_l Tr ρ_l²)` over all nontrivial qubit subsets `l`.
pub fn concurrence_direct(rho: &DensityMatrix) -> Result<f64> {
    let n = rho.n();
    if n < 2 {
        return Err(Error::Argument("concurrence needs at least two qubits".into()));
    }
    let purity = rho.purity();
    if purity < 1.0 - 1e-8 {
        return Err(Error::Precondition(format!("state is mixed (Tr ρ² = {purity})")));
    }
    let full = (1u64 << n) - 1;
    let mut marginal_sum = 0.0;
    for bits in 1..full {
        marginal_sum += partial_trace(rho, QubitMask::new(n, bits)?)?.purity();
    }
    let scale = ((1u64 << n) - 2) as f64;
    let radicand = snap_roundoff(scale - marginal_sum, scale);
    Ok(2f64.powf(1.0 - n as f64 / 2.0) * radicand.max(0.0).sqrt())
}

/// `Tr(Swap · ρ⊗ρ)`, with Swap exchanging the two copies.
pub fn swap_expectation(rho: &DensityMatrix) -> f64 {
    let dim = rho.dim();
    let doubled = kron(rho.matrix(), rho.matrix());
    // Swap[x, y] = 1 iff y is x with its halves exchanged
    (0..dim * dim)
        .map(|x| {
            let swapped = (x % dim) * dim + x / dim;
            doubled[(swapped, x)].re
        })
        .sum()
}
