//! Joint Bell measurement on qubit pairs `(A_k, B_k)` of two registers.
//!
//! The doubled register is ordered with all of copy A first, then copy B;
//! the direct method applies the pairing permutation internally.

use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron, parity, walsh_hadamard, CMatrix, ZERO};
use crate::pauli::check_cap;
use crate::states::{pauli_decompose, DensityMatrix};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Per-pair Bell outcomes: `(a_k, b_k)` names `|β_{a_k,b_k}⟩` on pair `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BellOutcome {
    pub n: usize,
    pub a: u64,
    pub b: u64,
}

impl BellOutcome {
    pub fn from_index(n: usize, index: usize) -> Self {
        let mask = (1u64 << n) - 1;
        Self { n, a: (index as u64 >> n) & mask, b: index as u64 & mask }
    }

    /// Position in the `(a‖b)` lexicographic order.
    pub fn index(&self) -> usize {
        ((self.a << self.n) | self.b) as usize
    }

    /// `(a_k, b_k)` on pair `k` (1-based).
    pub fn pair(&self, k: usize) -> (u8, u8) {
        let shift = self.n - k;
        ((self.a >> shift & 1) as u8, (self.b >> shift & 1) as u8)
    }
}

impl fmt::Display for BellOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits = |x: u64| -> String {
            (0..self.n).map(|k| if x >> (self.n - 1 - k) & 1 == 1 { '1' } else { '0' }).collect()
        };
        write!(f, "a={},b={}", bits(self.a), bits(self.b))
    }
}

/// `Prob(a,b)` over all `4^n` joint outcomes, in `(a‖b)` lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct BellDistribution {
    n: usize,
    prob: Vec<f64>,
}

impl BellDistribution {
    /// Clips entries in `[-1e-12, 0)` to zero and checks normalization.
    pub fn new(n: usize, mut prob: Vec<f64>) -> Result<Self> {
        if n == 0 || prob.len() != 1 << (2 * n) {
            return Err(Error::Argument(format!("{} probabilities for {n} pairs", prob.len())));
        }
        for (i, p) in prob.iter_mut().enumerate() {
            if *p < -1e-12 || !p.is_finite() {
                return Err(Error::InvalidState(format!("probability {p:.3e} at outcome {i}")));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let total: f64 = prob.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("probabilities sum to {total}")));
        }
        Ok(Self { n, prob })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.prob
    }

    pub fn get(&self, outcome: BellOutcome) -> f64 {
        self.prob[outcome.index()]
    }

    pub fn outcomes(&self) -> impl Iterator<Item = (BellOutcome, f64)> + '_ {
        self.prob.iter().enumerate().map(|(i, &p)| (BellOutcome::from_index(self.n, i), p))
    }

    /// Exact expectation of a per-outcome statistic.
    pub fn expectation(&self, statistic: impl Fn(BellOutcome) -> f64) -> f64 {
        self.outcomes().map(|(o, p)| if p == 0.0 { 0.0 } else { p * statistic(o) }).sum()
    }

    pub fn to_json(&self) -> DistributionJson {
        DistributionJson { n: self.n, prob: self.prob.clone(), order: "(a||b) lexicographic".into() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistributionJson {
    pub n: usize,
    pub prob: Vec<f64>,
    pub order: String,
}

/// `|β_{a,b}⟩` in the basis `|00⟩, |01⟩, |10⟩, |11⟩`, first nonzero amplitude real positive.
pub fn bell_state(a: u8, b: u8) -> [Complex64; 4] {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let s = if a & 1 == 0 { h } else { -h };
    if b & 1 == 0 {
        [h, ZERO, ZERO, s]
    } else {
        [ZERO, h, s, ZERO]
    }
}

/// Bell-basis POVM on `ρ_A ⊗ ρ_B`, one projector per joint outcome in index order.
pub fn bell_povm(n: usize) -> Result<Vec<(BellOutcome, CMatrix)>> {
    check_cap(n)?;
    let dim = 1usize << n;
    (0..dim * dim)
        .map(|idx| {
            let outcome = BellOutcome::from_index(n, idx);
            // (B_1 ⊗ … ⊗ B_n ⊗ I)|𝓘⟩ with B_k the 2×2 coefficient matrix of pair k
            let mut coeff = CMatrix::identity(1, 1);
            for k in 1..=n {
                let (a, b) = outcome.pair(k);
                let v = bell_state(a, b);
                coeff = kron(&coeff, &CMatrix::from_row_slice(2, 2, &v));
            }
            let vec = nalgebra::DVector::from_fn(dim * dim, |x, _| coeff[(x / dim, x % dim)]);
            Ok((outcome, &vec * vec.adjoint()))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Projector expectations on the explicitly doubled state.
    Direct,
    /// `Σ (-1)^{aq+bp+qp} c^A_{q,p} c^B_{q,p} / N²` through a Walsh-Hadamard transform.
    ClosedForm,
}

/// Maps an index in paired order `(A_1,B_1,…,A_n,B_n)` to copy-major order `(A_1…A_n,B_1…B_n)`.
fn unpair(n: usize, x: usize) -> usize {
    let (mut ia, mut ib) = (0usize, 0usize);
    for k in 0..n {
        // pair k occupies bits 2(n-1-k)+1 (A) and 2(n-1-k) (B)
        let shift = 2 * (n - 1 - k);
        ia |= (x >> (shift + 1) & 1) << (n - 1 - k);
        ib |= (x >> shift & 1) << (n - 1 - k);
    }
    (ia << n) | ib
}

pub fn exact_distribution(rho_a: &DensityMatrix, rho_b: &DensityMatrix, method: Method) -> Result<BellDistribution> {
    if rho_a.n() != rho_b.n() {
        return Err(Error::Argument(format!(
            "states have {} and {} qubits",
            rho_a.n(),
            rho_b.n()
        )));
    }
    let n = rho_a.n();
    check_cap(n)?;
    let prob = match method {
        Method::Direct => direct_probabilities(rho_a, rho_b),
        Method::ClosedForm => {
            let ca = pauli_decompose(rho_a)?;
            let cb = pauli_decompose(rho_b)?;
            let weights: Vec<f64> = ca.c.iter().zip(&cb.c).map(|(x, y)| x * y).collect();
            kernel_transform(n, &weights)
        }
    };
    BellDistribution::new(n, prob)
}

fn direct_probabilities(rho_a: &DensityMatrix, rho_b: &DensityMatrix) -> Vec<f64> {
    let n = rho_a.n();
    let doubled = kron(rho_a.matrix(), rho_b.matrix());
    let perm: Vec<usize> = (0..1usize << (2 * n)).map(|x| unpair(n, x)).collect();
    (0..1usize << (2 * n))
        .map(|idx| {
            let outcome = BellOutcome::from_index(n, idx);
            // ⊗_k |β_{a_k b_k}⟩ in paired order, kept sparse
            let mut support: Vec<(usize, Complex64)> = vec![(0, Complex64::new(1.0, 0.0))];
            for k in 1..=n {
                let (a, b) = outcome.pair(k);
                let v = bell_state(a, b);
                support = support
                    .iter()
                    .flat_map(|&(x, amp)| {
                        v.iter()
                            .enumerate()
                            .filter(|(_, c)| **c != ZERO)
                            .map(move |(j, c)| ((x << 2) | j, amp * c))
                    })
                    .collect();
            }
            let mut acc = ZERO;
            for &(x, vx) in &support {
                for &(y, vy) in &support {
                    acc += vx.conj() * doubled[(perm[x], perm[y])] * vy;
                }
            }
            acc.re
        })
        .collect()
}

/// `Prob(a,b) = Σ_{q,p} (-1)^{aq+bp+qp} w_{q,p} / N²` for label weights `w`.
pub fn kernel_transform(n: usize, weights: &[f64]) -> Vec<f64> {
    let norm = (1u64 << (2 * n)) as f64;
    let mask = (1usize << n) - 1;
    let mut g: Vec<f64> = weights
        .iter()
        .enumerate()
        .map(|(idx, w)| if parity(((idx >> n) & idx & mask) as u64) == 0 { *w } else { -*w })
        .collect();
    walsh_hadamard(&mut g);
    g.iter().map(|x| x / norm).collect()
}

/// Forward closed form from squared coefficients, for equal copies.
pub fn distribution_from_csq(n: usize, csq: &[f64]) -> Result<BellDistribution> {
    if csq.len() != 1 << (2 * n) {
        return Err(Error::Argument(format!("{} squared coefficients for {n} qubits", csq.len())));
    }
    BellDistribution::new(n, kernel_transform(n, csq))
}

/// Inverts the kernel to recover every `c²_{q,p}` from `Prob(a,b)`.
///
/// This needs all `4^n` exponentially small probabilities and is meant as a
/// test oracle; the parity estimators read single coefficients directly.
pub fn csq_from_distribution(dist: &BellDistribution) -> Vec<f64> {
    let n = dist.n;
    let mask = (1usize << n) - 1;
    // the kernel matrix K satisfies K·K = 4^n I and Prob = K c² / 4^n
    let mut g = dist.prob.clone();
    walsh_hadamard(&mut g);
    g.iter()
        .enumerate()
        .map(|(idx, x)| if parity(((idx >> n) & idx & mask) as u64) == 0 { *x } else { -*x })
        .collect()
}

/// Draws `shots` i.i.d. outcomes by inverse CDF over the outcome table.
pub fn sample_outcomes(dist: &BellDistribution, shots: usize, seed: u64) -> Vec<BellOutcome> {
    if shots == 0 {
        return Vec::new();
    }
    let mut cdf = Vec::with_capacity(dist.prob.len());
    let mut acc = 0.0;
    for p in &dist.prob {
        acc += p;
        cdf.push(acc);
    }
    let total = acc;
    let last = dist.prob.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..shots)
        .map(|_| {
            let u: f64 = rng.random::<f64>() * total;
            let idx = cdf.partition_point(|&c| c <= u).min(last);
            BellOutcome::from_index(dist.n, idx)
        })
        .collect()
}

/// CSV dump: header `a1..an,b1..bn`, one 0/1 row per shot.
pub fn write_outcomes_csv<W: Write>(n: usize, outcomes: &[BellOutcome], mut out: W) -> std::io::Result<()> {
    let header: Vec<String> = (1..=n).map(|k| format!("a{k}")).chain((1..=n).map(|k| format!("b{k}"))).collect();
    writeln!(out, "{}", header.join(","))?;
    let mut row = String::with_capacity(4 * n);
    for o in outcomes {
        row.clear();
        for k in 1..=n {
            row.push(if o.pair(k).0 == 1 { '1' } else { '0' });
            row.push(',');
        }
        for k in 1..=n {
            row.push(if o.pair(k).1 == 1 { '1' } else { '0' });
            row.push(if k == n { '\n' } else { ',' });
        }
        out.write_all(row.as_bytes())?;
    }
    Ok(())
}
