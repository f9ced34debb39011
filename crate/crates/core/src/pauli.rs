//! Generalized Pauli operators `T(q,p)` in binary-symplectic form.
//!
//! Qubit `k = 1` is the leftmost tensor factor. Bit strings are stored as
//! integers whose most significant of the `n` bits is qubit 1, so a basis
//! index `i` of the `2^n`-dimensional space and a mask share one layout.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{i_pow, parity, CMatrix, ZERO};

/// Largest qubit count accepted by dense-matrix operations.
pub const QUBIT_CAP: usize = 6;

pub(crate) fn check_cap(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Argument("qubit count must be at least 1".into()));
    }
    if n > QUBIT_CAP {
        return Err(Error::ResourceLimit { qubits: n, cap: QUBIT_CAP });
    }
    Ok(())
}

fn parse_bits(s: &str, n: Option<usize>) -> Result<(usize, u64)> {
    let s = s.trim();
    if s.is_empty() || s.len() > 63 {
        return Err(Error::Parse(format!("bad bit string {s:?}")));
    }
    if let Some(n) = n {
        if s.len() != n {
            return Err(Error::Parse(format!("bit string {s:?} has length {}, expected {n}", s.len())));
        }
    }
    let mut bits = 0u64;
    for ch in s.chars() {
        bits <<= 1;
        match ch {
            '0' => {}
            '1' => bits |= 1,
            _ => return Err(Error::Parse(format!("bad bit {ch:?} in {s:?}"))),
        }
    }
    Ok((s.len(), bits))
}

fn format_bits(n: usize, bits: u64) -> String {
    (0..n)
        .map(|k| if bits >> (n - 1 - k) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// An `n`-bit mask over qubits, e.g. the subset `J` kept by a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QubitMask {
    n: usize,
    bits: u64,
}

impl QubitMask {
    pub fn new(n: usize, bits: u64) -> Result<Self> {
        if n == 0 || n > 63 || bits >> n != 0 {
            return Err(Error::Argument(format!("mask {bits:#b} does not fit {n} qubits")));
        }
        Ok(Self { n, bits })
    }

    pub fn all(n: usize) -> Self {
        Self { n, bits: (1u64 << n) - 1 }
    }

    /// Mask selecting the single qubit `k` (1-based).
    pub fn single(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::Argument(format!("qubit {k} out of range 1..={n}")));
        }
        Self::new(n, 1 << (n - k))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn count(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// True if qubit `k` (1-based) is selected.
    pub fn contains(&self, k: usize) -> bool {
        k >= 1 && k <= self.n && self.bits >> (self.n - k) & 1 == 1
    }
}

impl fmt::Display for QubitMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_bits(self.n, self.bits))
    }
}

impl FromStr for QubitMask {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (n, bits) = parse_bits(s, None)?;
        Self::new(n, bits)
    }
}

/// Names the Hermitian Pauli operator `T(q,p) = i^{q·p} X^{q_1}Z^{p_1} ⊗ … ⊗ X^{q_n}Z^{p_n}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliLabel {
    n: usize,
    q: u64,
    p: u64,
}

impl PauliLabel {
    pub fn new(n: usize, q: u64, p: u64) -> Result<Self> {
        if n == 0 || n > 31 || q >> n != 0 || p >> n != 0 {
            return Err(Error::Argument(format!("label (q={q:#b}, p={p:#b}) does not fit {n} qubits")));
        }
        Ok(Self { n, q, p })
    }

    pub fn identity(n: usize) -> Self {
        Self { n, q: 0, p: 0 }
    }

    /// Label at position `index` of the `(q‖p)` lexicographic order.
    pub fn from_index(n: usize, index: usize) -> Self {
        debug_assert!(index < 1 << (2 * n));
        let mask = (1u64 << n) - 1;
        Self { n, q: (index as u64 >> n) & mask, p: index as u64 & mask }
    }

    /// Position in the `(q‖p)` lexicographic order, q major.
    pub fn index(&self) -> usize {
        ((self.q << self.n) | self.p) as usize
    }

    /// All `4^n` labels in flat-array order.
    pub fn all(n: usize) -> impl Iterator<Item = PauliLabel> {
        (0..1usize << (2 * n)).map(move |i| PauliLabel::from_index(n, i))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn is_identity(&self) -> bool {
        self.q == 0 && self.p == 0
    }

    /// `q·p = Σ_k q_k p_k`, the number of `Y` factors.
    pub fn qp(&self) -> u32 {
        (self.q & self.p).count_ones()
    }

    /// Sign `(-1)^{a·q + b·p + q·p}` of `T(q,p)⊗T(q,p)` on the joint Bell outcome `(a,b)`.
    #[inline]
    pub fn bell_kernel_sign(&self, a: u64, b: u64) -> f64 {
        if parity((a & self.q) ^ (b & self.p)) ^ (self.qp() & 1) == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// True if the operator acts as the identity on every qubit outside `mask`.
    pub fn supported_within(&self, mask: QubitMask) -> bool {
        (self.q | self.p) & !mask.bits() == 0
    }

    pub fn weight_profile(&self) -> WeightProfile {
        let x = (self.q & !self.p).count_ones() as usize;
        let z = (!self.q & self.p).count_ones() as usize;
        let y = (self.q & self.p).count_ones() as usize;
        WeightProfile { alpha_0: self.n - x - y - z, alpha_x: x, alpha_y: y, alpha_z: z }
    }

    /// Single-qubit factor `(q_k, p_k)` for qubit `k` (1-based).
    pub fn factor(&self, k: usize) -> (u8, u8) {
        let shift = self.n - k;
        ((self.q >> shift & 1) as u8, (self.p >> shift & 1) as u8)
    }
}

impl fmt::Display for PauliLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q={},p={}", format_bits(self.n, self.q), format_bits(self.n, self.p))
    }
}

impl FromStr for PauliLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("expected \"q=<bits>,p=<bits>\", got {s:?}"));
        let (qs, ps) = s.trim().split_once(',').ok_or_else(bad)?;
        let qs = qs.trim().strip_prefix("q=").ok_or_else(bad)?;
        let ps = ps.trim().strip_prefix("p=").ok_or_else(bad)?;
        let (n, q) = parse_bits(qs, None)?;
        let (_, p) = parse_bits(ps, Some(n))?;
        PauliLabel::new(n, q, p)
    }
}

impl Serialize for PauliLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl Serialize for QubitMask {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for QubitMask {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Per-qubit counts of identity, X, Y and Z factors in a Pauli label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WeightProfile {
    pub alpha_0: usize,
    pub alpha_x: usize,
    pub alpha_y: usize,
    pub alpha_z: usize,
}

pub fn weight_profile(label: PauliLabel) -> WeightProfile {
    label.weight_profile()
}

/// Dense matrix of `T(q,p)`.
///
/// `T|j⟩ = i^{q·p} (-1)^{|j ∧ p|} |j ⊕ q⟩`; the phase is accumulated as an
/// integer power of `i` so every entry is exactly `±1` or `±i`.
pub fn pauli_matrix(label: PauliLabel) -> Result<CMatrix> {
    check_cap(label.n)?;
    let dim = 1usize << label.n;
    let mut m = CMatrix::from_element(dim, dim, ZERO);
    for j in 0..dim as u64 {
        let power = label.qp() + 2 * (j & label.p).count_ones();
        m[((j ^ label.q) as usize, j as usize)] = i_pow(power);
    }
    Ok(m)
}
