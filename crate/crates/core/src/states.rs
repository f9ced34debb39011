//! Density matrices, Pauli decompositions, Bloch vectors and partial trace.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermiticity_defect, i_pow, kron, min_eigenvalue, trace, CMatrix, ZERO};
use crate::pauli::{check_cap, pauli_matrix, PauliLabel, QubitMask};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;

/// An `n`-qubit density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let n = dim_to_qubits(matrix.nrows())?;
        if matrix.ncols() != matrix.nrows() {
            return Err(Error::InvalidState("matrix is not square".into()));
        }
        check_cap(n)?;
        let defect = hermiticity_defect(&matrix);
        if defect > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (defect {defect:.3e})")));
        }
        let tr = trace(&matrix);
        if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = min_eigenvalue(&matrix);
        if min < -PSD_TOL {
            return Err(Error::NonPhysical { min_eigenvalue: min });
        }
        Ok(Self { n, matrix })
    }

    /// `|ψ⟩⟨ψ|` for a state vector, normalized on the way in.
    pub fn from_pure(psi: &[Complex64]) -> Result<Self> {
        let v = DVector::from_column_slice(psi);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v = v.unscale(norm);
        Self::new(&v * v.adjoint())
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_cap(n)?;
        let dim = 1usize << n;
        Ok(Self { n, matrix: CMatrix::identity(dim, dim).unscale(dim as f64) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `ρ ⊗ σ`, with this state's qubits first.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        check_cap(self.n + other.n)?;
        Ok(Self { n: self.n + other.n, matrix: kron(&self.matrix, &other.matrix) })
    }
}

pub(crate) fn dim_to_qubits(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::Argument(format!("dimension {dim} is not a power of two ≥ 2")));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Real coefficients `c_{q,p} = Tr(ρ T(q,p))`, in `(q‖p)` lexicographic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliCoefficients {
    pub n: usize,
    pub c: Vec<f64>,
}

impl PauliCoefficients {
    pub fn new(n: usize, c: Vec<f64>) -> Result<Self> {
        if c.len() != 1 << (2 * n) {
            return Err(Error::Argument(format!("{} coefficients for {n} qubits", c.len())));
        }
        Ok(Self { n, c })
    }

    pub fn get(&self, label: PauliLabel) -> f64 {
        self.c[label.index()]
    }

    pub fn squares(&self) -> Vec<f64> {
        self.c.iter().map(|x| x * x).collect()
    }

    /// `Σ c²`, which equals `N·Tr ρ²`.
    pub fn sum_of_squares(&self) -> f64 {
        self.c.iter().map(|x| x * x).sum()
    }
}

/// `c_{q,p} = Tr(ρ T(q,p))` for every label.
pub fn pauli_decompose(rho: &DensityMatrix) -> Result<PauliCoefficients> {
    decompose_matrix(rho.matrix(), rho.n())
}

pub(crate) fn decompose_matrix(m: &CMatrix, n: usize) -> Result<PauliCoefficients> {
    let dim = 1u64 << n;
    let mut c = Vec::with_capacity(1 << (2 * n));
    for label in PauliLabel::all(n) {
        // T has a single nonzero per column: T[j⊕q, j]
        let mut acc = ZERO;
        for j in 0..dim {
            let phase = i_pow(label.qp() + 2 * (j & label.p()).count_ones());
            acc += m[(j as usize, (j ^ label.q()) as usize)] * phase;
        }
        if acc.im.abs() > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "coefficient at {label} has imaginary residue {:.3e}",
                acc.im
            )));
        }
        c.push(acc.re);
    }
    Ok(PauliCoefficients { n, c })
}

/// `Σ c_{q,p} T(q,p) / N`, rejecting coefficient vectors of non-physical states.
pub fn reconstruct(coeffs: &PauliCoefficients) -> Result<DensityMatrix> {
    let n = coeffs.n;
    check_cap(n)?;
    let id = coeffs.c[0];
    if (id - 1.0).abs() > TRACE_TOL {
        return Err(Error::Argument(format!("identity coefficient is {id}, expected 1")));
    }
    let dim = 1usize << n;
    let mut m = CMatrix::from_element(dim, dim, ZERO);
    for (label, &c) in PauliLabel::all(n).zip(&coeffs.c) {
        if c == 0.0 {
            continue;
        }
        m += pauli_matrix(label)?.scale(c);
    }
    DensityMatrix::new(m.unscale(dim as f64))
}

/// Single-qubit Bloch vector `p⃗` of `ρ = (I + p⃗·σ⃗)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// The vector `p⃗_{a,b} = ((-1)^a p_x, (-1)^{a+b+1} p_y, (-1)^b p_z)` whose
    /// state is the image of the Bell map `C_{a,b}`.
    pub fn reflected(&self, a: u8, b: u8) -> BlochVector {
        let sign = |e: u8| if e.is_multiple_of(2) { 1.0 } else { -1.0 };
        BlochVector::new(sign(a) * self.x, sign(a + b + 1) * self.y, sign(b) * self.z)
    }

    /// Reads the Bloch vector off a single-qubit state.
    pub fn from_state(rho: &DensityMatrix) -> Result<BlochVector> {
        if rho.n() != 1 {
            return Err(Error::Argument("Bloch vectors describe single qubits".into()));
        }
        let c = pauli_decompose(rho)?;
        Ok(BlochVector::new(c.c[0b10], c.c[0b11], c.c[0b01]))
    }
}

/// `(I + p⃗·σ⃗)/2`, with `c_{1,0} = p_x`, `c_{1,1} = p_y`, `c_{0,1} = p_z`.
pub fn qubit_from_bloch(p: BlochVector) -> Result<DensityMatrix> {
    let norm = p.norm();
    if !norm.is_finite() || norm > 1.0 + 1e-12 {
        return Err(Error::InvalidBloch { norm });
    }
    let half = |re: f64, im: f64| Complex64::new(re / 2.0, im / 2.0);
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[half(1.0 + p.z, 0.0), half(p.x, -p.y), half(p.x, p.y), half(1.0 - p.z, 0.0)],
    );
    DensityMatrix::new(m)
}

/// Ginibre-style random state `GG†/Tr(GG†)` with `G` a `2^n × rank` complex Gaussian matrix.
pub fn random_state(n: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    check_cap(n)?;
    let dim = 1usize << n;
    if rank == 0 || rank > dim {
        return Err(Error::Argument(format!("rank {rank} outside 1..={dim}")));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let g = CMatrix::from_fn(dim, rank, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im)
    });
    let gg = &g * g.adjoint();
    let tr = trace(&gg).re;
    DensityMatrix::new(gg.unscale(tr))
}

/// Reduced state `ρ_J` on the qubits selected by `keep`, in their original order.
pub fn partial_trace(rho: &DensityMatrix, keep: QubitMask) -> Result<DensityMatrix> {
    let n = rho.n();
    if keep.n() != n {
        return Err(Error::Argument(format!("mask has {} qubits, state has {n}", keep.n())));
    }
    if keep.is_empty() {
        return Err(Error::Argument("partial trace needs at least one kept qubit".into()));
    }
    let kept: Vec<u32> = (0..n as u32).filter(|b| keep.bits() >> b & 1 == 1).collect();
    let traced: Vec<u32> = (0..n as u32).filter(|b| keep.bits() >> b & 1 == 0).collect();
    let scatter = |x: usize, positions: &[u32]| -> usize {
        positions
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &pos)| acc | ((x >> i) & 1) << pos)
    };
    let kd = 1usize << kept.len();
    let td = 1usize << traced.len();
    let m = rho.matrix();
    let out = CMatrix::from_fn(kd, kd, |i, j| {
        let (gi, gj) = (scatter(i, &kept), scatter(j, &kept));
        (0..td).map(|t| {
            let e = scatter(t, &traced);
            m[(gi | e, gj | e)]
        })
        .sum()
    });
    DensityMatrix::new(out)
}

/// `|0…0⟩⟨0…0|`.
pub fn product_zero(n: usize) -> Result<DensityMatrix> {
    check_cap(n)?;
    let mut psi = vec![ZERO; 1 << n];
    psi[0] = Complex64::new(1.0, 0.0);
    DensityMatrix::from_pure(&psi)
}

/// `(|0…0⟩ + |1…1⟩)/√2`.
pub fn ghz(n: usize) -> Result<DensityMatrix> {
    check_cap(n)?;
    let mut psi = vec![ZERO; 1 << n];
    psi[0] = Complex64::new(1.0, 0.0);
    psi[(1 << n) - 1] = Complex64::new(1.0, 0.0);
    DensityMatrix::from_pure(&psi)
}

/// Two-qubit Bell state `|β_{0,0}⟩ = (|00⟩ + |11⟩)/√2`.
pub fn bell_pair() -> DensityMatrix {
    ghz(2).expect("two qubits are within the cap")
}

/// JSON form shared by density and Choi matrices: row-major `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub matrix: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_matrix(n: usize, m: &CMatrix) -> Self {
        let mut matrix = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                matrix.push([z.re, z.im]);
            }
        }
        Self { n, matrix }
    }

    pub fn to_matrix(&self, dim: usize) -> Result<CMatrix> {
        if self.matrix.len() != dim * dim {
            return Err(Error::Parse(format!(
                "expected {} entries for dimension {dim}, found {}",
                dim * dim,
                self.matrix.len()
            )));
        }
        Ok(CMatrix::from_row_iterator(
            dim,
            dim,
            self.matrix.iter().map(|[re, im]| Complex64::new(*re, *im)),
        ))
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_matrix(self.n, &self.matrix).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        check_cap(raw.n).map_err(serde::de::Error::custom)?;
        let m = raw.to_matrix(1 << raw.n).map_err(serde::de::Error::custom)?;
        DensityMatrix::new(m).map_err(serde::de::Error::custom)
    }
}
