//! Superoperators through their Choi matrices, CP/ccP certification, and the
//! decomposition of a two-copy POVM into a family of completely co-positive maps.
//!
//! Choi convention: `Ĉ = (C̃ ⊗ I)(|𝓘⟩⟨𝓘|)` with `|𝓘⟩ = Σ_i |ii⟩`, so
//! `Ĉ[(o,i),(o',j)] = C̃(|i⟩⟨j|)[o,o']` and the first tensor factor is the
//! map's output. Transposition is taken in the computational basis.
//!
//! For a POVM element `Â` on `ρ ⊗ ρ` (copy A first), copy A plays the role of
//! the output factor and copy B the argument: `Tr(ρ⊗ρ Â) = Tr(ρ C̃(ρᵀ))`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_function, hermiticity_defect, kron, max_abs_diff, min_eigenvalue, trace_product, CMatrix, ONE, ZERO,
};
use crate::pauli::{check_cap, pauli_matrix, PauliLabel};
use crate::states::{dim_to_qubits, DensityMatrix, MatrixJson, HERMITIAN_TOL, PSD_TOL};

/// Tolerance on `Σ_μ Â_μ = I` for POVM inputs.
pub const COMPLETENESS_TOL: f64 = 1e-9;

/// `N² × N²` Choi matrix of a superoperator on an `N = 2^n` dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    n: usize,
    matrix: CMatrix,
}

impl ChoiMatrix {
    pub fn new(n: usize, matrix: CMatrix) -> Result<Self> {
        check_cap(n)?;
        let d = 1usize << (2 * n);
        if matrix.shape() != (d, d) {
            return Err(Error::Argument(format!(
                "Choi matrix for {n} qubits must be {d}×{d}, got {:?}",
                matrix.shape()
            )));
        }
        let defect = hermiticity_defect(&matrix);
        if defect > HERMITIAN_TOL {
            return Err(Error::Argument(format!("Choi matrix is not Hermitian (defect {defect:.3e})")));
        }
        Ok(Self { n, matrix })
    }

    /// Builds the Choi matrix by applying `map` to every `|i⟩⟨j|`.
    pub fn from_map(n: usize, map: impl Fn(&CMatrix) -> CMatrix) -> Result<Self> {
        check_cap(n)?;
        let dim = 1usize << n;
        let mut choi = CMatrix::from_element(dim * dim, dim * dim, ZERO);
        let mut unit = CMatrix::from_element(dim, dim, ZERO);
        for i in 0..dim {
            for j in 0..dim {
                unit[(i, j)] = ONE;
                let image = map(&unit);
                unit[(i, j)] = ZERO;
                for o in 0..dim {
                    for o2 in 0..dim {
                        choi[(o * dim + i, o2 * dim + j)] = image[(o, o2)];
                    }
                }
            }
        }
        Self::new(n, choi)
    }

    /// `|𝓘⟩⟨𝓘|`, the identity map.
    pub fn identity_map(n: usize) -> Result<Self> {
        check_cap(n)?;
        let dim = 1usize << n;
        let v = nalgebra::DVector::from_fn(dim * dim, |k, _| if k / dim == k % dim { ONE } else { ZERO });
        Self::new(n, &v * v.adjoint())
    }

    /// The transposition map `𝒯`, whose Choi matrix is the swap operator.
    pub fn transposition(n: usize) -> Result<Self> {
        check_cap(n)?;
        let dim = 1usize << n;
        let swap = CMatrix::from_fn(dim * dim, dim * dim, |r, c| {
            if c == (r % dim) * dim + r / dim {
                ONE
            } else {
                ZERO
            }
        });
        Self::new(n, swap)
    }

    /// The fully depolarizing map `ℰ(ρ) = Tr(ρ) I`, whose Choi matrix is the identity.
    pub fn depolarizing(n: usize) -> Result<Self> {
        check_cap(n)?;
        let d = 1usize << (2 * n);
        Self::new(n, CMatrix::identity(d, d))
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

    /// `C̃(x)`.
    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        apply_choi(self, x)
    }

    /// Choi matrix of `C ∘ 𝒯`.
    pub fn compose_transpose(&self) -> ChoiMatrix {
        ChoiMatrix::from_map(self.n, |x| apply_choi(self, &x.transpose()).expect("dimension fixed by from_map"))
            .expect("composition of a Hermitian Choi stays Hermitian")
    }
}

/// Action of the superoperator whose Choi matrix is `choi`.
pub fn apply_choi(choi: &ChoiMatrix, x: &CMatrix) -> Result<CMatrix> {
    let dim = choi.dim();
    if x.shape() != (dim, dim) {
        return Err(Error::Argument(format!(
            "operator is {:?}, map acts on dimension {dim}",
            x.shape()
        )));
    }
    let c = choi.matrix();
    Ok(CMatrix::from_fn(dim, dim, |o, o2| {
        let mut acc = ZERO;
        for i in 0..dim {
            for j in 0..dim {
                let xij = x[(i, j)];
                if xij != ZERO {
                    acc += xij * c[(o * dim + i, o2 * dim + j)];
                }
            }
        }
        acc
    }))
}

/// Which of the two positivity tests a map passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapClass {
    CpOnly,
    CcpOnly,
    Both,
    Neither,
}

impl std::fmt::Display for MapClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MapClass::CpOnly => "CP-only",
            MapClass::CcpOnly => "ccP-only",
            MapClass::Both => "both",
            MapClass::Neither => "neither",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositivityReport {
    pub class: MapClass,
    /// Minimum eigenvalue of the Choi matrix of `C`.
    pub min_eig_cp: f64,
    /// Minimum eigenvalue of the Choi matrix of `C ∘ 𝒯`.
    pub min_eig_ccp: f64,
}

impl PositivityReport {
    pub fn is_cp(&self) -> bool {
        matches!(self.class, MapClass::CpOnly | MapClass::Both)
    }

    pub fn is_ccp(&self) -> bool {
        matches!(self.class, MapClass::CcpOnly | MapClass::Both)
    }
}

pub fn positivity_class(choi: &ChoiMatrix, tol: f64) -> PositivityReport {
    let min_eig_cp = min_eigenvalue(choi.matrix());
    let min_eig_ccp = min_eigenvalue(choi.compose_transpose().matrix());
    let class = match (min_eig_cp >= -tol, min_eig_ccp >= -tol) {
        (true, true) => MapClass::Both,
        (true, false) => MapClass::CpOnly,
        (false, true) => MapClass::CcpOnly,
        (false, false) => MapClass::Neither,
    };
    PositivityReport { class, min_eig_cp, min_eig_ccp }
}

/// One outcome of a two-copy measurement and its map `C_μ = C̃_μ ∘ 𝒯`.
#[derive(Debug, Clone)]
pub struct CcpmvmMember {
    pub label: String,
    /// The POVM element `Â_μ`, which is also the Choi matrix of `C̃_μ`.
    pub element: CMatrix,
    /// Choi matrix of `C_μ`.
    pub map: ChoiMatrix,
}

/// A family of ccP maps adding up to the fully depolarizing map.
#[derive(Debug, Clone)]
pub struct CcpmvmFamily {
    pub n: usize,
    pub members: Vec<CcpmvmMember>,
}

impl CcpmvmFamily {
    /// Largest entry of `Σ_μ Choi(C_μ) − I`.
    pub fn depolarizing_deviation(&self) -> f64 {
        let d = 1usize << (2 * self.n);
        let mut sum = CMatrix::from_element(d, d, ZERO);
        for m in &self.members {
            sum += m.map.matrix();
        }
        max_abs_diff(&sum, &CMatrix::identity(d, d))
    }

    /// Outcome probabilities `Tr(ρ C_μ(ρ))`.
    pub fn probabilities(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        self.members.iter().map(|m| map_fidelity(&m.map, rho)).collect()
    }
}

/// Decomposes a POVM on `ρ ⊗ ρ` into its ccPMVM, labelling outcomes by index.
pub fn povm_to_ccpmvm(povm: &[CMatrix]) -> Result<CcpmvmFamily> {
    povm_to_ccpmvm_labeled(povm.iter().enumerate().map(|(i, e)| (i.to_string(), e.clone())).collect())
}

pub fn povm_to_ccpmvm_labeled(povm: Vec<(String, CMatrix)>) -> Result<CcpmvmFamily> {
    let first = povm.first().ok_or_else(|| Error::Argument("empty POVM".into()))?;
    let d = first.1.nrows();
    let n = dim_to_qubits(d)?;
    if n % 2 != 0 {
        return Err(Error::Argument(format!("POVM dimension {d} is not N² for a qubit register")));
    }
    let n = n / 2;
    check_cap(n)?;
    let mut sum = CMatrix::from_element(d, d, ZERO);
    for (index, (_, e)) in povm.iter().enumerate() {
        if e.shape() != (d, d) {
            return Err(Error::Argument(format!("POVM element {index} has shape {:?}", e.shape())));
        }
        let eigenvalue = min_eigenvalue(e);
        if eigenvalue < -PSD_TOL || hermiticity_defect(e) > HERMITIAN_TOL {
            return Err(Error::PovmNotPositive { index, eigenvalue });
        }
        sum += e;
    }
    let deviation = max_abs_diff(&sum, &CMatrix::identity(d, d));
    if deviation > COMPLETENESS_TOL {
        return Err(Error::PovmIncomplete { deviation });
    }
    let members = povm
        .into_iter()
        .map(|(label, element)| {
            let tilde = ChoiMatrix::new(n, element.clone())?;
            Ok(CcpmvmMember { label, element, map: tilde.compose_transpose() })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CcpmvmFamily { n, members })
}

/// Map fidelity `Tr(ρ C(ρ))`.
pub fn map_fidelity(choi: &ChoiMatrix, rho: &DensityMatrix) -> Result<f64> {
    let image = apply_choi(choi, rho.matrix())?;
    Ok(trace_product(rho.matrix(), &image).re)
}

/// `Tr(ρ⊗ρ Â)` computed directly on the doubled space.
pub fn two_copy_probability(element: &CMatrix, rho: &DensityMatrix) -> Result<f64> {
    let doubled = kron(rho.matrix(), rho.matrix());
    if element.shape() != doubled.shape() {
        return Err(Error::Argument("POVM element and ρ⊗ρ differ in dimension".into()));
    }
    Ok(trace_product(&doubled, element).re)
}

/// Choi matrix of `ρ ↦ T(b,a) ρᵀ T(b,a) / N`, the map of Bell outcome `(a,b)`.
pub fn bell_map(n: usize, a: u64, b: u64) -> Result<ChoiMatrix> {
    let t = pauli_matrix(PauliLabel::new(n, b, a)?)?;
    let dim = (1usize << n) as f64;
    ChoiMatrix::from_map(n, |x| (&t * x.transpose() * &t).unscale(dim))
}

/// Random `m`-element POVM on `N² = 4^n` dimensions: Ginibre positives
/// `A_μ`, normalized as `S^{-1/2} A_μ S^{-1/2}` with `S = Σ A_μ`.
pub fn random_povm(n: usize, m: usize, seed: u64) -> Result<Vec<CMatrix>> {
    check_cap(n)?;
    if m == 0 {
        return Err(Error::Argument("a POVM needs at least one element".into()));
    }
    let d = 1usize << (2 * n);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let raw: Vec<CMatrix> = (0..m)
        .map(|_| {
            let g: CMatrix = DMatrix::from_fn(d, d, |_, _| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            });
            &g * g.adjoint()
        })
        .collect();
    let sum = raw.iter().fold(CMatrix::from_element(d, d, ZERO), |acc, a| acc + a);
    let inv_sqrt = hermitian_function(&sum, |x| 1.0 / x.sqrt());
    Ok(raw
        .iter()
        .map(|a| {
            let e = &inv_sqrt * a * &inv_sqrt;
            (&e + e.adjoint()).scale(0.5)
        })
        .collect())
}

impl Serialize for ChoiMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_matrix(self.n, &self.matrix).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ChoiMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        check_cap(raw.n).map_err(serde::de::Error::custom)?;
        let m = raw.to_matrix(1 << (2 * raw.n)).map_err(serde::de::Error::custom)?;
        ChoiMatrix::new(raw.n, m).map_err(serde::de::Error::custom)
    }
}
