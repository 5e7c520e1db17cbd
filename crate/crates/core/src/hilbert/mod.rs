//! Finite-dimensional state and operator algebra for two-party systems.
//!
//! Composite indices are A-major everywhere: the amplitude of `|a⟩⊗|b⟩`
//! lives at `a * dim_b + b`. Nothing in this crate uses any other ordering.
//!
//! Values are immutable after construction. States are allowed to be
//! unnormalized (the truncated SPDC vector is deliberately so); operations
//! that normalize say so in their docs.

mod eigen;
pub mod random;

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

pub use eigen::hermitian_eigenvalues;

/// Complex scalar used throughout.
pub type C64 = Complex64;

/// Tolerance for algebraic identities (hermiticity, unit trace, unit norm).
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Eigenvalues above `-POSITIVITY_TOL` count as non-negative.
pub const POSITIVITY_TOL: f64 = 1e-10;
/// Imaginary residue of an expectation value above which the operator is
/// treated as broken.
pub const IMAG_RESIDUE_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HilbertError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("cannot normalize a zero-norm state")]
    ZeroNorm,
    #[error("state must have at least one amplitude")]
    Empty,
    #[error("matrix is not Hermitian (max |M - M†| = {0:e})")]
    NotHermitian(f64),
    #[error("expectation value has imaginary part {0:e}")]
    ComplexExpectation(f64),
}

pub type Result<T> = std::result::Result<T, HilbertError>;

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(HilbertError::DimensionMismatch { expected, found })
    }
}

/// Amplitude vector over a labeled basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
    labels: Vec<String>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>, labels: Vec<String>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(HilbertError::Empty);
        }
        check_dim(amplitudes.len(), labels.len())?;
        Ok(Self { amplitudes, labels })
    }

    /// Labels default to the basis index.
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let labels = (0..amplitudes.len()).map(|i| i.to_string()).collect();
        Self::new(amplitudes, labels)
    }

    /// Unit vector `|index⟩` in a space with the given labels.
    pub fn basis(labels: &[&str], index: usize) -> Result<Self> {
        if index >= labels.len() {
            return Err(HilbertError::DimensionMismatch {
                expected: labels.len(),
                found: index + 1,
            });
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); labels.len()];
        amplitudes[index] = C64::new(1.0, 0.0);
        Self::new(amplitudes, labels.iter().map(|s| s.to_string()).collect())
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amplitudes[index]
    }

    /// Amplitude of the basis state with this label, if present.
    pub fn amplitude_of(&self, label: &str) -> Option<C64> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.amplitudes[i])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Rescales to unit norm.
    pub fn normalize(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(HilbertError::ZeroNorm);
        }
        Ok(self.scaled(C64::new(1.0 / norm, 0.0)))
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
            labels: self.labels.clone(),
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        tensor_product(self, other)
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (a, l) in self.amplitudes.iter().zip(&self.labels) {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "({:.6}{:+.6}i)|{}⟩", a.re, a.im, l)?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// `a ⊗ b` with A-major ordering and concatenated labels.
pub fn tensor_product(a: &StateVector, b: &StateVector) -> StateVector {
    let mut amplitudes = Vec::with_capacity(a.dim() * b.dim());
    let mut labels = Vec::with_capacity(a.dim() * b.dim());
    for (x, lx) in a.amplitudes.iter().zip(&a.labels) {
        for (y, ly) in b.amplitudes.iter().zip(&b.labels) {
            amplitudes.push(x * y);
            labels.push(format!("{lx}{ly}"));
        }
    }
    StateVector { amplitudes, labels }
}

/// See [`StateVector::normalize`].
pub fn normalize(psi: &StateVector) -> Result<StateVector> {
    psi.normalize()
}

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| {
            if i == j {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            check_dim(dim, row.len())?;
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    /// `|u⟩⟨v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Result<Self> {
        check_dim(u.len(), v.len())?;
        Ok(Self::from_fn(u.len(), |i, j| u[i] * v[j].conj()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        Ok(Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        Ok(Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        check_dim(self.dim, v.len())?;
        Ok((0..self.dim)
            .map(|i| {
                self.data[i * self.dim..(i + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// Kronecker product, A-major.
    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        Self::from_fn(n * m, |r, c| {
            self.get(r / m, c / m) * other.get(r % m, c % m)
        })
    }

    /// `max |M_ij - conj(M_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Hermitian operator, validated on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator(CMatrix);

impl HermitianOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let dev = matrix.hermitian_deviation();
        if dev > ALGEBRA_TOL || !dev.is_finite() {
            return Err(HilbertError::NotHermitian(dev));
        }
        Ok(Self(matrix))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim))
    }

    /// `|v⟩⟨v|`; `v` need not be normalized.
    pub fn projector(v: &[C64]) -> Self {
        Self(CMatrix::from_fn(v.len(), |i, j| v[i] * v[j].conj()))
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn kron(&self, other: &HermitianOperator) -> HermitianOperator {
        HermitianOperator(self.0.kron(&other.0))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.0)
    }
}

/// `⟨ψ|op|ψ⟩`. The state is not normalized first.
pub fn expectation(op: &HermitianOperator, psi: &StateVector) -> Result<f64> {
    let applied = op.0.apply(psi.amplitudes())?;
    let value: C64 = psi
        .amplitudes()
        .iter()
        .zip(&applied)
        .map(|(a, b)| a.conj() * b)
        .sum();
    real_part_checked(value)
}

pub(crate) fn real_part_checked(value: C64) -> Result<f64> {
    if value.im.abs() > IMAG_RESIDUE_LIMIT * value.re.abs().max(1.0) {
        return Err(HilbertError::ComplexExpectation(value.im));
    }
    Ok(value.re)
}

/// Dimensions of a two-party space, A-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BipartiteLayout {
    pub dim_a: usize,
    pub dim_b: usize,
}

impl BipartiteLayout {
    pub const QUBITS: BipartiteLayout = BipartiteLayout { dim_a: 2, dim_b: 2 };

    pub fn new(dim_a: usize, dim_b: usize) -> Self {
        Self { dim_a, dim_b }
    }

    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    #[inline]
    pub fn index(&self, a: usize, b: usize) -> usize {
        a * self.dim_b + b
    }

    pub fn check(&self, dim: usize) -> Result<()> {
        check_dim(self.dim(), dim)
    }
}

/// Hermitian density operator. Positivity is not checked on construction
/// (it costs an eigendecomposition); see [`DensityMatrix::is_positive_semidefinite`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let dev = matrix.hermitian_deviation();
        if dev > ALGEBRA_TOL || !dev.is_finite() {
            return Err(HilbertError::NotHermitian(dev));
        }
        Ok(Self(matrix))
    }

    /// `|ψ⟩⟨ψ|` with whatever norm `psi` carries.
    pub fn from_pure(psi: &StateVector) -> Self {
        let a = psi.amplitudes();
        Self(CMatrix::from_fn(a.len(), |i, j| a[i] * a[j].conj()))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(CMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.0.get(i, j)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.0)
    }

    pub fn is_positive_semidefinite(&self) -> bool {
        self.eigenvalues().iter().all(|&l| l >= -POSITIVITY_TOL)
    }

    pub fn largest_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        self.0.as_slice().iter().map(|x| x.norm_sqr()).sum()
    }

    /// Probability-weighted sum `Σ w_i ρ_i`.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let dim = parts.first().map(|(_, r)| r.dim()).ok_or(HilbertError::Empty)?;
        let mut acc = CMatrix::zeros(dim);
        for (w, rho) in parts {
            acc = acc.add(&rho.0.scale(C64::new(*w, 0.0)))?;
        }
        Ok(Self(acc))
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.0.max_abs_diff(&other.0)
    }
}

/// Traces out subsystem A, leaving B's reduced state.
pub fn trace_out_a(rho: &DensityMatrix, layout: BipartiteLayout) -> Result<DensityMatrix> {
    layout.check(rho.dim())?;
    let m = &rho.0;
    let out = CMatrix::from_fn(layout.dim_b, |i, j| {
        (0..layout.dim_a)
            .map(|a| m.get(layout.index(a, i), layout.index(a, j)))
            .sum()
    });
    Ok(DensityMatrix(out))
}

/// Traces out subsystem B, leaving A's reduced state.
pub fn trace_out_b(rho: &DensityMatrix, layout: BipartiteLayout) -> Result<DensityMatrix> {
    layout.check(rho.dim())?;
    let m = &rho.0;
    let out = CMatrix::from_fn(layout.dim_a, |i, j| {
        (0..layout.dim_b)
            .map(|b| m.get(layout.index(i, b), layout.index(j, b)))
            .sum()
    });
    Ok(DensityMatrix(out))
}

/// B's reduced state of a pure `|ψ⟩`, without forming the full `|ψ⟩⟨ψ|`.
pub fn reduced_b_of_pure(psi: &StateVector, layout: BipartiteLayout) -> Result<DensityMatrix> {
    layout.check(psi.dim())?;
    let a = psi.amplitudes();
    let out = CMatrix::from_fn(layout.dim_b, |i, j| {
        (0..layout.dim_a)
            .map(|x| a[layout.index(x, i)] * a[layout.index(x, j)].conj())
            .sum()
    });
    Ok(DensityMatrix(out))
}

/// `½ Σ |λ_i(r1 − r2)|`.
pub fn trace_distance(r1: &DensityMatrix, r2: &DensityMatrix) -> Result<f64> {
    let diff = r1.0.sub(&r2.0)?;
    let sum: f64 = hermitian_eigenvalues(&diff).iter().map(|l| l.abs()).sum();
    Ok(0.5 * sum)
}
