//! Finite-dimensional state spaces: tensor-factor bookkeeping, state vectors,
//! operators, density operators and the spectral tools built on them.
//!
//! Factor order is significant. Composite indices follow the Kronecker
//! convention: the first factor is the most significant digit, so in a
//! `(2, 2)` space `e0 ⊗ e1` is basis vector 1.

use std::collections::BTreeSet;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Residual below which an operator counts as hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Residual below which an operator counts as unitary.
pub const UNITARY_TOL: f64 = 1e-10;
/// Allowed deviation of a physical state's norm from one.
pub const NORM_TOL: f64 = 1e-10;
/// Eigenvalues closer than this are one spectral value.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Eigen-residual below which a state has a sharp value.
pub const SHARP_TOL: f64 = 1e-10;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Ordered list of tensor factor dimensions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct SpaceSpec {
    factor_dims: Vec<usize>,
}

impl SpaceSpec {
    pub fn new(factor_dims: Vec<usize>) -> Result<Self> {
        if factor_dims.is_empty() {
            return Err(Error::InvalidSpace("no factors".into()));
        }
        if factor_dims.contains(&0) {
            return Err(Error::InvalidSpace(format!("zero-dimensional factor in {factor_dims:?}")));
        }
        Ok(Self { factor_dims })
    }

    /// A single factor of dimension `dim`.
    pub fn single(dim: usize) -> Result<Self> {
        Self::new(vec![dim])
    }

    /// `n` factors of dimension `d`.
    pub fn uniform(n: usize, d: usize) -> Result<Self> {
        Self::new(vec![d; n])
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn n_factors(&self) -> usize {
        self.factor_dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.factor_dims.iter().product()
    }

    /// Common factor dimension, if every factor has the same one.
    pub fn uniform_dim(&self) -> Option<usize> {
        let d = self.factor_dims[0];
        self.factor_dims.iter().all(|&x| x == d).then_some(d)
    }

    pub fn concat(&self, other: &SpaceSpec) -> SpaceSpec {
        let mut factor_dims = self.factor_dims.clone();
        factor_dims.extend_from_slice(&other.factor_dims);
        SpaceSpec { factor_dims }
    }

    /// Index strides per factor (last factor has stride 1).
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.factor_dims.len()];
        for k in (0..self.factor_dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.factor_dims[k + 1];
        }
        strides
    }

    /// Splits a composite index into per-factor digits.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.factor_dims.len()];
        for k in (0..self.factor_dims.len()).rev() {
            out[k] = index % self.factor_dims[k];
            index /= self.factor_dims[k];
        }
        out
    }

    pub fn compose_index(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.factor_dims).fold(0, |acc, (&i, &d)| acc * d + i)
    }
}

impl TryFrom<Vec<usize>> for SpaceSpec {
    type Error = Error;
    fn try_from(value: Vec<usize>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<SpaceSpec> for Vec<usize> {
    fn from(value: SpaceSpec) -> Self {
        value.factor_dims
    }
}

/// Vector in a [`SpaceSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    space: SpaceSpec,
    amplitudes: CVector,
}

impl StateVector {
    pub fn new(space: SpaceSpec, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != space.total_dim() {
            return Err(Error::DimensionMismatch { expected: space.total_dim(), found: amplitudes.len() });
        }
        Ok(Self { space, amplitudes })
    }

    pub fn from_slice(space: SpaceSpec, amplitudes: &[C64]) -> Result<Self> {
        Self::new(space, CVector::from_column_slice(amplitudes))
    }

    pub fn basis(space: SpaceSpec, index: usize) -> Result<Self> {
        let n = space.total_dim();
        if index >= n {
            return Err(Error::DimensionMismatch { expected: n, found: index });
        }
        let mut amplitudes = CVector::zeros(n);
        amplitudes[index] = ONE;
        Ok(Self { space, amplitudes })
    }

    /// Tensor product of single-factor states, in order.
    pub fn product(states: &[StateVector]) -> Result<Self> {
        let (first, rest) = states
            .split_first()
            .ok_or_else(|| Error::InvalidSpace("empty product".into()))?;
        Ok(rest.iter().fold(first.clone(), |acc, s| acc.tensor(s)))
    }

    pub fn space(&self) -> &SpaceSpec {
        &self.space
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotNormalized { norm: n });
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self { space: self.space.clone(), amplitudes: &self.amplitudes * c }
    }

    pub fn check_normalized(&self) -> Result<()> {
        let n = self.norm();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm: n });
        }
        Ok(())
    }

    /// True when both vectors represent the same ray, i.e. agree up to a
    /// global phase after normalization.
    pub fn same_ray(&self, other: &StateVector, tol: f64) -> bool {
        let (a, b) = (self.norm(), other.norm());
        if a == 0.0 || b == 0.0 || self.dim() != other.dim() {
            return false;
        }
        (self.inner(other).norm() / (a * b) - 1.0).abs() <= tol
    }

    pub fn add(&self, other: &StateVector) -> Result<Self> {
        same_dim(self.dim(), other.dim())?;
        Ok(Self { space: self.space.clone(), amplitudes: &self.amplitudes + &other.amplitudes })
    }

    pub fn sub(&self, other: &StateVector) -> Result<Self> {
        same_dim(self.dim(), other.dim())?;
        Ok(Self { space: self.space.clone(), amplitudes: &self.amplitudes - &other.amplitudes })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&WireArray::from(self)).expect("finite wire data")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: WireArray = serde_json::from_str(text).map_err(|e| Error::Wire(e.to_string()))?;
        Self::try_from(wire)
    }
}

/// Operator on a [`SpaceSpec`], stored as a dense square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: SpaceSpec,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(space: SpaceSpec, matrix: CMatrix) -> Result<Self> {
        let n = space.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: if matrix.nrows() != n { matrix.nrows() } else { matrix.ncols() },
            });
        }
        Ok(Self { space, matrix })
    }

    /// Builds an operator on a single factor of the matrix' size.
    pub fn single(matrix: CMatrix) -> Result<Self> {
        let space = SpaceSpec::single(matrix.nrows())?;
        Self::new(space, matrix)
    }

    pub fn from_real(space: SpaceSpec, rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let m = CMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0));
        Self::new(space, m)
    }

    pub fn identity(space: &SpaceSpec) -> Self {
        let n = space.total_dim();
        Self { space: space.clone(), matrix: CMatrix::identity(n, n) }
    }

    pub fn zeros(space: &SpaceSpec) -> Self {
        let n = space.total_dim();
        Self { space: space.clone(), matrix: CMatrix::zeros(n, n) }
    }

    pub fn diagonal(space: &SpaceSpec, entries: &[f64]) -> Result<Self> {
        same_dim(space.total_dim(), entries.len())?;
        let v = CVector::from_iterator(entries.len(), entries.iter().map(|&x| C64::new(x, 0.0)));
        Ok(Self { space: space.clone(), matrix: CMatrix::from_diagonal(&v) })
    }

    /// |ψ⟩⟨φ|.
    pub fn outer(psi: &StateVector, phi: &StateVector) -> Result<Self> {
        same_dim(psi.dim(), phi.dim())?;
        let m = psi.amplitudes() * phi.amplitudes().adjoint();
        Ok(Self { space: psi.space.clone(), matrix: m })
    }

    pub fn space(&self) -> &SpaceSpec {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self { space: self.space.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self { space: self.space.clone(), matrix: &self.matrix * c }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        same_dim(self.dim(), state.dim())?;
        Ok(StateVector { space: state.space.clone(), amplitudes: &self.matrix * &state.amplitudes })
    }

    /// ⟨ψ|A|ψ⟩.
    pub fn expectation(&self, state: &StateVector) -> Result<C64> {
        same_dim(self.dim(), state.dim())?;
        Ok(state.amplitudes.dotc(&(&self.matrix * &state.amplitudes)))
    }

    pub fn compose(&self, rhs: &Operator) -> Result<Operator> {
        same_dim(self.dim(), rhs.dim())?;
        Ok(Operator { space: self.space.clone(), matrix: &self.matrix * &rhs.matrix })
    }

    /// [self, rhs] = self·rhs − rhs·self.
    pub fn commutator(&self, rhs: &Operator) -> Result<Operator> {
        same_dim(self.dim(), rhs.dim())?;
        let m = &self.matrix * &rhs.matrix - &rhs.matrix * &self.matrix;
        Ok(Operator { space: self.space.clone(), matrix: m })
    }

    /// Largest entry of |A − A†|.
    pub fn hermiticity_residual(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    pub fn check_hermitian(&self) -> Result<()> {
        let residual = self.hermiticity_residual();
        if residual > HERMITIAN_TOL {
            return Err(Error::NotHermitian { residual });
        }
        Ok(())
    }

    /// Largest entry of |U†U − I|.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.dim();
        max_abs(&(self.matrix.adjoint() * &self.matrix - CMatrix::identity(n, n)))
    }

    pub fn check_unitary(&self) -> Result<()> {
        let residual = self.unitarity_residual();
        if residual > UNITARY_TOL {
            return Err(Error::NotUnitary { residual });
        }
        Ok(())
    }

    /// Eigendecomposition of a hermitian operator, with the ordering and phase
    /// conventions of [`Eigen`].
    pub fn eigh(&self) -> Result<Eigen> {
        self.check_hermitian()?;
        Ok(Eigen::of_hermitian(&self.matrix))
    }

    /// exp(i·t·A) for hermitian A, by spectral exponentiation.
    pub fn exp_i(&self, t: f64) -> Result<Operator> {
        let eig = self.eigh()?;
        Ok(Operator { space: self.space.clone(), matrix: eig.function(|x| (I * t * x).exp()) })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&WireArray::from(self)).expect("finite wire data")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: WireArray = serde_json::from_str(text).map_err(|e| Error::Wire(e.to_string()))?;
        Self::try_from(wire)
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator { space: self.space.clone(), matrix: &self.matrix + &rhs.matrix }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator { space: self.space.clone(), matrix: &self.matrix - &rhs.matrix }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator { space: self.space.clone(), matrix: &self.matrix * &rhs.matrix }
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator { space: self.space.clone(), matrix: -&self.matrix }
    }
}

/// Hermitian eigendecomposition.
///
/// Eigenvalues ascend; each eigenvector column has its first component of
/// modulus above 1e-12 rotated to be real and positive.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigen {
    pub fn of_hermitian(m: &CMatrix) -> Self {
        let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
        let SymmetricEigen { eigenvalues, eigenvectors } = SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
        let n = m.nrows();
        let mut vectors = CMatrix::zeros(n, n);
        let mut values = Vec::with_capacity(n);
        for (col, &k) in order.iter().enumerate() {
            values.push(eigenvalues[k]);
            let v = eigenvectors.column(k);
            let phase = v
                .iter()
                .find(|c| c.norm() > 1e-12)
                .map(|c| c.conj() / c.norm())
                .unwrap_or(ONE);
            vectors.set_column(col, &(v * phase));
        }
        Self { values, vectors }
    }

    /// V·f(D)·V†.
    pub fn function(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (j, &x) in self.values.iter().enumerate() {
            let mut col = scaled.column_mut(j);
            col *= f(x);
        }
        scaled * self.vectors.adjoint()
    }

    /// Groups eigenvalues into spectral values: consecutive sorted values
    /// within [`DEGENERACY_TOL`] share one cluster.
    pub fn clusters(&self) -> Vec<SpectralCluster> {
        let mut out: Vec<SpectralCluster> = Vec::new();
        for (k, &x) in self.values.iter().enumerate() {
            match out.last_mut() {
                Some(c) if x - self.values[*c.columns.last().unwrap()] <= DEGENERACY_TOL => c.columns.push(k),
                _ => out.push(SpectralCluster { value: x, columns: vec![k] }),
            }
        }
        for c in &mut out {
            c.value = c.columns.iter().map(|&k| self.values[k]).sum::<f64>() / c.columns.len() as f64;
        }
        out
    }

    /// Orthogonal projector onto the span of the given eigenvector columns.
    pub fn projector(&self, columns: &[usize]) -> CMatrix {
        let n = self.vectors.nrows();
        let mut p = CMatrix::zeros(n, n);
        for &k in columns {
            let v = self.vectors.column(k);
            p += v * v.adjoint();
        }
        p
    }
}

/// One distinct spectral value and the eigenvector columns spanning it.
#[derive(Clone, Debug)]
pub struct SpectralCluster {
    pub value: f64,
    pub columns: Vec<usize>,
}

/// Kronecker composition with concatenated factor bookkeeping.
pub trait Tensor {
    fn tensor(&self, other: &Self) -> Self;
}

impl Tensor for StateVector {
    fn tensor(&self, other: &Self) -> Self {
        StateVector {
            space: self.space.concat(&other.space),
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        }
    }
}

impl Tensor for Operator {
    fn tensor(&self, other: &Self) -> Self {
        Operator { space: self.space.concat(&other.space), matrix: self.matrix.kronecker(&other.matrix) }
    }
}

/// Embeds a single-factor operator into `space`, acting as the identity on
/// every other factor.
pub fn lift(op: &Operator, which_factor: usize, space: &SpaceSpec) -> Result<Operator> {
    let dims = space.factor_dims();
    if which_factor >= dims.len() {
        return Err(Error::FactorOutOfRange { index: which_factor, factors: dims.len() });
    }
    same_dim(dims[which_factor], op.dim())?;
    let left: usize = dims[..which_factor].iter().product();
    let right: usize = dims[which_factor + 1..].iter().product();
    let mut m = op.matrix.clone();
    if right > 1 {
        m = m.kronecker(&CMatrix::identity(right, right));
    }
    if left > 1 {
        m = CMatrix::identity(left, left).kronecker(&m);
    }
    Ok(Operator { space: space.clone(), matrix: m })
}

/// Probability that `observable` takes a value in `[lo, hi]` on `state`.
///
/// Spectral values are the degeneracy clusters of the observable; a cluster
/// counts as inside the interval when its value lies within
/// [`DEGENERACY_TOL`] of it.
pub fn born_probability(state: &StateVector, observable: &Operator, lo: f64, hi: f64) -> Result<f64> {
    if !(lo <= hi) {
        return Err(Error::InvalidInterval { lo, hi });
    }
    same_dim(observable.dim(), state.dim())?;
    state.check_normalized()?;
    let eig = observable.eigh()?;
    let overlaps = eig.vectors.adjoint() * state.amplitudes();
    let p: f64 = eig
        .clusters()
        .iter()
        .filter(|c| c.value >= lo - DEGENERACY_TOL && c.value <= hi + DEGENERACY_TOL)
        .flat_map(|c| c.columns.iter())
        .map(|&k| overlaps[k].norm_sqr())
        .sum();
    Ok(p.clamp(0.0, 1.0))
}

/// The value the observable takes on `state` when the state is one of its
/// eigenvectors (residual within [`SHARP_TOL`]), otherwise `None`.
pub fn sharp_value(state: &StateVector, observable: &Operator) -> Option<f64> {
    if observable.dim() != state.dim() {
        return None;
    }
    let norm_sqr = state.amplitudes.norm_squared();
    if norm_sqr == 0.0 {
        return None;
    }
    let a_psi = &observable.matrix * &state.amplitudes;
    let lambda = state.amplitudes.dotc(&a_psi) / norm_sqr;
    let residual = (a_psi - &state.amplitudes * lambda).norm() / norm_sqr.sqrt();
    (residual <= SHARP_TOL && lambda.im.abs() <= SHARP_TOL).then_some(lambda.re)
}

/// U†·A·U.
pub fn conjugate_by_unitary(op: &Operator, u: &Operator) -> Result<Operator> {
    same_dim(op.dim(), u.dim())?;
    u.check_unitary()?;
    Ok(Operator { space: op.space.clone(), matrix: u.matrix.adjoint() * &op.matrix * &u.matrix })
}

/// Density operator: hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    space: SpaceSpec,
    matrix: CMatrix,
}

impl DensityOperator {
    pub const HERMITIAN_TOL: f64 = 1e-12;
    pub const TRACE_TOL: f64 = 1e-12;
    pub const PSD_TOL: f64 = 1e-12;

    pub fn new(space: SpaceSpec, matrix: CMatrix) -> Result<Self> {
        let op = Operator::new(space, matrix)?;
        let herm = op.hermiticity_residual();
        if herm > Self::HERMITIAN_TOL {
            return Err(Error::InvalidDensity(format!("hermiticity residual {herm:.3e}")));
        }
        let tr = op.trace();
        if (tr - ONE).norm() > Self::TRACE_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        let min = Eigen::of_hermitian(&op.matrix).values.first().copied().unwrap_or(0.0);
        if min < -Self::PSD_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self { space: op.space, matrix: op.matrix })
    }

    /// |ψ⟩⟨ψ| for a normalized ψ.
    pub fn pure(state: &StateVector) -> Result<Self> {
        state.check_normalized()?;
        let m = state.amplitudes() * state.amplitudes().adjoint();
        Self::new(state.space.clone(), m)
    }

    pub fn space(&self) -> &SpaceSpec {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn as_operator(&self) -> Operator {
        Operator { space: self.space.clone(), matrix: self.matrix.clone() }
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        DensityOperator { space: self.space.concat(&other.space), matrix: self.matrix.kronecker(&other.matrix) }
    }

    /// Tr ρ².
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }
}

/// Traces out every factor not listed in `keep`; kept factors retain their
/// relative order.
pub fn partial_trace(rho: &DensityOperator, keep: &[usize]) -> Result<DensityOperator> {
    let keep: BTreeSet<usize> = keep.iter().copied().collect();
    if keep.is_empty() {
        return Err(Error::EmptyKeep);
    }
    let space = &rho.space;
    let nf = space.n_factors();
    if let Some(&bad) = keep.iter().find(|&&k| k >= nf) {
        return Err(Error::FactorOutOfRange { index: bad, factors: nf });
    }
    let dims = space.factor_dims();
    let kept: Vec<usize> = keep.iter().copied().collect();
    let traced: Vec<usize> = (0..nf).filter(|k| !keep.contains(k)).collect();
    let kept_space = SpaceSpec::new(kept.iter().map(|&k| dims[k]).collect())?;
    if traced.is_empty() {
        return Ok(rho.clone());
    }
    let traced_space = SpaceSpec::new(traced.iter().map(|&k| dims[k]).collect())?;
    let strides = space.strides();
    let full_index = |kd: &[usize], td: &[usize]| -> usize {
        kept.iter().zip(kd).map(|(&f, &i)| strides[f] * i).sum::<usize>()
            + traced.iter().zip(td).map(|(&f, &i)| strides[f] * i).sum::<usize>()
    };
    let nk = kept_space.total_dim();
    let nt = traced_space.total_dim();
    let kept_digits: Vec<Vec<usize>> = (0..nk).map(|i| kept_space.digits(i)).collect();
    let traced_digits: Vec<Vec<usize>> = (0..nt).map(|i| traced_space.digits(i)).collect();
    let mut out = CMatrix::zeros(nk, nk);
    for (a, ka) in kept_digits.iter().enumerate() {
        for (b, kb) in kept_digits.iter().enumerate() {
            let mut acc = ZERO;
            for t in &traced_digits {
                acc += rho.matrix[(full_index(ka, t), full_index(kb, t))];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(DensityOperator { space: kept_space, matrix: out })
}

/// Pauli matrices and small fixed operators on a single qubit factor.
pub mod pauli {
    use super::*;

    fn qubit(entries: [C64; 4]) -> Operator {
        Operator {
            space: SpaceSpec { factor_dims: vec![2] },
            matrix: CMatrix::from_row_slice(2, 2, &entries),
        }
    }

    pub fn x() -> Operator {
        qubit([ZERO, ONE, ONE, ZERO])
    }

    pub fn y() -> Operator {
        qubit([ZERO, -I, I, ZERO])
    }

    pub fn z() -> Operator {
        qubit([ONE, ZERO, ZERO, -ONE])
    }

    pub fn identity() -> Operator {
        qubit([ONE, ZERO, ZERO, ONE])
    }

    /// n̂·σ for the unit vector (sin θ, 0, cos θ) in the x–z plane.
    pub fn along(theta: f64) -> Operator {
        let (s, c) = theta.sin_cos();
        &x().scaled(C64::new(s, 0.0)) + &z().scaled(C64::new(c, 0.0))
    }
}

/// Structured text form of a state or operator: shape metadata plus
/// interleaved `re, im` pairs in row-major order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WireArray {
    pub kind: WireKind,
    pub factor_dims: Vec<usize>,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WireKind {
    State,
    Operator,
}

fn interleave<'a>(values: impl Iterator<Item = &'a C64>) -> Vec<f64> {
    values.flat_map(|c| [c.re, c.im]).collect()
}

fn deinterleave(data: &[f64]) -> Result<Vec<C64>> {
    if !data.len().is_multiple_of(2) {
        return Err(Error::Wire("odd number of reals".into()));
    }
    Ok(data.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect())
}

impl From<&StateVector> for WireArray {
    fn from(s: &StateVector) -> Self {
        WireArray {
            kind: WireKind::State,
            factor_dims: s.space.factor_dims.clone(),
            shape: vec![s.dim()],
            data: interleave(s.amplitudes.iter()),
        }
    }
}

impl From<&Operator> for WireArray {
    fn from(op: &Operator) -> Self {
        let n = op.dim();
        let row_major = (0..n).flat_map(|i| (0..n).map(move |j| (i, j)));
        WireArray {
            kind: WireKind::Operator,
            factor_dims: op.space.factor_dims.clone(),
            shape: vec![n, n],
            data: row_major.flat_map(|(i, j)| [op.matrix[(i, j)].re, op.matrix[(i, j)].im]).collect(),
        }
    }
}

impl TryFrom<WireArray> for StateVector {
    type Error = Error;
    fn try_from(w: WireArray) -> Result<Self> {
        if w.kind != WireKind::State || w.shape.len() != 1 {
            return Err(Error::Wire("expected a state with a 1-d shape".into()));
        }
        let space = SpaceSpec::new(w.factor_dims)?;
        let values = deinterleave(&w.data)?;
        same_dim(w.shape[0], values.len())?;
        StateVector::from_slice(space, &values)
    }
}

impl TryFrom<WireArray> for Operator {
    type Error = Error;
    fn try_from(w: WireArray) -> Result<Self> {
        if w.kind != WireKind::Operator || w.shape.len() != 2 || w.shape[0] != w.shape[1] {
            return Err(Error::Wire("expected an operator with a square 2-d shape".into()));
        }
        let space = SpaceSpec::new(w.factor_dims)?;
        let values = deinterleave(&w.data)?;
        same_dim(w.shape[0] * w.shape[1], values.len())?;
        Operator::new(space, CMatrix::from_row_slice(w.shape[0], w.shape[1], &values))
    }
}

pub(crate) fn same_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}
