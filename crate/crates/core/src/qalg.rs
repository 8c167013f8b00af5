//! Small dense complex linear algebra for finite-level systems (N <= 8).
//!
//! Matrices are square and stored row-major. Everything here is immutable
//! after construction; the checked wrappers ([`UnitaryMatrix`],
//! [`Observable`]) validate their invariants once, in the constructor.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerance::{CONSTRUCTION_TOL, EQUALITY_TOL, ZERO_TOL};

/// Largest Hilbert-space dimension accepted by the engine.
pub const MAX_DIM: usize = 8;

pub type Complex = Complex64;

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);

fn all_finite(values: &[Complex]) -> bool {
    values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    entries: Vec<Complex>,
}

impl StateVector {
    pub fn new(entries: Vec<Complex>) -> Result<Self> {
        if entries.is_empty() || entries.len() > MAX_DIM {
            return Err(Error::DimensionMismatch {
                expected: MAX_DIM,
                found: entries.len(),
            });
        }
        if !all_finite(&entries) {
            return Err(Error::NonFinite("state vector"));
        }
        Ok(Self { entries })
    }

    /// Like [`StateVector::new`] but also requires unit norm (within 1e-12).
    pub fn normalized(entries: Vec<Complex>) -> Result<Self> {
        let v = Self::new(entries)?;
        let norm_sqr = v.norm_sqr();
        if (norm_sqr - 1.0).abs() > EQUALITY_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(v)
    }

    /// Computational basis vector `|index>`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index,
            });
        }
        let mut entries = vec![ZERO; dim];
        entries[index] = ONE;
        Self::new(entries)
    }

    pub(crate) fn zeros(dim: usize) -> Self {
        Self {
            entries: vec![ZERO; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Complex] {
        &self.entries
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn scale(&self, factor: Complex) -> StateVector {
        StateVector {
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    pub(crate) fn add_assign(&mut self, other: &StateVector) {
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += b;
        }
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<Complex>,
}

impl Matrix {
    pub fn new(dim: usize, data: Vec<Complex>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::DimensionMismatch {
                expected: MAX_DIM,
                found: dim,
            });
        }
        check_dim(dim * dim, data.len())?;
        if !all_finite(&data) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[&[Complex]]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            check_dim(dim, row.len())?;
            data.extend_from_slice(row);
        }
        Self::new(dim, data)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let owned: Vec<Vec<Complex>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex::new(x, 0.0)).collect())
            .collect();
        let refs: Vec<&[Complex]> = owned.iter().map(Vec::as_slice).collect();
        Self::from_rows(&refs)
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = ONE;
        }
        Self { dim, data }
    }

    /// Bit-flip (Pauli X) matrix.
    pub fn pauli_x() -> Self {
        Self {
            dim: 2,
            data: vec![ZERO, ONE, ONE, ZERO],
        }
    }

    pub fn pauli_z() -> Self {
        Self {
            dim: 2,
            data: vec![ONE, ZERO, ZERO, -ONE],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex {
        self.data[row * self.dim + col]
    }

    pub fn data(&self) -> &[Complex] {
        &self.data
    }

    pub fn adjoint(&self) -> Matrix {
        let n = self.dim;
        let mut data = vec![ZERO; n * n];
        for r in 0..n {
            for c in 0..n {
                data[c * n + r] = self.data[r * n + c].conj();
            }
        }
        Matrix { dim: n, data }
    }

    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix> {
        check_dim(self.dim, rhs.dim)?;
        let n = self.dim;
        let mut data = vec![ZERO; n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    data[r * n + c] += a * rhs.data[k * n + c];
                }
            }
        }
        Ok(Matrix { dim: n, data })
    }

    pub fn add(&self, rhs: &Matrix) -> Result<Matrix> {
        check_dim(self.dim, rhs.dim)?;
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Matrix {
            dim: self.dim,
            data,
        })
    }

    pub fn scale(&self, factor: Complex) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        check_dim(self.dim, v.dim())?;
        let n = self.dim;
        let entries = (0..n)
            .map(|r| {
                self.data[r * n..(r + 1) * n]
                    .iter()
                    .zip(v.entries())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect();
        Ok(StateVector { entries })
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn unitarity_deviation(&self) -> f64 {
        let product = self
            .adjoint()
            .mul(self)
            .expect("adjoint has the same dimension");
        product.max_abs_diff(&Matrix::identity(self.dim))
    }

    fn to_nalgebra(&self) -> DMatrix<Complex> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|c| {
                    let z = self.get(r, c);
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// A matrix whose unitarity (`U^dag U = I` within 1e-10) was checked on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix(Matrix);

impl UnitaryMatrix {
    pub fn new(matrix: Matrix) -> Result<Self> {
        let deviation = matrix.unitarity_deviation();
        if deviation > CONSTRUCTION_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self(matrix))
    }

    pub fn identity(dim: usize) -> Self {
        Self(Matrix::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn get(&self, row: usize, col: usize) -> Complex {
        self.0.get(row, col)
    }

    pub fn adjoint(&self) -> UnitaryMatrix {
        UnitaryMatrix(self.0.adjoint())
    }

    /// `self * rhs`, i.e. `rhs` acts first.
    pub fn then_after(&self, rhs: &UnitaryMatrix) -> Result<UnitaryMatrix> {
        Ok(UnitaryMatrix(self.0.mul(&rhs.0)?))
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        self.0.apply(v)
    }
}

/// Unit-frequency Rabi propagator `cos(t) I - i sin(t) X`.
pub fn rabi_unitary(t: f64) -> UnitaryMatrix {
    let (s, c) = t.sin_cos();
    let diag = Complex::new(c, 0.0);
    let off = Complex::new(0.0, -s);
    UnitaryMatrix(Matrix {
        dim: 2,
        data: vec![diag, off, off, diag],
    })
}

/// Real eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(h: &Matrix) -> Result<(Vec<f64>, Vec<StateVector>)> {
    let deviation = h.hermiticity_deviation();
    if deviation > CONSTRUCTION_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let eig = h.to_nalgebra().symmetric_eigen();
    let mut order: Vec<usize> = (0..h.dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| StateVector {
            entries: eig.eigenvectors.column(i).iter().copied().collect(),
        })
        .collect();
    Ok((values, vectors))
}

/// `exp(-i H t)` from the spectral decomposition of `H`.
pub fn hermitian_propagator(h: &Matrix, t: f64) -> Result<UnitaryMatrix> {
    if !t.is_finite() {
        return Err(Error::NonFinite("propagation time"));
    }
    let (values, vectors) = hermitian_eigen(h)?;
    let n = h.dim;
    let mut data = vec![ZERO; n * n];
    for (lambda, v) in values.iter().zip(&vectors) {
        let phase = Complex::from_polar(1.0, -lambda * t);
        for r in 0..n {
            let vr = v.entries[r] * phase;
            for c in 0..n {
                data[r * n + c] += vr * v.entries[c].conj();
            }
        }
    }
    UnitaryMatrix::new(Matrix { dim: n, data })
}

/// `<bra| U |ket>`.
pub fn transition_amplitude(
    bra: &StateVector,
    u: &UnitaryMatrix,
    ket: &StateVector,
) -> Result<Complex> {
    check_dim(u.dim(), bra.dim())?;
    bra.inner(&u.apply(ket)?)
}

/// One measurement outcome: an eigenvalue and an orthonormal basis of its eigenspace.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    eigenvalue: f64,
    basis: Vec<StateVector>,
}

impl Outcome {
    pub fn eigenvalue(&self) -> f64 {
        self.eigenvalue
    }

    pub fn basis(&self) -> &[StateVector] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// The eigenvector when the projector has rank one.
    pub fn vector(&self) -> Option<&StateVector> {
        match self.basis.as_slice() {
            [v] => Some(v),
            _ => None,
        }
    }

    /// `P v` for this outcome's projector `P`.
    pub fn project(&self, v: &StateVector) -> StateVector {
        let mut out = StateVector::zeros(v.dim());
        for e in &self.basis {
            let coeff = e.inner(v).expect("observable and state share a dimension");
            out.add_assign(&e.scale(coeff));
        }
        out
    }

    pub fn projector(&self) -> Matrix {
        let n = self.basis[0].dim();
        let mut data = vec![ZERO; n * n];
        for e in &self.basis {
            for r in 0..n {
                for c in 0..n {
                    data[r * n + c] += e.entries[r] * e.entries[c].conj();
                }
            }
        }
        Matrix { dim: n, data }
    }
}

/// A projective observable. Outcomes are ordered by decreasing eigenvalue, so
/// outcome index 0 is always the largest eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    dim: usize,
    outcomes: Vec<Outcome>,
}

impl Observable {
    /// Builds an observable from `(eigenvalue, eigenspace basis)` pairs.
    ///
    /// Eigenvalues must be distinct (1e-12), the vectors jointly orthonormal
    /// and the projectors must resolve the identity (both within 1e-10).
    pub fn new(spaces: Vec<(f64, Vec<StateVector>)>) -> Result<Self> {
        if spaces.is_empty() {
            return Err(Error::InvalidObservable("no outcomes".into()));
        }
        let dim = spaces
            .iter()
            .flat_map(|(_, b)| b.first())
            .map(StateVector::dim)
            .next()
            .ok_or_else(|| Error::InvalidObservable("empty eigenspace".into()))?;
        let mut outcomes = Vec::with_capacity(spaces.len());
        for (eigenvalue, basis) in spaces {
            if !eigenvalue.is_finite() {
                return Err(Error::NonFinite("eigenvalue"));
            }
            if basis.is_empty() {
                return Err(Error::InvalidObservable(format!(
                    "eigenvalue {eigenvalue} has an empty eigenspace"
                )));
            }
            for v in &basis {
                check_dim(dim, v.dim())?;
            }
            outcomes.push(Outcome { eigenvalue, basis });
        }
        outcomes.sort_by(|a, b| b.eigenvalue.total_cmp(&a.eigenvalue));
        for pair in outcomes.windows(2) {
            if (pair[0].eigenvalue - pair[1].eigenvalue).abs() <= EQUALITY_TOL {
                return Err(Error::InvalidObservable(format!(
                    "eigenvalue {} is repeated; group degenerate vectors into one outcome",
                    pair[0].eigenvalue
                )));
            }
        }

        let all: Vec<&StateVector> = outcomes.iter().flat_map(|o| &o.basis).collect();
        for (i, a) in all.iter().enumerate() {
            for (j, b) in all.iter().enumerate().skip(i) {
                let expected = if i == j { ONE } else { ZERO };
                let overlap = a.inner(b)?;
                if (overlap - expected).norm() > CONSTRUCTION_TOL {
                    return Err(Error::InvalidObservable(format!(
                        "eigenvectors {i} and {j} are not orthonormal (overlap {overlap})"
                    )));
                }
            }
        }

        let observable = Self { dim, outcomes };
        let deviation = observable
            .projector_sum()
            .max_abs_diff(&Matrix::identity(dim));
        if deviation > CONSTRUCTION_TOL {
            return Err(Error::InvalidObservable(format!(
                "projectors do not resolve the identity (deviation {deviation:e})"
            )));
        }
        Ok(observable)
    }

    /// Nondegenerate observable: one eigenvector per eigenvalue.
    pub fn nondegenerate(eigenvalues: &[f64], eigenvectors: Vec<StateVector>) -> Result<Self> {
        check_dim(eigenvalues.len(), eigenvectors.len())?;
        Self::new(
            eigenvalues
                .iter()
                .zip(eigenvectors)
                .map(|(&value, v)| (value, vec![v]))
                .collect(),
        )
    }

    /// Spectral decomposition of a Hermitian matrix; eigenvalues closer
    /// than 1e-9 are merged into one degenerate outcome.
    pub fn from_hermitian(h: &Matrix) -> Result<Self> {
        let (values, vectors) = hermitian_eigen(h)?;
        let mut spaces: Vec<(f64, Vec<StateVector>)> = Vec::new();
        for (value, v) in values.into_iter().zip(vectors) {
            match spaces.last_mut() {
                Some((last, basis)) if (value - *last).abs() < ZERO_TOL => basis.push(v),
                _ => spaces.push((value, vec![v])),
            }
        }
        Self::new(spaces)
    }

    /// The qubit observable `|+><+| - |-><-|` with `|+> = |0>` and `|-> = |1>`.
    pub fn qubit_z() -> Self {
        let plus = StateVector::basis(2, 0).expect("valid basis index");
        let minus = StateVector::basis(2, 1).expect("valid basis index");
        Self {
            dim: 2,
            outcomes: vec![
                Outcome {
                    eigenvalue: 1.0,
                    basis: vec![plus],
                },
                Outcome {
                    eigenvalue: -1.0,
                    basis: vec![minus],
                },
            ],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcome_count(&self) -> usize {
        self.outcomes.len()
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn outcome(&self, index: usize) -> &Outcome {
        &self.outcomes[index]
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.outcomes.iter().map(Outcome::eigenvalue).collect()
    }

    pub fn projector_sum(&self) -> Matrix {
        self.outcomes
            .iter()
            .map(Outcome::projector)
            .reduce(|acc, p| acc.add(&p).expect("projectors share a dimension"))
            .expect("observable has at least one outcome")
    }
}
