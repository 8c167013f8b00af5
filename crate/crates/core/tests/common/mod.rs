//! Test-only oracles, independent of the engine's enumeration code.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use pathwitness::{Matrix, Observable, StateVector, UnitaryMatrix};
use rand::Rng;
use rand_distr::StandardNormal;

/// Closed-form amplitudes of the four qubit paths (Q2, Q3) = (+,+), (-,+), (+,-), (-,-).
pub fn closed_amplitudes(tau: f64, t: f64) -> [C; 4] {
    let (s1, c1) = tau.sin_cos();
    let (s2, c2) = (t - tau).sin_cos();
    [
        C::new(c2 * c1, 0.0),
        C::new(-s2 * s1, 0.0),
        C::new(0.0, -s2 * c1),
        C::new(0.0, -c2 * s1),
    ]
}

/// Closed-form three-time path probabilities in the same order.
pub fn closed_probabilities(tau: f64, t: f64) -> [f64; 4] {
    let (s1, c1) = tau.sin_cos();
    let (s2, c2) = (t - tau).sin_cos();
    [
        (c2 * c1).powi(2),
        (s2 * s1).powi(2),
        (s2 * c1).powi(2),
        (c2 * s1).powi(2),
    ]
}

pub fn closed_delta(tau: f64, t: f64) -> f64 {
    0.5 * (2.0 * tau).sin() * (2.0 * (t - tau)).sin()
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn random_complex_matrix<R: Rng>(n: usize, rng: &mut R) -> DMatrix<C> {
    DMatrix::from_fn(n, n, |_, _| C::new(gaussian(rng), gaussian(rng)))
}

/// Haar-ish random unitary from the QR decomposition of a Gaussian matrix.
pub fn random_unitary_na<R: Rng>(n: usize, rng: &mut R) -> DMatrix<C> {
    let qr = random_complex_matrix(n, rng).qr();
    let q = qr.q();
    let r = qr.r();
    let phases = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            let d = r[(i, i)];
            d / d.norm()
        } else {
            C::new(0.0, 0.0)
        }
    });
    q * phases
}

pub fn to_engine(m: &DMatrix<C>) -> Matrix {
    let n = m.nrows();
    let data: Vec<C> = (0..n)
        .flat_map(|r| (0..n).map(move |c| m[(r, c)]))
        .collect();
    Matrix::new(n, data).unwrap()
}

pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> UnitaryMatrix {
    UnitaryMatrix::new(to_engine(&random_unitary_na(n, rng))).unwrap()
}

pub fn random_hermitian<R: Rng>(n: usize, rng: &mut R) -> Matrix {
    let a = random_complex_matrix(n, rng);
    to_engine(&((&a + a.adjoint()) * C::new(0.5, 0.0)))
}

/// A random nondegenerate observable: distinct eigenvalues on the columns of
/// a random unitary. Returned alongside the (eigenvalue, vector) pairs.
pub fn random_observable<R: Rng>(n: usize, rng: &mut R) -> (Observable, Vec<(f64, DVector<C>)>) {
    let u = random_unitary_na(n, rng);
    let mut pairs = Vec::new();
    for k in 0..n {
        let value = k as f64 + rng.random_range(0.1..0.9);
        pairs.push((value, u.column(k).into_owned()));
    }
    let obs = Observable::new(
        pairs
            .iter()
            .map(|(v, col)| {
                (
                    *v,
                    vec![StateVector::new(col.iter().copied().collect()).unwrap()],
                )
            })
            .collect(),
    )
    .unwrap();
    (obs, pairs)
}

pub fn random_state<R: Rng>(n: usize, rng: &mut R) -> (StateVector, DVector<C>) {
    let v = DVector::from_fn(n, |_, _| C::new(gaussian(rng), gaussian(rng)));
    let v = &v / C::new(v.norm(), 0.0);
    (StateVector::new(v.iter().copied().collect()).unwrap(), v)
}

/// Taylor series of `exp(-i H t)`, summed until terms vanish.
pub fn exp_taylor(h: &Matrix, t: f64) -> Matrix {
    let n = h.dim();
    let a = DMatrix::from_row_slice(n, n, h.data()) * C::new(0.0, -t);
    let mut sum = DMatrix::<C>::identity(n, n);
    let mut term = DMatrix::<C>::identity(n, n);
    for k in 1..200 {
        term = &term * &a / C::new(k as f64, 0.0);
        sum += &term;
        if term.norm() < 1e-18 {
            break;
        }
    }
    to_engine(&sum)
}

/// A schedule expressed directly in nalgebra terms for the brute-force oracle.
pub struct OracleSchedule {
    pub initial: DVector<C>,
    pub unitaries: Vec<DMatrix<C>>,
    /// Per slot: (eigenvalue, projector).
    pub projectors: Vec<Vec<(f64, DMatrix<C>)>>,
}

impl OracleSchedule {
    pub fn dim(&self) -> usize {
        self.initial.len()
    }

    /// Probability of observing `labels[k]` at every measured slot `k`
    /// (`None` = slot left unmeasured): squared norm of the projected state.
    pub fn probability(&self, labels: &[Option<f64>]) -> f64 {
        let mut psi = self.initial.clone();
        for (k, label) in labels.iter().enumerate() {
            psi = &self.unitaries[k] * psi;
            if let Some(value) = label {
                let (_, p) = self.projectors[k]
                    .iter()
                    .find(|(v, _)| (v - value).abs() < 1e-12)
                    .expect("label is an eigenvalue of the slot");
                psi = p * psi;
            }
        }
        psi.norm_squared()
    }

    /// Every assignment of eigenvalues to the measured slots, with its probability.
    pub fn enumerate(&self, mask: &[bool]) -> Vec<(Vec<f64>, f64)> {
        let mut out = Vec::new();
        let mut labels: Vec<Option<f64>> = vec![None; mask.len()];
        self.recurse(mask, 0, &mut labels, &mut out);
        out
    }

    fn recurse(
        &self,
        mask: &[bool],
        k: usize,
        labels: &mut Vec<Option<f64>>,
        out: &mut Vec<(Vec<f64>, f64)>,
    ) {
        if k == mask.len() {
            let measured: Vec<f64> = labels.iter().flatten().copied().collect();
            out.push((measured, self.probability(labels)));
            return;
        }
        if !mask[k] {
            labels[k] = None;
            self.recurse(mask, k + 1, labels, out);
            return;
        }
        for (value, _) in &self.projectors[k] {
            labels[k] = Some(*value);
            self.recurse(mask, k + 1, labels, out);
        }
        labels[k] = None;
    }
}

pub fn projector_of(vectors: &[DVector<C>]) -> DMatrix<C> {
    let n = vectors[0].len();
    let mut p = DMatrix::<C>::zeros(n, n);
    for v in vectors {
        p += v * v.adjoint();
    }
    p
}
