//! Measurement schedules and exhaustive enumeration of virtual paths.
//!
//! A schedule is an initial state followed by `K` measurement slots. Slot `k`
//! is preceded by its own propagator: slot 0's covers `[0, t_0]` (the identity
//! when `t_0 = 0`), slot `k`'s covers `[t_{k-1}, t_k]`.
//!
//! Paths are listed in lexicographic order of the outcome tuple read from
//! the latest slot to the earliest, i.e. the last slot is the most
//! significant digit. For the three-slot qubit schedule with the initial
//! outcome fixed this gives (Q2, Q3) = (+,+), (-,+), (+,-), (-,-), the
//! conventional path labels 1..4.

use crate::error::{Error, Result};
use crate::qalg::{
    hermitian_propagator, rabi_unitary, Complex, Matrix, Observable, StateVector, UnitaryMatrix,
    MAX_DIM,
};

pub const MAX_SLOTS: usize = 12;
/// Upper bound on the number of virtual paths (2^20).
pub const MAX_PATHS: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSlot {
    pub time: f64,
    pub observable: Observable,
    pub measured: bool,
}

impl MeasurementSlot {
    pub fn new(time: f64, observable: Observable, measured: bool) -> Self {
        Self {
            time,
            observable,
            measured,
        }
    }
}

/// How the per-slot propagators are obtained.
#[derive(Debug, Clone)]
pub enum Propagation {
    /// One unitary per slot, supplied directly.
    Explicit(Vec<UnitaryMatrix>),
    /// `exp(-i H dt)` for each interval between consecutive slot times.
    Hamiltonian(Matrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSchedule {
    initial_state: StateVector,
    slots: Vec<MeasurementSlot>,
    propagators: Vec<UnitaryMatrix>,
}

#[derive(Debug, Clone, Default)]
pub struct ScheduleBuilder {
    initial_state: Option<StateVector>,
    slots: Vec<MeasurementSlot>,
    hamiltonian: Option<Matrix>,
    propagators: Option<Vec<UnitaryMatrix>>,
}

impl ScheduleBuilder {
    pub fn initial_state(mut self, state: StateVector) -> Self {
        self.initial_state = Some(state);
        self
    }

    pub fn slot(mut self, slot: MeasurementSlot) -> Self {
        self.slots.push(slot);
        self
    }

    pub fn slots(mut self, slots: impl IntoIterator<Item = MeasurementSlot>) -> Self {
        self.slots.extend(slots);
        self
    }

    pub fn hamiltonian(mut self, h: Matrix) -> Self {
        self.hamiltonian = Some(h);
        self
    }

    /// Explicit propagators take precedence over a Hamiltonian.
    pub fn propagators(mut self, propagators: Vec<UnitaryMatrix>) -> Self {
        self.propagators = Some(propagators);
        self
    }

    pub fn build(self) -> Result<MeasurementSchedule> {
        let initial = self
            .initial_state
            .ok_or_else(|| Error::InvalidSchedule("missing initial state".into()))?;
        let propagation = match (self.propagators, self.hamiltonian) {
            (Some(p), _) => Propagation::Explicit(p),
            (None, Some(h)) => Propagation::Hamiltonian(h),
            (None, None) => {
                return Err(Error::InvalidSchedule(
                    "neither propagators nor a Hamiltonian were supplied".into(),
                ))
            }
        };
        MeasurementSchedule::new(initial, self.slots, propagation)
    }
}

impl MeasurementSchedule {
    pub fn builder() -> ScheduleBuilder {
        ScheduleBuilder::default()
    }

    pub fn new(
        initial_state: StateVector,
        slots: Vec<MeasurementSlot>,
        propagation: Propagation,
    ) -> Result<Self> {
        if slots.is_empty() {
            return Err(Error::InvalidSchedule("schedule has no slots".into()));
        }
        if slots.len() > MAX_SLOTS {
            return Err(Error::InvalidSchedule(format!(
                "{} slots exceed the limit of {MAX_SLOTS}",
                slots.len()
            )));
        }
        let dim = initial_state.dim();
        if dim > MAX_DIM {
            return Err(Error::DimensionMismatch {
                expected: MAX_DIM,
                found: dim,
            });
        }
        let norm_sqr = initial_state.norm_sqr();
        if (norm_sqr - 1.0).abs() > crate::tolerance::EQUALITY_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        for slot in &slots {
            if !slot.time.is_finite() {
                return Err(Error::NonFinite("slot time"));
            }
            if slot.observable.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: slot.observable.dim(),
                });
            }
        }

        let propagators = match propagation {
            Propagation::Explicit(p) => {
                if p.len() != slots.len() {
                    return Err(Error::InvalidSchedule(format!(
                        "{} propagators for {} slots",
                        p.len(),
                        slots.len()
                    )));
                }
                p
            }
            Propagation::Hamiltonian(h) => {
                if slots[0].time < 0.0 || slots.windows(2).any(|w| w[1].time < w[0].time) {
                    return Err(Error::InvalidSchedule(
                        "slot times must be non-negative and non-decreasing".into(),
                    ));
                }
                let mut previous = 0.0;
                let mut out = Vec::with_capacity(slots.len());
                for slot in &slots {
                    out.push(hermitian_propagator(&h, slot.time - previous)?);
                    previous = slot.time;
                }
                out
            }
        };
        for u in &propagators {
            if u.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: u.dim(),
                });
            }
        }

        let schedule = Self {
            initial_state,
            slots,
            propagators,
        };
        let count = schedule.path_count_u128();
        if count > MAX_PATHS as u128 {
            return Err(Error::EnumerationBoundExceeded {
                paths: count,
                limit: MAX_PATHS,
            });
        }
        Ok(schedule)
    }

    /// Qubit undergoing unit-frequency Rabi oscillations, initial state `|+>`,
    /// measuring `Q = |+><+| - |-><-|` at each of `times`.
    ///
    /// Interval propagators are `rabi_unitary(t_k - t_{k-1})`, so times need not
    /// be ordered; a decreasing pair simply evolves backwards.
    pub fn rabi_qubit(times: &[f64], measured: &[bool]) -> Result<Self> {
        if times.len() != measured.len() {
            return Err(Error::InvalidSchedule(
                "times and measured flags differ in length".into(),
            ));
        }
        let observable = Observable::qubit_z();
        let mut previous = 0.0;
        let mut propagators = Vec::with_capacity(times.len());
        let mut slots = Vec::with_capacity(times.len());
        for (&t, &m) in times.iter().zip(measured) {
            if !t.is_finite() {
                return Err(Error::NonFinite("slot time"));
            }
            propagators.push(rabi_unitary(t - previous));
            slots.push(MeasurementSlot::new(t, observable.clone(), m));
            previous = t;
        }
        Self::new(
            StateVector::basis(2, 0)?,
            slots,
            Propagation::Explicit(propagators),
        )
    }

    /// The three-slot qubit schedule measuring at `0`, `tau` and `t_final`.
    pub fn three_time_qubit(tau: f64, t_final: f64) -> Result<Self> {
        Self::rabi_qubit(&[0.0, tau, t_final], &[true, true, true])
    }

    pub fn dim(&self) -> usize {
        self.initial_state.dim()
    }

    pub fn initial_state(&self) -> &StateVector {
        &self.initial_state
    }

    pub fn slots(&self) -> &[MeasurementSlot] {
        &self.slots
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    pub fn propagators(&self) -> &[UnitaryMatrix] {
        &self.propagators
    }

    pub fn measured_mask(&self) -> Vec<bool> {
        self.slots.iter().map(|s| s.measured).collect()
    }

    pub fn outcome_counts(&self) -> Vec<usize> {
        self.slots
            .iter()
            .map(|s| s.observable.outcome_count())
            .collect()
    }

    /// Same schedule with different measured flags.
    pub fn with_measured(&self, mask: &[bool]) -> Result<Self> {
        if mask.len() != self.slots.len() {
            return Err(Error::InvalidSchedule(format!(
                "mask of length {} for {} slots",
                mask.len(),
                self.slots.len()
            )));
        }
        let mut out = self.clone();
        for (slot, &m) in out.slots.iter_mut().zip(mask) {
            slot.measured = m;
        }
        Ok(out)
    }

    fn path_count_u128(&self) -> u128 {
        self.slots
            .iter()
            .map(|s| s.observable.outcome_count() as u128)
            .product()
    }
}

/// Number of virtual paths: the product of per-slot outcome counts.
pub fn path_count(schedule: &MeasurementSchedule) -> usize {
    schedule.outcome_counts().iter().product()
}

/// Index of an outcome tuple in last-slot-most-significant order.
pub(crate) fn path_index(outcomes: &[usize], counts: &[usize]) -> usize {
    outcomes
        .iter()
        .zip(counts)
        .rev()
        .fold(0, |acc, (&q, &n)| acc * n + q)
}

/// One outcome sequence with its projected branch state.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualPath {
    pub outcomes: Vec<usize>,
    /// `P_K U_K ... P_1 U_1 |psi_0>`; coherent sums of these give real-path probabilities.
    pub branch: StateVector,
    /// Scalar amplitude `<q_K| U_K P_{K-1} ... U_1 |psi_0>`, defined when the
    /// final outcome is nondegenerate. With rank-one projectors throughout this
    /// is the ordered product of transition amplitudes.
    pub amplitude: Option<Complex>,
}

/// All virtual paths of `schedule`, in the module's canonical order.
pub fn enumerate_virtual_paths(schedule: &MeasurementSchedule) -> Result<Vec<VirtualPath>> {
    let count = schedule.path_count_u128();
    if count > MAX_PATHS as u128 {
        return Err(Error::EnumerationBoundExceeded {
            paths: count,
            limit: MAX_PATHS,
        });
    }
    let counts = schedule.outcome_counts();
    let mut slots: Vec<Option<VirtualPath>> = vec![None; count as usize];
    let mut outcomes = Vec::with_capacity(counts.len());
    descend(
        schedule,
        &counts,
        schedule.initial_state.clone(),
        &mut outcomes,
        &mut slots,
    )?;
    Ok(slots
        .into_iter()
        .map(|p| p.expect("every outcome tuple is visited once"))
        .collect())
}

fn descend(
    schedule: &MeasurementSchedule,
    counts: &[usize],
    state: StateVector,
    outcomes: &mut Vec<usize>,
    out: &mut [Option<VirtualPath>],
) -> Result<()> {
    let k = outcomes.len();
    if k == counts.len() {
        let last = schedule.slots[k - 1]
            .observable
            .outcome(*outcomes.last().expect("at least one slot"));
        let amplitude = match last.vector() {
            Some(v) => Some(v.inner(&state)?),
            None => None,
        };
        out[path_index(outcomes, counts)] = Some(VirtualPath {
            outcomes: outcomes.clone(),
            branch: state,
            amplitude,
        });
        return Ok(());
    }
    let evolved = schedule.propagators[k].apply(&state)?;
    for (q, outcome) in schedule.slots[k].observable.outcomes().iter().enumerate() {
        outcomes.push(q);
        descend(schedule, counts, outcome.project(&evolved), outcomes, out)?;
        outcomes.pop();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn two_slot_qubit_amplitudes_at_eighth_and_quarter_period() {
        let s = MeasurementSchedule::rabi_qubit(&[FRAC_PI_4, FRAC_PI_2], &[true, true]).unwrap();
        let paths = enumerate_virtual_paths(&s).unwrap();
        let expected = [c(0.5, 0.0), c(-0.5, 0.0), c(0.0, -0.5), c(0.0, -0.5)];
        assert_eq!(paths.len(), 4);
        for (p, e) in paths.iter().zip(expected) {
            assert!(
                (p.amplitude.unwrap() - e).norm() < 1e-15,
                "{:?}",
                p.outcomes
            );
        }
        assert_eq!(paths[1].outcomes, vec![1, 0]);
        assert_eq!(paths[2].outcomes, vec![0, 1]);
    }

    #[test]
    fn zero_tau_kills_paths_through_minus() {
        let t = 1.3;
        let s = MeasurementSchedule::rabi_qubit(&[0.0, t], &[true, true]).unwrap();
        let a: Vec<Complex> = enumerate_virtual_paths(&s)
            .unwrap()
            .iter()
            .map(|p| p.amplitude.unwrap())
            .collect();
        assert!((a[0] - c(t.cos(), 0.0)).norm() < 1e-15);
        assert_eq!(a[1], c(0.0, 0.0));
        assert!((a[2] - c(0.0, -t.sin())).norm() < 1e-15);
        assert_eq!(a[3], c(0.0, 0.0));
    }

    #[test]
    fn single_slot_amplitudes() {
        let t = 0.77;
        let s = MeasurementSchedule::rabi_qubit(&[t], &[true]).unwrap();
        let paths = enumerate_virtual_paths(&s).unwrap();
        assert!((paths[0].amplitude.unwrap() - c(t.cos(), 0.0)).norm() < 1e-15);
        assert!((paths[1].amplitude.unwrap() - c(0.0, -t.sin())).norm() < 1e-15);
    }

    #[test]
    fn path_counts() {
        let two = MeasurementSchedule::rabi_qubit(&[0.0, 1.0], &[true, true]).unwrap();
        assert_eq!(path_count(&two), 4);
        let three = MeasurementSchedule::three_time_qubit(0.5, 1.0).unwrap();
        assert_eq!(path_count(&three), 8);

        let h = Matrix::from_real_rows(&[&[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0], &[0.0, 0.0, -1.0]])
            .unwrap();
        let obs = Observable::from_hermitian(&h).unwrap();
        let qutrit = MeasurementSchedule::builder()
            .initial_state(StateVector::basis(3, 0).unwrap())
            .slots([
                MeasurementSlot::new(0.5, obs.clone(), true),
                MeasurementSlot::new(1.0, obs, true),
            ])
            .hamiltonian(h)
            .build()
            .unwrap();
        assert_eq!(path_count(&qutrit), 9);
    }

    #[test]
    fn enumeration_bound_enforced() {
        let times: Vec<f64> = (0..12).map(f64::from).collect();
        assert!(MeasurementSchedule::rabi_qubit(&times, &[true; 12]).is_ok());

        let h = Matrix::identity(4);
        let obs = Observable::from_hermitian(
            &Matrix::from_real_rows(&[
                &[1.0, 0.0, 0.0, 0.0],
                &[0.0, 2.0, 0.0, 0.0],
                &[0.0, 0.0, 3.0, 0.0],
                &[0.0, 0.0, 0.0, 4.0],
            ])
            .unwrap(),
        )
        .unwrap();
        let err = MeasurementSchedule::builder()
            .initial_state(StateVector::basis(4, 0).unwrap())
            .slots((0..11).map(|k| MeasurementSlot::new(k as f64, obs.clone(), true)))
            .hamiltonian(h)
            .build();
        assert!(matches!(err, Err(Error::EnumerationBoundExceeded { .. })));
    }

    #[test]
    fn explicit_propagators_win_over_hamiltonian() {
        let u = rabi_unitary(0.4);
        let s = MeasurementSchedule::builder()
            .initial_state(StateVector::basis(2, 0).unwrap())
            .slot(MeasurementSlot::new(99.0, Observable::qubit_z(), true))
            .hamiltonian(Matrix::pauli_z())
            .propagators(vec![u.clone()])
            .build()
            .unwrap();
        assert_eq!(s.propagators()[0], u);
    }

    #[test]
    fn hamiltonian_schedule_rejects_decreasing_times() {
        let err = MeasurementSchedule::builder()
            .initial_state(StateVector::basis(2, 0).unwrap())
            .slots([
                MeasurementSlot::new(1.0, Observable::qubit_z(), true),
                MeasurementSlot::new(0.5, Observable::qubit_z(), true),
            ])
            .hamiltonian(Matrix::pauli_x())
            .build();
        assert!(matches!(err, Err(Error::InvalidSchedule(_))));
    }

    #[test]
    fn path_index_is_last_slot_major() {
        let counts = [2, 3, 2];
        let mut seen = vec![false; 12];
        for a in 0..2 {
            for b in 0..3 {
                for c in 0..2 {
                    let i = path_index(&[a, b, c], &counts);
                    assert_eq!(i, a + 2 * b + 6 * c);
                    seen[i] = true;
                }
            }
        }
        assert!(seen.into_iter().all(|s| s));
    }
}
