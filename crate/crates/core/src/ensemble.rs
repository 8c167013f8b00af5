//! Real-path ensembles: coherent summation over unmeasured slots, marginals,
//! and the direct signalling witness.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pathspace::{enumerate_virtual_paths, path_index, MeasurementSchedule, VirtualPath};
use crate::qalg::StateVector;

/// Outcomes over the measured slots only, in slot order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealPath {
    pub outcomes: Vec<usize>,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    measured_mask: Vec<bool>,
    /// Eigenvalues of every slot of the originating schedule, indexed by slot.
    eigenvalues: Vec<Vec<f64>>,
    paths: Vec<RealPath>,
}

impl Ensemble {
    /// Groups virtual paths by their measured outcomes and squares the coherent sums.
    pub fn from_virtual_paths(
        schedule: &MeasurementSchedule,
        virtual_paths: &[VirtualPath],
        mask: &[bool],
    ) -> Result<Self> {
        if mask.len() != schedule.slot_count() {
            return Err(Error::InvalidSchedule(format!(
                "mask of length {} for {} slots",
                mask.len(),
                schedule.slot_count()
            )));
        }
        if !mask.iter().any(|&m| m) {
            return Err(Error::NoMeasuredSlots);
        }
        let all_counts = schedule.outcome_counts();
        let counts: Vec<usize> = select(&all_counts, mask);
        let total: usize = counts.iter().product();

        let mut sums = vec![StateVector::zeros(schedule.dim()); total];
        for path in virtual_paths {
            let idx = path_index(&select(&path.outcomes, mask), &counts);
            sums[idx].add_assign(&path.branch);
        }
        let paths = sums
            .iter()
            .enumerate()
            .map(|(idx, v)| RealPath {
                outcomes: unrank(idx, &counts),
                probability: v.norm_sqr(),
            })
            .collect();
        Ok(Self {
            measured_mask: mask.to_vec(),
            eigenvalues: schedule
                .slots()
                .iter()
                .map(|s| s.observable.eigenvalues())
                .collect(),
            paths,
        })
    }

    pub fn measured_mask(&self) -> &[bool] {
        &self.measured_mask
    }

    /// Schedule indices of the measured slots.
    pub fn measured_slots(&self) -> Vec<usize> {
        (0..self.measured_mask.len())
            .filter(|&i| self.measured_mask[i])
            .collect()
    }

    pub fn paths(&self) -> &[RealPath] {
        &self.paths
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.paths.iter().map(|p| p.probability).collect()
    }

    pub fn total_probability(&self) -> f64 {
        self.paths.iter().map(|p| p.probability).sum()
    }

    pub fn slot_eigenvalues(&self, slot: usize) -> &[f64] {
        &self.eigenvalues[slot]
    }

    /// Eigenvalue labels of a real path, one per measured slot.
    pub fn labels(&self, path: &RealPath) -> Vec<f64> {
        self.measured_slots()
            .iter()
            .zip(&path.outcomes)
            .map(|(&slot, &q)| self.eigenvalues[slot][q])
            .collect()
    }

    /// Total probability of the paths whose outcome at `slot` is `outcome`.
    pub fn outcome_probability(&self, slot: usize, outcome: usize) -> Result<f64> {
        let pos = self.position_of(slot)?;
        Ok(self
            .paths
            .iter()
            .filter(|p| p.outcomes[pos] == outcome)
            .map(|p| p.probability)
            .sum())
    }

    fn position_of(&self, slot: usize) -> Result<usize> {
        if slot >= self.measured_mask.len() || !self.measured_mask[slot] {
            return Err(Error::SlotNotMeasured(slot));
        }
        Ok(self.measured_mask[..slot].iter().filter(|&&m| m).count())
    }
}

fn select<T: Copy>(values: &[T], mask: &[bool]) -> Vec<T> {
    values
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(&v, _)| v)
        .collect()
}

fn unrank(mut idx: usize, counts: &[usize]) -> Vec<usize> {
    counts
        .iter()
        .map(|&n| {
            let q = idx % n;
            idx /= n;
            q
        })
        .collect()
}

/// The ensemble produced by the schedule's own measured flags.
pub fn real_ensemble(schedule: &MeasurementSchedule) -> Result<Ensemble> {
    let mask = schedule.measured_mask();
    if !mask.iter().any(|&m| m) {
        return Err(Error::NoMeasuredSlots);
    }
    let paths = enumerate_virtual_paths(schedule)?;
    Ensemble::from_virtual_paths(schedule, &paths, &mask)
}

/// Sums probabilities over the outcomes of `slot` (a non-selective reading).
pub fn marginalize(e: &Ensemble, slot: usize) -> Result<Ensemble> {
    let pos = e.position_of(slot)?;
    let mut mask = e.measured_mask.clone();
    mask[slot] = false;
    if !mask.iter().any(|&m| m) {
        return Err(Error::NoMeasuredSlots);
    }
    let counts: Vec<usize> = e
        .measured_slots()
        .iter()
        .filter(|&&s| s != slot)
        .map(|&s| e.eigenvalues[s].len())
        .collect();
    let total: usize = counts.iter().product();
    let mut probs = vec![0.0; total];
    for path in &e.paths {
        let mut rest = path.outcomes.clone();
        rest.remove(pos);
        probs[path_index(&rest, &counts)] += path.probability;
    }
    Ok(Ensemble {
        measured_mask: mask,
        eigenvalues: e.eigenvalues.clone(),
        paths: probs
            .into_iter()
            .enumerate()
            .map(|(idx, probability)| RealPath {
                outcomes: unrank(idx, &counts),
                probability,
            })
            .collect(),
    })
}

fn check_middle(schedule: &MeasurementSchedule, middle_slot: usize) -> Result<usize> {
    let k = schedule.slot_count();
    if k < 3 {
        return Err(Error::BadSlotIndex(format!(
            "signalling needs at least 3 slots, schedule has {k}"
        )));
    }
    let last = k - 1;
    if middle_slot == 0 || middle_slot >= last {
        return Err(Error::BadSlotIndex(format!(
            "middle slot {middle_slot} is not strictly inside 0..{last}"
        )));
    }
    let mask = schedule.measured_mask();
    if !mask[..middle_slot].iter().any(|&m| m) {
        return Err(Error::BadSlotIndex(format!(
            "no measured slot before slot {middle_slot}"
        )));
    }
    if !mask[last] {
        return Err(Error::BadSlotIndex(format!(
            "final slot {last} is not measured"
        )));
    }
    Ok(last)
}

/// Final-slot outcome distributions with the middle slot measured
/// (non-selectively) and unmeasured.
fn final_distributions(
    schedule: &MeasurementSchedule,
    middle_slot: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let last = check_middle(schedule, middle_slot)?;
    let paths = enumerate_virtual_paths(schedule)?;
    let mut mask = schedule.measured_mask();
    let n_final = schedule.slots()[last].observable.outcome_count();

    mask[middle_slot] = true;
    let with = Ensemble::from_virtual_paths(schedule, &paths, &mask)?;
    mask[middle_slot] = false;
    let without = Ensemble::from_virtual_paths(schedule, &paths, &mask)?;

    let dist = |e: &Ensemble| -> Result<Vec<f64>> {
        (0..n_final)
            .map(|q| e.outcome_probability(last, q))
            .collect()
    };
    Ok((dist(&with)?, dist(&without)?))
}

/// `Prob(final = outcome | middle measured) - Prob(final = outcome | middle not measured)`.
///
/// The final slot is the last slot of the schedule. Other slots keep their
/// measured flags.
pub fn signalling_delta(
    schedule: &MeasurementSchedule,
    middle_slot: usize,
    final_outcome: usize,
) -> Result<f64> {
    let (with, without) = final_distributions(schedule, middle_slot)?;
    if final_outcome >= with.len() {
        return Err(Error::BadSlotIndex(format!(
            "final outcome {final_outcome} out of range (slot has {} outcomes)",
            with.len()
        )));
    }
    Ok(with[final_outcome] - without[final_outcome])
}

/// Total-variation distance between the two final distributions, `sum |dP| / 2`.
pub fn signalling_total_variation(
    schedule: &MeasurementSchedule,
    middle_slot: usize,
) -> Result<f64> {
    let (with, without) = final_distributions(schedule, middle_slot)?;
    Ok(with
        .iter()
        .zip(&without)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        / 2.0)
}
