//! Two-time correlators, classical-like quasi-probabilities and the three
//! signalling witnesses for the three-time qubit protocol.
//!
//! Path probabilities `p[0..4]` follow the path order of [`crate::pathspace`]:
//! `(Q2, Q3) = (+,+), (-,+), (+,-), (-,-)` with `Q1 = +1` fixed.

use std::fmt;

use serde::Serialize;

use crate::ensemble::{marginalize, signalling_delta, Ensemble};
use crate::error::{Error, Result};
use crate::pathspace::{enumerate_virtual_paths, MeasurementSchedule};
use crate::tolerance::{Tolerances, EQUALITY_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelatorSet {
    /// `<Q1 Q2>`
    pub alpha: f64,
    /// `<Q1 Q3>`
    pub beta: f64,
    /// `<Q2 Q3>`
    pub gamma: f64,
}

impl CorrelatorSet {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha, beta, gamma }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuasiProbs {
    pub p: [f64; 4],
    /// `sum |p| - 1`; zero iff every `p[i]` is non-negative.
    pub delta_p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    QuantumStochastic,
    ClassicalStochastic,
    ClassicalDeterministic,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::QuantumStochastic => "quantum_stochastic",
            Regime::ClassicalStochastic => "classical_stochastic",
            Regime::ClassicalDeterministic => "classical_deterministic",
        }
    }

    /// Grey level used in maps: deterministic < stochastic < quantum.
    pub fn level(self) -> f64 {
        match self {
            Regime::ClassicalDeterministic => 0.0,
            Regime::ClassicalStochastic => 1.0,
            Regime::QuantumStochastic => 2.0,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::QuantumStochastic => "quantum stochastic",
            Regime::ClassicalStochastic => "classical stochastic",
            Regime::ClassicalDeterministic => "classical deterministic",
        })
    }
}

/// Residuals of assigning the measured three-time path probabilities to
/// pre-existing classical paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PreexistenceCheck {
    /// Three-time path probabilities `P[1..4]`, taken as the candidate `p[i]`.
    pub path_probs: [f64; 4],
    /// `(p1 + p2) - Prob(Q3 = +1)` and `(p3 + p4) - Prob(Q3 = -1)` without the middle measurement.
    pub final_residuals: [f64; 2],
    /// `(p1 + p3) - Prob(Q2 = +1)` and `(p2 + p4) - Prob(Q2 = -1)` without the last measurement.
    pub middle_residuals: [f64; 2],
    pub feasible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessReport {
    pub tau: f64,
    pub t_final: f64,
    /// Shift of `Prob(Q3 = +1)` caused by the middle measurement.
    pub delta_prob: f64,
    pub correlators: CorrelatorSet,
    pub quasi: QuasiProbs,
    /// `<L> + 1`; negative values violate the Leggett-Garg inequality.
    pub delta_lgi: f64,
    pub preexistence: PreexistenceCheck,
    pub regime: Regime,
    pub lgi_violated: bool,
    pub negativity_detected: bool,
    pub signalling_detected: bool,
}

fn dichotomic_label(e: &Ensemble, slot: usize, outcome: usize) -> Result<f64> {
    let value = e.slot_eigenvalues(slot)[outcome];
    if (value.abs() - 1.0).abs() > EQUALITY_TOL {
        return Err(Error::EigenvalueNotPlusMinusOne { slot, value });
    }
    Ok(value.signum())
}

/// `<Q_a Q_b>` over the last two measured slots of `e`.
fn product_mean(e: &Ensemble, measured: usize) -> Result<f64> {
    let slots = e.measured_slots();
    if slots.len() != measured {
        return Err(Error::InvalidEnsemble(format!(
            "expected {measured} measured slots, found {}",
            slots.len()
        )));
    }
    let (a, b) = (slots[measured - 2], slots[measured - 1]);
    let mut mean = 0.0;
    for path in e.paths() {
        let qa = dichotomic_label(e, a, path.outcomes[measured - 2])?;
        let qb = dichotomic_label(e, b, path.outcomes[measured - 1])?;
        mean += qa * qb * path.probability;
    }
    Ok(mean)
}

/// `alpha` from the (t1, t2) ensemble, `beta` from (t1, t3), `gamma` from the
/// two later slots of the three-time ensemble.
pub fn correlators_from_ensembles(
    two_slot_12: &Ensemble,
    two_slot_13: &Ensemble,
    three_slot: &Ensemble,
) -> Result<CorrelatorSet> {
    Ok(CorrelatorSet {
        alpha: product_mean(two_slot_12, 2)?,
        beta: product_mean(two_slot_13, 2)?,
        gamma: product_mean(three_slot, 3)?,
    })
}

/// Unique solution of the three correlator equations plus normalization.
pub fn solve_quasiprobs(c: CorrelatorSet) -> QuasiProbs {
    let CorrelatorSet { alpha, beta, gamma } = c;
    let p = [
        (alpha + beta + gamma + 1.0) / 4.0,
        (-alpha + beta - gamma + 1.0) / 4.0,
        (alpha - beta - gamma + 1.0) / 4.0,
        (-alpha - beta + gamma + 1.0) / 4.0,
    ];
    let delta_p = (p.iter().map(|x| x.abs()).sum::<f64>() - 1.0).max(0.0);
    QuasiProbs { p, delta_p }
}

/// `alpha + beta + gamma + 1`; the inequality is violated when this is negative.
pub fn lgi_witness(c: CorrelatorSet) -> f64 {
    c.alpha + c.beta + c.gamma + 1.0
}

/// Probabilities over the dichotomic outcomes of the non-initial measured slots.
fn later_paths<const N: usize>(e: &Ensemble, measured: usize) -> Result<[f64; N]> {
    let slots = e.measured_slots();
    if slots.len() != measured {
        return Err(Error::InvalidEnsemble(format!(
            "expected {measured} measured slots, found {}",
            slots.len()
        )));
    }
    for &s in &slots {
        for q in 0..e.slot_eigenvalues(s).len() {
            dichotomic_label(e, s, q)?;
        }
    }
    let probs = marginalize(e, slots[0])?.probabilities();
    probs.try_into().map_err(|v: Vec<f64>| {
        Error::InvalidEnsemble(format!("expected {N} paths, found {}", v.len()))
    })
}

pub fn preexistence_check(
    three_slot: &Ensemble,
    two_slot_13: &Ensemble,
    two_slot_12: &Ensemble,
    tol: f64,
) -> Result<PreexistenceCheck> {
    let p: [f64; 4] = later_paths(three_slot, 3)?;
    let [p_final_plus, p_final_minus]: [f64; 2] = later_paths(two_slot_13, 2)?;
    let [p_mid_plus, p_mid_minus]: [f64; 2] = later_paths(two_slot_12, 2)?;
    let final_residuals = [p[0] + p[1] - p_final_plus, p[2] + p[3] - p_final_minus];
    let middle_residuals = [p[0] + p[2] - p_mid_plus, p[1] + p[3] - p_mid_minus];
    let feasible = final_residuals
        .iter()
        .chain(&middle_residuals)
        .all(|r| r.abs() < tol);
    Ok(PreexistenceCheck {
        path_probs: p,
        final_residuals,
        middle_residuals,
        feasible,
    })
}

fn regime_of(delta_prob: f64, three_slot: &Ensemble, tol: f64) -> Regime {
    if delta_prob.abs() >= tol {
        return Regime::QuantumStochastic;
    }
    let probs = three_slot.probabilities();
    let dominant = probs.iter().filter(|&&p| p >= 1.0 - tol).count();
    let carrying = probs.iter().filter(|&&p| p >= tol).count();
    if dominant == 1 && carrying == 1 {
        Regime::ClassicalDeterministic
    } else {
        Regime::ClassicalStochastic
    }
}

struct ThreeTimeEnsembles {
    delta_prob: f64,
    three: Ensemble,
    two_12: Ensemble,
    two_13: Ensemble,
}

fn three_time_ensembles(tau: f64, t_final: f64) -> Result<ThreeTimeEnsembles> {
    if !tau.is_finite() || !t_final.is_finite() {
        return Err(Error::NonFinite("grid point"));
    }
    let schedule = MeasurementSchedule::three_time_qubit(tau, t_final)?;
    let paths = enumerate_virtual_paths(&schedule)?;
    let build = |mask: [bool; 3]| Ensemble::from_virtual_paths(&schedule, &paths, &mask);
    Ok(ThreeTimeEnsembles {
        delta_prob: signalling_delta(&schedule, 1, 0)?,
        three: build([true, true, true])?,
        two_12: build([true, true, false])?,
        two_13: build([true, false, true])?,
    })
}

/// Regime of the qubit protocol at `(tau, t_final)`.
pub fn classify(tau: f64, t_final: f64, tol: f64) -> Result<Regime> {
    let e = three_time_ensembles(tau, t_final)?;
    Ok(regime_of(e.delta_prob, &e.three, tol))
}

pub fn witness_report(tau: f64, t_final: f64) -> Result<WitnessReport> {
    witness_report_with(tau, t_final, &Tolerances::default())
}

/// Every witness for the three-time qubit protocol at one `(tau, t_final)` point.
pub fn witness_report_with(tau: f64, t_final: f64, tol: &Tolerances) -> Result<WitnessReport> {
    let e = three_time_ensembles(tau, t_final)?;
    let correlators = correlators_from_ensembles(&e.two_12, &e.two_13, &e.three)?;
    let quasi = solve_quasiprobs(correlators);
    let delta_lgi = lgi_witness(correlators);
    let preexistence = preexistence_check(&e.three, &e.two_13, &e.two_12, tol.zero)?;
    let regime = regime_of(e.delta_prob, &e.three, tol.zero);
    Ok(WitnessReport {
        tau,
        t_final,
        delta_prob: e.delta_prob,
        correlators,
        quasi,
        delta_lgi,
        preexistence,
        regime,
        lgi_violated: delta_lgi < -tol.zero,
        negativity_detected: quasi.delta_p > tol.zero,
        signalling_detected: regime == Regime::QuantumStochastic,
    })
}
