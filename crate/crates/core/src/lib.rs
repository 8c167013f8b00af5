//! Sequential projective measurements on finite-level systems, analysed as
//! ensembles of real paths built from virtual (Feynman) paths.
//!
//! The crate provides:
//!
//! - [`qalg`]: small dense complex linear algebra and propagators,
//! - [`pathspace`]: measurement schedules and virtual-path enumeration,
//! - [`ensemble`]: real-path ensembles, marginals and the probability-shift witness,
//! - [`witness`]: correlators, quasi-probabilities, the Leggett-Garg witness and
//!   regime classification for the three-time qubit protocol,
//! - [`scan`]: grid sweeps over `(tau, T)` and CSV / JSON / PGM writers.

pub mod ensemble;
pub mod error;
pub mod pathspace;
pub mod qalg;
pub mod scan;
pub mod tolerance;
pub mod witness;

pub use ensemble::{marginalize, real_ensemble, signalling_delta, Ensemble, RealPath};
pub use error::{Error, Result};
pub use pathspace::{
    enumerate_virtual_paths, path_count, MeasurementSchedule, MeasurementSlot, VirtualPath,
};
pub use qalg::{
    hermitian_propagator, rabi_unitary, transition_amplitude, Complex, Matrix, Observable,
    StateVector, UnitaryMatrix,
};
pub use tolerance::Tolerances;
pub use witness::{
    classify, correlators_from_ensembles, lgi_witness, preexistence_check, solve_quasiprobs,
    witness_report, CorrelatorSet, QuasiProbs, Regime, WitnessReport,
};
