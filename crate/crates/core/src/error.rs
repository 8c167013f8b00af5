use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (max deviation of U^dag U from I is {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("state is not normalized (squared norm {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid observable: {0}")]
    InvalidObservable(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("path enumeration would produce {paths} paths (limit {limit})")]
    EnumerationBoundExceeded { paths: u128, limit: u64 },

    #[error("no measured slots in schedule")]
    NoMeasuredSlots,

    #[error("slot {0} is not measured in this ensemble")]
    SlotNotMeasured(usize),

    #[error("bad slot index: {0}")]
    BadSlotIndex(String),

    #[error("slot {slot} has eigenvalue {value}; correlators need outcomes +1/-1")]
    EigenvalueNotPlusMinusOne { slot: usize, value: f64 },

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("failed to write {path}: {source}")]
    OutputWriteFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
