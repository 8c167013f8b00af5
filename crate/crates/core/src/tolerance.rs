//! Central tolerance ladder shared by every module.

use serde::{Deserialize, Serialize};

/// Construction checks (unitarity, Hermiticity, orthonormality).
pub const CONSTRUCTION_TOL: f64 = 1e-10;
/// Equality assertions on exact identities (normalization, closed forms).
pub const EQUALITY_TOL: f64 = 1e-12;
/// Classification of witness values as zero / nonzero.
pub const ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub construction: f64,
    pub equality: f64,
    pub zero: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            construction: CONSTRUCTION_TOL,
            equality: EQUALITY_TOL,
            zero: ZERO_TOL,
        }
    }
}

impl Tolerances {
    pub fn with_zero(mut self, zero: f64) -> Self {
        self.zero = zero;
        self
    }
}
