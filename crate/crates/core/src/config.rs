//! Numerical tolerances shared by the library, the tests and the CLI.

use serde::{Deserialize, Serialize};

/// Unitarity check on local transformations: `max |U†U - I|`.
pub const UNITARITY_TOL: f64 = 1e-10;
/// Unit-norm check on state tensors.
pub const NORM_TOL: f64 = 1e-10;
/// Orthonormality check on vector families.
pub const ORTHONORMAL_TOL: f64 = 1e-10;
/// Unit-norm check on product-state factors.
pub const UNIT_VECTOR_TOL: f64 = 1e-12;
/// Equality of quantities that should agree to rounding.
pub const EQUALITY_TOL: f64 = 1e-12;
/// Default tolerance for the canonical-form condition checker.
pub const CONDITION_TOL: f64 = 1e-9;

/// Tolerance record passed around by callers that want to override defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub unitarity: f64,
    pub norm: f64,
    pub orthonormality: f64,
    pub equality: f64,
    pub condition: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            unitarity: UNITARITY_TOL,
            norm: NORM_TOL,
            orthonormality: ORTHONORMAL_TOL,
            equality: EQUALITY_TOL,
            condition: CONDITION_TOL,
        }
    }
}
