//! Numerical tolerances shared by every construction and check.

use serde::{Deserialize, Serialize};

/// Max-abs Hermiticity deviation, PSD floor, and trace slack accepted by state constructors.
pub const CONSTRUCTION_TOL: f64 = 1e-10;
/// Slack for algebraic identities (projector axioms, unitarity of products, ...).
pub const ALGEBRA_TOL: f64 = 1e-9;
/// Eigenvalues in `[-CLIP_TOL, 0)` are clipped to zero when forming spectra.
pub const CLIP_TOL: f64 = 1e-12;
/// Spectra whose sum drifts from one by less than this are renormalized.
pub const RENORM_TOL: f64 = 1e-9;
/// Largest total Hilbert-space dimension any dense operator may have.
pub const MAX_DIM: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub construction: f64,
    pub algebra: f64,
    pub clip: f64,
    pub renorm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { construction: CONSTRUCTION_TOL, algebra: ALGEBRA_TOL, clip: CLIP_TOL, renorm: RENORM_TOL }
    }
}
