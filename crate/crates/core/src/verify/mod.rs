//! Numerical checks of the supporting mathematics: the truncated-fidelity SDP, spectrum
//! majorization, decoupling, concentration of Haar functionals, the eigenvalue-sum bound
//! and the communication/entanglement lower bounds.

mod audit;
mod concentration;
mod decoupling;
mod eigval;
mod majorization;
mod sdp;

pub use audit::{audit_resource_bounds, communication_lower_bound};
pub use concentration::{concentration_experiment, ConcentrationKind, ConcentrationReport, TAIL_THRESHOLDS};
pub use decoupling::{decoupling_experiment, DecouplingReport};
pub use eigval::{check_eigval_bound, WeightedInput};
pub use majorization::check_majorization_bound;
pub use sdp::{jordan_principal_overlap, sdp_closed_form, sdp_oracle, SdpOracleOptions};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::linalg::{max_abs, CMat};

/// One inequality `lhs ≤ rhs`, evaluated with its margin `rhs − lhs`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
    /// The inequality holds trivially for these parameters (e.g. smoothing parameter ≥ 1).
    pub vacuous: bool,
    pub tolerance: f64,
    pub parameters: serde_json::Value,
    pub provenance: serde_json::Value,
}

impl AuditReport {
    pub fn new(name: &str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let margin = rhs - lhs;
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            margin,
            pass: margin >= -tolerance,
            vacuous: false,
            tolerance,
            parameters: serde_json::Value::Null,
            provenance: serde_json::Value::Null,
        }
    }

    pub fn vacuous(name: &str, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            lhs: f64::NEG_INFINITY,
            rhs: f64::INFINITY,
            margin: f64::INFINITY,
            pass: true,
            vacuous: true,
            tolerance,
            parameters: serde_json::Value::Null,
            provenance: serde_json::Value::Null,
        }
    }

    pub fn with_parameters(mut self, parameters: serde_json::Value) -> Self {
        self.parameters = parameters;
        self
    }

    pub fn with_provenance(mut self, provenance: serde_json::Value) -> Self {
        self.provenance = provenance;
        self
    }
}

/// Idempotence and Hermiticity slack accepted for projector arguments.
pub const PROJECTOR_TOL: f64 = 1e-8;

pub(crate) fn check_projector(q: &CMat, what: &str) -> Result<()> {
    if q.nrows() != q.ncols() {
        return Err(Error::Shape(format!("{what} is {:?}, not square", q.shape())));
    }
    if max_abs(&(q * q - q)) > PROJECTOR_TOL || max_abs(&(q.adjoint() - q)) > PROJECTOR_TOL {
        return Err(Error::Domain(format!("{what} is not an orthogonal projector")));
    }
    Ok(())
}
