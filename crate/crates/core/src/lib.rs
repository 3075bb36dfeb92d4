//! Exact small-dimension simulation and numerical verification of remote state preparation
//! (RSP) of flat states `P/k`.
//!
//! * [`qcore`] — dense complex linear algebra, states, distances, seeded sampling.
//! * [`grassmann`] — points of `G(d,k)`, their distance, truncated fidelity, random nets.
//! * [`entropy`] — min / collision / smoothed min-entropy and majorization.
//! * [`protocols`] — RSP protocols with exact outcome ensembles, error estimation, equality.
//! * [`verify`] — numerical checks of the supporting bounds and resource audits.

// `!(x >= 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod entropy;
pub mod error;
pub mod grassmann;
pub mod protocols;
pub mod qcore;
pub mod verify;

pub use error::{Error, Result};
