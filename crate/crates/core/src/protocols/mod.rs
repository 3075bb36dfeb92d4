//! One-way RSP protocols for flat states, evaluated exactly: every run returns the complete
//! finite distribution over messages together with Bob's conditional states.

mod calibration;
mod ensemble;
mod equality;
mod estimate;
mod kraus;
mod rejection;
mod report;
mod trivial;
mod worst;

pub use calibration::Calibration;
pub use ensemble::{Outcome, OutcomeEnsemble};
pub use equality::{
    build_codebook, codebook_dimensions, equality_from_ensemble, run_equality, Codebook, CodebookOptions, EqualityRun,
};
pub use estimate::{estimate_errors, mean_stderr, ErrorEstimate, TrialRecord};
pub use kraus::{build_kraus_protocol, KrausProtocol};
pub use rejection::{build_rejection_protocol, RejectionProtocol, RejectionRun};
pub use report::ResourceReport;
pub use trivial::TrivialProtocol;
pub use worst::{avg_to_worst, NetChoice, WorstCaseProtocol};

use crate::grassmann::FlatInput;
use crate::qcore::linalg::CMat;
use crate::qcore::state::Spectrum;
use crate::Result;

/// Number of bits needed to name one of `n` messages.
pub fn bits_for(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

/// Where a protocol's unitary collection comes from.
#[derive(Clone, Debug)]
pub enum UnitarySource {
    /// Caller-supplied matrices (validated for shape and unitarity).
    Explicit(Vec<CMat>),
    /// i.i.d. Haar draws derived from `seed`; `count = None` uses the calibrated size.
    Auto { count: Option<usize>, seed: u64 },
}

/// A `(d,k)` remote-state-preparation protocol with one-way classical communication.
pub trait RspProtocol: Send + Sync {
    fn name(&self) -> &'static str;
    fn d(&self) -> usize;
    fn k(&self) -> usize;
    /// Size of the message alphabet.
    fn num_messages(&self) -> u64;
    /// Bits charged for one message.
    fn message_bits(&self) -> u32 {
        bits_for(self.num_messages())
    }
    /// Schmidt spectrum of the shared pure entangled state.
    fn shared_state_spectrum(&self) -> Spectrum;
    /// `log₂` of the Schmidt rank of the (maximally entangled) resource.
    fn ebits(&self) -> f64;
    /// Whether [`RspProtocol::run_exact`] can report Bob's full-register states.
    fn supports_joint(&self) -> bool {
        true
    }
    /// Exact output ensemble on input `P`; `with_joint` additionally records Bob's states
    /// on all of his registers.
    fn run_exact(&self, input: &FlatInput, with_joint: bool) -> Result<OutcomeEnsemble>;
    /// Reproducible description (sizes, constants, seeds — never raw matrices).
    fn describe(&self) -> serde_json::Value;
}

pub(crate) fn check_unitaries(list: &[CMat], dim: usize) -> Result<()> {
    use crate::qcore::linalg::max_abs;
    use crate::qcore::tolerance::ALGEBRA_TOL;
    use crate::Error;
    if list.is_empty() {
        return Err(Error::InvalidBudget("unitary collection is empty".into()));
    }
    for (i, u) in list.iter().enumerate() {
        if u.nrows() != dim || u.ncols() != dim {
            return Err(Error::Shape(format!("unitary {i} is {:?}, expected {dim}x{dim}", u.shape())));
        }
        if max_abs(&(u.adjoint() * u - CMat::identity(dim, dim))) > ALGEBRA_TOL {
            return Err(Error::Domain(format!("matrix {i} is not unitary")));
        }
    }
    Ok(())
}

pub(crate) fn check_input(proto_d: usize, proto_k: usize, input: &FlatInput) -> Result<()> {
    if input.d() != proto_d || input.k() != proto_k {
        return Err(crate::Error::Shape(format!(
            "protocol is for G({proto_d},{proto_k}), input is in G({},{})",
            input.d(),
            input.k()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::bits_for;

    #[test]
    fn message_bit_counts() {
        assert_eq!(bits_for(1), 0);
        assert_eq!(bits_for(2), 1);
        assert_eq!(bits_for(3), 2);
        assert_eq!(bits_for(15), 4);
        assert_eq!(bits_for(16), 4);
        assert_eq!(bits_for(17), 5);
    }
}
