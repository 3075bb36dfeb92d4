use std::sync::Arc;

use super::ensemble::{Outcome, OutcomeEnsemble};
use super::{check_input, RspProtocol};
use crate::error::{Error, Result};
use crate::grassmann::FlatInput;
use crate::qcore::state::{DensityMatrix, Spectrum};

/// No entanglement, no message: Bob always outputs `I/d`.
#[derive(Clone, Debug)]
pub struct TrivialProtocol {
    d: usize,
    k: usize,
}

impl TrivialProtocol {
    pub fn new(d: usize, k: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if k == 0 || k > d {
            return Err(Error::InvalidRank { d, k });
        }
        Ok(Self { d, k })
    }
}

impl RspProtocol for TrivialProtocol {
    fn name(&self) -> &'static str {
        "trivial"
    }

    fn d(&self) -> usize {
        self.d
    }

    fn k(&self) -> usize {
        self.k
    }

    fn num_messages(&self) -> u64 {
        1
    }

    fn shared_state_spectrum(&self) -> Spectrum {
        Spectrum::point_mass(1).expect("nonempty")
    }

    fn ebits(&self) -> f64 {
        0.0
    }

    fn supports_joint(&self) -> bool {
        false
    }

    fn run_exact(&self, input: &FlatInput, _with_joint: bool) -> Result<OutcomeEnsemble> {
        check_input(self.d, self.k, input)?;
        let mixed = Arc::new(DensityMatrix::maximally_mixed(self.d)?);
        OutcomeEnsemble::new(vec![Outcome { label: 0, prob: 1.0, bob_state: mixed, bob_joint: None }])
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::json!({ "protocol": "trivial", "d": self.d, "k": self.k, "message_bits": 0, "ebits": 0.0 })
    }
}
