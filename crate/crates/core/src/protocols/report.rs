use serde::{Deserialize, Serialize};

use super::{ErrorEstimate, RspProtocol};
use crate::qcore::state::Spectrum;

/// Communication, entanglement and correctness of one protocol experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub protocol: String,
    pub d: usize,
    pub k: usize,
    pub m: u32,
    pub ebits: f64,
    pub shared_state_spectrum: Spectrum,
    pub error_estimate: ErrorEstimate,
    pub config_echo: serde_json::Value,
    pub wall_time_ms: u64,
}

impl ResourceReport {
    pub fn from_protocol(
        proto: &dyn RspProtocol,
        error_estimate: ErrorEstimate,
        config_echo: serde_json::Value,
        wall_time_ms: u64,
    ) -> Self {
        Self {
            protocol: proto.name().to_string(),
            d: proto.d(),
            k: proto.k(),
            m: proto.message_bits(),
            ebits: proto.ebits(),
            shared_state_spectrum: proto.shared_state_spectrum(),
            error_estimate,
            config_echo,
            wall_time_ms,
        }
    }

    /// A report with hand-chosen figures, for auditing hypothetical protocols.
    pub fn synthetic(d: usize, k: usize, m: u32, eps_r: f64, spectrum: Spectrum) -> Self {
        let ebits = (spectrum.values().iter().filter(|&&v| v > 0.0).count() as f64).log2();
        Self {
            protocol: "synthetic".into(),
            d,
            k,
            m,
            ebits,
            shared_state_spectrum: spectrum,
            error_estimate: ErrorEstimate {
                eps_a: eps_r,
                eps_a_stderr: 0.0,
                eps_r,
                eps_r_stderr: 0.0,
                eps_w_lower: eps_r,
                trials: 0,
                adversarial_sweep: 0,
                seed: 0,
                records: Vec::new(),
            },
            config_echo: serde_json::Value::Null,
            wall_time_ms: 0,
        }
    }

    pub fn eps_r(&self) -> f64 {
        self.error_estimate.eps_r
    }
}
