use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::RspProtocol;
use crate::error::Result;
use crate::qcore::random::{derive_rng, sample_flat, streams};

/// Per-input outcome of one trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub adversarial: bool,
    pub input_hash: String,
    pub per_input_error: f64,
    pub relaxed_error: f64,
    pub message_index_distribution_entropy: f64,
}

/// Monte Carlo estimates of the three error measures. Only the input is sampled; the
/// average over messages is exact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub eps_a: f64,
    pub eps_a_stderr: f64,
    pub eps_r: f64,
    pub eps_r_stderr: f64,
    /// Largest per-input error seen over all trials and the adversarial sweep.
    pub eps_w_lower: f64,
    pub trials: usize,
    pub adversarial_sweep: usize,
    pub seed: u64,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

/// Sample mean and its standard error.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

fn evaluate(proto: &dyn RspProtocol, seed: u64, stream: u64, index: u64, adversarial: bool) -> Result<TrialRecord> {
    let mut rng = derive_rng(seed, stream, index);
    let p = sample_flat(proto.d(), proto.k(), &mut rng)?;
    let ens = proto.run_exact(&p, false)?;
    Ok(TrialRecord {
        trial_index: index,
        adversarial,
        input_hash: p.input_hash(),
        per_input_error: ens.error_against(&p),
        relaxed_error: ens.relaxed_error(&p),
        message_index_distribution_entropy: ens.message_entropy(),
    })
}

/// Estimates `ε_a`, `ε_r` over `trials` Haar inputs and a lower bound on `ε_w` from those
/// plus `adversarial_sweep` further inputs. Trial `i` always uses the stream derived from
/// `(seed, i)`, and results are reduced in index order, so the estimate does not depend on
/// how the trials are scheduled across threads.
pub fn estimate_errors(
    proto: &dyn RspProtocol,
    trials: usize,
    seed: u64,
    adversarial_sweep: usize,
) -> Result<ErrorEstimate> {
    let main: Vec<TrialRecord> = (0..trials as u64)
        .into_par_iter()
        .map(|i| evaluate(proto, seed, streams::TRIALS, i, false))
        .collect::<Result<Vec<_>>>()?;
    let sweep: Vec<TrialRecord> = (0..adversarial_sweep as u64)
        .into_par_iter()
        .map(|i| evaluate(proto, seed, streams::SWEEP, i, true))
        .collect::<Result<Vec<_>>>()?;
    let errs: Vec<f64> = main.iter().map(|r| r.per_input_error).collect();
    let relaxed: Vec<f64> = main.iter().map(|r| r.relaxed_error).collect();
    let (eps_a, eps_a_stderr) = mean_stderr(&errs);
    let (eps_r, eps_r_stderr) = mean_stderr(&relaxed);
    let eps_w_lower = main.iter().chain(&sweep).map(|r| r.per_input_error).fold(0.0f64, f64::max);
    let mut records = main;
    records.extend(sweep);
    Ok(ErrorEstimate {
        eps_a,
        eps_a_stderr,
        eps_r,
        eps_r_stderr,
        eps_w_lower,
        trials,
        adversarial_sweep,
        seed,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::TrivialProtocol;

    #[test]
    fn trivial_protocol_error_is_closed_form() {
        let proto = TrivialProtocol::new(6, 2).unwrap();
        let est = estimate_errors(&proto, 20, 3, 5).unwrap();
        let expected = 1.0 - 2.0 / 6.0;
        assert!((est.eps_a - expected).abs() < 1e-9);
        assert!((est.eps_r - expected).abs() < 1e-9);
        assert!((est.eps_w_lower - expected).abs() < 1e-9);
        assert_eq!(est.records.len(), 25);
    }

    #[test]
    fn mean_and_stderr() {
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0]);
        assert!((m - 2.0).abs() < 1e-15);
        assert!((s - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
