use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::protocols::mean_stderr;
use crate::qcore::linalg::{self, CMat};
use crate::qcore::measures::psd_operator_norm;
use crate::qcore::random::{derive_rng, sample_flat, streams};
use crate::qcore::state::Operator;

/// Deviation thresholds at which exceedance fractions are tabulated.
pub const TAIL_THRESHOLDS: [f64; 3] = [0.05, 0.1, 0.2];

/// Functional of a Haar-random rank-`k` projector `P` on `C^d`.
#[derive(Clone, Debug)]
pub enum ConcentrationKind {
    /// `Tr(AP)` for a Hermitian `A`; its mean is `k Tr(A)/d`.
    Trace(Operator),
    /// `‖Q (I_{b1} ⊗ P) Q‖_∞` for a projector `Q` on `C^{b1} ⊗ C^d`.
    Spectral { q: Operator, b1: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub kind: &'static str,
    pub d: usize,
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
    pub mean: f64,
    pub stderr: f64,
    /// Closed-form mean, when known.
    pub expected_mean: Option<f64>,
    /// Whether the empirical mean is within `3·stderr` of the closed form.
    pub mean_consistent: Option<bool>,
    /// Fraction of samples deviating from the reference mean by more than each threshold.
    pub tails: Vec<(f64, f64)>,
    pub tails_monotone: bool,
}

pub fn concentration_experiment(
    d: usize,
    k: usize,
    kind: &ConcentrationKind,
    trials: usize,
    seed: u64,
) -> Result<ConcentrationReport> {
    if trials < 100 {
        return Err(Error::InvalidBudget(format!("need at least 100 trials, got {trials}")));
    }
    if k == 0 || k > d {
        return Err(Error::InvalidRank { d, k });
    }
    let (name, expected) = match kind {
        ConcentrationKind::Trace(a) => {
            if a.dim() != d || !a.is_hermitian(1e-9) {
                return Err(Error::Shape(format!("A must be a Hermitian {d}x{d} operator")));
            }
            ("trace", Some(k as f64 * linalg::trace(a.matrix()).re / d as f64))
        }
        ConcentrationKind::Spectral { q, b1 } => {
            if q.dim() != b1 * d {
                return Err(Error::Shape(format!("Q must act on {b1}x{d} dimensions, got {}", q.dim())));
            }
            super::check_projector(q.matrix(), "Q")?;
            ("spectral", None)
        }
    };
    let samples = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = derive_rng(seed, streams::VERIFY, i);
            let p = sample_flat(d, k, &mut rng)?;
            Ok(match kind {
                ConcentrationKind::Trace(a) => linalg::trace(&(p.basis().adjoint() * a.matrix() * p.basis())).re,
                ConcentrationKind::Spectral { q, b1 } => {
                    let lifted = linalg::kron(&CMat::identity(*b1, *b1), p.projector().matrix());
                    psd_operator_norm(&linalg::hermitize(&(q.matrix() * lifted * q.matrix())))
                }
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, stderr) = mean_stderr(&samples);
    let reference = expected.unwrap_or(mean);
    let tails: Vec<(f64, f64)> = TAIL_THRESHOLDS
        .iter()
        .map(|&t| (t, samples.iter().filter(|&&x| (x - reference).abs() > t).count() as f64 / trials as f64))
        .collect();
    let tails_monotone = tails.windows(2).all(|w| w[1].1 <= w[0].1);
    Ok(ConcentrationReport {
        kind: name,
        d,
        k,
        trials,
        seed,
        mean,
        stderr,
        expected_mean: expected,
        mean_consistent: expected.map(|e| (mean - e).abs() <= 3.0 * stderr + 1e-12),
        tails,
        tails_monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_no_fluctuation() {
        let a = Operator::identity(6).unwrap();
        let rep = concentration_experiment(6, 2, &ConcentrationKind::Trace(a), 100, 3).unwrap();
        assert!((rep.mean - 2.0).abs() < 1e-12);
        assert!(rep.stderr < 1e-12);
        assert_eq!(rep.mean_consistent, Some(true));
        assert!(rep.tails.iter().all(|&(_, f)| f == 0.0));
    }

    #[test]
    fn too_few_trials_rejected() {
        let a = Operator::identity(2).unwrap();
        assert!(concentration_experiment(2, 1, &ConcentrationKind::Trace(a), 10, 0).is_err());
    }
}
