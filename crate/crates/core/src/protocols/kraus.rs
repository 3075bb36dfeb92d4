//! Single-shot measurement protocol on a shared maximally entangled state of dimension `d`.
//!
//! Alice measures her half with `M_i ∝ U_i P̄ U_i†` (completed by a failure element
//! `M_e = √(I − M/‖M‖_∞)`), sends `i`, and Bob applies `U_iᵀ` to recover `P/k` exactly.

use std::sync::Arc;

use rand::Rng;

use super::ensemble::{Outcome, OutcomeEnsemble};
use super::{check_input, check_unitaries, Calibration, RspProtocol, UnitarySource};
use crate::error::{Error, Result};
use crate::grassmann::FlatInput;
use crate::qcore::linalg::{self, CMat};
use crate::qcore::measures::psd_operator_norm;
use crate::qcore::random::{derive_rng, haar_unitary_matrix, sample_flat, streams};
use crate::qcore::registers::maximally_entangled;
use crate::qcore::state::{DensityMatrix, Spectrum};

/// Failure branches lighter than this are dropped from the ensemble.
const NEGLIGIBLE: f64 = 1e-14;

#[derive(Clone, Debug)]
pub struct KrausProtocol {
    d: usize,
    k: usize,
    eps_a: f64,
    unitaries: Vec<CMat>,
    seed: Option<u64>,
    attempts: usize,
    validated_failure: Option<f64>,
    c_kraus: f64,
}

/// `M = (d/(kN)) Σ_i U_i P̄ U_i†` together with `‖M‖_∞`.
struct MeasurementOperator {
    m: CMat,
    norm: f64,
}

pub fn build_kraus_protocol(
    d: usize,
    k: usize,
    eps_a: f64,
    source: UnitarySource,
    calib: &Calibration,
) -> Result<KrausProtocol> {
    if d == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if k == 0 || k > d {
        return Err(Error::InvalidRank { d, k });
    }
    if !(eps_a > 0.0 && eps_a < 1.0) {
        return Err(Error::Domain(format!("target error must lie in (0,1), got {eps_a}")));
    }
    match source {
        UnitarySource::Explicit(unitaries) => {
            check_unitaries(&unitaries, d)?;
            Ok(KrausProtocol {
                d,
                k,
                eps_a,
                unitaries,
                seed: None,
                attempts: 0,
                validated_failure: None,
                c_kraus: calib.c_kraus,
            })
        }
        UnitarySource::Auto { count, seed } => {
            let n = count.unwrap_or_else(|| calib.kraus_n(d, k, eps_a));
            if n == 0 {
                return Err(Error::InvalidBudget("Kraus protocol needs at least one unitary".into()));
            }
            let mut last_failure = f64::NAN;
            for attempt in 0..calib.retry_cap {
                let mut rng = derive_rng(seed, streams::KRAUS_UNITARIES, attempt as u64);
                let unitaries = (0..n).map(|_| haar_unitary_matrix(d, &mut rng)).collect::<Result<Vec<_>>>()?;
                let mut proto = KrausProtocol {
                    d,
                    k,
                    eps_a,
                    unitaries,
                    seed: Some(seed),
                    attempts: attempt + 1,
                    validated_failure: None,
                    c_kraus: calib.c_kraus,
                };
                let mut vrng = derive_rng(seed, streams::KRAUS_VALIDATION, attempt as u64);
                let failure = proto.mean_failure(calib.validation_inputs, &mut vrng)?;
                last_failure = failure;
                if failure <= eps_a {
                    proto.validated_failure = Some(failure);
                    return Ok(proto);
                }
            }
            Err(Error::Construction {
                attempts: calib.retry_cap,
                reason: format!("mean failure probability {last_failure:.4} of the last draw exceeds target {eps_a}"),
            })
        }
    }
}

impl KrausProtocol {
    pub fn unitaries(&self) -> &[CMat] {
        &self.unitaries
    }

    pub fn n(&self) -> usize {
        self.unitaries.len()
    }

    fn measurement(&self, input: &FlatInput) -> MeasurementOperator {
        let d = self.d;
        let vbar = linalg::conj(input.basis());
        let nk = self.n() * self.k;
        let mut stacked = CMat::zeros(d, nk);
        for (i, u) in self.unitaries.iter().enumerate() {
            stacked.columns_mut(i * self.k, self.k).copy_from(&(u * &vbar));
        }
        let scale = d as f64 / (self.k as f64 * self.n() as f64);
        let m = linalg::hermitize(&(&stacked * stacked.adjoint()).scale(scale));
        let norm = psd_operator_norm(&m);
        MeasurementOperator { m, norm }
    }

    /// Failure probability `1 − 1/‖M‖_∞` on input `P`.
    pub fn failure_probability(&self, input: &FlatInput) -> Result<f64> {
        check_input(self.d, self.k, input)?;
        let meas = self.measurement(input);
        Ok((1.0 - 1.0 / meas.norm).max(0.0))
    }

    /// Mean failure probability over `inputs` fresh Haar inputs.
    pub fn mean_failure<R: Rng + ?Sized>(&self, inputs: usize, rng: &mut R) -> Result<f64> {
        let mut total = 0.0;
        for _ in 0..inputs {
            let p = sample_flat(self.d, self.k, rng)?;
            total += self.failure_probability(&p)?;
        }
        Ok(total / inputs.max(1) as f64)
    }

    /// The measurement elements `(M_1, …, M_N, M_e)` on input `P`.
    pub fn kraus_operators(&self, input: &FlatInput) -> Result<(Vec<CMat>, CMat)> {
        check_input(self.d, self.k, input)?;
        let meas = self.measurement(input);
        let pbar = linalg::conj(input.projector().matrix());
        let amp = (self.d as f64 / (self.k as f64 * self.n() as f64 * meas.norm)).sqrt();
        let elements = self.unitaries.iter().map(|u| (u * &pbar * u.adjoint()).scale(amp)).collect();
        let id = CMat::identity(self.d, self.d);
        let fail = linalg::psd_sqrt(&(id - meas.m.unscale(meas.norm)));
        Ok((elements, fail))
    }

    /// Bob's corrected target state after outcome `i`, computed from scratch: apply `M_i` to
    /// Alice's half of `|Φ₊⟩`, trace her out, then apply Bob's correction `U_iᵀ`.
    pub fn physical_success_state(&self, input: &FlatInput, i: usize) -> Result<(f64, DensityMatrix)> {
        if i >= self.n() {
            return Err(Error::Domain(format!("outcome {i} out of range for N = {}", self.n())));
        }
        let (elements, _) = self.kraus_operators(input)?;
        let d = self.d;
        let phi = maximally_entangled(d)?;
        let op = linalg::kron(&elements[i], &CMat::identity(d, d));
        let branch = op * phi.amplitudes();
        let joint = &branch * branch.adjoint();
        let bob = linalg::partial_trace_matrix(&joint, &[d, d], &[1]);
        let prob = linalg::trace(&bob).re;
        let u = &self.unitaries[i];
        let corrected = u.transpose() * bob * linalg::conj(u);
        let state = DensityMatrix::from_unnormalized(linalg::hermitize(&corrected), vec![d])?;
        Ok((prob, state))
    }
}

impl RspProtocol for KrausProtocol {
    fn name(&self) -> &'static str {
        "kraus"
    }

    fn d(&self) -> usize {
        self.d
    }

    fn k(&self) -> usize {
        self.k
    }

    fn num_messages(&self) -> u64 {
        self.n() as u64 + 1
    }

    fn shared_state_spectrum(&self) -> Spectrum {
        Spectrum::uniform(self.d).expect("d >= 1")
    }

    fn ebits(&self) -> f64 {
        (self.d as f64).log2()
    }

    fn run_exact(&self, input: &FlatInput, with_joint: bool) -> Result<OutcomeEnsemble> {
        check_input(self.d, self.k, input)?;
        let d = self.d;
        let meas = self.measurement(input);
        let success_prob = 1.0 / (self.n() as f64 * meas.norm);
        let failure = (1.0 - 1.0 / meas.norm).max(0.0);
        // After U_iᵀ the residual state is exactly P/k for every i, so all success messages
        // share one state object.
        let target = Arc::new(input.flat_state());
        let mut outcomes: Vec<Outcome> = (0..self.n())
            .map(|i| Outcome {
                label: i as u64,
                prob: success_prob,
                bob_state: target.clone(),
                bob_joint: with_joint.then(|| target.clone()),
            })
            .collect();
        if failure > NEGLIGIBLE {
            let mixed = Arc::new(DensityMatrix::maximally_mixed(d)?);
            let joint = if with_joint {
                let residual = CMat::identity(d, d) - meas.m.unscale(meas.norm);
                let literal = linalg::conj(&residual).unscale(d as f64 * failure);
                Some(Arc::new(DensityMatrix::from_matrix(linalg::hermitize(&literal), vec![d])?))
            } else {
                None
            };
            outcomes.push(Outcome { label: self.n() as u64, prob: failure, bob_state: mixed, bob_joint: joint });
        } else {
            // Renormalize away the negligible failure mass.
            let total = success_prob * self.n() as f64;
            for o in &mut outcomes {
                o.prob /= total;
            }
        }
        OutcomeEnsemble::new(outcomes)
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::json!({
            "protocol": "kraus",
            "d": self.d,
            "k": self.k,
            "eps_a": self.eps_a,
            "n_unitaries": self.n(),
            "unitary_seed": self.seed,
            "attempts": self.attempts,
            "validated_mean_failure": self.validated_failure,
            "c_kraus": self.c_kraus,
            "message_bits": self.message_bits(),
            "ebits": self.ebits(),
        })
    }
}
