//! Sequential rejection-sampling protocol on a shared maximally entangled state of
//! dimension `r·d` (registers `A₁A₂ | B₁B₂`, ancillas of dimension `r`).
//!
//! In round `i` Alice measures `{Q_i, I − Q_i}` with `Q_i = U_i (I_r ⊗ P̄) U_i†`; on the first
//! success she sends `i`, Bob applies `U_iᵀ` on `B₁B₂` and keeps `B₂`. If all `N` rounds fail
//! she sends a failure flag and Bob outputs a maximally mixed target.
//!
//! The simulation carries Alice's failure operator `F_i = (I−Q_i)…(I−Q_1)` instead of the
//! normalized conditional state: `ρ_i = F_i F_i† / Tr(F_i F_i†)` is exactly the rejected
//! state after `i` rounds, `p_i = Tr(Q_i ρ_{i−1})`, and Bob's unnormalized `B₁B₂` state on
//! message `i` is `conj(F_{i−1}† Q_i F_{i−1})/(rd)`. Each round costs `O((rd)²·rk)`.

use std::sync::Arc;

use super::ensemble::{Outcome, OutcomeEnsemble};
use super::{check_input, check_unitaries, Calibration, RspProtocol, UnitarySource};
use crate::error::{Error, Result};
use crate::grassmann::FlatInput;
use crate::qcore::linalg::{self, CMat};
use crate::qcore::random::{derive_rng, haar_unitary_matrix, sample_flat, streams};
use crate::qcore::state::{DensityMatrix, Spectrum};

/// Branches lighter than this are unreachable and left out.
const NEGLIGIBLE: f64 = 1e-14;
/// Conditional success probabilities this close to one end the recursion.
const CERTAIN: f64 = 1.0 - 1e-12;

#[derive(Clone, Debug)]
pub struct RejectionProtocol {
    d: usize,
    k: usize,
    r: usize,
    eps_a: f64,
    unitaries: Vec<CMat>,
    seed: Option<u64>,
    attempts: usize,
    validated_residual: Option<f64>,
    c_ancilla: f64,
    offset: usize,
}

/// Full trace of one exact run.
#[derive(Clone, Debug)]
pub struct RejectionRun {
    pub ensemble: OutcomeEnsemble,
    /// Conditional success probability `p_i` of each executed round.
    pub conditional: Vec<f64>,
    /// `∏_{j≤i} (1 − p_j)` after each executed round.
    pub survival: Vec<f64>,
}

pub fn build_rejection_protocol(
    d: usize,
    k: usize,
    eps_a: f64,
    r: Option<usize>,
    n: Option<usize>,
    source: UnitarySource,
    calib: &Calibration,
) -> Result<RejectionProtocol> {
    if d == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if k == 0 || k > d {
        return Err(Error::InvalidRank { d, k });
    }
    if !(eps_a > 0.0 && eps_a < 1.0) {
        return Err(Error::Domain(format!("target error must lie in (0,1), got {eps_a}")));
    }
    let r = r.unwrap_or_else(|| calib.rejection_ancilla(eps_a));
    if r == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let big = r * d;
    let base = |unitaries: Vec<CMat>, seed, attempts| RejectionProtocol {
        d,
        k,
        r,
        eps_a,
        unitaries,
        seed,
        attempts,
        validated_residual: None,
        c_ancilla: calib.c_ancilla,
        offset: calib.rejection_offset,
    };
    match source {
        UnitarySource::Explicit(unitaries) => {
            check_unitaries(&unitaries, big)?;
            if let Some(n) = n {
                if n != unitaries.len() {
                    return Err(Error::Shape(format!("{} unitaries supplied for N = {n}", unitaries.len())));
                }
            }
            Ok(base(unitaries, None, 0))
        }
        UnitarySource::Auto { count, seed } => {
            let rounds = n.or(count).unwrap_or_else(|| calib.rejection_rounds(d, k, eps_a));
            if rounds == 0 {
                return Err(Error::InvalidBudget("rejection protocol needs at least one round".into()));
            }
            let mut last = f64::NAN;
            for attempt in 0..calib.retry_cap {
                let mut rng = derive_rng(seed, streams::REJECTION_UNITARIES, attempt as u64);
                let unitaries = (0..rounds).map(|_| haar_unitary_matrix(big, &mut rng)).collect::<Result<Vec<_>>>()?;
                let mut proto = base(unitaries, Some(seed), attempt + 1);
                let mut vrng = derive_rng(seed, streams::REJECTION_VALIDATION, attempt as u64);
                let mut total = 0.0;
                for _ in 0..calib.validation_inputs {
                    let p = sample_flat(d, k, &mut vrng)?;
                    total += proto.residual_probability(&p)?;
                }
                last = total / calib.validation_inputs.max(1) as f64;
                if last <= eps_a {
                    proto.validated_residual = Some(last);
                    return Ok(proto);
                }
            }
            Err(Error::Construction {
                attempts: calib.retry_cap,
                reason: format!("mean residual probability {last:.4} of the last draw exceeds target {eps_a}"),
            })
        }
    }
}

impl RejectionProtocol {
    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.unitaries.len()
    }

    pub fn unitaries(&self) -> &[CMat] {
        &self.unitaries
    }

    fn big(&self) -> usize {
        self.r * self.d
    }

    /// `U_i (I_r ⊗ V̄)`, whose column space is the range of `Q_i`.
    fn isometry(&self, u: &CMat, vbar: &CMat) -> CMat {
        let (d, k) = (self.d, self.k);
        let mut w = CMat::zeros(self.big(), self.r * k);
        for a in 0..self.r {
            w.columns_mut(a * k, k).copy_from(&(u.columns(a * d, d) * vbar));
        }
        w
    }

    /// Probability that every round fails.
    pub fn residual_probability(&self, input: &FlatInput) -> Result<f64> {
        Ok(self.run_detailed(input, false)?.survival.last().copied().unwrap_or(1.0))
    }

    pub fn run_detailed(&self, input: &FlatInput, with_joint: bool) -> Result<RejectionRun> {
        check_input(self.d, self.k, input)?;
        let (d, r) = (self.d, self.r);
        let big = self.big();
        let big_f = big as f64;
        let vbar = linalg::conj(input.basis());
        let mut fail_op = CMat::identity(big, big);
        let mut survival_prev = 1.0;
        let mut outcomes = Vec::new();
        let mut conditional = Vec::new();
        let mut survival = Vec::new();
        let mut emitted = 0.0;
        let mut certain = false;
        for (i, u) in self.unitaries.iter().enumerate() {
            let w = self.isometry(u, &vbar);
            let g = w.adjoint() * &fail_op;
            let weight = g.norm_squared() / big_f;
            let p_i = if survival_prev > 0.0 { (weight / survival_prev).clamp(0.0, 1.0) } else { 0.0 };
            conditional.push(p_i);
            if weight > NEGLIGIBLE {
                // Bob's B₁B₂ state after his correction: conj(U_i† F† Q_i F U_i)/(rd·weight).
                let t = &g * u;
                let mut target = CMat::zeros(d, d);
                for a in 0..r {
                    let block = t.columns(a * d, d);
                    target += block.adjoint() * block;
                }
                let target = linalg::conj(&target).unscale(big_f * weight);
                let state = DensityMatrix::from_matrix(linalg::hermitize(&target), vec![d])?;
                let joint = if with_joint {
                    let full = linalg::conj(&(t.adjoint() * &t)).unscale(big_f * weight);
                    Some(Arc::new(DensityMatrix::from_matrix(linalg::hermitize(&full), vec![r, d])?))
                } else {
                    None
                };
                outcomes.push(Outcome { label: i as u64, prob: weight, bob_state: Arc::new(state), bob_joint: joint });
                emitted += weight;
            }
            fail_op -= &w * &g;
            let surv = fail_op.norm_squared() / big_f;
            survival.push(surv);
            survival_prev = surv;
            if p_i >= CERTAIN {
                certain = true;
                break;
            }
        }
        let residual = if certain { 0.0 } else { (1.0 - emitted).max(0.0) };
        if residual > NEGLIGIBLE {
            let mixed = DensityMatrix::maximally_mixed(d)?;
            let joint = if with_joint {
                let lit = linalg::conj(&(fail_op.adjoint() * &fail_op));
                let tr = linalg::trace(&lit).re;
                Some(Arc::new(DensityMatrix::from_matrix(linalg::hermitize(&lit.unscale(tr)), vec![r, d])?))
            } else {
                None
            };
            outcomes.push(Outcome {
                label: self.n() as u64,
                prob: residual,
                bob_state: Arc::new(mixed),
                bob_joint: joint,
            });
        } else {
            let total: f64 = outcomes.iter().map(|o| o.prob).sum();
            for o in &mut outcomes {
                o.prob /= total;
            }
        }
        Ok(RejectionRun { ensemble: OutcomeEnsemble::new(outcomes)?, conditional, survival })
    }
}

impl RspProtocol for RejectionProtocol {
    fn name(&self) -> &'static str {
        "rejection"
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
        Spectrum::uniform(self.big()).expect("rd >= 1")
    }

    fn ebits(&self) -> f64 {
        (self.big() as f64).log2()
    }

    fn run_exact(&self, input: &FlatInput, with_joint: bool) -> Result<OutcomeEnsemble> {
        Ok(self.run_detailed(input, with_joint)?.ensemble)
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::json!({
            "protocol": "rejection",
            "d": self.d,
            "k": self.k,
            "r": self.r,
            "n_rounds": self.n(),
            "eps_a": self.eps_a,
            "unitary_seed": self.seed,
            "attempts": self.attempts,
            "validated_mean_residual": self.validated_residual,
            "c_ancilla": self.c_ancilla,
            "rejection_offset": self.offset,
            "message_bits": self.message_bits(),
            "ebits": self.ebits(),
        })
    }
}
