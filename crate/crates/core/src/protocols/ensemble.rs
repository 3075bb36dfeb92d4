use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grassmann::FlatInput;
use crate::qcore::linalg::{self, CMat};
use crate::qcore::measures::trace_distance_matrices;
use crate::qcore::state::DensityMatrix;

/// One message value with its probability and Bob's conditional states.
///
/// States are reference-counted because many messages of a protocol commonly leave Bob in
/// the very same state; identical `Arc`s are evaluated once by every consumer.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub label: u64,
    pub prob: f64,
    /// Bob's state on the `d`-dimensional target register after his correction.
    pub bob_state: Arc<DensityMatrix>,
    /// Bob's state on all of his registers, when requested.
    pub bob_joint: Option<Arc<DensityMatrix>>,
}

/// Exact output distribution of one protocol run on one input.
#[derive(Clone, Debug)]
pub struct OutcomeEnsemble {
    outcomes: Vec<Outcome>,
}

const PROB_FLOOR: f64 = -1e-12;
const SUM_TOL: f64 = 1e-9;

impl OutcomeEnsemble {
    pub fn new(outcomes: Vec<Outcome>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::InvalidState("empty outcome ensemble".into()));
        }
        let dim = outcomes[0].bob_state.dim();
        let mut total = 0.0;
        for o in &outcomes {
            if !(o.prob >= PROB_FLOOR) {
                return Err(Error::InvalidState(format!("outcome {} has probability {}", o.label, o.prob)));
            }
            if o.bob_state.dim() != dim {
                return Err(Error::Shape(format!(
                    "outcome {} target dimension {} != {dim}",
                    o.label,
                    o.bob_state.dim()
                )));
            }
            total += o.prob;
        }
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidState(format!("outcome probabilities sum to {total}")));
        }
        Ok(Self { outcomes })
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn total_probability(&self) -> f64 {
        self.outcomes.iter().map(|o| o.prob).sum()
    }

    pub fn target_dim(&self) -> usize {
        self.outcomes[0].bob_state.dim()
    }

    /// Probability mass per distinct target state, in first-appearance order.
    fn grouped(&self) -> Vec<(&Arc<DensityMatrix>, f64)> {
        let mut index: HashMap<*const DensityMatrix, usize> = HashMap::new();
        let mut groups: Vec<(&Arc<DensityMatrix>, f64)> = Vec::new();
        for o in &self.outcomes {
            let key = Arc::as_ptr(&o.bob_state);
            match index.get(&key) {
                Some(&g) => groups[g].1 += o.prob,
                None => {
                    index.insert(key, groups.len());
                    groups.push((&o.bob_state, o.prob));
                }
            }
        }
        groups
    }

    /// `Σ_c p(c) ‖χ_c − P/k‖_tr`.
    pub fn error_against(&self, target: &FlatInput) -> f64 {
        let flat = target.projector().matrix().unscale(target.k() as f64);
        self.grouped().into_iter().map(|(state, p)| p * trace_distance_matrices(state.matrix(), &flat)).sum()
    }

    /// `Σ_c p(c) Tr(P χ_c)`, the probability that measuring `{P, I−P}` yields `P`.
    pub fn acceptance(&self, projector: &FlatInput) -> f64 {
        let v = projector.basis();
        self.grouped()
            .into_iter()
            .map(|(state, p)| p * linalg::trace(&(v.adjoint() * state.matrix() * v)).re)
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }

    /// `Σ_c p(c) Tr((I−P) χ_c)`.
    pub fn relaxed_error(&self, target: &FlatInput) -> f64 {
        (1.0 - self.acceptance(target)).clamp(0.0, 1.0)
    }

    /// Shannon entropy (bits) of the message distribution.
    pub fn message_entropy(&self) -> f64 {
        self.outcomes.iter().filter(|o| o.prob > 0.0).map(|o| -o.prob * o.prob.log2()).sum()
    }

    /// Applies `f` to each distinct target state and `g` to each distinct joint state
    /// (evaluated once per shared `Arc`), and relabels every message.
    pub(crate) fn map(
        self,
        f: impl Fn(&DensityMatrix) -> Result<DensityMatrix>,
        g: impl Fn(&DensityMatrix) -> Result<DensityMatrix>,
        relabel: impl Fn(u64) -> u64,
    ) -> Result<Self> {
        let mut cache: HashMap<*const DensityMatrix, Arc<DensityMatrix>> = HashMap::new();
        let mut jcache: HashMap<*const DensityMatrix, Arc<DensityMatrix>> = HashMap::new();
        let mut out = Vec::with_capacity(self.outcomes.len());
        for o in self.outcomes {
            let key = Arc::as_ptr(&o.bob_state);
            let state = match cache.get(&key) {
                Some(s) => s.clone(),
                None => {
                    let s = Arc::new(f(&o.bob_state)?);
                    cache.insert(key, s.clone());
                    s
                }
            };
            let joint = match o.bob_joint {
                None => None,
                Some(j) => {
                    let key = Arc::as_ptr(&j);
                    Some(match jcache.get(&key) {
                        Some(s) => s.clone(),
                        None => {
                            let s = Arc::new(g(&j)?);
                            jcache.insert(key, s.clone());
                            s
                        }
                    })
                }
            };
            out.push(Outcome { label: relabel(o.label), prob: o.prob, bob_state: state, bob_joint: joint });
        }
        Ok(Self { outcomes: out })
    }
}

/// `U† ρ U`.
pub(crate) fn conjugate_by_adjoint(rho: &DensityMatrix, u: &CMat) -> Result<DensityMatrix> {
    let m = u.adjoint() * rho.matrix() * u;
    DensityMatrix::from_matrix(linalg::hermitize(&m), rho.registers().to_vec())
}
