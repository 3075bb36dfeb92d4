//! Average-to-worst-case wrapper: Alice tries `N_w` fixed rotations `U_i P U_i†` of her
//! input, snaps each to the best nearby net point, runs the base protocol on the best
//! `(i, net point)` pair, and appends `i` to the message so Bob can undo the rotation.

use std::sync::Arc;

use super::ensemble::{conjugate_by_adjoint, OutcomeEnsemble};
use super::{bits_for, check_input, check_unitaries, Calibration, RspProtocol, UnitarySource};
use crate::error::{Error, Result};
use crate::grassmann::{grassmann_distance, FlatInput, RandomNet};
use crate::qcore::linalg::{self, CMat};
use crate::qcore::random::{derive_rng, haar_unitary_matrix, streams};
use crate::qcore::state::{DensityMatrix, Spectrum};

/// The set of points the rotated input is snapped to.
#[derive(Clone, Debug)]
pub enum NetChoice {
    /// A finite random net; each rotated input is replaced by a net point within its radius.
    Random(RandomNet),
    /// The whole Grassmannian: the rotated input itself is used (distance 0). This is the
    /// limit of ever finer nets and needs no covering at large `d`.
    Exact,
}

pub struct WorstCaseProtocol {
    base: Arc<dyn RspProtocol>,
    delta: f64,
    net: NetChoice,
    unitaries: Vec<CMat>,
    /// `(base error, net index)` sorted by error, then index.
    ranked: Vec<(f64, usize)>,
    seed: Option<u64>,
}

/// Best choice found for one input.
struct Choice {
    round: usize,
    point: FlatInput,
    base_error: f64,
    ensemble: Option<OutcomeEnsemble>,
}

/// Hardens `base`; for `delta ≥ 1` the base protocol already meets the budget and is returned.
pub fn avg_to_worst(
    base: Arc<dyn RspProtocol>,
    delta: f64,
    net: NetChoice,
    source: UnitarySource,
    calib: &Calibration,
) -> Result<Arc<dyn RspProtocol>> {
    if delta >= 1.0 {
        return Ok(base);
    }
    Ok(Arc::new(WorstCaseProtocol::build(base, delta, net, source, calib)?))
}

impl WorstCaseProtocol {
    pub fn build(
        base: Arc<dyn RspProtocol>,
        delta: f64,
        net: NetChoice,
        source: UnitarySource,
        calib: &Calibration,
    ) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Domain(format!("delta must lie in (0,1), got {delta}")));
        }
        let d = base.d();
        if let NetChoice::Random(n) = &net {
            if n.d() != d || n.k() != base.k() {
                return Err(Error::Shape(format!(
                    "net over G({},{}) for a G({},{}) protocol",
                    n.d(),
                    n.k(),
                    d,
                    base.k()
                )));
            }
        }
        let (unitaries, seed) = match source {
            UnitarySource::Explicit(list) => {
                check_unitaries(&list, d)?;
                (list, None)
            }
            UnitarySource::Auto { count, seed } => {
                let n = count.unwrap_or_else(|| calib.worst_rounds(delta)).min(calib.worst_budget_cap);
                if n == 0 {
                    return Err(Error::InvalidBudget("wrapper needs at least one rotation".into()));
                }
                let mut rng = derive_rng(seed, streams::WORST_UNITARIES, 0);
                let list = (0..n).map(|_| haar_unitary_matrix(d, &mut rng)).collect::<Result<Vec<_>>>()?;
                (list, Some(seed))
            }
        };
        let ranked = match &net {
            NetChoice::Random(n) => {
                let mut errs = n
                    .points()
                    .iter()
                    .enumerate()
                    .map(|(j, p)| Ok((base.run_exact(p, false)?.error_against(p), j)))
                    .collect::<Result<Vec<_>>>()?;
                errs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                errs
            }
            NetChoice::Exact => Vec::new(),
        };
        Ok(Self { base, delta, net, unitaries, ranked, seed })
    }

    pub fn rounds(&self) -> usize {
        self.unitaries.len()
    }

    pub fn base(&self) -> &Arc<dyn RspProtocol> {
        &self.base
    }

    fn choose(&self, input: &FlatInput, with_joint: bool) -> Result<Choice> {
        let mut best: Option<Choice> = None;
        for (i, u) in self.unitaries.iter().enumerate() {
            let rotated = input.rotated(u)?;
            let bar = best.as_ref().map_or(f64::INFINITY, |b| b.base_error);
            match &self.net {
                NetChoice::Random(net) => {
                    for &(err, j) in &self.ranked {
                        if err >= bar {
                            break;
                        }
                        let point = &net.points()[j];
                        if grassmann_distance(point, &rotated)? <= net.target_radius() {
                            best = Some(Choice { round: i, point: point.clone(), base_error: err, ensemble: None });
                            break;
                        }
                    }
                }
                NetChoice::Exact => {
                    let ens = self.base.run_exact(&rotated, with_joint)?;
                    let err = ens.error_against(&rotated);
                    if err < bar {
                        best = Some(Choice { round: i, point: rotated, base_error: err, ensemble: Some(ens) });
                    }
                }
            }
        }
        best.ok_or_else(|| {
            Error::DegenerateNet(format!(
                "none of the {} rotated inputs has a net point within the target radius",
                self.rounds()
            ))
        })
    }

    /// Round and base error the wrapper selects on `input`.
    pub fn selection(&self, input: &FlatInput) -> Result<(usize, f64)> {
        check_input(self.d(), self.k(), input)?;
        let c = self.choose(input, false)?;
        Ok((c.round, c.base_error))
    }
}

impl RspProtocol for WorstCaseProtocol {
    fn name(&self) -> &'static str {
        "avg2worst"
    }

    fn d(&self) -> usize {
        self.base.d()
    }

    fn k(&self) -> usize {
        self.base.k()
    }

    fn num_messages(&self) -> u64 {
        self.rounds() as u64 * self.base.num_messages()
    }

    /// Base message plus the index of the chosen rotation, encoded separately.
    fn message_bits(&self) -> u32 {
        self.base.message_bits() + bits_for(self.rounds() as u64)
    }

    fn shared_state_spectrum(&self) -> Spectrum {
        self.base.shared_state_spectrum()
    }

    fn ebits(&self) -> f64 {
        self.base.ebits()
    }

    fn supports_joint(&self) -> bool {
        self.base.supports_joint()
    }

    fn run_exact(&self, input: &FlatInput, with_joint: bool) -> Result<OutcomeEnsemble> {
        check_input(self.d(), self.k(), input)?;
        let choice = self.choose(input, with_joint)?;
        let ensemble = match choice.ensemble {
            Some(e) => e,
            None => self.base.run_exact(&choice.point, with_joint)?,
        };
        let u = &self.unitaries[choice.round];
        let offset = choice.round as u64 * self.base.num_messages();
        let undo_target = |rho: &DensityMatrix| conjugate_by_adjoint(rho, u);
        let undo_joint = |rho: &DensityMatrix| {
            let regs = rho.registers().to_vec();
            let last = regs.len().saturating_sub(1);
            let full = if regs.len() <= 1 { u.clone() } else { linalg::embed(u, &[last], &regs) };
            conjugate_by_adjoint(rho, &full)
        };
        ensemble.map(undo_target, undo_joint, |c| offset + c)
    }

    fn describe(&self) -> serde_json::Value {
        let net = match &self.net {
            NetChoice::Random(n) => serde_json::json!({
                "kind": "random",
                "budget": n.budget(),
                "target_radius": n.target_radius(),
            }),
            NetChoice::Exact => serde_json::json!({ "kind": "exact" }),
        };
        serde_json::json!({
            "protocol": "avg2worst",
            "delta": self.delta,
            "rotations": self.rounds(),
            "rotation_seed": self.seed,
            "net": net,
            "message_bits": self.message_bits(),
            "base": self.base.describe(),
        })
    }
}
