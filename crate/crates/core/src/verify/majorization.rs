use std::collections::BTreeMap;

use super::AuditReport;
use crate::error::{Error, Result};
use crate::grassmann::FlatInput;
use crate::protocols::RspProtocol;
use crate::qcore::linalg::{self, CMat};
use crate::qcore::state::Spectrum;

/// Slack accepted on each prefix-sum inequality.
pub const MAJORIZATION_TOL: f64 = 1e-8;

/// Checks `λ ⪯ Σ_c p(c) ν_c` for the uniform prior over `prior`: `λ` is the shared-state
/// Schmidt spectrum, and `ν_c` the spectrum of Bob's average full-register state given
/// message `c`. Reports the worst prefix, with `margin` the smallest prefix-sum gap.
pub fn check_majorization_bound(proto: &dyn RspProtocol, prior: &[FlatInput]) -> Result<AuditReport> {
    if !proto.supports_joint() {
        return Err(Error::Unsupported(format!("{} does not expose Bob's joint states", proto.name())));
    }
    if prior.is_empty() {
        return Err(Error::Domain("prior must contain at least one input".into()));
    }
    let weight = 1.0 / prior.len() as f64;
    // label → (p(c), Σ_P p(P) p(c|P) ω_{P,c})
    let mut by_label: BTreeMap<u64, (f64, CMat)> = BTreeMap::new();
    for p in prior {
        for o in proto.run_exact(p, true)?.outcomes() {
            let joint = o
                .bob_joint
                .as_ref()
                .ok_or_else(|| Error::Unsupported(format!("{} omitted a joint state", proto.name())))?;
            let w = weight * o.prob;
            let entry = by_label.entry(o.label).or_insert_with(|| (0.0, CMat::zeros(joint.dim(), joint.dim())));
            if entry.1.nrows() != joint.dim() {
                return Err(Error::Shape(format!("message {} has joint states of different sizes", o.label)));
            }
            entry.0 += w;
            entry.1 += joint.matrix().scale(w);
        }
    }
    let lambda = proto.shared_state_spectrum();
    let width = by_label.values().map(|(_, m)| m.nrows()).max().unwrap_or(1).max(lambda.len());
    let mut average = vec![0.0; width];
    for (pc, unnormalized) in by_label.values() {
        if *pc <= 0.0 {
            continue;
        }
        let nu = linalg::hermitian_eigenvalues(&linalg::hermitize(&unnormalized.unscale(*pc)));
        for (a, v) in average.iter_mut().zip(nu) {
            *a += pc * v.max(0.0);
        }
    }
    let lam = lambda.padded(width);
    let (mut sl, mut sa) = (0.0, 0.0);
    let (mut worst_l, mut worst_a, mut worst_j) = (0.0, 0.0, 0);
    let mut slack = f64::INFINITY;
    for j in 0..width {
        sl += lam[j];
        sa += average[j];
        if sa - sl < slack {
            slack = sa - sl;
            worst_l = sl;
            worst_a = sa;
            worst_j = j + 1;
        }
    }
    let avg_spec = Spectrum::from_eigenvalues(average)?;
    Ok(AuditReport::new("majorization", worst_l, worst_a, MAJORIZATION_TOL).with_parameters(serde_json::json!({
        "protocol": proto.name(),
        "d": proto.d(),
        "k": proto.k(),
        "prior_size": prior.len(),
        "messages": by_label.len(),
        "worst_prefix": worst_j,
        "shared_spectrum_len": lambda.len(),
        "average_spectrum_top": avg_spec.values().first().copied(),
    })))
}
