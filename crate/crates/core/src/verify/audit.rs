use super::AuditReport;
use crate::entropy::smooth_min_entropy;
use crate::error::{Error, Result};
use crate::grassmann::truncated_fidelity;
use crate::protocols::{Calibration, ResourceReport};

const AUDIT_TOL: f64 = 1e-9;

/// `⌊log₂(d/k)⌋ + log₂(1 − ε_r)`: the fewest bits any protocol with relaxed error `ε_r`
/// can send.
pub fn communication_lower_bound(d: usize, k: usize, eps_r: f64) -> f64 {
    let mut j = 0u32;
    while (k as u128) << (j + 1) <= d as u128 {
        j += 1;
    }
    j as f64 + (1.0 - eps_r).max(0.0).log2()
}

/// Communication audit `m ≥ ⌊log₂(d/k)⌋ + log₂(1−ε_r)` and entanglement audit
/// `H_min^{δ+γ}(λ) ≥ log₂d − 3 log₂(1/γ) − c_slack` with `δ = F(k/d + a_cal √(m/d), 1−ε_r)`.
/// The entanglement audit is vacuous once `δ + γ ≥ 1`.
pub fn audit_resource_bounds(
    report: &ResourceReport,
    gamma: f64,
    calib: &Calibration,
) -> Result<(AuditReport, AuditReport)> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Domain(format!("gamma must lie in (0,1), got {gamma}")));
    }
    let (d, k, m) = (report.d, report.k, report.m);
    let eps_r = report.eps_r().clamp(0.0, 1.0);
    let provenance = serde_json::json!({
        "seed": report.error_estimate.seed,
        "trials": report.error_estimate.trials,
        "adversarial_sweep": report.error_estimate.adversarial_sweep,
    });
    let params = serde_json::json!({
        "protocol": report.protocol,
        "d": d,
        "k": k,
        "m": m,
        "eps_r": eps_r,
        "gamma": gamma,
        "a_cal": calib.a_cal,
        "c_slack": calib.c_slack,
    });

    let comm = AuditReport::new("communication", communication_lower_bound(d, k, eps_r), m as f64, AUDIT_TOL)
        .with_parameters(params.clone())
        .with_provenance(provenance.clone());

    let x = k as f64 / d as f64 + calib.a_cal * (m as f64 / d as f64).sqrt();
    let delta = truncated_fidelity(x, 1.0 - eps_r)?;
    let mut ent_params = params;
    ent_params["delta"] = serde_json::json!(delta);
    let ent = if delta + gamma >= 1.0 {
        AuditReport::vacuous("entanglement", AUDIT_TOL)
    } else {
        let smoothed = smooth_min_entropy(&report.shared_state_spectrum, delta + gamma)?;
        let required = (d as f64).log2() - 3.0 * (1.0 / gamma).log2() - calib.c_slack;
        ent_params["smooth_min_entropy"] = serde_json::json!(smoothed.entropy);
        AuditReport::new("entanglement", required, smoothed.entropy, AUDIT_TOL)
    }
    .with_parameters(ent_params)
    .with_provenance(provenance);
    Ok((comm, ent))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::state::Spectrum;

    #[test]
    fn floor_of_log_ratio() {
        assert_eq!(communication_lower_bound(8, 1, 0.0), 3.0);
        assert_eq!(communication_lower_bound(8, 3, 0.0), 1.0);
        assert_eq!(communication_lower_bound(7, 1, 0.0), 2.0);
        assert_eq!(communication_lower_bound(1, 1, 0.5), -1.0);
    }

    #[test]
    fn silent_report_with_small_error_fails() {
        let r = ResourceReport::synthetic(8, 1, 0, 0.1, Spectrum::uniform(8).unwrap());
        let (comm, _) = audit_resource_bounds(&r, 0.5, &Calibration::default()).unwrap();
        assert!(!comm.pass);
        assert!(comm.margin < 0.0);
    }

    #[test]
    fn trivial_error_level_passes() {
        let r = ResourceReport::synthetic(8, 2, 0, 0.75, Spectrum::point_mass(1).unwrap());
        let (comm, ent) = audit_resource_bounds(&r, 0.5, &Calibration::default()).unwrap();
        assert!(comm.pass);
        assert!(ent.vacuous && ent.pass);
    }
}
