use super::AuditReport;
use crate::error::{Error, Result};
use crate::grassmann::{truncated_fidelity, FlatInput};
use crate::qcore::linalg::{self, CMat};
use crate::qcore::state::DensityMatrix;

/// `(weight, P, ω_P)` with `ω_P` a state on `B₁ ⊗ B₂` and `P` acting on `B₂`.
pub type WeightedInput = (f64, FlatInput, DensityMatrix);

const WEIGHT_TOL: f64 = 1e-9;

/// Bounds the top-`l` eigenvalue sum of `ω = Σ_P μ(P) ω_P` by
/// `F(k/d + A(√log₂K + √l)/√d, 1 − ε)` with `ε = Σ_P μ(P) Tr(ω_P (I ⊗ (I − P)))`.
pub fn check_eigval_bound(mu: &[WeightedInput], density_bound: f64, l: usize, a_cal: f64) -> Result<AuditReport> {
    let (_, first, omega0) = mu.first().ok_or_else(|| Error::Domain("empty measure".into()))?;
    let (d, k) = (first.d(), first.k());
    let regs = omega0.registers().to_vec();
    if regs.len() != 2 || regs[1] != d {
        return Err(Error::Shape(format!("ω_P must live on (B₁, B₂ = {d}), got registers {regs:?}")));
    }
    if !(density_bound >= 1.0) {
        return Err(Error::Domain(format!("density bound K must be ≥ 1, got {density_bound}")));
    }
    let total = regs[0] * d;
    if l == 0 || l > total {
        return Err(Error::Domain(format!("prefix length must lie in 1..={total}, got {l}")));
    }
    let wsum: f64 = mu.iter().map(|(w, _, _)| w).sum();
    if (wsum - 1.0).abs() > WEIGHT_TOL || mu.iter().any(|(w, _, _)| !(*w >= 0.0)) {
        return Err(Error::Domain(format!("weights must be nonnegative and sum to 1, got {wsum}")));
    }
    let mut omega = CMat::zeros(total, total);
    let mut eps = 0.0;
    for (w, p, om) in mu {
        if p.d() != d || p.k() != k || om.registers() != regs.as_slice() {
            return Err(Error::Shape("inconsistent dimensions across the measure".into()));
        }
        omega += om.matrix().scale(*w);
        let complement = CMat::identity(d, d) - p.projector().matrix();
        let outside = linalg::embed(&complement, &[1], &regs);
        eps += w * linalg::trace_product(om.matrix(), &outside).re;
    }
    let eps = eps.clamp(0.0, 1.0);
    let eig = linalg::hermitian_eigenvalues(&linalg::hermitize(&omega));
    let lhs: f64 = eig.iter().take(l).sum();
    let x = k as f64 / d as f64 + a_cal / (d as f64).sqrt() * (density_bound.log2().sqrt() + (l as f64).sqrt());
    let rhs = truncated_fidelity(x, 1.0 - eps)?;
    Ok(AuditReport::new("eigenvalue_sum", lhs, rhs, 1e-9).with_parameters(serde_json::json!({
        "d": d,
        "k": k,
        "b1": regs[0],
        "l": l,
        "density_bound": density_bound,
        "a_cal": a_cal,
        "eps": eps,
        "points": mu.len(),
        "fidelity_argument": x,
    })))
}
