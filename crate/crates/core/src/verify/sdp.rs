//! The program `max Tr(Pρ) s.t. Tr(Qρ) ≥ t` over density matrices: its closed-form optimum
//! `F(‖PQP‖_∞, t)` and an independent local-ascent oracle over pure states.

use rand::Rng;

use super::check_projector;
use crate::error::{Error, Result};
use crate::grassmann::{truncated_fidelity, FlatInput};
use crate::qcore::linalg::{self, CMat, CVec};
use crate::qcore::random::ginibre;
use crate::qcore::state::Operator;

fn check_pair(p: &CMat, q: &CMat) -> Result<()> {
    check_projector(p, "P")?;
    check_projector(q, "Q")?;
    if p.nrows() != q.nrows() {
        return Err(Error::Shape(format!("P is {}-dimensional, Q is {}-dimensional", p.nrows(), q.nrows())));
    }
    Ok(())
}

/// `‖PQP‖_∞`, as the largest squared singular value of `PQ`.
pub fn jordan_principal_overlap(p: &Operator, q: &Operator) -> Result<f64> {
    check_pair(p.matrix(), q.matrix())?;
    let s = linalg::singular_values(&(p.matrix() * q.matrix()));
    Ok(s.first().map_or(0.0, |x| (x * x).min(1.0)))
}

/// Optimal value `F(‖PQP‖_∞, t)`, with `‖PQP‖_∞ = σ_max(QV)²` for an orthonormal basis `V`
/// of the range of `P`.
pub fn sdp_closed_form(p: &FlatInput, q: &Operator, t: f64) -> Result<f64> {
    check_pair(p.projector().matrix(), q.matrix())?;
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Domain(format!("threshold must lie in (0,1), got {t}")));
    }
    let s = linalg::singular_values(&(q.matrix() * p.basis()));
    let overlap = s.first().map_or(0.0, |x| (x * x).min(1.0));
    truncated_fidelity(overlap, t)
}

#[derive(Clone, Copy, Debug)]
pub struct SdpOracleOptions {
    pub restarts: usize,
    /// Multiplier updates of the augmented Lagrangian.
    pub outer_iterations: usize,
    /// Projected-gradient steps per multiplier update.
    pub inner_iterations: usize,
}

impl Default for SdpOracleOptions {
    fn default() -> Self {
        Self { restarts: 50, outer_iterations: 40, inner_iterations: 200 }
    }
}

fn expectation(a: &CMat, psi: &CVec) -> f64 {
    psi.dotc(&(a * psi)).re
}

fn normalized(v: CVec) -> Option<CVec> {
    let n = v.norm();
    (n > 1e-300).then(|| v.unscale(n))
}

/// Moves an infeasible `ψ` along `ψ + αQψ` (which raises `⟨Q⟩` monotonically towards 1)
/// to the smallest `α` that restores `⟨Q⟩ ≥ t`.
fn repair(psi: CVec, q: &CMat, t: f64) -> Option<CVec> {
    if expectation(q, &psi) >= t {
        return Some(psi);
    }
    let qpsi = q * &psi;
    if qpsi.norm() < 1e-14 {
        return None;
    }
    let at = |alpha: f64| normalized(&psi + qpsi.scale(alpha));
    let feasible = |alpha: f64| at(alpha).is_some_and(|v| expectation(q, &v) >= t);
    let mut hi = 1.0;
    while !feasible(hi) {
        hi *= 2.0;
        if hi > 1e16 {
            return normalized(qpsi);
        }
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    at(hi)
}

/// `⟨P⟩ − (max(0, λ + ρ(t − ⟨Q⟩))² − λ²)/(2ρ)`.
fn augmented(p: &CMat, q: &CMat, t: f64, lambda: f64, rho: f64, psi: &CVec) -> f64 {
    let mu = (lambda + rho * (t - expectation(q, psi))).max(0.0);
    expectation(p, psi) - (mu * mu - lambda * lambda) / (2.0 * rho)
}

/// Augmented-Lagrangian ascent on the unit sphere for `max ⟨P⟩` s.t. `t − ⟨Q⟩ ≤ 0`, with
/// backtracking (Armijo) steps along the retracted tangent gradient.
fn ascend(p: &CMat, q: &CMat, t: f64, mut psi: CVec, opts: &SdpOracleOptions) -> CVec {
    let mut lambda = 0.0f64;
    let mut rho = 10.0f64;
    for _ in 0..opts.outer_iterations {
        let mut step = 1.0 / (1.0 + lambda + rho);
        let mut value = augmented(p, q, t, lambda, rho, &psi);
        for _ in 0..opts.inner_iterations {
            let mu = (lambda + rho * (t - expectation(q, &psi))).max(0.0);
            let grad = p * &psi + (q * &psi).scale(mu);
            let along = psi.dotc(&grad);
            let tangent = &grad - &psi * along;
            let slope = tangent.norm_squared();
            if slope < 1e-26 {
                break;
            }
            let mut accepted = false;
            for _ in 0..40 {
                if let Some(next) = normalized(&psi + tangent.scale(step)) {
                    let v = augmented(p, q, t, lambda, rho, &next);
                    if v >= value + 1e-4 * step * slope {
                        psi = next;
                        value = v;
                        accepted = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
            step *= 2.0;
        }
        lambda = (lambda + rho * (t - expectation(q, &psi))).max(0.0);
        rho = (rho * 1.2).min(100.0);
    }
    psi
}

/// Best feasible pure-state value from `restarts` random starts in `span(range P ∪ range Q)`.
/// Shares no code with [`sdp_closed_form`] beyond basic linear algebra; every returned value
/// is attained by an explicit feasible state, so it lower-bounds the optimum.
pub fn sdp_oracle<R: Rng + ?Sized>(
    p: &FlatInput,
    q: &Operator,
    t: f64,
    opts: &SdpOracleOptions,
    rng: &mut R,
) -> Result<f64> {
    let pm = p.projector().matrix();
    check_pair(pm, q.matrix())?;
    if t > 1.0 {
        return Err(Error::Infeasible(format!("Tr(Qρ) ≥ {t} is unattainable")));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("threshold must be nonnegative, got {t}")));
    }
    if opts.restarts == 0 {
        return Err(Error::InvalidBudget("oracle needs at least one restart".into()));
    }
    let span = linalg::range_basis(&(pm + q.matrix()), 1e-10);
    let pc = linalg::hermitize(&(span.adjoint() * pm * &span));
    let qc = linalg::hermitize(&(span.adjoint() * q.matrix() * &span));
    let s = span.ncols();
    let mut best = f64::NEG_INFINITY;
    for _ in 0..opts.restarts {
        let start = ginibre(s, 1, rng).column(0).into_owned();
        let Some(start) = normalized(start) else { continue };
        let psi = ascend(&pc, &qc, t, start, opts);
        if let Some(feasible) = repair(psi, &qc, t) {
            best = best.max(expectation(&pc, &feasible));
        }
    }
    if best == f64::NEG_INFINITY {
        return Err(Error::Infeasible("no feasible state found".into()));
    }
    Ok(best.clamp(0.0, 1.0))
}
