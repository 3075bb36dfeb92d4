//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use flatrsp::grassmann::FlatInput;
use flatrsp::qcore::linalg::{self, CMat, CVec, C64};
use flatrsp::qcore::registers::maximally_entangled;

/// One message of the full-state rejection simulation.
pub struct OracleOutcome {
    pub prob: f64,
    /// Bob's normalized state on `B₂` after his correction.
    pub target: CMat,
    /// Bob's normalized state on `B₁B₂` after his correction.
    pub joint: CMat,
}

/// Simulates the rejection protocol on the full pure state `|Φ⟩^{A₁A₂B₁B₂}` of dimension
/// `(rd)²`: the rejected branch is carried as a vector, and every success branch is
/// corrected by `U_iᵀ` on Bob's side and reduced by explicit partial traces.
pub fn rejection_full_state(unitaries: &[CMat], r: usize, input: &FlatInput) -> Vec<OracleOutcome> {
    let d = input.d();
    let big = r * d;
    let pbar = linalg::conj(input.projector().matrix());
    let lifted = linalg::kron(&CMat::identity(r, r), &pbar);
    let id = CMat::identity(big, big);
    let mut branch: CVec = maximally_entangled(big).unwrap().amplitudes().clone();
    let mut out = Vec::new();
    for u in unitaries {
        let q = u * &lifted * u.adjoint();
        let success = linalg::kron(&q, &id) * &branch;
        branch = linalg::kron(&(&id - &q), &id) * &branch;
        let corrected = linalg::kron(&id, &u.transpose()) * success;
        let rho = &corrected * corrected.adjoint();
        let prob = linalg::trace(&rho).re;
        if prob < 1e-14 {
            continue;
        }
        let joint = linalg::partial_trace_matrix(&rho, &[r, d, r, d], &[2, 3]).unscale(prob);
        let target = linalg::partial_trace_matrix(&rho, &[r, d, r, d], &[3]).unscale(prob);
        out.push(OracleOutcome { prob, target, joint });
    }
    let rest = branch.norm_squared();
    if rest > 1e-14 {
        let rho = &branch * branch.adjoint();
        let joint = linalg::partial_trace_matrix(&rho, &[r, d, r, d], &[2, 3]).unscale(rest);
        out.push(OracleOutcome { prob: rest, target: CMat::identity(d, d).unscale(d as f64), joint });
    }
    out
}

/// `‖M‖_∞` of `M = (d/(kN)) Σ U_i P̄ U_i†`, accumulated term by term.
pub fn kraus_measurement_norm(unitaries: &[CMat], input: &FlatInput) -> f64 {
    let (d, k) = (input.d(), input.k());
    let pbar = linalg::conj(input.projector().matrix());
    let mut m = CMat::zeros(d, d);
    for u in unitaries {
        m += u * &pbar * u.adjoint();
    }
    let m = m.scale(d as f64 / (k as f64 * unitaries.len() as f64));
    linalg::hermitian_eigenvalues(&linalg::hermitize(&m))[0]
}

/// Bob's corrected state and probability for Kraus outcome `i`, from scratch.
pub fn kraus_branch(unitaries: &[CMat], input: &FlatInput, i: usize) -> (f64, CMat) {
    let (d, k) = (input.d(), input.k());
    let n = unitaries.len();
    let norm = kraus_measurement_norm(unitaries, input);
    let pbar = linalg::conj(input.projector().matrix());
    let u = &unitaries[i];
    let mi = (u * &pbar * u.adjoint()).scale((d as f64 / (k as f64 * n as f64 * norm)).sqrt());
    let phi = maximally_entangled(d).unwrap();
    let branch = linalg::kron(&mi, &CMat::identity(d, d)) * phi.amplitudes();
    let corrected = linalg::kron(&CMat::identity(d, d), &u.transpose()) * branch;
    let rho = &corrected * corrected.adjoint();
    let bob = linalg::partial_trace_matrix(&rho, &[d, d], &[1]);
    let prob = linalg::trace(&bob).re;
    (prob, bob.unscale(prob))
}

fn bloch_state(theta: f64, phi: f64) -> CVec {
    CVec::from_vec(vec![C64::new((theta / 2.0).cos(), 0.0), C64::from_polar((theta / 2.0).sin(), phi)])
}

fn quad(a: &CMat, psi: &CVec) -> f64 {
    psi.dotc(&(a * psi)).re
}

/// Brute-force `max ⟨ψ|P|ψ⟩ s.t. ⟨ψ|Q|ψ⟩ ≥ t` over qubit pure states: a `grid × grid`
/// Bloch-sphere grid, then repeated zooms of the same grid around the best feasible
/// point. Returns `None` if no grid point is feasible.
pub fn bloch_grid_optimum(p: &CMat, q: &CMat, t: f64, grid: usize, zooms: usize) -> Option<f64> {
    let pi = std::f64::consts::PI;
    let mut best: Option<(f64, f64, f64)> = None;
    let (mut th_lo, mut th_hi, mut ph_lo, mut ph_hi) = (0.0, pi, 0.0, 2.0 * pi);
    for _ in 0..=zooms {
        let dth = (th_hi - th_lo) / (grid - 1) as f64;
        let dph = (ph_hi - ph_lo) / (grid - 1) as f64;
        for a in 0..grid {
            let theta = (th_lo + a as f64 * dth).clamp(0.0, pi);
            for b in 0..grid {
                let phi = ph_lo + b as f64 * dph;
                let psi = bloch_state(theta, phi);
                if quad(q, &psi) >= t {
                    let v = quad(p, &psi);
                    if best.is_none_or(|(bv, _, _)| v > bv) {
                        best = Some((v, theta, phi));
                    }
                }
            }
        }
        let (_, theta, phi) = best?;
        th_lo = theta - 2.0 * dth;
        th_hi = theta + 2.0 * dth;
        ph_lo = phi - 2.0 * dph;
        ph_hi = phi + 2.0 * dph;
    }
    best.map(|(v, _, _)| v)
}

/// Smoothed min-entropy threshold by bisection on the (monotone) excess mass.
pub fn smooth_threshold_bisection(p: &[f64], delta: f64) -> f64 {
    let excess = |s: f64| -> f64 { p.iter().map(|&x| (x - s).max(0.0)).sum() };
    let (mut lo, mut hi) = (0.0, p.iter().copied().fold(0.0, f64::max));
    if excess(0.0) <= delta {
        return 0.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    linalg::max_abs(&(a - b))
}
