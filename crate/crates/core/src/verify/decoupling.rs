use rayon::prelude::*;
use serde::Serialize;

use crate::entropy::renyi2_conditional;
use crate::error::{Error, Result};
use crate::grassmann::FlatInput;
use crate::protocols::mean_stderr;
use crate::qcore::linalg::{self, CMat};
use crate::qcore::measures::schatten_norm_matrix;
use crate::qcore::random::{derive_rng, haar_unitary_matrix, streams};
use crate::qcore::registers::partial_trace;
use crate::qcore::state::DensityMatrix;

/// Monte Carlo estimates of the plain and post-selected decoupling errors over Haar `U` on
/// `A = A₁A₂`, with their bounds. Conditional collision entropies use the marginal `ρ^E`
/// as the conditioning state, so conditional bounds are surrogates; unconditioned variants
/// are reported alongside.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecouplingReport {
    pub d1: usize,
    pub d2: usize,
    pub k: usize,
    pub env_dim: usize,
    pub trials: usize,
    pub seed: u64,
    /// `H₂(A|E)` with `σ^E = ρ^E`.
    pub h2_conditional: f64,
    /// `H₂(A)` of the marginal on `A₁A₂`.
    pub h2_unconditioned: f64,
    /// `E_U ‖Tr_{A₁}(UρU†) − I/d₂ ⊗ ρ^E‖₂`.
    pub plain_lhs_2norm: f64,
    pub plain_lhs_2norm_stderr: f64,
    /// `√(2^{−H₂(A|E)}/d₁)`.
    pub plain_rhs_2norm: f64,
    /// `E_U ‖Tr_{A₁}(UρU†) − I/d₂ ⊗ ρ^E‖₁`.
    pub plain_lhs_1norm: f64,
    pub plain_lhs_1norm_stderr: f64,
    /// `√(d₂ 2^{−H₂(A|E)}/d₁)`.
    pub plain_rhs_1norm: f64,
    /// `E_U p ‖PτP/p − P/k ⊗ ρ^E‖₁` with `τ = Tr_{A₁}(UρU†)`.
    pub lhs_estimate: f64,
    pub lhs_stderr: f64,
    /// `(k √(2^{−H₂(A|E)}/(d₁d₂)), √(2^{−H₂(A)}/(d₁d₂)))`.
    pub rhs_terms: (f64, f64),
    /// `lhs_estimate / rhs_terms.0`.
    pub ratio: f64,
    /// `lhs_estimate / (k √(2^{−H₂(A)}/(d₁d₂)))`.
    pub ratio_unconditioned: f64,
}

struct TrialValues {
    plain2: f64,
    plain1: f64,
    post: f64,
}

/// `ρ` lives on `(A₁, A₂)` or `(A₁, A₂, E)` with register dimensions `d1`, `d2`.
pub fn decoupling_experiment(
    d1: usize,
    d2: usize,
    k: usize,
    rho: &DensityMatrix,
    trials: usize,
    seed: u64,
) -> Result<DecouplingReport> {
    if trials == 0 {
        return Err(Error::InvalidBudget("decoupling needs at least one trial".into()));
    }
    let regs = rho.registers().to_vec();
    if !(regs.len() == 2 || regs.len() == 3) || regs[0] != d1 || regs[1] != d2 {
        return Err(Error::Structure(format!("expected registers ({d1}, {d2}[, E]), got {regs:?}")));
    }
    if k == 0 || k > d2 {
        return Err(Error::InvalidRank { d: d2, k });
    }
    let env_dim = regs.get(2).copied().unwrap_or(1);
    let h2_conditional = renyi2_conditional(rho, &[0, 1])?;
    let h2_unconditioned = renyi2_conditional(&partial_trace(rho, &[0, 1])?, &[0, 1])?;
    let rho_e =
        if env_dim > 1 { linalg::partial_trace_matrix(rho.matrix(), &regs, &[2]) } else { CMat::identity(1, 1) };

    let keep: Vec<usize> = (1..regs.len()).collect();
    let plain_target = linalg::kron(&CMat::identity(d2, d2).unscale(d2 as f64), &rho_e);
    let p = FlatInput::standard(d2, k)?;
    let p_full = linalg::kron(p.projector().matrix(), &CMat::identity(env_dim, env_dim));
    let post_target = linalg::kron(&p.projector().matrix().unscale(k as f64), &rho_e);
    let id_e = CMat::identity(env_dim, env_dim);

    let values = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = derive_rng(seed, streams::VERIFY, i);
            let u = haar_unitary_matrix(d1 * d2, &mut rng)?;
            let full = linalg::kron(&u, &id_e);
            let tau = &full * rho.matrix() * full.adjoint();
            let tau_rest = linalg::partial_trace_matrix(&tau, &regs, &keep);
            let plain = &tau_rest - &plain_target;
            let projected = &p_full * &tau_rest * &p_full;
            let prob = linalg::trace(&projected).re;
            let post = linalg::hermitize(&(projected - post_target.scale(prob)));
            Ok(TrialValues {
                plain2: plain.norm(),
                plain1: schatten_norm_matrix(&linalg::hermitize(&plain), 1.0)?,
                post: schatten_norm_matrix(&post, 1.0)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let (plain_lhs_2norm, plain_lhs_2norm_stderr) = mean_stderr(&values.iter().map(|v| v.plain2).collect::<Vec<_>>());
    let (plain_lhs_1norm, plain_lhs_1norm_stderr) = mean_stderr(&values.iter().map(|v| v.plain1).collect::<Vec<_>>());
    let (lhs_estimate, lhs_stderr) = mean_stderr(&values.iter().map(|v| v.post).collect::<Vec<_>>());
    let cond = 2f64.powf(-h2_conditional);
    let uncond = 2f64.powf(-h2_unconditioned);
    let (d1f, d2f, kf) = (d1 as f64, d2 as f64, k as f64);
    let first = kf * (cond / (d1f * d2f)).sqrt();
    let second = (uncond / (d1f * d2f)).sqrt();
    Ok(DecouplingReport {
        d1,
        d2,
        k,
        env_dim,
        trials,
        seed,
        h2_conditional,
        h2_unconditioned,
        plain_lhs_2norm,
        plain_lhs_2norm_stderr,
        plain_rhs_2norm: (cond / d1f).sqrt(),
        plain_lhs_1norm,
        plain_lhs_1norm_stderr,
        plain_rhs_1norm: (d2f * cond / d1f).sqrt(),
        lhs_estimate,
        lhs_stderr,
        rhs_terms: (first, second),
        ratio: lhs_estimate / first,
        ratio_unconditioned: lhs_estimate / (kf * second),
    })
}
