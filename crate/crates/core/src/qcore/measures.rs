//! Distances and norms between states and operators.

use super::linalg::{self, CMat};
use super::state::{DensityMatrix, Operator};
use crate::error::{Error, Result};

fn same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Shape(format!("dimension mismatch: {a} vs {b}")));
    }
    Ok(())
}

/// `(1/2)‖A − B‖₁` for Hermitian matrices of equal size (no validation).
pub fn trace_distance_matrices(a: &CMat, b: &CMat) -> f64 {
    let diff = a - b;
    let s: f64 = linalg::hermitian_eigenvalues(&diff).iter().map(|x| x.abs()).sum();
    (0.5 * s).clamp(0.0, 1.0)
}

pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho.dim(), sigma.dim())?;
    Ok(trace_distance_matrices(rho.matrix(), sigma.matrix()))
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho.dim(), sigma.dim())?;
    let sr = linalg::psd_sqrt(rho.matrix());
    let inner = &sr * sigma.matrix() * &sr;
    let s: f64 = linalg::hermitian_eigenvalues(&inner).iter().map(|x| x.max(0.0).sqrt()).sum();
    Ok((s * s).clamp(0.0, 1.0))
}

/// Schatten `p`-norm; `p = f64::INFINITY` gives the operator norm.
pub fn schatten_norm(a: &Operator, p: f64) -> Result<f64> {
    schatten_norm_matrix(a.matrix(), p)
}

pub fn schatten_norm_matrix(a: &CMat, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidOrder(p));
    }
    let s = linalg::singular_values(a);
    if p.is_infinite() {
        return Ok(s.first().copied().unwrap_or(0.0));
    }
    // Scale by the largest value to avoid overflow for large p.
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = s.iter().map(|x| (x / top).powf(p)).sum();
    Ok(top * sum.powf(1.0 / p))
}

/// Largest eigenvalue of a PSD matrix, which is its operator norm.
pub fn psd_operator_norm(a: &CMat) -> f64 {
    linalg::hermitian_eigenvalues(a).first().copied().unwrap_or(0.0).max(0.0)
}
