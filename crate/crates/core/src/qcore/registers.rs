//! Tensor-factor bookkeeping: partial traces, maximally entangled states, Schmidt spectra.

use super::linalg::{self, c, CMat, CVec};
use super::state::{DensityMatrix, Operator, PureState, Spectrum};
use crate::error::{Error, Result};

fn check_subset(registers: &[usize], subset: &[usize], what: &str) -> Result<()> {
    if registers.is_empty() {
        return Err(Error::Structure(format!("{what}: operator has no register metadata")));
    }
    let mut seen = vec![false; registers.len()];
    for &r in subset {
        if r >= registers.len() {
            return Err(Error::Structure(format!("{what}: register {r} out of range (have {})", registers.len())));
        }
        if seen[r] {
            return Err(Error::Structure(format!("{what}: register {r} listed twice")));
        }
        seen[r] = true;
    }
    Ok(())
}

/// Reduced state on the registers in `keep` (returned in the order given).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    check_subset(rho.registers(), keep, "partial trace")?;
    let regs = rho.registers();
    let reduced = linalg::partial_trace_matrix(rho.matrix(), regs, keep);
    let kept: Vec<usize> = keep.iter().map(|&r| regs[r]).collect();
    let kept = if kept.is_empty() { vec![1] } else { kept };
    DensityMatrix::from_matrix(linalg::hermitize(&reduced), kept)
}

/// Partial trace of an arbitrary structured operator.
pub fn partial_trace_operator(op: &Operator, keep: &[usize]) -> Result<Operator> {
    check_subset(op.registers(), keep, "partial trace")?;
    let regs = op.registers();
    let reduced = linalg::partial_trace_matrix(op.matrix(), regs, keep);
    let kept: Vec<usize> = keep.iter().map(|&r| regs[r]).collect();
    Operator::new(reduced, if kept.is_empty() { vec![1] } else { kept })
}

/// `(1/√d) Σ_i |i⟩|i⟩` on registers `[d, d]`.
pub fn maximally_entangled(d: usize) -> Result<PureState> {
    if d == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let mut amps = CVec::zeros(d * d);
    let a = c(1.0 / (d as f64).sqrt());
    for i in 0..d {
        amps[i * d + i] = a;
    }
    PureState::new(amps, vec![d, d])
}

/// Reshapes a pure state across the cut `first | rest` into a matrix with rows indexed by
/// the `first` registers.
pub fn bipartite_matrix(psi: &PureState, first: &[usize]) -> Result<CMat> {
    let regs = psi.registers();
    check_subset(regs, first, "Schmidt cut")?;
    if first.is_empty() || first.len() == regs.len() {
        return Err(Error::Structure("Schmidt cut must split registers into two nonempty groups".into()));
    }
    let rest: Vec<usize> = (0..regs.len()).filter(|r| !first.contains(r)).collect();
    let row_off = linalg::offsets(regs, first);
    let col_off = linalg::offsets(regs, &rest);
    let amps = psi.amplitudes();
    Ok(CMat::from_fn(row_off.len(), col_off.len(), |i, j| amps[row_off[i] + col_off[j]]))
}

/// Squared Schmidt coefficients across the cut, descending.
pub fn schmidt_spectrum(psi: &PureState, first: &[usize]) -> Result<Spectrum> {
    let m = bipartite_matrix(psi, first)?;
    let raw: Vec<f64> = linalg::singular_values(&m).iter().map(|s| s * s).collect();
    Spectrum::from_eigenvalues(raw)
}
