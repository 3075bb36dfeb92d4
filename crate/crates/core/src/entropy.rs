//! One-shot entropies of spectra and bipartite states, and majorization.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::linalg;
use crate::qcore::state::{DensityMatrix, Spectrum};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SmoothingResult {
    /// Threshold at which the excess mass above it equals `delta`.
    pub s_star: f64,
    /// `log₂(1/s_star)` in bits (infinite once the whole mass can be smoothed away).
    pub entropy: f64,
    pub delta: f64,
}

fn nonempty(p: &Spectrum) -> Result<()> {
    if p.is_empty() {
        return Err(Error::Domain("empty spectrum".into()));
    }
    Ok(())
}

pub fn min_entropy(p: &Spectrum) -> Result<f64> {
    nonempty(p)?;
    Ok(-p.values()[0].log2())
}

pub fn renyi2_entropy(p: &Spectrum) -> Result<f64> {
    nonempty(p)?;
    let collision: f64 = p.values().iter().map(|x| x * x).sum();
    Ok(-collision.log2())
}

/// `Σ_{p_i > s} (p_i − s)`.
pub fn excess_mass(p: &[f64], s: f64) -> f64 {
    p.iter().filter(|&&x| x > s).map(|&x| x - s).sum()
}

/// Exact smoothed min-entropy of a classical spectrum.
///
/// The excess mass is piecewise linear in the threshold: on `[p_{j+1}, p_j]` it equals
/// `c_j − j·s` with `c_j` the sum of the `j` largest entries, so the threshold solving
/// `excess = delta` is found by walking the sorted spectrum once.
pub fn smooth_min_entropy(p: &Spectrum, delta: f64) -> Result<SmoothingResult> {
    nonempty(p)?;
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::Domain(format!("smoothing parameter must lie in [0,1], got {delta}")));
    }
    let v = p.values();
    let mut prefix = 0.0;
    for j in 0..v.len() {
        prefix += v[j];
        let lower = if j + 1 < v.len() { v[j + 1] } else { 0.0 };
        let count = (j + 1) as f64;
        if prefix - count * lower >= delta {
            let s_star = ((prefix - delta) / count).min(v[0]);
            return Ok(SmoothingResult { s_star, entropy: -s_star.log2(), delta });
        }
    }
    Ok(SmoothingResult { s_star: 0.0, entropy: f64::INFINITY, delta })
}

/// `−log₂ Tr[((ρ^E)^{−1/4} ρ^{AE} (ρ^E)^{−1/4})²]` with the inverse taken on the support of
/// the marginal. `system` lists the registers making up `A`; the rest form `E`.
pub fn renyi2_conditional(rho: &DensityMatrix, system: &[usize]) -> Result<f64> {
    let regs = rho.registers();
    if regs.is_empty() {
        return Err(Error::Structure("conditional entropy needs register metadata".into()));
    }
    if system.iter().any(|&r| r >= regs.len()) {
        return Err(Error::Structure(format!("system registers {system:?} out of range for {regs:?}")));
    }
    let side: Vec<usize> = (0..regs.len()).filter(|r| !system.contains(r)).collect();
    if side.is_empty() {
        let collision = rho.purity();
        return Ok(-collision.log2());
    }
    let rho_e = linalg::partial_trace_matrix(rho.matrix(), regs, &side);
    let weight = linalg::psd_power_on_support(&rho_e, -0.25);
    let full_weight = linalg::embed(&weight, &side, regs);
    let sandwiched = &full_weight * rho.matrix() * &full_weight;
    let collision = linalg::trace_product(&sandwiched, &sandwiched).re;
    Ok(-collision.log2())
}

fn padded_pair(x: &Spectrum, y: &Spectrum) -> (Vec<f64>, Vec<f64>) {
    let n = x.len().max(y.len());
    (x.padded(n), y.padded(n))
}

/// Smallest prefix-sum gap `min_l (Σ_{i≤l} x_i − Σ_{i≤l} y_i)`.
pub fn majorization_slack(x: &Spectrum, y: &Spectrum) -> f64 {
    let (a, b) = padded_pair(x, y);
    let (mut sa, mut sb) = (0.0, 0.0);
    let mut slack = f64::INFINITY;
    for (u, v) in a.iter().zip(&b) {
        sa += u;
        sb += v;
        slack = slack.min(sa - sb);
    }
    slack
}

/// Whether `x` majorizes `y` (prefix sums with 1e-10 slack).
pub fn majorizes(x: &Spectrum, y: &Spectrum) -> bool {
    majorization_slack(x, y) >= -1e-10
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::registers::maximally_entangled;

    fn spec(v: &[f64]) -> Spectrum {
        Spectrum::new(v.to_vec()).unwrap()
    }

    #[test]
    fn min_and_collision_entropy_examples() {
        assert!((min_entropy(&Spectrum::uniform(8).unwrap()).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(min_entropy(&Spectrum::point_mass(4).unwrap()).unwrap(), 0.0);
        assert!((min_entropy(&spec(&[0.5, 0.25, 0.25])).unwrap() - 1.0).abs() < 1e-12);
        assert!((renyi2_entropy(&Spectrum::uniform(8).unwrap()).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(renyi2_entropy(&Spectrum::point_mass(3).unwrap()).unwrap(), 0.0);
        assert!((renyi2_entropy(&spec(&[0.5, 0.5, 0.0])).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn smoothing_examples() {
        let p = spec(&[0.6, 0.4]);
        let r = smooth_min_entropy(&p, 0.1).unwrap();
        assert!((r.s_star - 0.5).abs() < 1e-12 && (r.entropy - 1.0).abs() < 1e-12);
        let r = smooth_min_entropy(&spec(&[1.0]), 0.5).unwrap();
        assert!((r.s_star - 0.5).abs() < 1e-12 && (r.entropy - 1.0).abs() < 1e-12);
        let q = spec(&[0.5, 0.3, 0.2]);
        assert!((smooth_min_entropy(&q, 0.0).unwrap().entropy - min_entropy(&q).unwrap()).abs() < 1e-12);
        assert!(smooth_min_entropy(&q, 1.5).is_err());
    }

    #[test]
    fn conditional_collision_entropy_examples() {
        let phi = maximally_entangled(3).unwrap().to_density();
        assert!((renyi2_conditional(&phi, &[0]).unwrap() + 3f64.log2()).abs() < 1e-9);
        let a = DensityMatrix::diagonal(&[0.7, 0.3], vec![2]).unwrap();
        let e = DensityMatrix::diagonal(&[0.1, 0.5, 0.4], vec![3]).unwrap();
        let joint = a.kron(&e).unwrap();
        let expected = renyi2_entropy(&a.spectrum().unwrap()).unwrap();
        assert!((renyi2_conditional(&joint, &[0]).unwrap() - expected).abs() < 1e-9);
        let trivial = a.kron(&DensityMatrix::maximally_mixed(1).unwrap()).unwrap();
        assert!((renyi2_conditional(&trivial, &[0]).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn majorization_examples() {
        let a = spec(&[1.0, 0.0]);
        let b = spec(&[0.5, 0.5]);
        assert!(majorizes(&a, &b));
        assert!(!majorizes(&b, &a));
        assert!(majorizes(&b, &b));
        assert!(majorizes(&spec(&[0.7, 0.3]), &spec(&[0.6, 0.4])));
        assert!(majorizes(&spec(&[0.5, 0.5]), &spec(&[0.25, 0.25, 0.25, 0.25])));
    }
}
