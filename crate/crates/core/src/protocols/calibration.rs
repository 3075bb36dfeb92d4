//! Named calibration constants for every unspecified `Θ(·)`/`O(·)` in the sizing rules
//! and bounds. Every report embeds the values it ran with.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Calibration {
    /// Kraus protocol: `N = ceil(c_kraus · d log₂d / (k ε²))`.
    pub c_kraus: f64,
    /// Rejection protocol: ancilla dimension `r = ceil(c_ancilla / ε)`.
    pub c_ancilla: f64,
    /// Rejection protocol: additive term in `N = ceil((d/k) ln(1/ε)) + rejection_offset`.
    pub rejection_offset: usize,
    /// Worst-case wrapper: `N_w = ceil(c_worst · log₂(1/δ) / δ⁴)`.
    pub c_worst: f64,
    /// Hard cap on `N_w`.
    pub worst_budget_cap: usize,
    /// Resampling attempts for randomly drawn unitary collections and codebooks.
    pub retry_cap: usize,
    /// Haar inputs used to validate a freshly drawn unitary collection.
    pub validation_inputs: usize,
    /// Constant in the eigenvalue-sum bound and in the entanglement audit's `δ`.
    pub a_cal: f64,
    /// Allowed ratio between post-selected decoupling error and its first bound term.
    pub c_total: f64,
    /// Additive slack of the entanglement audit.
    pub c_slack: f64,
    /// Constant multiplying `K^{-1/3}` in the truncated-fidelity perturbation bound.
    pub fidelity_constant: f64,
    /// Equality codebook: `d = ceil(codebook_c · √n / ε^{3/2})`.
    pub codebook_c: f64,
}

impl Default for Calibration {
    fn default() -> Self {
        Self {
            c_kraus: 4.0,
            c_ancilla: 4.0,
            rejection_offset: 2,
            c_worst: 1.0,
            worst_budget_cap: 10_000,
            retry_cap: 5,
            validation_inputs: 8,
            a_cal: 3.0,
            c_total: 10.0,
            c_slack: 4.0,
            fidelity_constant: 10.0,
            codebook_c: 1.0,
        }
    }
}

impl Calibration {
    /// Overrides one constant by name, as given on the command line.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let float = || {
            value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v > 0.0)
                .ok_or_else(|| Error::Domain(format!("calibration {key} must be a positive number, got {value:?}")))
        };
        let int = || {
            value
                .parse::<usize>()
                .map_err(|_| Error::Domain(format!("calibration {key} must be a nonnegative integer, got {value:?}")))
        };
        match key {
            "c_kraus" => self.c_kraus = float()?,
            "c_ancilla" => self.c_ancilla = float()?,
            "rejection_offset" => self.rejection_offset = int()?,
            "c_worst" => self.c_worst = float()?,
            "worst_budget_cap" => self.worst_budget_cap = int()?.max(1),
            "retry_cap" => self.retry_cap = int()?.max(1),
            "validation_inputs" => self.validation_inputs = int()?.max(1),
            "a_cal" => self.a_cal = float()?,
            "c_total" => self.c_total = float()?,
            "c_slack" => self.c_slack = float()?,
            "fidelity_constant" => self.fidelity_constant = float()?,
            "codebook_c" => self.codebook_c = float()?,
            _ => return Err(Error::Domain(format!("unknown calibration constant {key:?}"))),
        }
        Ok(())
    }

    pub fn kraus_n(&self, d: usize, k: usize, eps: f64) -> usize {
        let d_f = d as f64;
        let n = self.c_kraus * d_f * d_f.log2().max(0.0) / (k as f64 * eps * eps);
        (n.ceil() as usize).max(1)
    }

    pub fn rejection_ancilla(&self, eps: f64) -> usize {
        ((self.c_ancilla / eps).ceil() as usize).max(1)
    }

    pub fn rejection_rounds(&self, d: usize, k: usize, eps: f64) -> usize {
        ((d as f64 / k as f64) * (1.0 / eps).ln()).ceil().max(0.0) as usize + self.rejection_offset
    }

    pub fn worst_rounds(&self, delta: f64) -> usize {
        let n = self.c_worst * (1.0 / delta).log2() / delta.powi(4);
        (n.ceil().max(1.0) as usize).min(self.worst_budget_cap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizing_formulas() {
        let c = Calibration::default();
        assert_eq!(c.rejection_rounds(8, 1, 0.25), 14);
        assert_eq!(c.rejection_ancilla(0.25), 16);
        assert_eq!(c.kraus_n(8, 1, 0.25), 1536);
        assert_eq!(c.worst_rounds(0.2), 1452);
    }

    #[test]
    fn overrides() {
        let mut c = Calibration::default();
        c.set("c_kraus", "2.5").unwrap();
        assert_eq!(c.c_kraus, 2.5);
        assert!(c.set("nope", "1").is_err());
        assert!(c.set("a_cal", "-1").is_err());
    }
}
