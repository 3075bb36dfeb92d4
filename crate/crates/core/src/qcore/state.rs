use serde::{Deserialize, Serialize};

use super::linalg::{self, c, CMat, CVec, C64};
use super::tolerance::{Tolerances, MAX_DIM};
use crate::error::{Error, Result};

fn check_registers(dim: usize, registers: &[usize]) -> Result<()> {
    if registers.is_empty() {
        return Ok(());
    }
    if registers.contains(&0) {
        return Err(Error::Structure(format!("zero-dimensional register in {registers:?}")));
    }
    let prod: usize = registers.iter().product();
    if prod != dim {
        return Err(Error::Structure(format!(
            "register dimensions {registers:?} multiply to {prod}, operator dimension is {dim}"
        )));
    }
    Ok(())
}

/// Dense square complex matrix with optional tensor-factor metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    mat: CMat,
    registers: Vec<usize>,
}

impl Operator {
    pub fn new(mat: CMat, registers: Vec<usize>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::Shape(format!("operator must be square, got {}x{}", mat.nrows(), mat.ncols())));
        }
        let dim = mat.nrows();
        if dim == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if dim > MAX_DIM {
            return Err(Error::Shape(format!("dimension {dim} exceeds the dense cap {MAX_DIM}")));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("operator has non-finite entries".into()));
        }
        check_registers(dim, &registers)?;
        Ok(Self { mat, registers })
    }

    pub fn unstructured(mat: CMat) -> Result<Self> {
        Self::new(mat, Vec::new())
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(CMat::identity(dim, dim), vec![dim])
    }

    pub(crate) fn from_trusted(mat: CMat, registers: Vec<usize>) -> Self {
        debug_assert!(mat.nrows() == mat.ncols());
        Self { mat, registers }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn registers(&self) -> &[usize] {
        &self.registers
    }

    pub fn with_registers(self, registers: Vec<usize>) -> Result<Self> {
        check_registers(self.dim(), &registers)?;
        Ok(Self { mat: self.mat, registers })
    }

    pub fn adjoint(&self) -> Self {
        Self::from_trusted(self.mat.adjoint(), self.registers.clone())
    }

    pub fn conj(&self) -> Self {
        Self::from_trusted(linalg::conj(&self.mat), self.registers.clone())
    }

    pub fn kron(&self, other: &Operator) -> Result<Self> {
        let mut regs = if self.registers.is_empty() { vec![self.dim()] } else { self.registers.clone() };
        regs.extend(if other.registers.is_empty() { vec![other.dim()] } else { other.registers.clone() });
        Self::new(linalg::kron(&self.mat, &other.mat), regs)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        linalg::hermiticity_defect(&self.mat) <= tol
    }

    /// `‖A†A − I‖_∞` entrywise.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        linalg::max_abs(&(self.mat.adjoint() * &self.mat - CMat::identity(n, n)))
    }
}

/// Validated density matrix: Hermitian, PSD and unit trace within the construction tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: Operator,
}

impl DensityMatrix {
    pub fn new(op: Operator) -> Result<Self> {
        Self::with_tolerances(op, &Tolerances::default())
    }

    pub fn with_tolerances(op: Operator, tol: &Tolerances) -> Result<Self> {
        let defect = linalg::hermiticity_defect(op.matrix());
        if defect > tol.construction {
            return Err(Error::InvalidState(format!("not Hermitian (defect {defect:.3e})")));
        }
        let tr = linalg::trace(op.matrix()).re;
        if (tr - 1.0).abs() > tol.construction {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min_eig = linalg::hermitian_eigenvalues(op.matrix()).last().copied().unwrap_or(0.0);
        if min_eig < -tol.construction {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:.3e}")));
        }
        let registers = op.registers.clone();
        Ok(Self { op: Operator::from_trusted(linalg::hermitize(op.matrix()), registers) })
    }

    pub fn from_matrix(mat: CMat, registers: Vec<usize>) -> Result<Self> {
        Self::new(Operator::new(mat, registers)?)
    }

    /// Normalizes a PSD matrix by its trace before validating.
    pub fn from_unnormalized(mat: CMat, registers: Vec<usize>) -> Result<Self> {
        let tr = linalg::trace(&mat).re;
        if !(tr > 0.0) {
            return Err(Error::InvalidState(format!("cannot normalize operator with trace {tr}")));
        }
        Self::from_matrix(mat.unscale(tr), registers)
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(0));
        }
        Self::from_matrix(CMat::identity(dim, dim).unscale(dim as f64), vec![dim])
    }

    pub fn diagonal(probs: &[f64], registers: Vec<usize>) -> Result<Self> {
        let diag = CVec::from_iterator(probs.len(), probs.iter().map(|&p| c(p)));
        Self::from_matrix(CMat::from_diagonal(&diag), registers)
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let v = psi.amplitudes();
        let mat = v * v.adjoint();
        Self { op: Operator::from_trusted(mat, psi.registers().to_vec()) }
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn matrix(&self) -> &CMat {
        self.op.matrix()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn registers(&self) -> &[usize] {
        self.op.registers()
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        Spectrum::from_eigenvalues(linalg::hermitian_eigenvalues(self.matrix()))
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        linalg::trace_product(self.matrix(), self.matrix()).re
    }

    pub fn kron(&self, other: &DensityMatrix) -> Result<Self> {
        Ok(Self { op: self.op.kron(&other.op)? })
    }
}

/// Normalized state vector with optional tensor-factor metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amps: CVec,
    registers: Vec<usize>,
}

impl PureState {
    pub fn new(amps: CVec, registers: Vec<usize>) -> Result<Self> {
        let dim = amps.len();
        if dim == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if dim > MAX_DIM {
            return Err(Error::Shape(format!("dimension {dim} exceeds the dense cap {MAX_DIM}")));
        }
        check_registers(dim, &registers)?;
        let norm = amps.norm();
        if (norm - 1.0).abs() > Tolerances::default().construction {
            return Err(Error::InvalidState(format!("state norm {norm} differs from 1")));
        }
        Ok(Self { amps, registers })
    }

    pub fn from_unnormalized(amps: CVec, registers: Vec<usize>) -> Result<Self> {
        let norm = amps.norm();
        if !(norm > 0.0) {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(amps.unscale(norm), registers)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amps
    }

    pub fn registers(&self) -> &[usize] {
        &self.registers
    }

    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::Shape(format!("state dims {} vs {}", self.dim(), other.dim())));
        }
        Ok(self.amps.dotc(&other.amps))
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    pub fn kron(&self, other: &PureState) -> Result<Self> {
        let mut regs = if self.registers.is_empty() { vec![self.dim()] } else { self.registers.clone() };
        regs.extend(if other.registers.is_empty() { vec![other.dim()] } else { other.registers.clone() });
        Self::new(self.amps.kronecker(&other.amps), regs)
    }
}

/// Descending-sorted probability vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    /// Validates an already-normalized probability vector (any order).
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        let tol = Tolerances::default();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("spectrum has non-finite entries".into()));
        }
        if let Some(bad) = values.iter().find(|&&v| v < -tol.clip || v > 1.0 + tol.clip) {
            return Err(Error::Domain(format!("spectrum entry {bad} outside [0, 1]")));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > tol.renorm {
            return Err(Error::Domain(format!("spectrum sums to {sum}")));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { values })
    }

    /// Builds a spectrum from raw eigenvalues: clips tiny negatives and renormalizes small drift.
    pub fn from_eigenvalues(raw: Vec<f64>) -> Result<Self> {
        let tol = Tolerances::default();
        if raw.is_empty() {
            return Err(Error::Domain("empty spectrum".into()));
        }
        let mut values = Vec::with_capacity(raw.len());
        for v in raw {
            if v < -tol.clip {
                return Err(Error::Domain(format!("eigenvalue {v:.3e} is genuinely negative")));
            }
            values.push(v.max(0.0));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > tol.renorm {
            return Err(Error::Domain(format!("eigenvalues sum to {sum}")));
        }
        values.iter_mut().for_each(|v| *v /= sum);
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { values })
    }

    pub fn uniform(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDimension(0));
        }
        Ok(Self { values: vec![1.0 / d as f64; d] })
    }

    pub fn point_mass(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDimension(0));
        }
        let mut values = vec![0.0; d];
        values[0] = 1.0;
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn padded(&self, len: usize) -> Vec<f64> {
        let mut v = self.values.clone();
        if v.len() < len {
            v.resize(len, 0.0);
        }
        v
    }
}
