//! The Grassmannian `G(d,k)` of rank-`k` projectors: points, distance, truncated fidelity,
//! and randomized covering nets.

use rand::Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::qcore::linalg::{self, c, CMat};
use crate::qcore::random::sample_flat;
use crate::qcore::state::{DensityMatrix, Operator};
use crate::qcore::tolerance::ALGEBRA_TOL;

/// A point of `G(d,k)`, kept both as an orthonormal basis (`d × k`) and as the projector.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatInput {
    d: usize,
    k: usize,
    basis: CMat,
    projector: Operator,
}

impl FlatInput {
    /// From a `d × k` matrix with orthonormal columns.
    pub fn from_basis(basis: CMat) -> Result<Self> {
        let (d, k) = basis.shape();
        if d == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if k == 0 || k > d {
            return Err(Error::InvalidRank { d, k });
        }
        let gram_defect = linalg::max_abs(&(basis.adjoint() * &basis - CMat::identity(k, k)));
        if gram_defect > ALGEBRA_TOL {
            return Err(Error::Domain(format!("basis columns not orthonormal (defect {gram_defect:.3e})")));
        }
        let projector = Operator::new(&basis * basis.adjoint(), vec![d])?;
        Ok(Self { d, k, basis, projector })
    }

    /// From a projector matrix; the rank is read off the trace.
    pub fn from_projector(p: &CMat) -> Result<Self> {
        if p.nrows() != p.ncols() {
            return Err(Error::Shape(format!("projector must be square, got {:?}", p.shape())));
        }
        let d = p.nrows();
        if d == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if linalg::hermiticity_defect(p) > ALGEBRA_TOL || linalg::max_abs(&(p * p - p)) > ALGEBRA_TOL {
            return Err(Error::Domain("matrix is not an orthogonal projector".into()));
        }
        let tr = linalg::trace(p).re;
        let k = tr.round() as usize;
        if (tr - k as f64).abs() > ALGEBRA_TOL || k == 0 {
            return Err(Error::InvalidRank { d, k });
        }
        let (_, vecs) = linalg::hermitian_eigen(p);
        Self::from_basis(vecs.columns(0, k).into_owned())
    }

    /// `|0⟩…|k−1⟩` span.
    pub fn standard(d: usize, k: usize) -> Result<Self> {
        if k == 0 || k > d {
            return Err(Error::InvalidRank { d, k });
        }
        Self::from_basis(CMat::from_fn(d, k, |i, j| if i == j { c(1.0) } else { c(0.0) }))
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    pub fn projector(&self) -> &Operator {
        &self.projector
    }

    /// The flat state `P/k`.
    pub fn flat_state(&self) -> DensityMatrix {
        DensityMatrix::from_matrix(self.projector.matrix().unscale(self.k as f64), vec![self.d])
            .expect("projector over its rank is a valid state")
    }

    /// Entrywise complex conjugate `P̄`.
    pub fn conj(&self) -> Self {
        let basis = linalg::conj(&self.basis);
        let projector = self.projector.conj();
        Self { d: self.d, k: self.k, basis, projector }
    }

    /// `U P U†` for a unitary `U` on `C^d`.
    pub fn rotated(&self, u: &CMat) -> Result<Self> {
        if u.nrows() != self.d || u.ncols() != self.d {
            return Err(Error::Shape(format!("rotation is {:?}, input dimension {}", u.shape(), self.d)));
        }
        let basis = u * &self.basis;
        let projector = Operator::from_trusted(&basis * basis.adjoint(), vec![self.d]);
        Ok(Self { d: self.d, k: self.k, basis, projector })
    }

    /// `Tr(P Q)/k`.
    pub fn overlap(&self, other: &FlatInput) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok((self.basis.adjoint() * &other.basis).norm_squared() / self.k as f64)
    }

    /// Short content hash of the projector entries (rounded to 12 significant digits so that
    /// the hash is stable across harmless last-bit noise).
    pub fn input_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.d as u64).to_le_bytes());
        h.update((self.k as u64).to_le_bytes());
        for z in self.projector.matrix().iter() {
            h.update(format!("{:.12e},{:.12e};", z.re, z.im).as_bytes());
        }
        hex::encode(&h.finalize()[..8])
    }

    fn check_same_shape(&self, other: &FlatInput) -> Result<()> {
        if self.d != other.d || self.k != other.k {
            return Err(Error::Shape(format!("G({},{}) vs G({},{})", self.d, self.k, other.d, other.k)));
        }
        Ok(())
    }
}

/// `‖P/k − Q/k‖_tr`, computed from the principal angles between the two ranges: the difference
/// of two rank-`k` projectors has eigenvalues `±sin θ_j`.
pub fn grassmann_distance(p: &FlatInput, q: &FlatInput) -> Result<f64> {
    p.check_same_shape(q)?;
    // sin θ_j are the singular values of the part of one basis orthogonal to the other range;
    // taking them directly avoids the cancellation in √(1 − cos²θ) near θ = 0
    let sines = |a: &FlatInput, b: &FlatInput| -> f64 {
        let residual = &b.basis - &a.basis * (a.basis.adjoint() * &b.basis);
        linalg::singular_values(&residual).iter().sum()
    };
    // both orientations, so that the result is exactly symmetric in (p, q)
    let s = 0.5 * (sines(p, q) + sines(q, p));
    Ok((s / p.k as f64).clamp(0.0, 1.0))
}

/// Fidelity of the binary distributions `(x, 1−x)` and `(y, 1−y)`, saturated to 1 once `x > y`.
pub fn truncated_fidelity(x: f64, y: f64) -> Result<f64> {
    if !(x >= 0.0) || !(0.0..=1.0).contains(&y) {
        return Err(Error::Domain(format!("truncated fidelity needs x >= 0 and y in [0,1], got ({x}, {y})")));
    }
    if x > y {
        return Ok(1.0);
    }
    let v = (x * y).sqrt() + ((1.0 - x) * (1.0 - y)).max(0.0).sqrt();
    Ok((v * v).min(1.0))
}

/// i.i.d. Haar sample of `G(d,k)` used as an approximate cover at a stated radius.
#[derive(Clone, Debug)]
pub struct RandomNet {
    d: usize,
    k: usize,
    points: Vec<FlatInput>,
    target_radius: f64,
    budget: usize,
}

pub fn build_random_net<R: Rng + ?Sized>(
    d: usize,
    k: usize,
    eps: f64,
    budget: usize,
    rng: &mut R,
) -> Result<RandomNet> {
    if budget == 0 {
        return Err(Error::InvalidBudget("net budget must be at least 1".into()));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!("net radius must lie in (0, 1], got {eps}")));
    }
    let points = (0..budget).map(|_| sample_flat(d, k, rng)).collect::<Result<Vec<_>>>()?;
    Ok(RandomNet { d, k, points, target_radius: eps, budget })
}

#[derive(Clone, Debug, Serialize)]
pub struct NetCoverage {
    pub queries: usize,
    pub covered: usize,
    pub fraction: f64,
    pub max_nearest_distance: f64,
}

impl RandomNet {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn points(&self) -> &[FlatInput] {
        &self.points
    }

    pub fn target_radius(&self) -> f64 {
        self.target_radius
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Distance from `q` to the closest net point, with its index (first on ties).
    pub fn nearest(&self, q: &FlatInput) -> Result<(usize, f64)> {
        let mut best = (0usize, f64::INFINITY);
        for (i, p) in self.points.iter().enumerate() {
            let dist = grassmann_distance(p, q)?;
            if dist < best.1 {
                best = (i, dist);
            }
        }
        Ok(best)
    }

    /// Empirical coverage: fraction of fresh Haar queries within the target radius.
    pub fn coverage<R: Rng + ?Sized>(&self, queries: usize, rng: &mut R) -> Result<NetCoverage> {
        let mut covered = 0;
        let mut worst = 0.0f64;
        for _ in 0..queries {
            let q = sample_flat(self.d, self.k, rng)?;
            let (_, dist) = self.nearest(&q)?;
            worst = worst.max(dist);
            if dist <= self.target_radius {
                covered += 1;
            }
        }
        let fraction = if queries == 0 { 0.0 } else { covered as f64 / queries as f64 };
        Ok(NetCoverage { queries, covered, fraction, max_nearest_distance: worst })
    }

    /// JSON form: projectors as row-major `[re, im]` pairs.
    pub fn to_json(&self) -> serde_json::Value {
        let points: Vec<serde_json::Value> =
            self.points.iter().map(|p| matrix_to_json(p.projector().matrix())).collect();
        serde_json::json!({
            "d": self.d,
            "k": self.k,
            "target_radius": self.target_radius,
            "budget": self.budget,
            "points": points,
        })
    }
}

/// Row-major list of `[re, im]` pairs.
pub fn matrix_to_json(m: &CMat) -> serde_json::Value {
    let mut rows = Vec::with_capacity(m.nrows());
    for i in 0..m.nrows() {
        let row: Vec<serde_json::Value> =
            (0..m.ncols()).map(|j| serde_json::json!([m[(i, j)].re, m[(i, j)].im])).collect();
        rows.push(serde_json::Value::Array(row));
    }
    serde_json::Value::Array(rows)
}
