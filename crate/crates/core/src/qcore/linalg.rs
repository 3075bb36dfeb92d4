//! Dense complex linear algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::tolerance::CLIP_TOL;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Hermitian part `(A + A†)/2`.
pub fn hermitize(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

/// Largest entrywise modulus of `A − A†`.
pub fn hermiticity_defect(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let d = (a[(i, j)] - a[(j, i)].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

pub fn trace(a: &CMat) -> C64 {
    a.diagonal().iter().sum()
}

/// `Tr(A B)` without forming the product.
pub fn trace_product(a: &CMat, b: &CMat) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Eigen-decomposition of the Hermitian part of `a`, eigenvalues sorted descending.
pub fn hermitian_eigen(a: &CMat) -> (Vec<f64>, CMat) {
    let n = a.nrows();
    let eig = SymmetricEigen::new(hermitize(a));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Eigenvalues of the Hermitian part of `a`, sorted descending.
pub fn hermitian_eigenvalues(a: &CMat) -> Vec<f64> {
    let mut v: Vec<f64> = hermitize(a).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|x, y| y.total_cmp(x));
    v
}

pub fn singular_values(a: &CMat) -> Vec<f64> {
    let mut v: Vec<f64> = a.singular_values().iter().copied().collect();
    v.sort_by(|x, y| y.total_cmp(x));
    v
}

/// Applies `f` to the spectrum of a Hermitian matrix.
pub fn hermitian_map(a: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = hermitian_eigen(a);
    let n = a.nrows();
    let mut scaled = vecs.clone();
    for (j, &lam) in vals.iter().enumerate() {
        let s = f(lam);
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    &scaled * vecs.adjoint()
}

/// Square root of a PSD matrix; eigenvalues below zero are treated as zero.
pub fn psd_sqrt(a: &CMat) -> CMat {
    hermitian_map(a, |x| x.max(0.0).sqrt())
}

/// `A^p` on the support of a PSD matrix (pseudo-power for negative `p`).
pub fn psd_power_on_support(a: &CMat, p: f64) -> CMat {
    hermitian_map(a, |x| if x > CLIP_TOL { x.powf(p) } else { 0.0 })
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn conj(a: &CMat) -> CMat {
    a.map(|z| z.conj())
}

/// Row-major strides of a register list.
pub(crate) fn strides(registers: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; registers.len()];
    for i in (0..registers.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * registers[i + 1];
    }
    s
}

/// Flat offsets contributed by every multi-index over the chosen registers.
pub(crate) fn offsets(registers: &[usize], chosen: &[usize]) -> Vec<usize> {
    let st = strides(registers);
    let mut out = vec![0usize];
    for &r in chosen {
        let mut next = Vec::with_capacity(out.len() * registers[r]);
        for &base in &out {
            for v in 0..registers[r] {
                next.push(base + v * st[r]);
            }
        }
        out = next;
    }
    out
}

/// Embeds `op`, acting on the registers `subset` (in that order), into the full space
/// described by `registers`, acting as identity on the complement.
pub fn embed(op: &CMat, subset: &[usize], registers: &[usize]) -> CMat {
    let rest: Vec<usize> = (0..registers.len()).filter(|r| !subset.contains(r)).collect();
    let sub_off = offsets(registers, subset);
    let rest_off = offsets(registers, &rest);
    let dim: usize = registers.iter().product();
    let mut full = CMat::zeros(dim, dim);
    for &t in &rest_off {
        for (a, &oa) in sub_off.iter().enumerate() {
            for (b, &ob) in sub_off.iter().enumerate() {
                full[(oa + t, ob + t)] = op[(a, b)];
            }
        }
    }
    full
}

/// Partial trace of a matrix with the given register structure, keeping `keep`
/// (output registers ordered as in `keep`).
pub fn partial_trace_matrix(a: &CMat, registers: &[usize], keep: &[usize]) -> CMat {
    let rest: Vec<usize> = (0..registers.len()).filter(|r| !keep.contains(r)).collect();
    let keep_off = offsets(registers, keep);
    let rest_off = offsets(registers, &rest);
    let n = keep_off.len();
    let mut out = CMat::zeros(n, n);
    for (i, &oi) in keep_off.iter().enumerate() {
        for (j, &oj) in keep_off.iter().enumerate() {
            let mut acc = ZERO;
            for &t in &rest_off {
                acc += a[(oi + t, oj + t)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Orthonormal basis (as columns) for the column span of `a`, by Hermitian eigendecomposition
/// of `A A†`; eigenvalues below `tol` relative to the largest are discarded.
pub fn range_basis(a: &CMat, tol: f64) -> CMat {
    let g = a * a.adjoint();
    let (vals, vecs) = hermitian_eigen(&g);
    let top = vals.first().copied().unwrap_or(0.0).max(0.0);
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > tol * top.max(1e-300)).collect();
    let mut basis = CMat::zeros(a.nrows(), keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        basis.set_column(dst, &vecs.column(src));
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embed_then_trace_recovers_operator() {
        let registers = [2, 3, 2];
        let op = CMat::from_fn(3, 3, |i, j| C64::new((i + 2 * j) as f64, i as f64 - j as f64));
        let full = embed(&op, &[1], &registers);
        let back = partial_trace_matrix(&full, &registers, &[1]);
        assert!(max_abs(&(back - op.scale(4.0))) < 1e-12);
    }

    #[test]
    fn eigen_sorted_descending() {
        let a = CMat::from_diagonal(&CVec::from_vec(vec![c(0.1), c(0.7), c(0.2)]));
        let (vals, vecs) = hermitian_eigen(&a);
        assert!((vals[0] - 0.7).abs() < 1e-14 && (vals[2] - 0.1).abs() < 1e-14);
        let rebuilt = &vecs * CMat::from_diagonal(&CVec::from_iterator(3, vals.iter().map(|&x| c(x)))) * vecs.adjoint();
        assert!(max_abs(&(rebuilt - a)) < 1e-12);
    }
}
