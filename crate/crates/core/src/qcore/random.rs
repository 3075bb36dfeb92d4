//! Seeded sampling: Haar unitaries, Haar-random flat inputs, per-trial stream derivation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::linalg::{CMat, C64};
use super::state::Operator;
use crate::error::{Error, Result};
use crate::grassmann::FlatInput;

/// The concrete stream type used throughout the crate.
pub type StreamRng = ChaCha8Rng;

/// Logical stream identifiers for [`derive_rng`]; distinct purposes never share draws.
pub mod streams {
    pub const TRIALS: u64 = 1;
    pub const SWEEP: u64 = 2;
    pub const KRAUS_UNITARIES: u64 = 10;
    pub const KRAUS_VALIDATION: u64 = 11;
    pub const REJECTION_UNITARIES: u64 = 20;
    pub const REJECTION_VALIDATION: u64 = 21;
    pub const WORST_UNITARIES: u64 = 30;
    pub const NET: u64 = 31;
    pub const CODEBOOK: u64 = 40;
    pub const CODEBOOK_PAIRS: u64 = 41;
    pub const EQUALITY: u64 = 42;
    pub const VERIFY: u64 = 50;
}

/// Standard complex Gaussian entry with `E|z|² = 1`.
fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `rows × cols` matrix of i.i.d. standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Haar-random unitary matrix (raw), via QR of a Ginibre matrix with the phases of
/// `diag(R)` pushed back into `Q`.
pub fn haar_unitary_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<CMat> {
    haar_isometry(d, d, rng)
}

/// First `cols` columns of a Haar unitary on `C^d`.
pub fn haar_isometry<R: Rng + ?Sized>(d: usize, cols: usize, rng: &mut R) -> Result<CMat> {
    if d == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if cols == 0 || cols > d {
        return Err(Error::InvalidRank { d, k: cols });
    }
    let g = ginibre(d, cols, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        let rjj = r[(j, j)];
        let n = rjj.norm();
        let phase = if n > 0.0 { rjj / n } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    Ok(q)
}

pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Operator> {
    Ok(Operator::from_trusted(haar_unitary_matrix(d, rng)?, vec![d]))
}

/// Haar-distributed point of `G(d,k)`: span of the first `k` columns of a Haar unitary.
pub fn sample_flat<R: Rng + ?Sized>(d: usize, k: usize, rng: &mut R) -> Result<FlatInput> {
    if d == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if k == 0 || k > d {
        return Err(Error::InvalidRank { d, k });
    }
    FlatInput::from_basis(haar_isometry(d, k, rng)?)
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 256-bit seed for the `index`-th draw of logical `stream` under `master`.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> [u8; 32] {
    let mut s = master;
    let a = splitmix64(&mut s);
    let mut s = a ^ stream.wrapping_mul(0xD6E8_FEB8_6659_FD93);
    let b = splitmix64(&mut s);
    let mut s = b ^ index.wrapping_mul(0xA076_1D64_78BD_642F);
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
    }
    seed
}

/// Independent stream for `(master, stream, index)`; the result does not depend on the
/// order in which streams are derived, which is what makes parallel trials reproducible.
pub fn derive_rng(master: u64, stream: u64, index: u64) -> StreamRng {
    StreamRng::from_seed(derive_seed(master, stream, index))
}

/// Draws a fresh 64-bit seed from an existing stream (used to hand child seeds to builders).
pub fn child_seed<R: Rng + ?Sized>(rng: &mut R) -> u64 {
    rng.random()
}
