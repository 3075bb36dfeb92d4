//! Entanglement-assisted equality test: Alice remotely prepares the codeword `P_x/k`, Bob
//! measures `{P_y, I − P_y}` and accepts on the first outcome.

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use super::{Calibration, OutcomeEnsemble, RspProtocol};
use crate::error::{Error, Result};
use crate::grassmann::FlatInput;
use crate::qcore::random::{derive_rng, sample_flat, streams};

/// Codebook dimensions `d = ceil(c·√n/ε^{3/2})`, `k = ceil(ε d / 2)`.
pub fn codebook_dimensions(n: usize, eps: f64, calib: &Calibration) -> Result<(usize, usize)> {
    if n == 0 {
        return Err(Error::Domain("equality needs at least one input bit".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0,1), got {eps}")));
    }
    let d = (calib.codebook_c * (n as f64).sqrt() / eps.powf(1.5)).ceil() as usize;
    let d = d.max(1);
    let k = ((eps * d as f64 / 2.0).ceil() as usize).clamp(1, d);
    Ok((d, k))
}

#[derive(Clone, Debug)]
pub struct CodebookOptions {
    /// Explicit dimensions; `None` uses [`codebook_dimensions`].
    pub d: Option<usize>,
    pub k: Option<usize>,
    /// Required strict bound on `Tr(P_x P_y)/k` for `x ≠ y`; `None` means `ε/2`.
    pub overlap_bound: Option<f64>,
    /// `log₂` of the number of codewords actually drawn.
    pub sample_m: u32,
    /// Every pair is checked when there are at most this many codewords.
    pub exhaustive_limit: usize,
    /// Random pairs checked when the codebook is too large for exhaustive validation.
    pub random_pairs: usize,
    pub seed: u64,
}

impl Default for CodebookOptions {
    fn default() -> Self {
        Self {
            d: None,
            k: None,
            overlap_bound: None,
            sample_m: 10,
            exhaustive_limit: 2048,
            random_pairs: 100_000,
            seed: 0,
        }
    }
}

/// Codewords `P_x` for `x ∈ {0, …, 2^sample_m − 1}` with validated pairwise overlaps.
#[derive(Clone, Debug)]
pub struct Codebook {
    pub n: usize,
    pub eps: f64,
    pub sample_m: u32,
    pub points: Vec<FlatInput>,
    pub overlap_bound: f64,
    /// Largest `Tr(P_x P_y)/k` over the checked pairs.
    pub max_overlap: f64,
    pub mean_overlap: f64,
    pub pairs_checked: usize,
    pub exhaustive: bool,
    /// Validation rounds that found offending pairs and redrew codewords.
    pub resample_rounds: usize,
}

impl Codebook {
    pub fn d(&self) -> usize {
        self.points[0].d()
    }

    pub fn k(&self) -> usize {
        self.points[0].k()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn codeword(&self, x: u64) -> Result<&FlatInput> {
        self.points
            .get(x as usize)
            .ok_or_else(|| Error::Domain(format!("input {x} outside the {}-word codebook", self.points.len())))
    }

    pub fn describe(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "eps": self.eps,
            "d": self.d(),
            "k": self.k(),
            "sample_m": self.sample_m,
            "overlap_bound": self.overlap_bound,
            "max_overlap": self.max_overlap,
            "mean_overlap": self.mean_overlap,
            "pairs_checked": self.pairs_checked,
            "exhaustive": self.exhaustive,
            "resample_rounds": self.resample_rounds,
        })
    }
}

struct OverlapScan {
    max: f64,
    sum: f64,
    count: usize,
    offenders: Vec<(usize, usize)>,
}

impl OverlapScan {
    fn new() -> Self {
        Self { max: 0.0, sum: 0.0, count: 0, offenders: Vec::new() }
    }

    fn record(&mut self, i: usize, j: usize, ov: f64, bound: f64) {
        self.max = self.max.max(ov);
        self.sum += ov;
        self.count += 1;
        if ov >= bound {
            self.offenders.push((i, j));
        }
    }
}

/// Real and imaginary parts of all bases stacked side by side (`d × (len·k)` each), so the
/// Gram blocks can be formed with real matrix products.
fn stacked_parts(points: &[FlatInput]) -> (DMatrix<f64>, DMatrix<f64>) {
    let d = points[0].d();
    let k = points[0].k();
    let mut re = DMatrix::zeros(d, points.len() * k);
    let mut im = DMatrix::zeros(d, points.len() * k);
    for (p, point) in points.iter().enumerate() {
        let b = point.basis();
        for c in 0..k {
            for r in 0..d {
                re[(r, p * k + c)] = b[(r, c)].re;
                im[(r, p * k + c)] = b[(r, c)].im;
            }
        }
    }
    (re, im)
}

const GRAM_BLOCK: usize = 32;

fn scan_all_pairs(points: &[FlatInput], bound: f64) -> OverlapScan {
    let k = points[0].k();
    let n = points.len();
    let (re, im) = stacked_parts(points);
    let mut scan = OverlapScan::new();
    let mut start = 0;
    while start < n {
        let end = (start + GRAM_BLOCK).min(n);
        let rows_re = re.columns(start * k, (end - start) * k);
        let rows_im = im.columns(start * k, (end - start) * k);
        let rest_re = re.columns(start * k, (n - start) * k);
        let rest_im = im.columns(start * k, (n - start) * k);
        // V_i†V_j = (XᵢᵀXⱼ + YᵢᵀYⱼ) + i(XᵢᵀYⱼ − YᵢᵀXⱼ)
        let gr = rows_re.transpose() * rest_re + rows_im.transpose() * rest_im;
        let gi = rows_re.transpose() * rest_im - rows_im.transpose() * rest_re;
        for i in start..end {
            let li = i - start;
            for j in (i + 1)..n {
                let lj = j - start;
                let mut s = 0.0;
                for a in 0..k {
                    for b in 0..k {
                        let (x, y) = (gr[(li * k + a, lj * k + b)], gi[(li * k + a, lj * k + b)]);
                        s += x * x + y * y;
                    }
                }
                scan.record(i, j, s / k as f64, bound);
            }
        }
        start = end;
    }
    scan
}

fn scan_random_pairs(points: &[FlatInput], bound: f64, pairs: usize, seed: u64, round: u64) -> Result<OverlapScan> {
    let n = points.len();
    let mut rng = derive_rng(seed, streams::CODEBOOK_PAIRS, round);
    let mut scan = OverlapScan::new();
    for _ in 0..pairs {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let (i, j) = (i.min(j), i.max(j));
        scan.record(i, j, points[i].overlap(&points[j])?, bound);
    }
    Ok(scan)
}

fn draw_codeword(d: usize, k: usize, seed: u64, index: usize, generation: u64) -> Result<FlatInput> {
    let mut rng = derive_rng(seed, streams::CODEBOOK, (generation << 32) | index as u64);
    sample_flat(d, k, &mut rng)
}

/// Draws `2^sample_m` Haar codewords and validates their pairwise overlaps, redrawing one
/// member of every offending pair for up to `calib.retry_cap` rounds.
pub fn build_codebook(n: usize, eps: f64, opts: &CodebookOptions, calib: &Calibration) -> Result<Codebook> {
    if opts.sample_m > 20 {
        return Err(Error::InvalidBudget(format!("sample_m = {} exceeds 20", opts.sample_m)));
    }
    if opts.sample_m as usize > n {
        return Err(Error::Domain(format!("sample_m = {} exceeds n = {n}", opts.sample_m)));
    }
    let (auto_d, auto_k) = codebook_dimensions(n, eps, calib)?;
    let d = opts.d.unwrap_or(auto_d);
    let k = match (opts.k, opts.d) {
        (Some(k), _) => k,
        (None, Some(d)) => ((eps * d as f64 / 2.0).ceil() as usize).clamp(1, d),
        (None, None) => auto_k,
    };
    if d == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if k == 0 || k > d {
        return Err(Error::InvalidRank { d, k });
    }
    let bound = opts.overlap_bound.unwrap_or(eps / 2.0);
    let size = 1usize << opts.sample_m;
    let mut generations = vec![0u64; size];
    let mut points = (0..size).map(|i| draw_codeword(d, k, opts.seed, i, 0)).collect::<Result<Vec<_>>>()?;
    let exhaustive = size <= opts.exhaustive_limit;
    let mut resample_rounds = 0;
    loop {
        let scan = if size < 2 {
            OverlapScan::new()
        } else if exhaustive {
            scan_all_pairs(&points, bound)
        } else {
            scan_random_pairs(&points, bound, opts.random_pairs, opts.seed, resample_rounds as u64)?
        };
        let mean = if scan.count > 0 { scan.sum / scan.count as f64 } else { 0.0 };
        if scan.offenders.is_empty() {
            return Ok(Codebook {
                n,
                eps,
                sample_m: opts.sample_m,
                points,
                overlap_bound: bound,
                max_overlap: scan.max,
                mean_overlap: mean,
                pairs_checked: scan.count,
                exhaustive,
                resample_rounds,
            });
        }
        if resample_rounds >= calib.retry_cap {
            return Err(Error::InfeasibleCodebook {
                max_overlap: scan.max,
                mean_overlap: mean,
                offending_pairs: scan.offenders.len(),
                bound,
            });
        }
        resample_rounds += 1;
        let mut redraw: Vec<usize> = scan.offenders.iter().map(|&(_, j)| j).collect();
        redraw.sort_unstable();
        redraw.dedup();
        for j in redraw {
            generations[j] += 1;
            points[j] = draw_codeword(d, k, opts.seed, j, generations[j])?;
        }
    }
}

/// Result of one equality run.
#[derive(Clone, Debug, Serialize)]
pub struct EqualityRun {
    pub x: u64,
    pub y: u64,
    /// Exact probability that Bob declares `x = y`.
    pub accept_prob: f64,
    /// Probability of the wrong verdict: `1 − accept` if `x = y`, else `accept`.
    pub error_prob: f64,
    /// Sampled verdict (`true` = "equal").
    pub verdict: bool,
    /// Only the RSP message is charged as communication.
    pub message_bits: u32,
    pub ebits: f64,
}

/// Bob's acceptance probability `Σ_c p(c) Tr(P_y χ_c)` for an already computed ensemble.
pub fn equality_from_ensemble(ensemble: &OutcomeEnsemble, codeword_y: &FlatInput) -> f64 {
    ensemble.acceptance(codeword_y)
}

/// Runs the equality test on `(x, y)`. The caller is responsible for passing a
/// worst-case-correct RSP protocol; the bound on the error holds only then.
pub fn run_equality<R: Rng + ?Sized>(
    codebook: &Codebook,
    rsp: &dyn RspProtocol,
    x: u64,
    y: u64,
    rng: &mut R,
) -> Result<EqualityRun> {
    if codebook.d() != rsp.d() || codebook.k() != rsp.k() {
        return Err(Error::Shape(format!(
            "codebook over G({},{}) but protocol for G({},{})",
            codebook.d(),
            codebook.k(),
            rsp.d(),
            rsp.k()
        )));
    }
    let px = codebook.codeword(x)?;
    let py = codebook.codeword(y)?;
    let ensemble = rsp.run_exact(px, false)?;
    let accept_prob = equality_from_ensemble(&ensemble, py);
    let error_prob = if x == y { 1.0 - accept_prob } else { accept_prob };
    Ok(EqualityRun {
        x,
        y,
        accept_prob,
        error_prob,
        verdict: rng.random::<f64>() < accept_prob,
        message_bits: rsp.message_bits(),
        ebits: rsp.ebits(),
    })
}
