//! Acceptance gate: one test per criterion, each printing a single PASS/FAIL line.
//!
//! Every criterion is computed by a function returning a metrics document, so the
//! determinism criterion can recompute all of them under different thread counts.

mod common;

use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use serde_json::{json, Value};

use flatrsp::entropy::smooth_min_entropy;
use flatrsp::grassmann::{build_random_net, FlatInput};
use flatrsp::protocols::{
    avg_to_worst, build_codebook, build_kraus_protocol, build_rejection_protocol, estimate_errors, run_equality,
    Calibration, CodebookOptions, NetChoice, ResourceReport, RspProtocol, UnitarySource,
};
use flatrsp::qcore::linalg::{self, CMat};
use flatrsp::qcore::measures::trace_distance_matrices;
use flatrsp::qcore::random::{derive_rng, haar_unitary_matrix, sample_flat};
use flatrsp::qcore::state::{DensityMatrix, Operator, PureState, Spectrum};
use flatrsp::verify::{
    audit_resource_bounds, check_majorization_bound, decoupling_experiment, sdp_closed_form, sdp_oracle,
    SdpOracleOptions,
};

const SEED: u64 = 20_240_601;

struct Verdict {
    pass: bool,
    detail: String,
    metrics: Value,
}

/// Written to the stderr handle directly so the line shows even when the harness captures output.
fn announce(n: u32, name: &str, v: &Verdict, started: Instant) {
    let _ = writeln!(
        std::io::stderr().lock(),
        "criterion {n:>2} {name}: {} — {} ({:.1}s)",
        if v.pass { "PASS" } else { "FAIL" },
        v.detail,
        started.elapsed().as_secs_f64()
    );
}

fn run_criterion(n: u32, name: &str, f: fn() -> Verdict) {
    let started = Instant::now();
    let v = f();
    announce(n, name, &v, started);
    assert!(v.pass, "criterion {n} ({name}) failed: {}", v.detail);
}

fn haar_list(d: usize, n: usize, rng: &mut impl Rng) -> Vec<CMat> {
    (0..n).map(|_| haar_unitary_matrix(d, rng).unwrap()).collect()
}

// 1 ─ Kraus exactness

fn kraus_exactness() -> Verdict {
    let calib = Calibration::default();
    let mut rng = derive_rng(SEED, 1, 0);
    let mut worst_state = 0.0f64;
    let mut worst_prob = 0.0f64;
    let mut worst_failure = 0.0f64;
    let mut configs = Vec::new();
    for _ in 0..50 {
        let d = [2usize, 4, 8, 16][rng.random_range(0..4)];
        let k = rng.random_range(1..=d);
        let n = rng.random_range(1..=12);
        let unitaries = haar_list(d, n, &mut rng);
        let proto = build_kraus_protocol(d, k, 0.5, UnitarySource::Explicit(unitaries.clone()), &calib).unwrap();
        let p = sample_flat(d, k, &mut rng).unwrap();
        let ens = proto.run_exact(&p, false).unwrap();
        let flat = p.projector().matrix().unscale(k as f64);
        for o in ens.outcomes().iter().filter(|o| (o.label as usize) < n) {
            let (prob, state) = common::kraus_branch(&unitaries, &p, o.label as usize);
            worst_state = worst_state.max(trace_distance_matrices(&state, &flat));
            worst_state = worst_state.max(trace_distance_matrices(o.bob_state.matrix(), &state));
            worst_prob = worst_prob.max((prob - o.prob).abs());
        }
        let reported = ens.outcomes().iter().find(|o| o.label as usize == n).map_or(0.0, |o| o.prob);
        let norm = common::kraus_measurement_norm(&unitaries, &p);
        let (_, fail) = proto.kraus_operators(&p).unwrap();
        let from_element = linalg::trace(&(&fail * &fail)).re / d as f64;
        let expected = 1.0 - 1.0 / norm;
        worst_failure = worst_failure.max((reported - expected).abs()).max((from_element - expected).abs());
        configs.push(json!([d, k, n]));
    }
    let pass = worst_state <= 1e-9 && worst_failure <= 1e-10 && worst_prob <= 1e-10;
    Verdict {
        pass,
        detail: format!(
            "max success-state distance {worst_state:.2e} (≤1e-9), max failure-probability deviation \
             {worst_failure:.2e} (≤1e-10), max success-probability deviation {worst_prob:.2e}"
        ),
        metrics: json!({
            "worst_state_distance": worst_state,
            "worst_failure_deviation": worst_failure,
            "worst_prob_deviation": worst_prob,
            "configs": configs,
        }),
    }
}

#[test]
fn criterion_01_kraus_exactness() {
    run_criterion(1, "Kraus exactness", kraus_exactness);
}

// 2 ─ Kraus average error

fn kraus_average_error() -> Verdict {
    let calib = Calibration::default();
    let proto = build_kraus_protocol(8, 1, 0.25, UnitarySource::Auto { count: None, seed: SEED }, &calib).unwrap();
    let est = estimate_errors(&proto, 200, SEED, 0).unwrap();
    let bound = 0.25 + 3.0 * est.eps_a_stderr;
    Verdict {
        pass: est.eps_a <= bound && proto.n() == 1536,
        detail: format!("N = {}, eps_a = {:.4} ± {:.4} ≤ {:.4}", proto.n(), est.eps_a, est.eps_a_stderr, bound),
        metrics: json!({ "n": proto.n(), "estimate": est, "describe": proto.describe() }),
    }
}

#[test]
fn criterion_02_kraus_average_error() {
    run_criterion(2, "Kraus average error", kraus_average_error);
}

// 3 ─ Rejection protocol: recursion vs full pure-state simulation

fn rejection_oracle_equivalence() -> Verdict {
    let calib = Calibration::default();
    let mut rng = derive_rng(SEED, 3, 0);
    let mut worst_prob = 0.0f64;
    let mut worst_state = 0.0f64;
    let mut worst_joint = 0.0f64;
    let mut count_mismatch = 0;
    let mut configs = Vec::new();
    for _ in 0..20 {
        let d = rng.random_range(2..=4);
        let k = rng.random_range(1..=d);
        let r = rng.random_range(1..=4);
        let n = rng.random_range(1..=6);
        let unitaries = haar_list(r * d, n, &mut rng);
        let proto =
            build_rejection_protocol(d, k, 0.5, Some(r), Some(n), UnitarySource::Explicit(unitaries.clone()), &calib)
                .unwrap();
        let p = sample_flat(d, k, &mut rng).unwrap();
        let ens = proto.run_exact(&p, true).unwrap();
        let oracle = common::rejection_full_state(&unitaries, r, &p);
        if ens.len() != oracle.len() {
            count_mismatch += 1;
            continue;
        }
        for (o, want) in ens.outcomes().iter().zip(&oracle) {
            worst_prob = worst_prob.max((o.prob - want.prob).abs());
            worst_state = worst_state.max(common::max_abs_diff(o.bob_state.matrix(), &want.target));
            let joint = o.bob_joint.as_ref().unwrap();
            worst_joint = worst_joint.max(common::max_abs_diff(joint.matrix(), &want.joint));
        }
        configs.push(json!([d, k, r, n]));
    }
    let pass = count_mismatch == 0 && worst_prob <= 1e-8 && worst_state <= 1e-8 && worst_joint <= 1e-8;
    Verdict {
        pass,
        detail: format!(
            "20 inputs; max |Δp| {worst_prob:.2e}, max |Δσ| {worst_state:.2e}, max |Δjoint| {worst_joint:.2e} \
             (≤1e-8), outcome-count mismatches {count_mismatch}"
        ),
        metrics: json!({
            "worst_prob": worst_prob,
            "worst_state": worst_state,
            "worst_joint": worst_joint,
            "count_mismatch": count_mismatch,
            "configs": configs,
        }),
    }
}

#[test]
fn criterion_03_rejection_oracle_equivalence() {
    run_criterion(3, "rejection recursion ≡ full-state simulation", rejection_oracle_equivalence);
}

// 4 ─ Rejection error and survival law

fn survival_law() -> (Vec<(f64, f64, f64)>, bool) {
    let (d, k, r, rounds, trials) = (8usize, 1usize, 16usize, 5usize, 200usize);
    let calib = Calibration::default();
    let per_trial: Vec<Vec<f64>> = (0..trials as u64)
        .map(|t| {
            let mut rng = derive_rng(SEED, 4, t);
            let unitaries = haar_list(r * d, rounds, &mut rng);
            let proto =
                build_rejection_protocol(d, k, 0.25, Some(r), Some(rounds), UnitarySource::Explicit(unitaries), &calib)
                    .unwrap();
            let p = sample_flat(d, k, &mut rng).unwrap();
            proto.run_detailed(&p, false).unwrap().survival
        })
        .collect();
    let mut rows = Vec::new();
    let mut ok = true;
    for i in 0..rounds {
        let xs: Vec<f64> = per_trial.iter().map(|s| s[i]).collect();
        let (mean, se) = flatrsp::protocols::mean_stderr(&xs);
        let law = (1.0 - k as f64 / d as f64).powi(i as i32 + 1);
        ok &= (mean - law).abs() <= 3.0 * se;
        rows.push((mean, se, law));
    }
    (rows, ok)
}

fn rejection_error_and_survival() -> Verdict {
    let calib = Calibration::default();
    let proto = build_rejection_protocol(
        8,
        1,
        0.25,
        Some(16),
        Some(14),
        UnitarySource::Auto { count: None, seed: SEED },
        &calib,
    )
    .unwrap();
    let est = estimate_errors(&proto, 100, SEED, 0).unwrap();
    let bound = 0.25 + 3.0 * est.eps_a_stderr;
    let error_ok = est.eps_a <= bound;
    let (rows, survival_ok) = survival_law();
    let table: Vec<String> =
        rows.iter().enumerate().map(|(i, (m, s, l))| format!("i={}: {m:.4}±{s:.4} vs {l:.4}", i + 1)).collect();
    Verdict {
        pass: error_ok && survival_ok,
        detail: format!(
            "eps_a = {:.4} ± {:.4} vs bound {:.4} [{}]; survival law [{}] [{}]",
            est.eps_a,
            est.eps_a_stderr,
            bound,
            if error_ok { "ok" } else { "exceeded" },
            table.join(", "),
            if survival_ok { "ok" } else { "violated" }
        ),
        metrics: json!({ "estimate": est, "survival": rows, "describe": proto.describe() }),
    }
}

#[test]
fn criterion_04_rejection_error_and_survival_law() {
    run_criterion(4, "rejection error and survival law", rejection_error_and_survival);
}

// 5 ─ SDP closed form vs oracle

fn sdp_closed_form_vs_oracle() -> Verdict {
    let opts = SdpOracleOptions::default();
    let mut rng = derive_rng(SEED, 5, 0);
    let mut worst_above = f64::NEG_INFINITY;
    let mut worst_below = 0.0f64;
    let mut worst_grid = 0.0f64;
    let mut grid_cases = 0;
    for case in 0..200u64 {
        let d = 2 + (case as usize % 5);
        let kp = rng.random_range(1..=d);
        let kq = rng.random_range(1..=d);
        let p = sample_flat(d, kp, &mut rng).unwrap();
        let q = sample_flat(d, kq, &mut rng).unwrap().projector().clone();
        let t = rng.random_range(0.01..0.99);
        let closed = sdp_closed_form(&p, &q, t).unwrap();
        let mut orng = derive_rng(SEED, 5, case + 1);
        let oracle = sdp_oracle(&p, &q, t, &opts, &mut orng).unwrap();
        worst_above = worst_above.max(oracle - closed);
        worst_below = worst_below.max(closed - oracle);
        if d == 2 {
            let grid = common::bloch_grid_optimum(p.projector().matrix(), q.matrix(), t, 100, 6).unwrap();
            worst_grid = worst_grid.max((grid - oracle).abs());
            grid_cases += 1;
        }
    }
    let pass = worst_above <= 1e-9 && worst_below <= 1e-4 && worst_grid <= 1e-4;
    Verdict {
        pass,
        detail: format!(
            "200 cases: max(oracle − closed) {worst_above:.2e} (≤1e-9), max(closed − oracle) {worst_below:.2e} \
             (≤1e-4), {grid_cases} Bloch-grid cases max |grid − oracle| {worst_grid:.2e} (≤1e-4)"
        ),
        metrics: json!({
            "worst_above": worst_above,
            "worst_below": worst_below,
            "worst_grid": worst_grid,
            "grid_cases": grid_cases,
        }),
    }
}

#[test]
fn criterion_05_sdp_closed_form_matches_oracle() {
    run_criterion(5, "SDP closed form ≡ oracle", sdp_closed_form_vs_oracle);
}

// 6 ─ Smoothed min-entropy

fn smoothed_entropy_oracle() -> Verdict {
    let deltas = [0.0, 0.01, 0.1, 0.3];
    let mut rng = derive_rng(SEED, 6, 0);
    let mut worst = 0.0f64;
    let mut monotone = true;
    for case in 0..500 {
        let n = rng.random_range(1..=64);
        let mut raw: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().ln()).collect();
        if case % 5 == 0 {
            // repeated values and exact zeros
            for x in raw.iter_mut().step_by(3) {
                *x = 0.0;
            }
            let v = raw[n - 1];
            for x in raw.iter_mut().skip(n / 2) {
                *x = v;
            }
        }
        if raw.iter().all(|&x| x == 0.0) {
            raw[0] = 1.0;
        }
        let total: f64 = raw.iter().sum();
        let spec = Spectrum::new(raw.iter().map(|x| x / total).collect()).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for &delta in &deltas {
            let scan = smooth_min_entropy(&spec, delta).unwrap();
            let s = common::smooth_threshold_bisection(spec.values(), delta);
            worst = worst.max((scan.s_star - s).abs());
            if s > 0.0 {
                worst = worst.max((scan.entropy - (-s.log2())).abs());
            }
            monotone &= scan.entropy >= prev - 1e-12;
            prev = scan.entropy;
        }
    }
    Verdict {
        pass: worst <= 1e-9 && monotone,
        detail: format!("500 spectra × 4 δ: max |scan − bisection| {worst:.2e} (≤1e-9), monotone in δ: {monotone}"),
        metrics: json!({ "worst": worst, "monotone": monotone }),
    }
}

#[test]
fn criterion_06_smoothed_min_entropy_oracle() {
    run_criterion(6, "smoothed min-entropy ≡ bisection", smoothed_entropy_oracle);
}

// 7 ─ Majorization

fn majorization() -> Verdict {
    let calib = Calibration::default();
    let mut rng = derive_rng(SEED, 7, 0);
    let prior: Vec<FlatInput> = (0..16).map(|_| sample_flat(4, 1, &mut rng).unwrap()).collect();
    let kraus = build_kraus_protocol(4, 1, 0.25, UnitarySource::Auto { count: None, seed: SEED }, &calib).unwrap();
    let rejection =
        build_rejection_protocol(4, 1, 0.25, None, None, UnitarySource::Auto { count: None, seed: SEED }, &calib)
            .unwrap();
    let a = check_majorization_bound(&kraus, &prior).unwrap();
    let b = check_majorization_bound(&rejection, &prior).unwrap();
    Verdict {
        pass: a.margin >= -1e-8 && b.margin >= -1e-8,
        detail: format!("min slack: Kraus {:.3e}, rejection {:.3e} (≥ −1e-8)", a.margin, b.margin),
        metrics: json!({ "kraus": a, "rejection": b }),
    }
}

#[test]
fn criterion_07_majorization_of_schmidt_spectra() {
    run_criterion(7, "majorization of Schmidt spectra", majorization);
}

// 8 ─ Decoupling

fn random_pure(dims: Vec<usize>, rng: &mut impl Rng) -> DensityMatrix {
    let total = dims.iter().product();
    let amps = flatrsp::qcore::random::ginibre(total, 1, rng).column(0).into_owned();
    PureState::from_unnormalized(amps, dims).unwrap().to_density()
}

fn decoupling() -> Verdict {
    let mut rng = derive_rng(SEED, 8, 0);
    let mixed = DensityMatrix::new(Operator::new(CMat::identity(64, 64).unscale(64.0), vec![8, 8]).unwrap()).unwrap();
    let pure = random_pure(vec![8, 8], &mut rng);
    let mut plain_ok = true;
    let mut plain = Vec::new();
    for (label, rho) in [("maximally mixed", &mixed), ("random pure", &pure)] {
        let rep = decoupling_experiment(8, 8, 2, rho, 200, SEED).unwrap();
        let ok = rep.plain_lhs_2norm <= rep.plain_rhs_2norm + 3.0 * rep.plain_lhs_2norm_stderr;
        plain_ok &= ok;
        plain.push((label, rep));
    }
    let mut worst_ratio = 0.0f64;
    let mut post = Vec::new();
    for i in 0..20u64 {
        let rho = random_pure(vec![8, 8, 2], &mut rng);
        let rep = decoupling_experiment(8, 8, 2, &rho, 40, SEED + 1 + i).unwrap();
        worst_ratio = worst_ratio.max(rep.ratio);
        post.push(rep);
    }
    let c_total = Calibration::default().c_total;
    let plain_text: Vec<String> = plain
        .iter()
        .map(|(l, r)| {
            format!("{l}: {:.4}±{:.4} vs {:.4}", r.plain_lhs_2norm, r.plain_lhs_2norm_stderr, r.plain_rhs_2norm)
        })
        .collect();
    Verdict {
        pass: plain_ok && worst_ratio <= c_total,
        detail: format!(
            "plain 2-norm [{}]; post-selected max ratio over 20 pure ρ {worst_ratio:.3} (≤ {c_total})",
            plain_text.join("; ")
        ),
        metrics: json!({
            "plain": plain.iter().map(|(l, r)| json!({"state": l, "report": r})).collect::<Vec<_>>(),
            "post_selected": post,
        }),
    }
}

#[test]
fn criterion_08_decoupling_inequalities() {
    run_criterion(8, "decoupling inequalities", decoupling);
}

// 9 ─ Resource audits

fn resource_audits() -> Verdict {
    let calib = Calibration::default();
    let mut rows = Vec::new();
    let mut all_pass = true;
    for &d in &[8usize, 16] {
        for &k in &[1usize, 2] {
            let kraus: Arc<dyn RspProtocol> = Arc::new(
                build_kraus_protocol(d, k, 0.25, UnitarySource::Auto { count: None, seed: SEED }, &calib).unwrap(),
            );
            let rejection: Arc<dyn RspProtocol> = Arc::new(
                build_rejection_protocol(
                    d,
                    k,
                    0.25,
                    None,
                    None,
                    UnitarySource::Auto { count: None, seed: SEED },
                    &calib,
                )
                .unwrap(),
            );
            for proto in [kraus, rejection] {
                let est = estimate_errors(proto.as_ref(), 20, SEED, 0).unwrap();
                let report = ResourceReport::from_protocol(proto.as_ref(), est, Value::Null, 0);
                let (comm, ent) = audit_resource_bounds(&report, 0.5, &calib).unwrap();
                all_pass &= comm.pass && ent.pass;
                rows.push(json!({
                    "protocol": proto.name(), "d": d, "k": k, "m": report.m,
                    "eps_r": report.eps_r(), "communication": comm, "entanglement": ent,
                }));
            }
        }
    }
    let synthetic = ResourceReport::synthetic(8, 1, 0, 0.1, Spectrum::uniform(8).unwrap());
    let (syn_comm, _) = audit_resource_bounds(&synthetic, 0.5, &calib).unwrap();
    Verdict {
        pass: all_pass && !syn_comm.pass,
        detail: format!(
            "{} protocol reports: all audits pass = {all_pass}; synthetic m=0 report communication margin {:.3} \
             (must fail: {})",
            rows.len(),
            syn_comm.margin,
            !syn_comm.pass
        ),
        metrics: json!({ "grid": rows, "synthetic": syn_comm }),
    }
}

#[test]
fn criterion_09_resource_audits() {
    run_criterion(9, "resource audits", resource_audits);
}

// 10 ─ Equality protocol

fn equality() -> Verdict {
    let calib = Calibration::default();
    let (n, eps) = (64usize, 0.25);
    let opts = CodebookOptions { sample_m: 10, overlap_bound: Some(eps), seed: SEED, ..Default::default() };
    let book = build_codebook(n, eps, &opts, &calib).unwrap();
    let (d, k) = (book.d(), book.k());
    let base: Arc<dyn RspProtocol> = Arc::new(
        build_kraus_protocol(d, k, eps, UnitarySource::Auto { count: Some(2048), seed: SEED }, &calib).unwrap(),
    );
    let rsp =
        avg_to_worst(base.clone(), 0.2, NetChoice::Exact, UnitarySource::Auto { count: Some(4), seed: SEED }, &calib)
            .unwrap();

    let mut rng = derive_rng(SEED, 10, 0);
    let xs: Vec<u64> = (0..25).map(|_| rng.random_range(0..book.len() as u64)).collect();
    let mut max_accept_ne = 0.0f64;
    let mut max_reject_eq = 0.0f64;
    let mut max_overlap_used = 0.0f64;
    let mut pairs = 0;
    let mut relaxed_le_error = true;
    let mut codeword_errors = Vec::new();
    let mut bits_ok = true;
    for &x in &xs {
        let px = book.codeword(x).unwrap();
        let ens = rsp.run_exact(px, false).unwrap();
        let err = ens.error_against(px);
        codeword_errors.push(err);
        let same = run_equality(&book, rsp.as_ref(), x, x, &mut rng).unwrap();
        max_reject_eq = max_reject_eq.max(same.error_prob);
        relaxed_le_error &= same.error_prob <= err + 1e-12;
        bits_ok &= same.message_bits == rsp.message_bits();
        for _ in 0..20 {
            let mut y = rng.random_range(0..book.len() as u64 - 1);
            if y >= x {
                y += 1;
            }
            let accept = flatrsp::protocols::equality_from_ensemble(&ens, book.codeword(y).unwrap());
            max_overlap_used = max_overlap_used.max(px.overlap(book.codeword(y).unwrap()).unwrap());
            max_accept_ne = max_accept_ne.max(accept);
            pairs += 1;
        }
    }
    let sweep = estimate_errors(rsp.as_ref(), 1, SEED, 20).unwrap();
    let eps_w = codeword_errors.iter().copied().fold(sweep.eps_w_lower, f64::max);
    let ebits = rsp.ebits();
    let pass = pairs == 500
        && max_accept_ne <= eps
        // both sides equal p_e(1 − k/d) on the worst codeword, up to rounding
        && max_reject_eq <= eps_w + 1e-12
        && relaxed_le_error
        && bits_ok
        && (ebits - 6.0).abs() < 1e-12;
    Verdict {
        pass,
        detail: format!(
            "d={d}, k={k}, codebook max overlap {:.4} (bound {}); {pairs} pairs x≠y: max accept {max_accept_ne:.4} \
             (≤ {eps}); x=y: max reject {max_reject_eq:.4} ≤ ε_w {eps_w:.4}; m = {} bits (RSP only), ebits = {ebits}",
            book.max_overlap,
            book.overlap_bound,
            rsp.message_bits()
        ),
        metrics: json!({
            "codebook": book.describe(),
            "pairs": pairs,
            "max_accept_unequal": max_accept_ne,
            "max_overlap_used": max_overlap_used,
            "max_reject_equal": max_reject_eq,
            "eps_w_lower": eps_w,
            "message_bits": rsp.message_bits(),
            "ebits": ebits,
            "rsp": rsp.describe(),
        }),
    }
}

#[test]
fn criterion_10_equality_protocol() {
    run_criterion(10, "equality protocol", equality);
}

// 11 ─ Average-to-worst reduction

fn average_to_worst() -> Verdict {
    let calib = Calibration::default();
    let (eps_a, delta) = (0.3, 0.2);
    let base: Arc<dyn RspProtocol> =
        Arc::new(build_kraus_protocol(2, 1, eps_a, UnitarySource::Auto { count: None, seed: SEED }, &calib).unwrap());
    let mut rng = derive_rng(SEED, flatrsp::qcore::random::streams::NET, 0);
    let net = build_random_net(2, 1, delta / 4.0, 500, &mut rng).unwrap();
    let wrapped =
        avg_to_worst(base, delta, NetChoice::Random(net), UnitarySource::Auto { count: None, seed: SEED }, &calib)
            .unwrap();
    let est = estimate_errors(wrapped.as_ref(), 1, SEED, 100).unwrap();
    let sweep_max = est.records.iter().filter(|r| r.adversarial).map(|r| r.per_input_error).fold(0.0, f64::max);
    let bound = eps_a + delta + 0.05;
    Verdict {
        pass: sweep_max <= bound,
        detail: format!(
            "100-input adversarial sweep max error {sweep_max:.4} ≤ {bound:.2}; m = {}",
            wrapped.message_bits()
        ),
        metrics: json!({ "sweep_max": sweep_max, "estimate": est, "describe": wrapped.describe() }),
    }
}

#[test]
fn criterion_11_average_to_worst_reduction() {
    run_criterion(11, "average-to-worst reduction", average_to_worst);
}

// 12 ─ Determinism across thread counts

fn document(f: fn() -> Verdict, threads: usize) -> String {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let v = pool.install(f);
    serde_json::to_string(&json!({ "pass": v.pass, "metrics": v.metrics })).unwrap()
}

#[test]
fn criterion_12_determinism() {
    let started = Instant::now();
    let all: [(u32, fn() -> Verdict); 11] = [
        (1, kraus_exactness),
        (2, kraus_average_error),
        (3, rejection_oracle_equivalence),
        (4, rejection_error_and_survival),
        (5, sdp_closed_form_vs_oracle),
        (6, smoothed_entropy_oracle),
        (7, majorization),
        (8, decoupling),
        (9, resource_audits),
        (10, equality),
        (11, average_to_worst),
    ];
    let mut differing = Vec::new();
    for (n, f) in all {
        if document(f, 1) != document(f, 8) {
            differing.push(n);
        }
    }
    let v = Verdict {
        pass: differing.is_empty(),
        detail: format!("metric documents at 1 vs 8 threads identical for criteria 1–11; differing: {differing:?}"),
        metrics: Value::Null,
    };
    announce(12, "determinism", &v, started);
    assert!(v.pass, "{}", v.detail);
}
