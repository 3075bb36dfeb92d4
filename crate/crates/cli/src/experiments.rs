//! One runner per subcommand. Runners are pure functions of the configuration: all
//! randomness derives from the master seed, and all I/O happens in `main`.

use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use flatrsp::grassmann::{build_random_net, matrix_to_json, FlatInput};
use flatrsp::protocols::{
    avg_to_worst, build_codebook, build_kraus_protocol, build_rejection_protocol, equality_from_ensemble,
    estimate_errors, run_equality, Calibration, CodebookOptions, ErrorEstimate, NetChoice, RejectionProtocol,
    ResourceReport, RspProtocol, TrialRecord, TrivialProtocol, UnitarySource,
};
use flatrsp::qcore::linalg::CMat;
use flatrsp::qcore::random::{derive_rng, ginibre, sample_flat, streams};
use flatrsp::qcore::state::{DensityMatrix, Operator, PureState};
use flatrsp::verify::{
    audit_resource_bounds, check_eigval_bound, check_majorization_bound, concentration_experiment,
    decoupling_experiment, sdp_closed_form, sdp_oracle, AuditReport, ConcentrationKind, SdpOracleOptions,
};
use flatrsp::Result;

use crate::config::*;

/// Streams used only by the runner, disjoint from the library's.
mod local_streams {
    pub const SDP_CASES: u64 = 60;
    pub const SDP_ORACLE: u64 = 61;
    pub const FIXED_OPERATOR: u64 = 62;
    pub const PRIOR: u64 = 63;
}

pub struct RunOutput {
    pub metrics: Value,
    pub audits: Vec<AuditReport>,
    pub records: Vec<TrialRecord>,
    /// Protocol whose outputs `--dump-states` records, for commands that build one.
    protocol: Option<Arc<dyn RspProtocol>>,
}

impl RunOutput {
    fn new(metrics: Value, audits: Vec<AuditReport>) -> Self {
        Self { metrics, audits, records: Vec::new(), protocol: None }
    }

    fn with_protocol(mut self, proto: Arc<dyn RspProtocol>) -> Self {
        self.protocol = Some(proto);
        self
    }
}

pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    let seed = config.seed;
    let calib = &config.calibration;
    let mut out = match &config.experiment {
        Experiment::Kraus(a) => protocol_run(config, a, build_base(BaseProtocol::Kraus, &a.sizing, seed, calib)?)?,
        Experiment::Reject(a) => protocol_run(config, a, build_base(BaseProtocol::Reject, &a.sizing, seed, calib)?)?,
        Experiment::Avg2Worst(a) => worst_case(config, a)?,
        Experiment::Eq(a) => equality(a, seed, calib)?,
        Experiment::VerifySdp(a) => verify_sdp(a, seed)?,
        Experiment::VerifyMajorize(a) => verify_majorize(a, seed, calib)?,
        Experiment::VerifyDecouple(a) => verify_decouple(a, seed, calib)?,
        Experiment::VerifyConcentration(a) => verify_concentration(a, seed)?,
        Experiment::VerifyEigval(a) => verify_eigval(a, seed, calib)?,
        Experiment::Audit(a) => audit(config, a)?,
    };
    if config.dump_states {
        if let Some(proto) = out.protocol.take() {
            out.metrics["states"] = dump_states(proto.as_ref(), seed)?;
        }
    }
    Ok(out)
}

fn build_base(kind: BaseProtocol, s: &Sizing, seed: u64, calib: &Calibration) -> Result<Arc<dyn RspProtocol>> {
    let source = UnitarySource::Auto { count: s.n, seed };
    Ok(match kind {
        BaseProtocol::Kraus => Arc::new(build_kraus_protocol(s.d, s.k, s.eps, source, calib)?),
        BaseProtocol::Reject => Arc::new(build_rejection(s, seed, calib)?),
    })
}

fn build_rejection(s: &Sizing, seed: u64, calib: &Calibration) -> Result<RejectionProtocol> {
    build_rejection_protocol(s.d, s.k, s.eps, s.r, s.n, UnitarySource::Auto { count: None, seed }, calib)
}

fn echo(config: &ExperimentConfig) -> Value {
    serde_json::to_value(config).expect("configuration serializes")
}

/// Metrics of a protocol experiment, with its resource report and per-trial records.
fn resource_run(
    config: &ExperimentConfig,
    proto: Arc<dyn RspProtocol>,
    est: ErrorEstimate,
    started: Instant,
    audits: Vec<AuditReport>,
) -> (RunOutput, ResourceReport) {
    let records = est.records.clone();
    let report = ResourceReport::from_protocol(proto.as_ref(), est, echo(config), started.elapsed().as_millis() as u64);
    let metrics = json!({ "resource_report": report, "records": records, "protocol": proto.describe() });
    (RunOutput { metrics, audits, records, protocol: Some(proto) }, report)
}

fn average_error_audit(est: &ErrorEstimate, eps: f64) -> AuditReport {
    AuditReport::new("average_error", est.eps_a, eps + 3.0 * est.eps_a_stderr, 0.0)
        .with_parameters(json!({ "eps": eps, "stderr": est.eps_a_stderr, "trials": est.trials }))
}

fn protocol_run(config: &ExperimentConfig, a: &ProtocolArgs, proto: Arc<dyn RspProtocol>) -> Result<RunOutput> {
    let started = Instant::now();
    let est = estimate_errors(proto.as_ref(), a.trials, config.seed, a.adversarial_sweep)?;
    let audit = average_error_audit(&est, a.sizing.eps);
    Ok(resource_run(config, proto, est, started, vec![audit]).0)
}

fn worst_case(config: &ExperimentConfig, a: &WorstArgs) -> Result<RunOutput> {
    let started = Instant::now();
    let (seed, calib) = (config.seed, &config.calibration);
    let base = build_base(a.base, &a.sizing, seed, calib)?;
    let net = match a.net {
        NetKind::Exact => NetChoice::Exact,
        NetKind::Random => {
            let mut rng = derive_rng(seed, streams::NET, 0);
            NetChoice::Random(build_random_net(a.sizing.d, a.sizing.k, a.delta / 4.0, a.net_budget, &mut rng)?)
        }
    };
    let wrapped = avg_to_worst(base, a.delta, net, UnitarySource::Auto { count: a.rounds, seed }, calib)?;
    let est = estimate_errors(wrapped.as_ref(), a.trials, seed, a.adversarial_sweep)?;
    let bound = a.sizing.eps + a.delta;
    let audit = AuditReport::new("worst_case_error", est.eps_w_lower, bound, 0.0)
        .with_parameters(json!({ "eps": a.sizing.eps, "delta": a.delta, "inputs": a.trials + a.adversarial_sweep }));
    Ok(resource_run(config, wrapped, est, started, vec![audit]).0)
}

fn equality(a: &EqArgs, seed: u64, calib: &Calibration) -> Result<RunOutput> {
    let opts = CodebookOptions {
        d: a.d,
        k: a.k,
        overlap_bound: a.overlap_bound,
        sample_m: a.sample_m,
        seed,
        ..Default::default()
    };
    let book = build_codebook(a.n, a.eps, &opts, calib)?;
    let (d, k) = (book.d(), book.k());
    let base: Arc<dyn RspProtocol> =
        Arc::new(build_kraus_protocol(d, k, a.eps, UnitarySource::Auto { count: a.n_unitaries, seed }, calib)?);
    let rsp =
        avg_to_worst(base, a.delta, NetChoice::Exact, UnitarySource::Auto { count: Some(a.rounds), seed }, calib)?;

    let mut rng = derive_rng(seed, streams::EQUALITY, 0);
    let size = book.len() as u64;
    let xs: Vec<u64> = (0..a.inputs).map(|_| rng.random_range(0..size)).collect();
    let (mut max_accept_ne, mut max_reject_eq, mut codeword_error) = (0.0f64, 0.0f64, 0.0f64);
    let mut runs = Vec::new();
    for &x in &xs {
        let px = book.codeword(x)?;
        let ens = rsp.run_exact(px, false)?;
        codeword_error = codeword_error.max(ens.error_against(px));
        let same = run_equality(&book, rsp.as_ref(), x, x, &mut rng)?;
        max_reject_eq = max_reject_eq.max(same.error_prob);
        runs.push(json!(same));
        for _ in 0..a.pairs {
            let y = if size > 1 {
                let y = rng.random_range(0..size - 1);
                y + u64::from(y >= x)
            } else {
                x
            };
            let accept = equality_from_ensemble(&ens, book.codeword(y)?);
            max_accept_ne = max_accept_ne.max(accept);
        }
    }
    let sweep = estimate_errors(rsp.as_ref(), 1, seed, a.inputs)?;
    let eps_w = codeword_error.max(sweep.eps_w_lower);
    let audits = vec![
        AuditReport::new("unequal_acceptance", max_accept_ne, a.eps, 0.0),
        AuditReport::new("equal_rejection", max_reject_eq, eps_w, 1e-12),
    ];
    Ok(RunOutput {
        metrics: json!({
            "codebook": book.describe(),
            "rsp": rsp.describe(),
            "message_bits": rsp.message_bits(),
            "ebits": rsp.ebits(),
            "pairs": a.inputs * a.pairs,
            "max_accept_unequal": max_accept_ne,
            "max_reject_equal": max_reject_eq,
            "eps_w_lower": eps_w,
            "equal_runs": runs,
        }),
        audits,
        records: sweep.records,
        protocol: Some(rsp),
    })
}

fn verify_sdp(a: &SdpArgs, seed: u64) -> Result<RunOutput> {
    let opts = SdpOracleOptions {
        restarts: a.restarts,
        outer_iterations: a.outer_iterations,
        inner_iterations: a.inner_iterations,
    };
    let d = a.d;
    let cases = (0..a.cases as u64)
        .into_par_iter()
        .map(|case| {
            let mut rng = derive_rng(seed, local_streams::SDP_CASES, case);
            let kp = rng.random_range(1..=d);
            let kq = rng.random_range(1..=d);
            let p = sample_flat(d, kp, &mut rng)?;
            let q = sample_flat(d, kq, &mut rng)?.projector().clone();
            let t = rng.random_range(0.01..0.99);
            let closed = sdp_closed_form(&p, &q, t)?;
            let mut orng = derive_rng(seed, local_streams::SDP_ORACLE, case);
            let oracle = sdp_oracle(&p, &q, t, &opts, &mut orng)?;
            Ok(json!({
                "case": case,
                "kp": kp,
                "kq": kq,
                "t": t,
                "closed_form": closed,
                "oracle": oracle,
                "margin": closed - oracle,
            }))
        })
        .collect::<Result<Vec<Value>>>()?;
    let margins: Vec<f64> = cases.iter().map(|c| c["margin"].as_f64().unwrap_or(f64::NAN)).collect();
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let max_gap = margins.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let audits = vec![
        // the oracle value is feasible, so it never exceeds the optimum
        AuditReport::new("oracle_below_closed_form", -min_margin, 0.0, 1e-6),
        AuditReport::new("oracle_reaches_closed_form", max_gap, 1e-4, 0.0),
    ];
    Ok(RunOutput::new(json!({ "d": d, "cases": cases, "min_margin": min_margin, "max_gap": max_gap }), audits))
}

fn prior(d: usize, k: usize, count: usize, seed: u64) -> Result<Vec<FlatInput>> {
    let mut rng = derive_rng(seed, local_streams::PRIOR, 0);
    (0..count).map(|_| sample_flat(d, k, &mut rng)).collect()
}

fn verify_majorize(a: &MajorizeArgs, seed: u64, calib: &Calibration) -> Result<RunOutput> {
    let proto = build_base(a.protocol, &a.sizing, seed, calib)?;
    let inputs = prior(a.sizing.d, a.sizing.k, a.prior, seed)?;
    let report = check_majorization_bound(proto.as_ref(), &inputs)?;
    Ok(RunOutput::new(json!({ "protocol": proto.describe(), "prior": a.prior }), vec![report]).with_protocol(proto))
}

fn verify_decouple(a: &DecoupleArgs, seed: u64, calib: &Calibration) -> Result<RunOutput> {
    let mut regs = vec![a.d1, a.d2];
    if a.env > 1 {
        regs.push(a.env);
    }
    let total: usize = regs.iter().product();
    let rho = match a.state {
        StateKind::Mixed => {
            DensityMatrix::new(Operator::new(CMat::identity(total, total).unscale(total as f64), regs)?)?
        }
        StateKind::Pure => {
            let mut rng = derive_rng(seed, local_streams::FIXED_OPERATOR, 0);
            let amps = ginibre(total, 1, &mut rng).column(0).into_owned();
            PureState::from_unnormalized(amps, regs)?.to_density()
        }
    };
    let rep = decoupling_experiment(a.d1, a.d2, a.k, &rho, a.trials, seed)?;
    let audits = vec![
        AuditReport::new(
            "plain_decoupling_2norm",
            rep.plain_lhs_2norm,
            rep.plain_rhs_2norm + 3.0 * rep.plain_lhs_2norm_stderr,
            0.0,
        ),
        AuditReport::new("post_selected_ratio", rep.ratio, calib.c_total, 0.0),
    ];
    Ok(RunOutput::new(json!({ "report": rep }), audits))
}

fn verify_concentration(a: &ConcentrationArgs, seed: u64) -> Result<RunOutput> {
    let mut rng = derive_rng(seed, local_streams::FIXED_OPERATOR, 0);
    let kind = match a.kind {
        FunctionalKind::Trace => {
            let rank = a.rank.unwrap_or((a.d / 2).max(1));
            ConcentrationKind::Trace(sample_flat(a.d, rank, &mut rng)?.projector().clone())
        }
        FunctionalKind::Spectral => {
            let dim = a.b1 * a.d;
            let rank = a.rank.unwrap_or((dim / 2).max(1));
            ConcentrationKind::Spectral { q: sample_flat(dim, rank, &mut rng)?.projector().clone(), b1: a.b1 }
        }
    };
    let rep = concentration_experiment(a.d, a.k, &kind, a.trials, seed)?;
    let mut audits = Vec::new();
    if let Some(expected) = rep.expected_mean {
        audits.push(AuditReport::new("mean_consistency", (rep.mean - expected).abs(), 3.0 * rep.stderr, 1e-12));
    }
    let reversals = rep.tails.windows(2).filter(|w| w[1].1 > w[0].1).count();
    audits.push(AuditReport::new("tail_monotonicity", reversals as f64, 0.0, 0.0));
    Ok(RunOutput::new(json!({ "report": rep }), audits))
}

fn verify_eigval(a: &EigvalArgs, seed: u64, calib: &Calibration) -> Result<RunOutput> {
    let proto = build_rejection(&a.sizing, seed, calib)?;
    let inputs = prior(a.sizing.d, a.sizing.k, a.points, seed)?;
    let weight = 1.0 / a.points as f64;
    let measure = inputs
        .into_par_iter()
        .map(|p| {
            let ens = proto.run_exact(&p, true)?;
            let first = ens.outcomes()[0].bob_joint.as_ref().expect("rejection runs carry joint states");
            let mut omega = CMat::zeros(first.dim(), first.dim());
            for o in ens.outcomes() {
                omega += o.bob_joint.as_ref().expect("joint state requested").matrix().scale(o.prob);
            }
            let omega = DensityMatrix::from_matrix(omega, first.registers().to_vec())?;
            Ok((weight, p, omega))
        })
        .collect::<Result<Vec<_>>>()?;
    let report = check_eigval_bound(&measure, a.density_bound, a.l, calib.a_cal)?;
    Ok(RunOutput::new(json!({ "protocol": proto.describe() }), vec![report]))
}

fn audit(config: &ExperimentConfig, a: &AuditArgs) -> Result<RunOutput> {
    let started = Instant::now();
    let (seed, calib) = (config.seed, &config.calibration);
    let proto: Arc<dyn RspProtocol> = match a.protocol {
        AuditedProtocol::Kraus => build_base(BaseProtocol::Kraus, &a.sizing, seed, calib)?,
        AuditedProtocol::Reject => build_base(BaseProtocol::Reject, &a.sizing, seed, calib)?,
        AuditedProtocol::Trivial => Arc::new(TrivialProtocol::new(a.sizing.d, a.sizing.k)?),
    };
    let est = estimate_errors(proto.as_ref(), a.trials, seed, a.adversarial_sweep)?;
    let (mut out, report) = resource_run(config, proto, est, started, Vec::new());
    let (comm, ent) = audit_resource_bounds(&report, a.gamma, calib)?;
    out.audits = vec![comm, ent];
    Ok(out)
}

/// Bob's output ensemble on the first trial input.
fn dump_states(proto: &dyn RspProtocol, seed: u64) -> Result<Value> {
    let mut rng = derive_rng(seed, streams::TRIALS, 0);
    let input = sample_flat(proto.d(), proto.k(), &mut rng)?;
    let ens = proto.run_exact(&input, false)?;
    let outcomes: Vec<Value> = ens
        .outcomes()
        .iter()
        .map(|o| json!({ "label": o.label, "prob": o.prob, "bob_state": matrix_to_json(o.bob_state.matrix()) }))
        .collect();
    Ok(json!({
        "input_hash": input.input_hash(),
        "projector": matrix_to_json(input.projector().matrix()),
        "outcomes": outcomes,
    }))
}
