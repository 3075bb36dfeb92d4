//! Command-line surface and the serializable experiment configuration it produces.
//!
//! Every experiment subcommand parses into an [`Experiment`], and together with the seed,
//! calibration and state-dump flag forms the [`ExperimentConfig`] echoed into each result
//! document. Replay deserializes that echo and re-runs it.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use flatrsp::protocols::Calibration;

#[derive(Debug, Parser)]
#[command(name = "flatrsp", version, about = "Remote state preparation experiments for flat states")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub action: Action,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Master seed; every random draw derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Result document path (stdout when omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Per-trial CSV path.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Override a calibration constant, e.g. `--calib c_kraus=2`.
    #[arg(long = "calib", global = true, value_name = "KEY=VALUE")]
    pub calib: Vec<String>,
    /// Include Bob's output states for the first trial input in the metrics.
    #[arg(long, global = true)]
    pub dump_states: bool,
}

#[derive(Debug, Subcommand)]
pub enum Action {
    #[command(flatten)]
    Run(Experiment),
    /// Re-execute a result document and compare its metrics bit for bit.
    Replay { file: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Experiment {
    /// Kraus-measurement protocol: error estimate and resources.
    Kraus(ProtocolArgs),
    /// Rejection-sampling protocol: error estimate and resources.
    Reject(ProtocolArgs),
    /// Average-to-worst-case wrapper around a base protocol.
    #[command(name = "avg2worst")]
    #[serde(rename = "avg2worst")]
    Avg2Worst(WorstArgs),
    /// Equality protocol built on a flat-state codebook.
    Eq(EqArgs),
    /// Closed-form projector SDP against the numerical oracle.
    VerifySdp(SdpArgs),
    /// Schmidt-spectrum majorization of a protocol's shared state.
    VerifyMajorize(MajorizeArgs),
    /// Plain and post-selected decoupling inequalities.
    VerifyDecouple(DecoupleArgs),
    /// Concentration of functionals of random projectors.
    VerifyConcentration(ConcentrationArgs),
    /// Top-eigenvalue-sum bound for averaged joint protocol outputs.
    VerifyEigval(EigvalArgs),
    /// Communication and entanglement lower-bound audits.
    Audit(AuditArgs),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Kraus(_) => "kraus",
            Self::Reject(_) => "reject",
            Self::Avg2Worst(_) => "avg2worst",
            Self::Eq(_) => "eq",
            Self::VerifySdp(_) => "verify-sdp",
            Self::VerifyMajorize(_) => "verify-majorize",
            Self::VerifyDecouple(_) => "verify-decouple",
            Self::VerifyConcentration(_) => "verify-concentration",
            Self::VerifyEigval(_) => "verify-eigval",
            Self::Audit(_) => "audit",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaseProtocol {
    Kraus,
    Reject,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuditedProtocol {
    Kraus,
    Reject,
    Trivial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetKind {
    Exact,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    Mixed,
    Pure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionalKind {
    Trace,
    Spectral,
}

/// Protocol construction parameters shared by several subcommands.
#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct Sizing {
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Target average error.
    #[arg(long, default_value_t = 0.25)]
    pub eps: f64,
    /// Ancilla dimension (rejection only; auto when omitted).
    #[arg(long)]
    pub r: Option<usize>,
    /// Number of unitaries (auto when omitted).
    #[arg(long = "N")]
    pub n: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct ProtocolArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sizing: Sizing,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub adversarial_sweep: usize,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct WorstArgs {
    #[arg(long, value_enum, default_value_t = BaseProtocol::Kraus)]
    pub base: BaseProtocol,
    #[command(flatten)]
    #[serde(flatten)]
    pub sizing: Sizing,
    #[arg(long, default_value_t = 0.2)]
    pub delta: f64,
    /// Number of rotations `N_w` (auto when omitted).
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long, value_enum, default_value_t = NetKind::Random)]
    pub net: NetKind,
    /// Random-net size.
    #[arg(long, default_value_t = 500)]
    pub net_budget: usize,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long, default_value_t = 100)]
    pub adversarial_sweep: usize,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct EqArgs {
    /// Input length in bits.
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = 0.25)]
    pub eps: f64,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Codewords are drawn for a sample of `2^sample_m` inputs.
    #[arg(long, default_value_t = 10)]
    pub sample_m: u32,
    /// Pairwise overlap bound (default `eps/2`).
    #[arg(long)]
    pub overlap_bound: Option<f64>,
    /// Kraus unitaries of the underlying RSP protocol (auto when omitted).
    #[arg(long = "N")]
    pub n_unitaries: Option<usize>,
    #[arg(long, default_value_t = 0.2)]
    pub delta: f64,
    /// Worst-case wrapper rotations.
    #[arg(long, default_value_t = 4)]
    pub rounds: usize,
    /// Number of `x` values tested.
    #[arg(long, default_value_t = 25)]
    pub inputs: usize,
    /// `y ≠ x` values tested per `x`.
    #[arg(long, default_value_t = 20)]
    pub pairs: usize,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct SdpArgs {
    #[arg(long, default_value_t = 4)]
    pub d: usize,
    #[arg(long, default_value_t = 200)]
    pub cases: usize,
    #[arg(long, default_value_t = 50)]
    pub restarts: usize,
    #[arg(long, default_value_t = 40)]
    pub outer_iterations: usize,
    #[arg(long, default_value_t = 200)]
    pub inner_iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct MajorizeArgs {
    #[arg(long, value_enum, default_value_t = BaseProtocol::Kraus)]
    pub protocol: BaseProtocol,
    #[command(flatten)]
    #[serde(flatten)]
    pub sizing: Sizing,
    /// Inputs in the uniform prior.
    #[arg(long, default_value_t = 16)]
    pub prior: usize,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct DecoupleArgs {
    #[arg(long, default_value_t = 8)]
    pub d1: usize,
    #[arg(long, default_value_t = 8)]
    pub d2: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Environment dimension (1 for none).
    #[arg(long, default_value_t = 1)]
    pub env: usize,
    #[arg(long, value_enum, default_value_t = StateKind::Pure)]
    pub state: StateKind,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct ConcentrationArgs {
    #[arg(long, default_value_t = 8)]
    pub d: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = FunctionalKind::Trace)]
    pub kind: FunctionalKind,
    /// Dimension of the extra register for the spectral functional.
    #[arg(long, default_value_t = 2)]
    pub b1: usize,
    /// Rank of the fixed operator (default: half its dimension).
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct EigvalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sizing: Sizing,
    /// Support points of the input measure (uniform weights).
    #[arg(long, default_value_t = 8)]
    pub points: usize,
    /// Number of top eigenvalues summed.
    #[arg(long, default_value_t = 1)]
    pub l: usize,
    /// Density bound `K ≥ 1` of the measure.
    #[arg(long, default_value_t = 1.0)]
    pub density_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct AuditArgs {
    #[arg(long, value_enum, default_value_t = AuditedProtocol::Kraus)]
    pub protocol: AuditedProtocol,
    #[command(flatten)]
    #[serde(flatten)]
    pub sizing: Sizing,
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub adversarial_sweep: usize,
}

/// Everything a run depends on; echoed verbatim into the result document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub experiment: Experiment,
    pub seed: u64,
    pub calibration: Calibration,
    pub dump_states: bool,
}

/// A configuration that fails validation; reported as a usage error.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError(msg()))
    }
}

fn open_unit(name: &str, v: f64) -> Result<(), ConfigError> {
    check(v > 0.0 && v < 1.0, || format!("--{name} must lie in (0, 1), got {v}"))
}

fn rank(d: usize, k: usize) -> Result<(), ConfigError> {
    check(d >= 1, || "--d must be at least 1".into())?;
    check(k >= 1 && k <= d, || format!("--k must lie in 1..={d}, got {k}"))
}

impl Sizing {
    fn validate(&self) -> Result<(), ConfigError> {
        rank(self.d, self.k)?;
        open_unit("eps", self.eps)?;
        check(self.r != Some(0), || "--r must be at least 1".into())?;
        check(self.n != Some(0), || "--N must be at least 1".into())
    }
}

impl ExperimentConfig {
    pub fn new(
        experiment: Experiment,
        seed: u64,
        calib_overrides: &[String],
        dump_states: bool,
    ) -> Result<Self, ConfigError> {
        let mut calibration = Calibration::default();
        for entry in calib_overrides {
            let (key, value) = entry
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("--calib expects KEY=VALUE, got {entry:?}")))?;
            calibration.set(key.trim(), value.trim()).map_err(|e| ConfigError(e.to_string()))?;
        }
        let config = Self { experiment, seed, calibration, dump_states };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let trials =
            |name: &str, t: usize, min: usize| check(t >= min, || format!("--{name} must be at least {min}, got {t}"));
        match &self.experiment {
            Experiment::Kraus(a) | Experiment::Reject(a) => {
                a.sizing.validate()?;
                trials("trials", a.trials, 1)
            }
            Experiment::Avg2Worst(a) => {
                a.sizing.validate()?;
                check(a.delta > 0.0 && a.delta <= 1.0, || format!("--delta must lie in (0, 1], got {}", a.delta))?;
                check(a.rounds != Some(0), || "--rounds must be at least 1".into())?;
                trials("net-budget", a.net_budget, 1)?;
                check(a.trials + a.adversarial_sweep >= 1, || "need at least one trial or sweep input".into())
            }
            Experiment::Eq(a) => {
                open_unit("eps", a.eps)?;
                check(a.n >= 2, || format!("--n must be at least 2, got {}", a.n))?;
                if let (Some(d), Some(k)) = (a.d, a.k) {
                    rank(d, k)?;
                }
                check(a.sample_m <= 20, || format!("--sample-m must be at most 20, got {}", a.sample_m))?;
                if let Some(b) = a.overlap_bound {
                    open_unit("overlap-bound", b)?;
                }
                check(a.delta > 0.0 && a.delta <= 1.0, || format!("--delta must lie in (0, 1], got {}", a.delta))?;
                check(a.n_unitaries != Some(0), || "--N must be at least 1".into())?;
                trials("rounds", a.rounds, 1)?;
                trials("inputs", a.inputs, 1)?;
                trials("pairs", a.pairs, 1)
            }
            Experiment::VerifySdp(a) => {
                check(a.d >= 1, || "--d must be at least 1".into())?;
                trials("cases", a.cases, 1)?;
                trials("restarts", a.restarts, 1)
            }
            Experiment::VerifyMajorize(a) => {
                a.sizing.validate()?;
                trials("prior", a.prior, 1)
            }
            Experiment::VerifyDecouple(a) => {
                check(a.d1 >= 1 && a.env >= 1, || "--d1 and --env must be at least 1".into())?;
                rank(a.d2, a.k)?;
                trials("trials", a.trials, 1)
            }
            Experiment::VerifyConcentration(a) => {
                rank(a.d, a.k)?;
                check(a.b1 >= 1, || "--b1 must be at least 1".into())?;
                let dim = match a.kind {
                    FunctionalKind::Trace => a.d,
                    FunctionalKind::Spectral => a.b1 * a.d,
                };
                if let Some(r) = a.rank {
                    check(r >= 1 && r <= dim, || format!("--rank must lie in 1..={dim}, got {r}"))?;
                }
                trials("trials", a.trials, 100)
            }
            Experiment::VerifyEigval(a) => {
                a.sizing.validate()?;
                trials("points", a.points, 1)?;
                trials("l", a.l, 1)?;
                check(a.density_bound >= 1.0, || format!("--density-bound must be at least 1, got {}", a.density_bound))
            }
            Experiment::Audit(a) => {
                a.sizing.validate()?;
                open_unit("gamma", a.gamma)?;
                trials("trials", a.trials, 1)
            }
        }
    }
}
