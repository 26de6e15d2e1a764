use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use clickbounds::bounds::{ConstraintForm, Target, DEFAULT_ANGLES, DEFAULT_CUTOFF};
use clickbounds::states::{StateFamily, StateSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "clickbounds", version, about = "Certified photon-number bounds from multiplexed click statistics")]
pub struct Cli {
    /// Output file (default: stdout).
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Seed offset for the randomized self-test checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Command {
    /// Photon-number distribution p_n of a state.
    State(StateArgs),
    /// Click statistics c_m and vacuum probabilities q_0k.
    Clicks(ClicksArgs),
    /// Lower and upper bounds on p_n, the Wigner function at the origin or the mean photon number.
    Bounds(BoundsArgs),
    /// Feasible region of a pair (p_j, p_k).
    Region(RegionArgs),
    /// Bounds over a parameter grid.
    Sweep(SweepArgs),
    /// Linear mean-photon estimator coefficients D_m and G_n.
    Estimator(EstimatorArgs),
    /// Closed-form single-mode bounds on p_1 from two on/off detectors.
    Hbt1(Hbt1Args),
    /// Closed-form lower bound on p_11 for symmetric two-mode states.
    Hbt2(Hbt2Args),
    /// Run the acceptance checks.
    Selftest(SelftestArgs),
    /// Re-run the configuration recorded in a JSON output file.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::State(_) => "state",
            Command::Clicks(_) => "clicks",
            Command::Bounds(_) => "bounds",
            Command::Region(_) => "region",
            Command::Sweep(_) => "sweep",
            Command::Estimator(_) => "estimator",
            Command::Hbt1(_) => "hbt1",
            Command::Hbt2(_) => "hbt2",
            Command::Selftest(_) => "selftest",
            Command::Replay(_) => "replay",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DetectorArgs {
    /// Number of detector channels M.
    #[arg(long, short = 'M', default_value_t = 10)]
    pub channels: usize,
    /// Detection efficiency eta in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct StateArgs {
    /// `thermal|coherent|squeezed|subtracted:nbar=<x>` or `file:<path>`.
    #[arg(long)]
    pub state: StateSpec,
    /// Photon-number cutoff N.
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    pub cutoff: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ClicksArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[command(flatten)]
    pub detector: DetectorArgs,
    /// Also emit the click matrix C_mn up to the cutoff.
    #[arg(long)]
    pub matrix: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[command(flatten)]
    pub detector: DetectorArgs,
    /// Constraint rows: `click` (c_m) or `vacuum` (q_0k).
    #[arg(long, default_value_t = ConstraintForm::Vacuum)]
    pub form: ConstraintForm,
    /// Comma-separated `p<n>`, `pn:<a>-<b>`, `wigner`, `nbar`.
    #[arg(long, default_value = "pn:0-14")]
    pub target: TargetList,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RegionArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[command(flatten)]
    pub detector: DetectorArgs,
    #[arg(long, default_value_t = ConstraintForm::Vacuum)]
    pub form: ConstraintForm,
    /// Photon numbers `j,k`.
    #[arg(long)]
    pub pair: Pair,
    /// Number of support directions.
    #[arg(long, default_value_t = DEFAULT_ANGLES)]
    pub angles: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    /// Comma-separated state families.
    #[arg(long, value_delimiter = ',', default_value = "thermal")]
    pub families: Vec<StateFamily>,
    /// Mean photon numbers: values and `start:stop:step` ranges, comma-separated.
    #[arg(long)]
    pub nbars: NumList,
    /// Channel counts: values and `start:stop` ranges.
    #[arg(long, default_value = "10")]
    pub channels: IntList,
    /// Detection efficiencies, same syntax as `--nbars`.
    #[arg(long, default_value = "1")]
    pub etas: NumList,
    /// Photon-number cutoffs, same syntax as `--channels`.
    #[arg(long, default_value = "80")]
    pub cutoffs: IntList,
    #[arg(long, default_value = "pn:0-14")]
    pub target: TargetList,
    #[arg(long, default_value_t = ConstraintForm::Vacuum)]
    pub form: ConstraintForm,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EstimatorArgs {
    #[command(flatten)]
    pub detector: DetectorArgs,
    /// Largest n in the G_n table.
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    pub cutoff: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(group(ArgGroup::new("source").required(true).args(["p0", "state"])))]
pub struct Hbt1Args {
    /// Probability that neither detector clicks.
    #[arg(long, requires = "q0")]
    pub p0: Option<f64>,
    /// Probability that a given detector does not click.
    #[arg(long, requires = "p0")]
    pub q0: Option<f64>,
    /// Compute p0 and q0 from a state instead.
    #[arg(long)]
    pub state: Option<StateSpec>,
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    pub cutoff: usize,
    /// Also solve the equivalent linear program.
    #[arg(long)]
    pub lp: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(group(ArgGroup::new("source").required(true).args(["p0a", "state", "grid"])))]
pub struct Hbt2Args {
    /// Neither detector of mode A clicks.
    #[arg(long, requires_all = ["p0b", "p00", "qa", "qb", "q0a", "q0b", "q00"])]
    pub p0a: Option<f64>,
    /// Neither detector of mode B clicks.
    #[arg(long, requires = "p0a")]
    pub p0b: Option<f64>,
    /// No detector clicks.
    #[arg(long, requires = "p0a")]
    pub p00: Option<f64>,
    /// A given detector of mode A is silent.
    #[arg(long, requires = "p0a")]
    pub qa: Option<f64>,
    /// A given detector of mode B is silent.
    #[arg(long, requires = "p0a")]
    pub qb: Option<f64>,
    /// Mode A is dark and a given detector of mode B is silent.
    #[arg(long, requires = "p0a")]
    pub q0a: Option<f64>,
    /// Mode B is dark and a given detector of mode A is silent.
    #[arg(long, requires = "p0a")]
    pub q0b: Option<f64>,
    /// One given detector in each mode is silent.
    #[arg(long, requires = "p0a")]
    pub q00: Option<f64>,
    /// Product state with this single-mode state in both modes.
    #[arg(long)]
    pub state: Option<StateSpec>,
    /// Joint distribution file: one row of p_{m,0..} per line.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    /// Grid size for `--state`.
    #[arg(long, default_value_t = 30)]
    pub cutoff: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SelftestArgs {}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// JSON output of an earlier run.
    pub file: PathBuf,
}

/// Everything that determines the output of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub format: Format,
    pub seed: u64,
}

fn parse_err(what: &str, s: &str, detail: impl fmt::Display) -> String {
    format!("invalid {what} `{s}`: {detail}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TargetList(pub Vec<Target>);

impl FromStr for TargetList {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Target::parse_list(s).map(TargetList).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pair(pub usize, pub usize);

impl FromStr for Pair {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(',').ok_or_else(|| parse_err("pair", s, "expected `j,k`"))?;
        let p = |v: &str| v.trim().parse::<usize>().map_err(|e| parse_err("pair", s, e));
        Ok(Pair(p(a)?, p(b)?))
    }
}

/// Rounds away the drift of repeated float steps.
fn tidy(v: f64) -> f64 {
    (v * 1e12).round() / 1e12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NumList(pub Vec<f64>);

impl FromStr for NumList {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let num = |v: &str| v.trim().parse::<f64>().map_err(|e| parse_err("number list", s, e));
        let mut out = Vec::new();
        for part in s.split(',').filter(|p| !p.trim().is_empty()) {
            let bits: Vec<&str> = part.split(':').collect();
            match bits.as_slice() {
                [v] => out.push(num(v)?),
                [a, b, step] => {
                    let (a, b, step) = (num(a)?, num(b)?, num(step)?);
                    if step.is_nan() || step <= 0.0 || b < a {
                        return Err(parse_err("range", part, "need start <= stop and step > 0"));
                    }
                    let count = ((b - a) / step + 1e-9).floor() as usize;
                    out.extend((0..=count).map(|i| tidy(a + step * i as f64)));
                }
                _ => return Err(parse_err("number list", s, "entries are `x` or `start:stop:step`")),
            }
        }
        if out.is_empty() {
            return Err(parse_err("number list", s, "empty"));
        }
        Ok(NumList(out))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntList(pub Vec<usize>);

impl FromStr for IntList {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let int = |v: &str| v.trim().parse::<usize>().map_err(|e| parse_err("integer list", s, e));
        let mut out = Vec::new();
        for part in s.split(',').filter(|p| !p.trim().is_empty()) {
            match part.split_once(':') {
                None => out.push(int(part)?),
                Some((a, b)) => {
                    let (a, b) = (int(a)?, int(b)?);
                    if b < a {
                        return Err(parse_err("range", part, "empty"));
                    }
                    out.extend(a..=b);
                }
            }
        }
        if out.is_empty() {
            return Err(parse_err("integer list", s, "empty"));
        }
        Ok(IntList(out))
    }
}
