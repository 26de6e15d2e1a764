mod args;
mod output;

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use clickbounds::acceptance;
use clickbounds::analytic::{lp_p1_bounds, HbtSingleModeData, HbtTwoModeData, JointGrid, LP_CUTOFF};
use clickbounds::bounds::{bound_target, feasibility_region, sweep_with_sink, SweepGrid};
use clickbounds::detector::{click_matrix, click_statistics, vacuum_probabilities, DetectorConfig};
use clickbounds::estimator::build_estimator;
use clickbounds::report::{self, Cell, Table, BOUNDS_COLUMNS};
use clickbounds::states::StateSpec;
use clickbounds::Error;
use log::{info, warn};

use args::{Cli, Command, DetectorArgs, RunConfig};
use output::{Emitter, Header};

const THREADS_VAR: &str = "CLICKBOUNDS_THREADS";

/// Ways a run can fail, each with its exit code.
#[derive(Debug)]
enum Failure {
    /// 1: bad flags or parameters.
    Usage(String),
    /// 2: infeasible or malformed data, unreadable files.
    Data(String),
    /// 3: a certificate or self-test check failed.
    Check(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Check(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}\n\nFor more information, try '--help'."),
            Failure::Data(m) | Failure::Check(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidParameter(_) | Error::Parse { .. } | Error::IndexOutOfRange { .. } => Failure::Usage(msg),
            Error::DimensionMismatch { .. } | Error::InfeasibleData(_) | Error::Infeasible { .. } | Error::Io(_) => {
                Failure::Data(msg)
            }
            Error::Unbounded | Error::Singular { .. } | Error::Certificate(_) => Failure::Check(msg),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(format!("i/o error: {e}"))
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}

fn threads() -> Result<usize, Failure> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{THREADS_VAR}=`{v}` is not a thread count"))),
        Err(_) => Ok(0),
    }
}

fn run(cli: Cli) -> Outcome {
    let threads = threads()?;
    let config = match cli.command {
        Command::Replay(r) => {
            let mut cfg = recorded_config(&r.file)?;
            if let Some(f) = cli.format {
                cfg.format = f;
            }
            cfg
        }
        command => RunConfig {
            command,
            format: cli.format.unwrap_or_default(),
            seed: cli.seed,
        },
    };
    execute(config, cli.out.as_deref(), threads)
}

/// Configuration stored in the header of an earlier JSON or CSV output.
fn recorded_config(path: &PathBuf) -> Result<RunConfig, Failure> {
    #[derive(serde::Deserialize)]
    struct Recorded {
        run: Header,
    }
    let text = fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    let bad = |e: serde_json::Error| Failure::Data(format!("{}: no usable run header ({e})", path.display()));
    let cfg: RunConfig = match text.lines().find_map(|l| l.strip_prefix("# config: ")) {
        Some(line) => serde_json::from_str(line).map_err(bad)?,
        None => serde_json::from_str::<Recorded>(&text).map_err(bad)?.run.config,
    };
    if matches!(cfg.command, Command::Replay(_)) {
        return Err(Failure::Data("recorded run is itself a replay".into()));
    }
    Ok(cfg)
}

fn detector(d: &DetectorArgs) -> Result<DetectorConfig, Failure> {
    Ok(DetectorConfig::new(d.channels, d.eta)?)
}

fn state_label(spec: &StateSpec) -> (String, f64) {
    match spec.family() {
        Some(f) => (f.family.to_string(), f.nbar),
        None => (spec.to_string(), f64::NAN),
    }
}

fn execute(config: RunConfig, out: Option<&Path>, threads: usize) -> Outcome {
    let mut em = Emitter::new(output::open(out)?, Header::new(config.clone()))?;
    let status = emit(&config, &mut em, threads);
    em.finish()?;
    status
}

fn emit(config: &RunConfig, em: &mut Emitter, threads: usize) -> Outcome {
    info!("running `{}`", config.command.name());
    match &config.command {
        Command::State(a) => {
            let d = a.state.distribution(a.cutoff)?;
            em.table("distribution", report::distribution_table(&d))?;
            let mut s = Table::new(&["cutoff", "tail_mass", "mean_truncated"]);
            s.push(vec![d.cutoff().into(), d.tail_mass().into(), d.mean().into()]);
            em.table("summary", s)?;
        }
        Command::Clicks(a) => {
            let cfg = detector(&a.detector)?;
            let d = a.state.state.distribution(a.state.cutoff)?;
            em.table("clicks", report::clicks_table(&click_statistics(&cfg, &d)))?;
            em.table("vacuum", report::vacuum_table(&vacuum_probabilities(&cfg, &d)))?;
            if a.matrix {
                em.table("click_matrix", report::click_matrix_table(&click_matrix(&cfg, a.state.cutoff)))?;
            }
        }
        Command::Bounds(a) => {
            let cfg = detector(&a.detector)?;
            let n = a.state.cutoff;
            let d = a.state.state.distribution(n)?;
            let results = a
                .target
                .0
                .iter()
                .map(|&t| bound_target(&cfg, &d, t, n, a.form))
                .collect::<Result<Vec<_>, _>>()?;
            let (family, nbar) = state_label(&a.state.state);
            em.table("bounds", report::bounds_table(&family, nbar, &results))?;
            let failed: Vec<String> = results
                .iter()
                .filter(|r| !r.certified())
                .map(|r| format!("{}: min [{}], max [{}]", r.target, r.certificate_min, r.certificate_max))
                .collect();
            if !failed.is_empty() {
                return Err(Failure::Check(format!("certificate check failed for {}", failed.join("; "))));
            }
        }
        Command::Region(a) => {
            let cfg = detector(&a.detector)?;
            let d = a.state.state.distribution(a.state.cutoff)?;
            let (j, k) = (a.pair.0, a.pair.1);
            let r = feasibility_region(&cfg, &d, j, k, a.angles, a.state.cutoff, a.form)?;
            em.table("region", report::region_table(&r))?;
            let (x, y) = r.true_point;
            let mut s = Table::new(&["j", "k", "points", "area", "true_pj", "true_pk", "inside", "certified", "worst_gap"]);
            s.push(vec![
                j.into(),
                k.into(),
                r.points.len().into(),
                r.area().into(),
                x.into(),
                y.into(),
                r.contains(x, y, 1e-9).into(),
                r.certified.into(),
                r.worst_gap.into(),
            ]);
            em.table("summary", s)?;
            if !r.certified {
                return Err(Failure::Check(format!("region support points uncertified (worst gap {:.3e})", r.worst_gap)));
            }
        }
        Command::Sweep(a) => {
            let grid = SweepGrid {
                families: a.families.clone(),
                nbars: a.nbars.0.clone(),
                channels: a.channels.0.clone(),
                etas: a.etas.0.clone(),
                cutoffs: a.cutoffs.0.clone(),
                targets: a.target.0.clone(),
                form: a.form,
            };
            em.begin("bounds", &BOUNDS_COLUMNS)?;
            let (mut io_err, mut uncertified, mut errors) = (None, 0usize, 0usize);
            sweep_with_sink(&grid, threads, |r| {
                if r.error.is_some() {
                    errors += 1;
                } else if !r.certified {
                    uncertified += 1;
                }
                if io_err.is_none() {
                    io_err = em.row(report::sweep_row(r)).err();
                }
            })?;
            if let Some(e) = io_err {
                return Err(e.into());
            }
            if uncertified > 0 {
                return Err(Failure::Check(format!("{uncertified} sweep rows failed the certificate check")));
            }
            if errors > 0 {
                return Err(Failure::Data(format!("{errors} sweep rows could not be evaluated (see `error` column)")));
            }
        }
        Command::Estimator(a) => {
            let est = build_estimator(&detector(&a.detector)?, a.cutoff)?;
            em.table("D", report::estimator_d_table(&est))?;
            em.table("G", report::estimator_g_table(&est))?;
            let mut s = Table::new(&["residual", "limit"]);
            s.push(vec![est.residual().into(), est.limit().into()]);
            em.table("summary", s)?;
        }
        Command::Hbt1(a) => {
            let data = match (&a.state, a.p0, a.q0) {
                (Some(spec), _, _) => HbtSingleModeData::from_distribution(&spec.distribution(a.cutoff)?)?,
                (None, Some(p0), Some(q0)) => HbtSingleModeData::new(p0, q0)?,
                _ => return Err(Failure::Usage("give --p0 and --q0, or --state".into())),
            };
            let lp = if a.lp { Some(lp_p1_bounds(&data, LP_CUTOFF)?) } else { None };
            em.table("hbt1", report::hbt1_table(&data, lp.as_ref()))?;
            if lp.is_some_and(|b| !b.certified) {
                return Err(Failure::Check("linear program certificate failed".into()));
            }
        }
        Command::Hbt2(a) => {
            let grid = match (&a.state, &a.grid) {
                (Some(spec), _) => {
                    let d = spec.distribution(a.cutoff)?;
                    Some(JointGrid::product(&d, &d, a.cutoff))
                }
                (None, Some(path)) => Some(read_grid(path)?),
                (None, None) => None,
            };
            let data = match &grid {
                Some(g) => {
                    if !g.is_symmetric(1e-12) {
                        warn!("joint distribution is not symmetric; the p11 bound assumes p_mn = p_nm");
                    }
                    HbtTwoModeData::from_grid(g)
                }
                None => {
                    let v = |x: Option<f64>| x.ok_or_else(|| Failure::Usage("all eight probabilities are required".into()));
                    HbtTwoModeData {
                        p0a: v(a.p0a)?,
                        p0b: v(a.p0b)?,
                        p00: v(a.p00)?,
                        qa: v(a.qa)?,
                        qb: v(a.qb)?,
                        q0a: v(a.q0a)?,
                        q0b: v(a.q0b)?,
                        q00: v(a.q00)?,
                    }
                }
            };
            let bound = data.p11_lower()?;
            em.table("hbt2", report::hbt2_table(&data, &bound))?;
            if let Some(g) = &grid {
                let mut t = Table::new(&["p11"]);
                t.push(vec![g.get(1, 1).into()]);
                em.table("reference", t)?;
            }
        }
        Command::Selftest(_) => {
            let outcomes = acceptance::run_all(threads, config.seed, |o| eprintln!("{o}"));
            let mut t = Table::new(&["criterion", "name", "passed", "seconds", "detail"]);
            for o in &outcomes {
                t.push(vec![
                    usize::from(o.id).into(),
                    o.name.into(),
                    o.passed.into(),
                    o.elapsed.as_secs_f64().into(),
                    Cell::from(o.detail.as_str()),
                ]);
            }
            em.table("selftest", t)?;
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            if failed > 0 {
                return Err(Failure::Check(format!("{failed} acceptance checks failed")));
            }
        }
        Command::Replay(_) => unreachable!("replay is resolved before execution"),
    }
    Ok(())
}

/// Whitespace-separated rows `p_{m,0} p_{m,1} ...`, one line per `m`.
fn read_grid(path: &Path) -> Result<JointGrid, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    let rows = text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|l| {
            l.split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| Failure::Data(format!("{}: `{t}`: {e}", path.display()))))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    JointGrid::from_rows(rows).map_err(|e| Failure::Data(e.to_string()))
}
