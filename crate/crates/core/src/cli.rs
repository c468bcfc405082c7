//! Command-line driver behind the `lattice-dp` binary.
//!
//! Exit codes: 0 success, 1 error, 2 audit verdict NotDP, 3 infeasible
//! linear program.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::experiments::{
    montecarlo, sweep, sweep_csv, Axis, ExperimentOptions, Mechanism, MonteCarloConfig, SweepConfig, DEFAULT_N_DRAWS,
};
use crate::grid::{DiscretePmf, Grid, DEFAULT_TAU};
use crate::lp::DEFAULT_MAX_ITERS;
use crate::mechanisms::{input_distribution, InputKind, MechanismSpec};
use crate::optimizer::{solve_p2, OptimizationRequest, DEFAULT_P_MIN};
use crate::privacy::{audit, AdjacencySpec, AuditOptions, AuditSubject, Exterior, Verdict, DEFAULT_FLOOR};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_DP: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "lattice-dp",
    version,
    about = "Lattice noise mechanisms: audit, synthesis and experiments"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true, default_value_t = DEFAULT_TAU)]
    pub tau: f64,
    #[arg(long = "p-min", global = true, default_value_t = DEFAULT_P_MIN)]
    pub p_min: f64,
    #[arg(long, global = true, default_value_t = DEFAULT_FLOOR)]
    pub floor: f64,
    #[arg(long = "boundary-M", global = true)]
    pub boundary_m: Option<f64>,
    #[arg(long = "n-draws", global = true, default_value_t = DEFAULT_N_DRAWS)]
    pub n_draws: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    Epsilon,
    M,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify a mechanism spec or noise PMF.
    Audit {
        input: PathBuf,
        #[arg(long)]
        m: f64,
        /// zero, ignore, or constant=<p>.
        #[arg(long)]
        exterior: Option<String>,
    },
    /// Solve for the optimal noise of an input distribution.
    Synthesize {
        input: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        m: f64,
        /// Also write `value,probability` rows of the noise here.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Noise support half-width in lattice steps.
        #[arg(long = "half-width")]
        half_width: Option<i64>,
    },
    /// Optimum and calibrated baselines over an epsilon or m grid.
    Sweep {
        input: PathBuf,
        #[arg(long, value_enum)]
        axis: AxisArg,
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<f64>,
        /// Fixed epsilon for an m sweep.
        #[arg(long, default_value_t = 2.0)]
        epsilon: f64,
        /// Fixed m for an epsilon sweep.
        #[arg(long, default_value_t = 15.0)]
        m: f64,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "laplacian,staircase:a=5,staircase:a=20"
        )]
        baselines: Vec<String>,
    },
    /// Empirical W0 over repeated sampled runs.
    Montecarlo {
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "optimal,laplacian")]
        mechanisms: Vec<String>,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        m: f64,
        #[arg(long, default_value_t = 100)]
        runs: usize,
    },
}

/// Parses `args` (program name first), runs, and returns the exit code.
/// Diagnostics go to `stderr`.
pub fn run_from<I, T>(args: I, stderr: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = write!(stderr, "{}", e.render());
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            match e {
                Error::Infeasible { .. } => EXIT_INFEASIBLE,
                _ => EXIT_ERROR,
            }
        }
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::invalid("input", format!("{}: {e}", path.display())))
}

fn pmf_from(v: Value) -> Result<DiscretePmf> {
    serde_json::from_value(v).map_err(|e| Error::invalid("pmf", e.to_string()))
}

/// A file holding `{"family": ...}` is a spec, one with a `noise` field a
/// synthesis result; anything else a PMF.
pub fn load_subject(path: &Path) -> Result<AuditSubject> {
    let mut v = read_json(path)?;
    if let Some(noise) = v.get_mut("noise") {
        Ok(AuditSubject::Pmf(pmf_from(noise.take())?))
    } else if v.get("family").is_some() {
        let spec: MechanismSpec = serde_json::from_value(v).map_err(|e| Error::invalid("spec", e.to_string()))?;
        spec.validate()?;
        Ok(AuditSubject::Spec(spec))
    } else {
        Ok(AuditSubject::Pmf(pmf_from(v)?))
    }
}

/// A PMF file, or `{"kind": "gaussian"|"poisson", ..., "delta": Δ}` built
/// with truncation `tau`.
pub fn load_input(path: &Path, tau: f64) -> Result<DiscretePmf> {
    let v = read_json(path)?;
    if v.get("kind").is_some() {
        let delta = match v.get("delta") {
            None => 1.0,
            Some(d) => d.as_f64().ok_or_else(|| Error::invalid("delta", "must be a number"))?,
        };
        let kind: InputKind = serde_json::from_value(v).map_err(|e| Error::invalid("kind", e.to_string()))?;
        input_distribution(kind, delta, tau)
    } else {
        pmf_from(v)
    }
}

fn parse_exterior(s: &str) -> Result<Exterior> {
    match s {
        "zero" => Ok(Exterior::Zero),
        "ignore" => Ok(Exterior::Ignore),
        _ => s
            .strip_prefix("constant=")
            .and_then(|v| v.parse::<f64>().ok())
            .filter(|v| *v >= 0.0 && v.is_finite())
            .map(Exterior::Constant)
            .ok_or_else(|| Error::invalid("exterior", format!("expected zero, ignore or constant=<p>, got {s:?}"))),
    }
}

fn emit(common: &Common, text: &str) -> Result<()> {
    match &common.out {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(out.flush()?)
        }
    }
}

fn opt_num(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn verdict_name(v: &Verdict) -> &'static str {
    match v {
        Verdict::PureDp { .. } => "pure",
        Verdict::ApproxDp { .. } => "approx",
        Verdict::NotDp { .. } => "not_dp",
    }
}

fn options(common: &Common) -> ExperimentOptions {
    ExperimentOptions {
        tau: common.tau,
        p_min: common.p_min,
        max_iters: DEFAULT_MAX_ITERS,
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let c = &cli.common;
    match &cli.command {
        Command::Audit { input, m, exterior } => {
            let subject = load_subject(input)?;
            let delta = match &subject {
                AuditSubject::Spec(s) => s.delta,
                AuditSubject::Pmf(p) => p.delta(),
            };
            let opts = AuditOptions {
                floor: c.floor,
                boundary_m: c.boundary_m,
                tau: c.tau,
                exterior: exterior.as_deref().map(parse_exterior).transpose()?,
                ..AuditOptions::default()
            };
            let report = audit(&subject, &AdjacencySpec::new(*m, delta)?, &opts)?;
            let text = match c.format.unwrap_or(Format::Json) {
                Format::Json => report.to_json() + "\n",
                Format::Csv => format!(
                    "verdict,epsilon,delta,c_b\n{},{},{},{}\n",
                    verdict_name(&report.verdict),
                    opt_num(report.epsilon()),
                    opt_num(report.delta()),
                    opt_num(report.c_b())
                ),
            };
            emit(c, &text)?;
            Ok(if report.is_not_dp() { EXIT_NOT_DP } else { EXIT_OK })
        }
        Command::Synthesize {
            input,
            epsilon,
            m,
            csv,
            half_width,
        } => {
            let x = load_input(input, c.tau)?;
            let adj = AdjacencySpec::new(*m, x.delta())?;
            let mut req = OptimizationRequest::new(x, *epsilon, adj)?;
            req.p_min = c.p_min;
            if let Some(w) = half_width {
                if *w < 0 {
                    return Err(Error::invalid("half-width", "must be nonnegative"));
                }
                req.noise_support = Grid::symmetric(req.m.delta(), *w)?;
                req.check_support = false;
            }
            let result = solve_p2(&req)?;
            if let Some(p) = csv {
                fs::write(p, result.noise_csv()).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            }
            let text = match c.format.unwrap_or(Format::Json) {
                Format::Json => result.to_json() + "\n",
                Format::Csv => result.noise_csv(),
            };
            emit(c, &text)?;
            Ok(EXIT_OK)
        }
        Command::Sweep {
            input,
            axis,
            grid,
            epsilon,
            m,
            baselines,
        } => {
            let x = load_input(input, c.tau)?;
            let cfg = SweepConfig {
                axis: match axis {
                    AxisArg::Epsilon => Axis::Epsilon,
                    AxisArg::M => Axis::M,
                },
                grid: grid.clone(),
                epsilon: *epsilon,
                m: *m,
                baselines: baselines.iter().map(|s| Mechanism::parse(s)).collect::<Result<_>>()?,
                options: options(c),
            };
            let rows = sweep(&x, &cfg)?;
            let text = match c.format.unwrap_or(Format::Csv) {
                Format::Csv => sweep_csv(&rows),
                Format::Json => {
                    let v: Vec<Value> = rows
                        .iter()
                        .map(|r| {
                            json!({
                                "axis_value": r.axis_value,
                                "mechanism": r.mechanism,
                                "status": r.status,
                                "w0": r.w0,
                                "w1": r.w1,
                                "w2": r.w2,
                            })
                        })
                        .collect();
                    serde_json::to_string_pretty(&v).expect("rows serialize") + "\n"
                }
            };
            emit(c, &text)?;
            Ok(EXIT_OK)
        }
        Command::Montecarlo {
            input,
            mechanisms,
            epsilon,
            m,
            runs,
        } => {
            let x = load_input(input, c.tau)?;
            let cfg = MonteCarloConfig {
                mechanisms: mechanisms.iter().map(|s| Mechanism::parse(s)).collect::<Result<_>>()?,
                epsilon: *epsilon,
                m: *m,
                runs: *runs,
                n_draws: c.n_draws,
                seed: c.seed,
                options: options(c),
            };
            let rep = montecarlo(&x, &cfg)?;
            let text = match c.format.unwrap_or(Format::Csv) {
                Format::Csv => rep.to_csv(),
                Format::Json => {
                    let v = json!({
                        "runs": rep.runs.iter().map(|r| json!({
                            "mechanism": r.mechanism,
                            "run": r.run,
                            "w0_empirical": r.w0_empirical,
                        })).collect::<Vec<_>>(),
                        "summary": rep.summary.iter().map(|s| json!({
                            "mechanism": s.mechanism,
                            "mean": s.mean,
                            "min": s.min,
                            "max": s.max,
                            "std_err": s.std_err,
                        })).collect::<Vec<_>>(),
                    });
                    serde_json::to_string_pretty(&v).expect("report serializes") + "\n"
                }
            };
            emit(c, &text)?;
            Ok(EXIT_OK)
        }
    }
}
