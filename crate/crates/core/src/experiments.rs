//! Parameter sweeps and Monte-Carlo frequency runs.
//!
//! Both produce rows that are computed cell by cell in parallel, then sorted
//! (axis value, mechanism name, run index) so the bytes never depend on
//! scheduling.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{convolve, empirical_pmf, wasserstein_w0, DiscretePmf, PmfSampler, DEFAULT_TAU};
use crate::lp::DEFAULT_MAX_ITERS;
use crate::mechanisms::{calibrate, CalibrationFamily};
use crate::optimizer::{objective_w1, objective_w2_cost, solve_p2, OptimizationRequest, DEFAULT_P_MIN};
use crate::privacy::AdjacencySpec;

pub const SWEEP_HEADER: &str = "axis_value,mechanism,status,w0,w1,w2";
pub const MONTECARLO_HEADER: &str = "mechanism,run,w0_empirical";
pub const DEFAULT_N_DRAWS: usize = 10_000;

/// Name of the synthesized optimum in every table.
pub const OPTIMAL: &str = "optimal";

#[derive(Debug, Clone, PartialEq)]
pub enum Mechanism {
    /// Calibrated to the cell's `(ε, m)` through its closed form.
    Baseline(CalibrationFamily),
    /// Solution of the linear program for the cell.
    Optimal,
    /// No noise.
    PointMass,
    /// A fixed noise PMF, used as is in every cell.
    Custom { name: String, noise: DiscretePmf },
}

impl Mechanism {
    /// Accepts `laplacian`, `staircase:a=<int>`, `exponential`, `optimal` and `point`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, args) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let bad = || Error::invalid("mechanism", format!("unknown mechanism {s:?}"));
        match (head, args) {
            ("laplacian", None) => Ok(Self::Baseline(CalibrationFamily::Laplacian { mu: 0.0 })),
            ("exponential", None) => Ok(Self::Baseline(CalibrationFamily::Exponential)),
            ("optimal", None) => Ok(Self::Optimal),
            ("point", None) => Ok(Self::PointMass),
            ("staircase", Some(args)) => {
                let a = args
                    .strip_prefix("a=")
                    .and_then(|v| v.parse::<u32>().ok())
                    .filter(|&a| a > 0)
                    .ok_or_else(bad)?;
                Ok(Self::Baseline(CalibrationFamily::Staircase { a }))
            }
            _ => Err(bad()),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Baseline(CalibrationFamily::Laplacian { .. }) => "laplacian".into(),
            Self::Baseline(CalibrationFamily::Staircase { a }) => format!("staircase:a={a}"),
            Self::Baseline(CalibrationFamily::Exponential) => "exponential".into(),
            Self::Baseline(CalibrationFamily::Gaussian) => "gaussian".into(),
            Self::Baseline(CalibrationFamily::Uniform) => "uniform".into(),
            Self::Optimal => OPTIMAL.into(),
            Self::PointMass => "point".into(),
            Self::Custom { name, .. } => name.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentOptions {
    pub tau: f64,
    pub p_min: f64,
    pub max_iters: usize,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            tau: DEFAULT_TAU,
            p_min: DEFAULT_P_MIN,
            max_iters: DEFAULT_MAX_ITERS,
        }
    }
}

/// Noise of `mech` at `(ε, m)`.
pub fn noise_for(
    mech: &Mechanism,
    input: &DiscretePmf,
    epsilon: f64,
    m: &AdjacencySpec,
    opts: &ExperimentOptions,
) -> Result<DiscretePmf> {
    match mech {
        Mechanism::Baseline(fam) => calibrate(*fam, epsilon, m)?.pmf(opts.tau),
        Mechanism::Optimal => Ok(solve_p2(&request(input, epsilon, m, opts)?)?.noise),
        Mechanism::PointMass => DiscretePmf::point_mass(m.delta(), 0.0),
        Mechanism::Custom { noise, .. } => Ok(noise.clone()),
    }
}

fn request(
    input: &DiscretePmf,
    epsilon: f64,
    m: &AdjacencySpec,
    opts: &ExperimentOptions,
) -> Result<OptimizationRequest> {
    let mut req = OptimizationRequest::new(input.clone(), epsilon, *m)?;
    req.p_min = opts.p_min;
    req.max_iters = opts.max_iters;
    Ok(req)
}

/// `(W0, W1, W2)` of adding `noise` to `input`.
pub fn utility(input: &DiscretePmf, noise: &DiscretePmf) -> Result<(f64, f64, f64)> {
    let w0 = wasserstein_w0(input, &convolve(input, noise)?)?;
    let w1 = objective_w1(input, noise)?;
    let cost = objective_w2_cost(input, noise.grid())?;
    let w2 = cost.iter().zip(noise.probs()).map(|(c, p)| c * p).sum();
    Ok((w0, w1, w2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Epsilon,
    M,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub axis: Axis,
    pub grid: Vec<f64>,
    /// Used when the axis is `M`.
    pub epsilon: f64,
    /// Used when the axis is `Epsilon`.
    pub m: f64,
    /// The optimum is always added.
    pub baselines: Vec<Mechanism>,
    pub options: ExperimentOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    pub mechanism: String,
    /// `ok`, or the failure kind.
    pub status: String,
    pub w0: Option<f64>,
    pub w1: Option<f64>,
    pub w2: Option<f64>,
}

fn status_of(e: &Error) -> String {
    match e {
        Error::Infeasible { .. } => "infeasible".into(),
        Error::Unbounded => "unbounded".into(),
        Error::IterationLimit { .. } => "iteration_limit".into(),
        Error::SupportTooNarrow { .. } => "support_too_narrow".into(),
        _ => "error".into(),
    }
}

/// Every (grid value, mechanism) cell; failures become rows with a status.
pub fn sweep(input: &DiscretePmf, cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    if cfg.grid.is_empty() {
        return Err(Error::invalid("grid", "needs at least one value"));
    }
    if let Some(v) = cfg.grid.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::invalid("grid", format!("values must be positive, got {v}")));
    }
    let delta = input.delta();
    // check every m before any work starts
    let cells: Vec<(f64, f64, AdjacencySpec)> = cfg
        .grid
        .iter()
        .map(|&v| {
            let (eps, m) = match cfg.axis {
                Axis::Epsilon => (v, cfg.m),
                Axis::M => (cfg.epsilon, v),
            };
            Ok((v, eps, AdjacencySpec::new(m, delta)?))
        })
        .collect::<Result<_>>()?;
    let mut mechs = vec![Mechanism::Optimal];
    mechs.extend(cfg.baselines.iter().filter(|b| **b != Mechanism::Optimal).cloned());
    let jobs: Vec<_> = cells
        .iter()
        .flat_map(|c| mechs.iter().map(move |mech| (c, mech)))
        .collect();
    let mut rows: Vec<SweepRow> = jobs
        .par_iter()
        .map(|((v, eps, m), mech)| {
            let res = noise_for(mech, input, *eps, m, &cfg.options).and_then(|noise| utility(input, &noise));
            let (status, w) = match res {
                Ok((w0, w1, w2)) => ("ok".to_string(), [Some(w0), Some(w1), Some(w2)]),
                Err(e) => (status_of(&e), [None; 3]),
            };
            SweepRow {
                axis_value: *v,
                mechanism: mech.name(),
                status,
                w0: w[0],
                w1: w[1],
                w2: w[2],
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        a.axis_value
            .total_cmp(&b.axis_value)
            .then_with(|| a.mechanism.cmp(&b.mechanism))
    });
    Ok(rows)
}

fn opt_field(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = format!("{SWEEP_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.axis_value,
            r.mechanism,
            r.status,
            opt_field(r.w0),
            opt_field(r.w1),
            opt_field(r.w2)
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloConfig {
    pub mechanisms: Vec<Mechanism>,
    pub epsilon: f64,
    pub m: f64,
    pub runs: usize,
    pub n_draws: usize,
    pub seed: u64,
    pub options: ExperimentOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub mechanism: String,
    pub run: usize,
    pub w0_empirical: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub mechanism: String,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub std_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloReport {
    pub runs: Vec<RunRow>,
    pub summary: Vec<RunSummary>,
}

impl MonteCarloReport {
    pub fn summary_of(&self, mechanism: &str) -> Option<&RunSummary> {
        self.summary.iter().find(|s| s.mechanism == mechanism)
    }

    /// Per-run rows, then `mean`, `min`, `max` and `std_err` rows per mechanism
    /// in place of the run index.
    pub fn to_csv(&self) -> String {
        let mut s = format!("{MONTECARLO_HEADER}\n");
        for r in &self.runs {
            let _ = writeln!(s, "{},{},{}", r.mechanism, r.run, r.w0_empirical);
        }
        for m in &self.summary {
            for (k, v) in [("mean", m.mean), ("min", m.min), ("max", m.max), ("std_err", m.std_err)] {
                let _ = writeln!(s, "{},{k},{v}", m.mechanism);
            }
        }
        s
    }
}

/// Empirical W0 of one run: `n_draws` outputs `x + θ` from a stream seeded
/// with `seed`.
pub fn empirical_w0(input: &DiscretePmf, noise: &DiscretePmf, n_draws: usize, seed: u64) -> Result<f64> {
    if n_draws == 0 {
        return Err(Error::invalid("n_draws", "need at least one draw"));
    }
    let xs = PmfSampler::new(input)?;
    let ns = PmfSampler::new(noise)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<i64> = (0..n_draws)
        .map(|_| xs.draw_index(&mut rng) + ns.draw_index(&mut rng))
        .collect();
    wasserstein_w0(input, &empirical_pmf(input.delta(), &draws)?)
}

fn summarize(mechanism: String, values: &[f64]) -> RunSummary {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    RunSummary {
        mechanism,
        mean,
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        std_err: (var / n).sqrt(),
    }
}

/// Run `r` of every mechanism uses seed `seed ^ r`.
pub fn montecarlo(input: &DiscretePmf, cfg: &MonteCarloConfig) -> Result<MonteCarloReport> {
    if cfg.runs == 0 {
        return Err(Error::invalid("runs", "need at least one run"));
    }
    if cfg.mechanisms.is_empty() {
        return Err(Error::invalid("mechanisms", "need at least one mechanism"));
    }
    let m = AdjacencySpec::new(cfg.m, input.delta())?;
    let noises: Vec<(String, DiscretePmf)> = cfg
        .mechanisms
        .par_iter()
        .map(|mech| Ok((mech.name(), noise_for(mech, input, cfg.epsilon, &m, &cfg.options)?)))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..noises.len())
        .flat_map(|i| (0..cfg.runs).map(move |r| (i, r)))
        .collect();
    let mut runs: Vec<RunRow> = jobs
        .par_iter()
        .map(|&(i, r)| {
            Ok(RunRow {
                mechanism: noises[i].0.clone(),
                run: r,
                w0_empirical: empirical_w0(input, &noises[i].1, cfg.n_draws, cfg.seed ^ r as u64)?,
            })
        })
        .collect::<Result<_>>()?;
    runs.sort_by(|a, b| a.mechanism.cmp(&b.mechanism).then(a.run.cmp(&b.run)));
    let mut summary: Vec<RunSummary> = Vec::new();
    for chunk in runs.chunk_by(|a, b| a.mechanism == b.mechanism) {
        let values: Vec<f64> = chunk.iter().map(|r| r.w0_empirical).collect();
        summary.push(summarize(chunk[0].mechanism.clone(), &values));
    }
    Ok(MonteCarloReport { runs, summary })
}
