//! Noise families and input distributions on the lattice.
//!
//! Continuous families are discretized by integrating the density over each
//! cell `[k, k + Δ)`. Where an antiderivative is known (Gaussian through
//! `erfc`, Laplacian, Uniform) it is used directly, so cell probabilities and
//! truncated tails are exact to floating point.

use libm::erfc;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{discretize_density, lattice_steps, DiscretePmf, Grid, DEFAULT_QUAD_POINTS};
use crate::privacy::AdjacencySpec;

/// Parameters of one noise family. Serialized as
/// `{"family": "laplacian", "params": {"mu": 0, "lambda": 8}}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "lowercase")]
pub enum Family {
    Gaussian {
        mu: f64,
        sigma: f64,
    },
    Laplacian {
        mu: f64,
        lambda: f64,
    },
    /// Stair width `a` (lattice points per stair) and level decay `rho`.
    Staircase {
        a: u32,
        rho: f64,
    },
    /// Uniform on the lattice points of `[lo, hi]`.
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// Geometric-type noise on the strictly positive lattice points.
    Exponential {
        eta: f64,
    },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Gaussian { .. } => "gaussian",
            Family::Laplacian { .. } => "laplacian",
            Family::Staircase { .. } => "staircase",
            Family::Uniform { .. } => "uniform",
            Family::Exponential { .. } => "exponential",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanismSpec {
    #[serde(flatten)]
    pub family: Family,
    pub delta: f64,
}

pub(crate) fn upper_normal_tail(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Standard normal mass of `[za, zb]`, computed on the side that avoids
/// cancellation.
fn normal_interval(za: f64, zb: f64) -> f64 {
    if za >= 0.0 {
        upper_normal_tail(za) - upper_normal_tail(zb)
    } else if zb <= 0.0 {
        upper_normal_tail(-zb) - upper_normal_tail(-za)
    } else {
        1.0 - upper_normal_tail(-za) - upper_normal_tail(zb)
    }
}

/// Smallest `z` with `upper_normal_tail(z) <= target`, by bisection.
fn normal_quantile_upper(target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 40.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if upper_normal_tail(mid) <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

impl MechanismSpec {
    pub fn new(family: Family, delta: f64) -> Result<Self> {
        let spec = Self { family, delta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn name(&self) -> &'static str {
        self.family.name()
    }

    /// Exponential weights do not sum to one as written and are rescaled.
    pub fn renormalized(&self) -> bool {
        matches!(self.family, Family::Exponential { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let delta = self.delta;
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::invalid("delta", format!("must be positive, got {delta}")));
        }
        match self.family {
            Family::Gaussian { mu, sigma } => {
                if !mu.is_finite() {
                    return Err(Error::invalid("mu", "must be finite"));
                }
                if !(sigma > 0.0) || !sigma.is_finite() {
                    return Err(Error::invalid("sigma", format!("must be positive, got {sigma}")));
                }
            }
            Family::Laplacian { mu, lambda } => {
                if !(lambda > 0.0) || !lambda.is_finite() {
                    return Err(Error::invalid("lambda", format!("must be positive, got {lambda}")));
                }
                lattice_steps(mu, delta).ok_or(Error::OffLatticeMu { mu, delta })?;
            }
            Family::Staircase { a, rho } => {
                if a == 0 {
                    return Err(Error::invalid("a", "stair width must be at least 1"));
                }
                if !(rho > 0.0 && rho < 1.0) {
                    return Err(Error::invalid("rho", format!("must lie in (0, 1), got {rho}")));
                }
            }
            Family::Uniform { lo, hi } => {
                let l = lattice_steps(lo, delta).ok_or(Error::OffLatticeBound { value: lo, delta })?;
                let h = lattice_steps(hi, delta).ok_or(Error::OffLatticeBound { value: hi, delta })?;
                if h < l {
                    return Err(Error::invalid("hi", format!("hi = {hi} is below lo = {lo}")));
                }
            }
            Family::Exponential { eta } => {
                if !(eta > 0.0) || !eta.is_finite() {
                    return Err(Error::invalid("eta", format!("must be positive, got {eta}")));
                }
            }
        }
        Ok(())
    }

    /// Probability of the cell at lattice index `k`.
    fn cell(&self, k: i64) -> f64 {
        let delta = self.delta;
        match self.family {
            Family::Gaussian { mu, sigma } => {
                let a = k as f64 * delta - mu;
                normal_interval(a / sigma, (a + delta) / sigma)
            }
            Family::Laplacian { mu, lambda } => {
                let m = lattice_steps(mu, delta).expect("validated");
                let r = delta / lambda;
                if k >= m {
                    -0.5 * (-r).exp_m1() * (-((k - m) as f64) * r).exp()
                } else {
                    0.5 * r.exp_m1() * (((k - m) as f64) * r).exp()
                }
            }
            Family::Staircase { a, rho } => {
                let a = a as i64;
                let j = if k >= 0 { k / a } else { (-k - 1) / a };
                (1.0 - rho) / (2.0 * a as f64) * rho.powi(j as i32)
            }
            Family::Uniform { lo, hi } => {
                let l = lattice_steps(lo, delta).expect("validated");
                let h = lattice_steps(hi, delta).expect("validated");
                if (l..=h).contains(&k) {
                    1.0 / (h - l + 1) as f64
                } else {
                    0.0
                }
            }
            Family::Exponential { eta } => {
                if k >= 1 {
                    let r = eta * delta;
                    -(-r).exp_m1() * (-((k - 1) as f64) * r).exp()
                } else {
                    0.0
                }
            }
        }
    }

    /// Mass of all lattice indices `>= k`.
    fn upper_mass(&self, k: i64) -> f64 {
        let delta = self.delta;
        match self.family {
            Family::Gaussian { mu, sigma } => upper_normal_tail((k as f64 * delta - mu) / sigma),
            Family::Laplacian { mu, lambda } => {
                let m = lattice_steps(mu, delta).expect("validated");
                let r = delta / lambda;
                if k >= m {
                    0.5 * (-((k - m) as f64) * r).exp()
                } else {
                    // P(X <= k - 1) = exp((k - m) r) / 2 for k - 1 < m
                    1.0 - 0.5 * (((k - m) as f64) * r).exp()
                }
            }
            Family::Staircase { a, rho } => {
                let stair_upper = |h: i64| -> f64 {
                    let a = a as i64;
                    let (j, r) = (h / a, h % a);
                    let c = (1.0 - rho) / (2.0 * a as f64);
                    c * rho.powi(j as i32) * ((a - r) as f64 + a as f64 * rho / (1.0 - rho))
                };
                if k >= 0 {
                    stair_upper(k)
                } else {
                    1.0 - stair_upper(-k)
                }
            }
            Family::Uniform { lo, hi } => {
                let l = lattice_steps(lo, delta).expect("validated");
                let h = lattice_steps(hi, delta).expect("validated");
                let count = (h - k.max(l) + 1).max(0);
                count as f64 / (h - l + 1) as f64
            }
            Family::Exponential { eta } => (-((k.max(1) - 1) as f64) * eta * delta).exp(),
        }
    }

    /// Default window holding all but at most `tau` of the mass.
    pub fn default_window(&self, tau: f64) -> Result<Grid> {
        self.validate()?;
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::invalid("tau", format!("must lie in (0, 1), got {tau}")));
        }
        let delta = self.delta;
        match self.family {
            Family::Gaussian { mu, sigma } => {
                let z = normal_quantile_upper(0.5 * tau);
                let mut lo = ((mu - z * sigma) / delta).floor() as i64;
                let mut hi = ((mu + z * sigma) / delta).ceil() as i64;
                while 1.0 - self.upper_mass(lo) > 0.5 * tau {
                    lo -= 1;
                }
                while self.upper_mass(hi) > 0.5 * tau {
                    hi += 1;
                }
                Grid::span(delta, lo, hi - 1)
            }
            Family::Laplacian { mu, lambda } => {
                let m = lattice_steps(mu, delta).expect("validated");
                let r = (lambda * (1.0 / tau).ln() / delta).ceil() as i64;
                Grid::span(delta, m - r, m + r - 1)
            }
            Family::Staircase { a, rho } => {
                let stairs = (tau.ln() / rho.ln()).ceil().max(1.0) as i64;
                let a = a as i64;
                Grid::span(delta, -stairs * a, stairs * a - 1)
            }
            Family::Uniform { lo, hi } => Grid::span(
                delta,
                lattice_steps(lo, delta).expect("validated"),
                lattice_steps(hi, delta).expect("validated"),
            ),
            Family::Exponential { eta } => {
                let last = ((1.0 / tau).ln() / (eta * delta)).ceil().max(1.0) as i64;
                Grid::span(delta, 1, last)
            }
        }
    }

    /// Exact cell probabilities on `grid`; mass outside goes to the tail.
    pub fn pmf_on(&self, grid: &Grid) -> Result<DiscretePmf> {
        self.validate()?;
        if !grid.same_spacing(&Grid::from_indices(self.delta, 0, 1)?) {
            return Err(Error::GridMismatch {
                left: grid.delta(),
                right: self.delta,
            });
        }
        let probs: Vec<f64> = (grid.start()..grid.end()).map(|k| self.cell(k)).collect();
        let tail = ((1.0 - self.upper_mass(grid.start())) + self.upper_mass(grid.end())).clamp(0.0, 1.0);
        DiscretePmf::new(*grid, probs, tail)
    }

    /// PMF on the default window for truncation budget `tau`.
    pub fn pmf(&self, tau: f64) -> Result<DiscretePmf> {
        let window = self.default_window(tau)?;
        let pmf = self.pmf_on(&window)?;
        if pmf.tail_mass() > tau {
            return Err(Error::TailBudgetExceeded {
                tail_mass: pmf.tail_mass(),
                tau,
            });
        }
        Ok(pmf)
    }
}

pub fn gaussian_noise(mu: f64, sigma: f64, delta: f64, tau: f64) -> Result<DiscretePmf> {
    MechanismSpec::new(Family::Gaussian { mu, sigma }, delta)?.pmf(tau)
}

pub fn laplacian_noise(mu: f64, lambda: f64, delta: f64, tau: f64) -> Result<DiscretePmf> {
    MechanismSpec::new(Family::Laplacian { mu, lambda }, delta)?.pmf(tau)
}

pub fn staircase_noise(a: u32, rho: f64, delta: f64, tau: f64) -> Result<DiscretePmf> {
    MechanismSpec::new(Family::Staircase { a, rho }, delta)?.pmf(tau)
}

pub fn uniform_noise(lo: f64, hi: f64, delta: f64) -> Result<DiscretePmf> {
    MechanismSpec::new(Family::Uniform { lo, hi }, delta)?.pmf(0.5)
}

/// Renormalized `η e^{-ηk}` on `k ∈ {Δ, 2Δ, …}`.
pub fn exponential_noise(eta: f64, delta: f64, tau: f64) -> Result<DiscretePmf> {
    MechanismSpec::new(Family::Exponential { eta }, delta)?.pmf(tau)
}

/// Input distributions used by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InputKind {
    #[serde(rename = "gaussian")]
    DiscretizedGaussian { mu: f64, sigma: f64 },
    /// `γ^k e^{-γ} / k!` on the nonnegative integers. Requires `Δ = 1` and
    /// `γ` below ~700 (the recursion starts from `e^{-γ}`).
    Poisson { gamma: f64 },
}

pub fn input_distribution(kind: InputKind, delta: f64, tau: f64) -> Result<DiscretePmf> {
    match kind {
        InputKind::DiscretizedGaussian { mu, sigma } => {
            let spec = MechanismSpec::new(Family::Gaussian { mu, sigma }, delta)?;
            let window = spec.default_window(tau)?;
            let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
            let density = move |x: f64| norm * (-(x - mu) * (x - mu) / (2.0 * sigma * sigma)).exp();
            // small allowance for the rounding in 1 - Σ probs
            discretize_density(density, &window, DEFAULT_QUAD_POINTS, tau + 1e-14)
        }
        InputKind::Poisson { gamma } => {
            if (delta - 1.0).abs() > 1e-12 {
                return Err(Error::PoissonNeedsUnitDelta { delta });
            }
            if !(gamma > 0.0) || gamma > 700.0 {
                return Err(Error::invalid("gamma", format!("must lie in (0, 700], got {gamma}")));
            }
            let mut probs = vec![(-gamma).exp()];
            let mut k = 0usize;
            loop {
                // remaining mass, summed until terms vanish
                let mut rest = 0.0;
                let mut term = *probs.last().expect("non-empty");
                let mut j = k;
                loop {
                    j += 1;
                    term *= gamma / j as f64;
                    rest += term;
                    if term < 1e-300 || (j as f64 > gamma && term < rest * 1e-17) {
                        break;
                    }
                }
                if rest <= tau {
                    let grid = Grid::from_indices(1.0, 0, probs.len())?;
                    return DiscretePmf::new(grid, probs, rest);
                }
                k += 1;
                let next = probs[k - 1] * gamma / k as f64;
                probs.push(next);
            }
        }
    }
}

/// Families with a pure-epsilon closed form that can be inverted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CalibrationFamily {
    Laplacian { mu: f64 },
    Staircase { a: u32 },
    Exponential,
    Gaussian,
    Uniform,
}

/// Chooses the family parameter whose closed-form epsilon equals `epsilon`.
pub fn calibrate(family: CalibrationFamily, epsilon: f64, m: &AdjacencySpec) -> Result<MechanismSpec> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::invalid("epsilon", format!("must be positive, got {epsilon}")));
    }
    let delta = m.delta();
    let fam = match family {
        CalibrationFamily::Laplacian { mu } => Family::Laplacian {
            mu,
            lambda: (m.value() + delta) / epsilon,
        },
        CalibrationFamily::Staircase { a } => {
            if a == 0 {
                return Err(Error::invalid("a", "stair width must be at least 1"));
            }
            let crossings = m.steps().div_euclid(a as i64) + i64::from(m.steps() % a as i64 != 0);
            Family::Staircase {
                a,
                rho: (-epsilon / crossings as f64).exp(),
            }
        }
        CalibrationFamily::Exponential => Family::Exponential {
            eta: epsilon / m.value(),
        },
        CalibrationFamily::Gaussian => return Err(Error::UncalibratableFamily { family: "gaussian" }),
        CalibrationFamily::Uniform => return Err(Error::UncalibratableFamily { family: "uniform" }),
    };
    MechanismSpec::new(fam, delta)
}
