//! Lattice-supported probability mass functions.
//!
//! Every distribution in this crate lives on the lattice `{k * delta : k ∈ Z}`
//! and is materialized on a finite window of consecutive lattice points. Mass
//! that falls outside the window is never silently renormalized away; it is
//! carried in [`DiscretePmf::tail_mass`].
//!
//! Positions are tracked as integer lattice indices (`value / delta`), so two
//! PMFs with the same spacing can be aligned without floating point drift.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default truncation budget for tails cut off at construction.
pub const DEFAULT_TAU: f64 = 1e-12;

/// Allowed deviation of `sum(probs) + tail_mass` from one.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Default number of Simpson panels per lattice cell.
pub const DEFAULT_QUAD_POINTS: usize = 64;

/// Converts a value to an integer number of lattice steps, or `None` when the
/// value is not a lattice point (relative tolerance 1e-9).
pub fn lattice_steps(value: f64, delta: f64) -> Option<i64> {
    if !value.is_finite() || !(delta > 0.0) {
        return None;
    }
    let steps = (value / delta).round();
    if (value - steps * delta).abs() <= 1e-9 * delta.max(value.abs() * 1e-6) {
        Some(steps as i64)
    } else {
        None
    }
}

/// A finite window of consecutive lattice points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    delta: f64,
    origin: f64,
    start: i64,
    len: usize,
}

impl Grid {
    /// Window of `len` points whose first point sits at `origin`.
    pub fn new(delta: f64, origin: f64, len: usize) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::invalid("delta", format!("must be positive, got {delta}")));
        }
        if !origin.is_finite() {
            return Err(Error::invalid("origin", "must be finite"));
        }
        if len == 0 {
            return Err(Error::invalid("len", "window must hold at least one point"));
        }
        let start = (origin / delta).round();
        let tol = 1e-12 * delta + 4.0 * f64::EPSILON * origin.abs();
        if (origin - start * delta).abs() > tol {
            return Err(Error::invalid(
                "origin",
                format!("{origin} is not a multiple of delta = {delta}"),
            ));
        }
        Ok(Self {
            delta,
            origin,
            start: start as i64,
            len,
        })
    }

    /// Window of `len` points starting at lattice index `start`.
    pub fn from_indices(delta: f64, start: i64, len: usize) -> Result<Self> {
        Self::new(delta, start as f64 * delta, len)
    }

    /// Window of lattice indices `[lo, hi]`, inclusive.
    pub fn span(delta: f64, lo: i64, hi: i64) -> Result<Self> {
        if hi < lo {
            return Err(Error::invalid("len", format!("empty span [{lo}, {hi}]")));
        }
        Self::from_indices(delta, lo, (hi - lo + 1) as usize)
    }

    /// Window `[-half_width, half_width]` in lattice steps.
    pub fn symmetric(delta: f64, half_width: i64) -> Result<Self> {
        Self::span(delta, -half_width, half_width)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    /// Lattice index of the first point.
    pub fn start(&self) -> i64 {
        self.start
    }

    /// Lattice index one past the last point.
    pub fn end(&self) -> i64 {
        self.start + self.len as i64
    }

    /// Lattice index of the last point.
    pub fn last(&self) -> i64 {
        self.end() - 1
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn value(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.delta
    }

    /// Value of an arbitrary lattice index.
    pub fn value_of_index(&self, index: i64) -> f64 {
        index as f64 * self.delta
    }

    /// Position inside the window of a lattice index.
    pub fn position(&self, index: i64) -> Option<usize> {
        if index >= self.start && index < self.end() {
            Some((index - self.start) as usize)
        } else {
            None
        }
    }

    pub fn contains_index(&self, index: i64) -> bool {
        self.position(index).is_some()
    }

    pub fn same_spacing(&self, other: &Grid) -> bool {
        (self.delta - other.delta).abs() <= 1e-12 * self.delta.max(other.delta)
    }

    pub(crate) fn check_spacing(&self, other: &Grid) -> Result<()> {
        if self.same_spacing(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: self.delta,
                right: other.delta,
            })
        }
    }

    /// Smallest window covering both grids.
    pub fn union(&self, other: &Grid) -> Result<Grid> {
        self.check_spacing(other)?;
        Grid::span(self.delta, self.start.min(other.start), self.last().max(other.last()))
    }

    /// This window extended by `left` and `right` points.
    pub fn widen(&self, left: usize, right: usize) -> Grid {
        Grid::span(self.delta, self.start - left as i64, self.last() + right as i64)
            .expect("widening keeps the window non-empty")
    }
}

/// A probability mass function on a finite lattice window.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePmf {
    grid: Grid,
    probs: Vec<f64>,
    tail_mass: f64,
}

impl DiscretePmf {
    pub fn new(grid: Grid, probs: Vec<f64>, tail_mass: f64) -> Result<Self> {
        if probs.len() != grid.len() {
            return Err(Error::invalid(
                "probs",
                format!("expected {} entries, got {}", grid.len(), probs.len()),
            ));
        }
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !p.is_finite() || **p < 0.0) {
            return Err(Error::invalid(
                "probs",
                format!("entry {i} is {p}; probabilities must be finite and nonnegative"),
            ));
        }
        if !tail_mass.is_finite() || !(0.0..=1.0).contains(&tail_mass) {
            return Err(Error::invalid("tail_mass", format!("{tail_mass} is outside [0, 1]")));
        }
        let total: f64 = probs.iter().sum::<f64>() + tail_mass;
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::invalid(
                "probs",
                format!("probabilities plus tail mass sum to {total}, not 1"),
            ));
        }
        Ok(Self { grid, probs, tail_mass })
    }

    /// Unit mass at a lattice value.
    pub fn point_mass(delta: f64, value: f64) -> Result<Self> {
        let index = lattice_steps(value, delta).ok_or(Error::OffLatticeBound { value, delta })?;
        Self::new(Grid::from_indices(delta, index, 1)?, vec![1.0], 0.0)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn delta(&self) -> f64 {
        self.grid.delta
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Probability at a lattice index; zero outside the window.
    pub fn prob_at(&self, index: i64) -> f64 {
        self.grid.position(index).map_or(0.0, |i| self.probs[i])
    }

    /// Mass inside the window.
    pub fn mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Same probabilities moved by `steps` lattice points.
    pub fn shift(&self, steps: i64) -> DiscretePmf {
        let grid =
            Grid::from_indices(self.grid.delta, self.grid.start + steps, self.grid.len).expect("shifted grid is valid");
        DiscretePmf {
            grid,
            probs: self.probs.clone(),
            tail_mass: self.tail_mass,
        }
    }

    /// Re-embeds onto `grid`. Points of this window that fall outside `grid`
    /// move into the tail.
    pub fn embed(&self, grid: &Grid) -> Result<DiscretePmf> {
        self.grid.check_spacing(grid)?;
        let mut probs = vec![0.0; grid.len()];
        let mut dropped = 0.0;
        for (i, &p) in self.probs.iter().enumerate() {
            match grid.position(self.grid.start + i as i64) {
                Some(j) => probs[j] = p,
                None => dropped += p,
            }
        }
        Ok(DiscretePmf {
            grid: *grid,
            probs,
            tail_mass: (self.tail_mass + dropped).min(1.0),
        })
    }

    /// Window trimmed to the first and last strictly positive entries.
    pub fn trimmed(&self) -> DiscretePmf {
        let first = self.probs.iter().position(|&p| p > 0.0);
        let last = self.probs.iter().rposition(|&p| p > 0.0);
        match (first, last) {
            (Some(a), Some(b)) => DiscretePmf {
                grid: Grid::from_indices(self.grid.delta, self.grid.start + a as i64, b - a + 1)
                    .expect("trimmed grid is valid"),
                probs: self.probs[a..=b].to_vec(),
                tail_mass: self.tail_mass,
            },
            _ => self.clone(),
        }
    }

    /// `E|X|` in lattice steps, over the window.
    pub fn mean_abs_steps(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| p * ((self.grid.start + i as i64) as f64).abs())
            .sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("pmf serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid("pmf", e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
struct PmfWire {
    delta: f64,
    origin: f64,
    probs: Vec<f64>,
    tail_mass: f64,
}

impl Serialize for DiscretePmf {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PmfWire {
            delta: self.grid.delta,
            origin: self.grid.origin,
            probs: self.probs.clone(),
            tail_mass: self.tail_mass,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DiscretePmf {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = PmfWire::deserialize(deserializer)?;
        let grid = Grid::new(wire.delta, wire.origin, wire.probs.len().max(1)).map_err(serde::de::Error::custom)?;
        DiscretePmf::new(grid, wire.probs, wire.tail_mass).map_err(serde::de::Error::custom)
    }
}

/// Cumulative sums of a [`DiscretePmf`] over its window.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteCdf {
    grid: Grid,
    cumprobs: Vec<f64>,
}

impl DiscreteCdf {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn cumprobs(&self) -> &[f64] {
        &self.cumprobs
    }

    /// CDF at a lattice index: 0 below the window, the window mass above it.
    pub fn at(&self, index: i64) -> f64 {
        if index < self.grid.start {
            0.0
        } else if index >= self.grid.end() {
            *self.cumprobs.last().expect("non-empty cdf")
        } else {
            self.cumprobs[(index - self.grid.start) as usize]
        }
    }
}

pub fn cdf(p: &DiscretePmf) -> DiscreteCdf {
    let mut acc = 0.0;
    let cumprobs = p
        .probs
        .iter()
        .map(|&x| {
            acc += x;
            acc
        })
        .collect();
    DiscreteCdf { grid: p.grid, cumprobs }
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> Result<f64> {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    let eval = |x: f64| -> Result<f64> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFiniteDensity { at: x })
        }
    };
    let mut left = eval(a)?;
    for k in 0..panels {
        let x0 = a + k as f64 * h;
        let x1 = if k + 1 == panels { b } else { x0 + h };
        let mid = eval(0.5 * (x0 + x1))?;
        let right = eval(x1)?;
        total += (x1 - x0) / 6.0 * (left + 4.0 * mid + right);
        left = right;
    }
    Ok(total)
}

/// Cell-integral discretization: `probs[i] = ∫_{v_i}^{v_i + Δ} f`.
///
/// Each cell is integrated with composite Simpson over `quad_points` panels.
/// Whatever mass the window misses becomes `tail_mass`, which must not exceed
/// `tau`.
pub fn discretize_density<F>(f: F, grid: &Grid, quad_points: usize, tau: f64) -> Result<DiscretePmf>
where
    F: Fn(f64) -> f64,
{
    if quad_points < 2 {
        return Err(Error::invalid("quad_points", "need at least 2 panels per cell"));
    }
    let mut probs = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let a = grid.value(i);
        let cell = simpson(&f, a, a + grid.delta(), quad_points)?;
        probs.push(cell.max(0.0));
    }
    let tail_mass = (1.0 - probs.iter().sum::<f64>()).clamp(0.0, 1.0);
    if tail_mass > tau {
        return Err(Error::TailBudgetExceeded { tail_mass, tau });
    }
    DiscretePmf::new(*grid, probs, tail_mass)
}

/// Distribution of the sum of two independent lattice variables.
pub fn convolve(input: &DiscretePmf, noise: &DiscretePmf) -> Result<DiscretePmf> {
    input.grid.check_spacing(&noise.grid)?;
    let len = input.len() + noise.len() - 1;
    let mut probs = vec![0.0; len];
    for (i, &a) in input.probs.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        for (j, &b) in noise.probs.iter().enumerate() {
            probs[i + j] += a * b;
        }
    }
    let grid = Grid::from_indices(input.delta(), input.grid.start + noise.grid.start, len)?;
    let tail_mass = input.tail_mass + noise.tail_mass - input.tail_mass * noise.tail_mass;
    DiscretePmf::new(grid, probs, tail_mass)
}

/// Lattice-sum Wasserstein distance `Σ_k |P(k) − Q(k)|`.
///
/// The sum runs over the union of both windows plus one point on each side.
/// The result is counted in lattice steps, not value units.
pub fn wasserstein_w0(p: &DiscretePmf, q: &DiscretePmf) -> Result<f64> {
    let window = p.grid.union(&q.grid)?.widen(1, 1);
    let (cp, cq) = (cdf(p), cdf(q));
    Ok((window.start()..window.end())
        .map(|k| (cp.at(k) - cq.at(k)).abs())
        .sum())
}

/// Inverse-CDF sampler over the window, renormalized by the in-window mass.
#[derive(Debug, Clone)]
pub struct PmfSampler {
    start: i64,
    delta: f64,
    cumulative: Vec<f64>,
}

impl PmfSampler {
    pub fn new(p: &DiscretePmf) -> Result<Self> {
        let c = cdf(p);
        let total = *c.cumprobs.last().unwrap_or(&0.0);
        if !(total > 0.0) {
            return Err(Error::DegeneratePmf);
        }
        Ok(Self {
            start: p.grid.start,
            delta: p.delta(),
            cumulative: c.cumprobs.iter().map(|x| x / total).collect(),
        })
    }

    /// Draws a lattice index.
    pub fn draw_index<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let u: f64 = rng.random();
        let pos = self.cumulative.partition_point(|&c| c <= u);
        // u < 1 always, but the last cumulative entry can round below 1.
        let pos = pos.min(self.cumulative.len() - 1);
        self.start + pos as i64
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.draw_index(rng) as f64 * self.delta
    }
}

/// `n` i.i.d. draws, deterministic for a fixed seed.
pub fn sample(p: &DiscretePmf, seed: u64, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("n", "need at least one draw"));
    }
    let sampler = PmfSampler::new(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| sampler.draw(&mut rng)).collect())
}

/// Empirical PMF of lattice-index draws.
pub fn empirical_pmf(delta: f64, indices: &[i64]) -> Result<DiscretePmf> {
    let lo = *indices.iter().min().ok_or(Error::DegeneratePmf)?;
    let hi = *indices.iter().max().expect("non-empty");
    let grid = Grid::span(delta, lo, hi)?;
    let mut counts = vec![0u64; grid.len()];
    for &k in indices {
        counts[(k - lo) as usize] += 1;
    }
    let n = indices.len() as f64;
    DiscretePmf::new(grid, counts.into_iter().map(|c| c as f64 / n).collect(), 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pmf(start: i64, probs: &[f64]) -> DiscretePmf {
        DiscretePmf::new(
            Grid::from_indices(1.0, start, probs.len()).unwrap(),
            probs.to_vec(),
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn grid_rejects_off_lattice_origin() {
        assert!(Grid::new(1.0, 0.5, 3).is_err());
        assert!(Grid::new(0.1, -3.0, 3).is_ok());
        assert!(Grid::new(0.0, 0.0, 3).is_err());
    }

    #[test]
    fn pmf_validation_names_the_field() {
        let g = Grid::from_indices(1.0, 0, 2).unwrap();
        let err = DiscretePmf::new(g, vec![1.5, -0.5], 0.0).unwrap_err();
        assert!(err.to_string().contains("probs"));
        let err = DiscretePmf::new(g, vec![0.5, 0.4], 0.0).unwrap_err();
        assert!(err.to_string().contains("probs"));
        assert!(DiscretePmf::new(g, vec![0.5, 0.4], 0.1).is_ok());
    }

    #[test]
    fn uniform_density_splits_evenly() {
        let grid = Grid::from_indices(1.0, 0, 2).unwrap();
        let f = |x: f64| if (0.0..=2.0).contains(&x) { 0.5 } else { 0.0 };
        let p = discretize_density(f, &grid, 64, 1e-12).unwrap();
        assert!((p.probs()[0] - 0.5).abs() < 1e-12);
        assert!((p.probs()[1] - 0.5).abs() < 1e-12);
        assert_eq!(p.tail_mass(), 0.0);
    }

    #[test]
    fn standard_gaussian_cells_are_symmetric() {
        let grid = Grid::from_indices(1.0, -1, 2).unwrap();
        let f = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let p = discretize_density(f, &grid, 64, 1.0).unwrap();
        assert!((p.probs()[0] - p.probs()[1]).abs() < 1e-15);
    }

    #[test]
    fn discretize_reports_tail_budget_and_non_finite() {
        let grid = Grid::from_indices(1.0, 0, 1).unwrap();
        let f = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        assert!(matches!(
            discretize_density(f, &grid, 64, 1e-12),
            Err(Error::TailBudgetExceeded { .. })
        ));
        let bad = |_x: f64| f64::NAN;
        assert!(matches!(
            discretize_density(bad, &grid, 64, 1.0),
            Err(Error::NonFiniteDensity { .. })
        ));
    }

    #[test]
    fn gaussian_cell_matches_fine_trapezoid() {
        let sigma = 10.0;
        let f = move |x: f64| (-(x * x) / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt());
        let grid = Grid::symmetric(1.0, 80).unwrap();
        let p = discretize_density(f, &grid, 64, 1e-12).unwrap();
        // oracle: 10^6-point trapezoid on [0, 1]
        let n = 1_000_000;
        let h = 1.0 / n as f64;
        let mut oracle = 0.5 * (f(0.0) + f(1.0));
        for i in 1..n {
            oracle += f(i as f64 * h);
        }
        oracle *= h;
        let cell0 = p.prob_at(0);
        assert!((cell0 - oracle).abs() < 1e-10, "{cell0} vs {oracle}");
    }

    #[test]
    fn cdf_examples() {
        let c = cdf(&pmf(0, &[0.25, 0.5, 0.25]));
        assert_eq!(c.cumprobs(), &[0.25, 0.75, 1.0]);
        let c = cdf(&pmf(0, &[0.0, 0.0, 1.0, 0.0]));
        assert_eq!(c.cumprobs(), &[0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn convolution_examples() {
        let q = pmf(-2, &[0.1, 0.2, 0.3, 0.4]);
        let id = DiscretePmf::point_mass(1.0, 0.0).unwrap();
        assert_eq!(convolve(&id, &q).unwrap(), q);

        let coin = pmf(0, &[0.5, 0.5]);
        let two = convolve(&coin, &coin).unwrap();
        assert_eq!(two.grid().start(), 0);
        assert_eq!(two.probs(), &[0.25, 0.5, 0.25]);
    }

    #[test]
    fn convolution_rejects_mismatched_spacing() {
        let a = DiscretePmf::point_mass(1.0, 0.0).unwrap();
        let b = DiscretePmf::point_mass(0.5, 0.0).unwrap();
        assert!(matches!(convolve(&a, &b), Err(Error::GridMismatch { .. })));
        assert!(matches!(wasserstein_w0(&a, &b), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn convolution_tail_combines() {
        let g = Grid::from_indices(1.0, 0, 1).unwrap();
        let a = DiscretePmf::new(g, vec![0.9], 0.1).unwrap();
        let b = DiscretePmf::new(g, vec![0.8], 0.2).unwrap();
        let c = convolve(&a, &b).unwrap();
        assert!((c.tail_mass() - (0.1 + 0.2 - 0.02)).abs() < 1e-15);
    }

    #[test]
    fn w0_examples() {
        let p = pmf(0, &[0.2, 0.3, 0.5]);
        assert_eq!(wasserstein_w0(&p, &p).unwrap(), 0.0);
        let a = DiscretePmf::point_mass(1.0, 0.0).unwrap();
        let b = DiscretePmf::point_mass(1.0, 3.0).unwrap();
        assert_eq!(wasserstein_w0(&a, &b).unwrap(), 3.0);
    }

    #[test]
    fn sampling_point_mass_and_determinism() {
        let p = DiscretePmf::point_mass(1.0, 5.0).unwrap();
        assert_eq!(sample(&p, 7, 10).unwrap(), vec![5.0; 10]);
        let coin = pmf(0, &[0.5, 0.5]);
        assert_eq!(sample(&coin, 11, 100).unwrap(), sample(&coin, 11, 100).unwrap());
        assert!(sample(&coin, 11, 0).is_err());
    }

    #[test]
    fn sampling_a_fair_coin() {
        let coin = pmf(0, &[0.5, 0.5]);
        let draws = sample(&coin, 2024, 1_000_000).unwrap();
        let zeros = draws.iter().filter(|&&x| x == 0.0).count() as f64 / 1e6;
        assert!((0.498..=0.502).contains(&zeros), "{zeros}");
    }

    #[test]
    fn degenerate_pmf_cannot_be_sampled() {
        let g = Grid::from_indices(1.0, 0, 2).unwrap();
        let p = DiscretePmf::new(g, vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(sample(&p, 1, 3).unwrap_err(), Error::DegeneratePmf);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let g = Grid::new(0.1, -0.30000000000000004, 3).unwrap();
        let p = DiscretePmf::new(g, vec![0.1, 0.7000000000000001, 0.19999999999999996], 0.0).unwrap();
        let back = DiscretePmf::from_json(&p.to_json()).unwrap();
        assert_eq!(back.grid().origin().to_bits(), p.grid().origin().to_bits());
        for (a, b) in back.probs().iter().zip(p.probs()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn embed_moves_outside_mass_to_tail() {
        let p = pmf(0, &[0.25, 0.5, 0.25]);
        let e = p.embed(&Grid::from_indices(1.0, 1, 4).unwrap()).unwrap();
        assert_eq!(e.probs(), &[0.5, 0.25, 0.0, 0.0]);
        assert_eq!(e.tail_mass(), 0.25);
    }
}
