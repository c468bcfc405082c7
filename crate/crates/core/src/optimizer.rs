//! Utility-optimal noise synthesis.
//!
//! For input `x` and noise `θ` on the lattice, the CDF gap at `k` is linear
//! in the noise vector: `F_x(k) − F_{x+θ}(k) = p_xᵀ M_k p_θ`. Summing its
//! absolute value gives `W1`, which equals the lattice Wasserstein distance
//! `W0`. Moving the absolute value inside gives the linear upper bound
//! `W2 = Σ_k |p_xᵀ M_k| p_θ`, minimized here under the pairwise ratio
//! constraints `p(j) <= e^ε p(j')` for cells at most `m` apart.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::grid::{cdf, convolve, wasserstein_w0, DiscreteCdf, DiscretePmf, Grid};
use crate::lp::{solve_lp_dual_lazy, LpProblem, LpStatus, SparseRows, DEFAULT_MAX_ITERS};
use crate::privacy::{audit, AdjacencySpec, AuditOptions, AuditSubject, Exterior, PrivacyReport};

pub const DEFAULT_P_MIN: f64 = 1e-9;

/// Staircase tail mass the default support must leave out.
pub const SUPPORT_TAIL: f64 = 1e-6;

/// Largest noise support the dense solver is given.
pub const MAX_SUPPORT_CELLS: usize = 10_001;

/// `M_k = M_k¹ − M_k²` for an input of `input_len` cells.
///
/// `k_offset` is `k` minus the anchor one step below the input's first cell,
/// in lattice steps, so `M_k¹` has its first `k_offset` rows set (clamped to
/// `[0, input_len]`). Noise column `j` sits at lattice index
/// `noise_start + j` relative to zero, and row `i` of `M_k²` has ones where
/// that index is at most `k_offset − 1 − i`.
pub fn build_mk(input_len: usize, k_offset: i64, noise_len: usize, noise_start: i64) -> Vec<Vec<f64>> {
    let r = k_offset.clamp(0, input_len as i64) as usize;
    (0..input_len)
        .map(|i| {
            let m1 = if i < r { 1.0 } else { 0.0 };
            (0..noise_len)
                .map(|j| {
                    let m2 = if noise_start + j as i64 <= k_offset - 1 - i as i64 {
                        1.0
                    } else {
                        0.0
                    };
                    m1 - m2
                })
                .collect()
        })
        .collect()
}

/// Lattice indices `k` at which some `p_xᵀ M_k` entry can be nonzero.
fn k_window(input: &Grid, noise: &Grid) -> std::ops::Range<i64> {
    let lo = input.start() + noise.start().min(0) - 1;
    let hi = input.last() + noise.last().max(0) + 1;
    lo..hi + 1
}

/// `p_xᵀ M_k` at lattice index `k`: entry `j` is `F_x(k) − F_x(k − θ_j)`.
pub fn mk_row(input_cdf: &DiscreteCdf, k: i64, noise: &Grid) -> Vec<f64> {
    let fk = input_cdf.at(k);
    (noise.start()..noise.end()).map(|t| fk - input_cdf.at(k - t)).collect()
}

fn aligned(input: &DiscretePmf, grid: &Grid) -> Result<()> {
    if input.grid().same_spacing(grid) {
        Ok(())
    } else {
        Err(Error::GridMismatch {
            left: input.delta(),
            right: grid.delta(),
        })
    }
}

/// `W1 = Σ_k |p_xᵀ M_k p_θ|`.
pub fn objective_w1(input: &DiscretePmf, noise: &DiscretePmf) -> Result<f64> {
    aligned(input, noise.grid())?;
    let c = cdf(input);
    let g = noise.grid();
    Ok(k_window(input.grid(), g)
        .map(|k| {
            let row = mk_row(&c, k, g);
            row.iter().zip(noise.probs()).map(|(a, p)| a * p).sum::<f64>().abs()
        })
        .sum())
}

/// `Σ_k |p_xᵀ M_k|`, the linear cost of `W2`.
pub fn objective_w2_cost(input: &DiscretePmf, noise_support: &Grid) -> Result<Vec<f64>> {
    aligned(input, noise_support)?;
    let c = cdf(input);
    let mut cost = vec![0.0; noise_support.len()];
    for k in k_window(input.grid(), noise_support) {
        for (acc, v) in cost.iter_mut().zip(mk_row(&c, k, noise_support)) {
            *acc += v.abs();
        }
    }
    Ok(cost)
}

/// Ratio rows `p(j) − e^ε p(j') <= 0` plus edge rows.
#[derive(Debug, Clone, PartialEq)]
pub struct DpConstraints {
    pub a_ub: SparseRows,
    pub b_ub: Vec<f64>,
    /// Rows `0..pair_rows` are ordered pairs inside the support.
    pub pair_rows: usize,
    /// The rest pin cells whose partner falls outside: `p(j) <= e^ε p_min`.
    pub edge_rows: usize,
}

pub fn build_dp_constraints(epsilon: f64, m: &AdjacencySpec, noise_support: &Grid, p_min: f64) -> DpConstraints {
    let n = noise_support.len() as i64;
    let s = m.steps();
    let e = epsilon.exp();
    let mut a_ub = SparseRows::new(n as usize);
    let mut b_ub = Vec::new();
    for j in 0..n {
        for jp in (j - s).max(0)..=(j + s).min(n - 1) {
            if jp != j {
                a_ub.push(vec![(j as usize, 1.0), (jp as usize, -e)]).expect("in range");
                b_ub.push(0.0);
            }
        }
    }
    let pair_rows = b_ub.len();
    for j in 0..n {
        if j < s || j >= n - s {
            a_ub.push(vec![(j as usize, 1.0)]).expect("in range");
            b_ub.push(e * p_min);
        }
    }
    let edge_rows = b_ub.len() - pair_rows;
    DpConstraints {
        a_ub,
        b_ub,
        pair_rows,
        edge_rows,
    }
}

/// Half-width in lattice steps that a calibrated staircase with stair width
/// `m` needs to leave at most [`SUPPORT_TAIL`] outside.
pub fn required_half_width(epsilon: f64, m: &AdjacencySpec) -> i64 {
    let stairs = ((1.0 / SUPPORT_TAIL).ln() / epsilon).ceil() as i64;
    stairs * m.steps()
}

/// Upper bound on the total mass any feasible noise can carry: edge cells
/// are at most `e^ε p_min` and each further `m` steps multiply by `e^ε`.
pub fn max_feasible_mass(epsilon: f64, m: &AdjacencySpec, n: usize, p_min: f64) -> f64 {
    let s = m.steps().max(1) as usize;
    if n <= 2 * s {
        return n as f64 * p_min * epsilon.exp();
    }
    (0..n)
        .map(|j| {
            let d = j.saturating_sub(s - 1).min((n - s).saturating_sub(j));
            let stairs = 1 + d.div_ceil(s);
            (p_min.ln() + epsilon * stairs as f64).exp().min(1.0)
        })
        .sum()
}

/// Symmetric support of twice [`required_half_width`].
pub fn default_noise_support(epsilon: f64, m: &AdjacencySpec) -> Result<Grid> {
    Grid::symmetric(m.delta(), 2 * required_half_width(epsilon, m))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationRequest {
    pub input: DiscretePmf,
    pub epsilon: f64,
    pub m: AdjacencySpec,
    pub noise_support: Grid,
    pub p_min: f64,
    /// Refuse supports narrower than [`required_half_width`].
    pub check_support: bool,
    pub max_iters: usize,
}

impl OptimizationRequest {
    /// Default support and floor.
    pub fn new(input: DiscretePmf, epsilon: f64, m: AdjacencySpec) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::invalid("epsilon", format!("must be positive, got {epsilon}")));
        }
        Ok(Self {
            noise_support: default_noise_support(epsilon, &m)?,
            input,
            epsilon,
            m,
            p_min: DEFAULT_P_MIN,
            check_support: true,
            max_iters: DEFAULT_MAX_ITERS,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::invalid(
                "epsilon",
                format!("must be positive, got {}", self.epsilon),
            ));
        }
        if !(self.p_min > 0.0) || !self.p_min.is_finite() {
            return Err(Error::invalid("p_min", format!("must be positive, got {}", self.p_min)));
        }
        aligned(&self.input, &self.noise_support)?;
        if !self
            .noise_support
            .same_spacing(&Grid::from_indices(self.m.delta(), 0, 1)?)
        {
            return Err(Error::GridMismatch {
                left: self.noise_support.delta(),
                right: self.m.delta(),
            });
        }
        Ok(())
    }
}

/// One maximal run of (relatively) equal probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub level: f64,
}

impl Segment {
    pub fn cells(&self, delta: f64) -> usize {
        ((self.end - self.start) / delta).round() as usize + 1
    }
}

/// Greedy left-to-right runs whose cells stay within `rel_tol` of the run's
/// first value. `level` is the run mean.
pub fn detect_staircase(p: &DiscretePmf, rel_tol: f64) -> Vec<Segment> {
    let g = p.grid();
    let probs = p.probs();
    let mut out = Vec::new();
    let mut i = 0;
    while i < probs.len() {
        let first = probs[i];
        let mut j = i + 1;
        while j < probs.len() && (probs[j] - first).abs() <= rel_tol * first.abs() {
            j += 1;
        }
        let level = probs[i..j].iter().sum::<f64>() / (j - i) as f64;
        out.push(Segment {
            start: g.value(i),
            end: g.value(j - 1),
            level,
        });
        i = j;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSummary {
    pub status: LpStatus,
    pub iterations: usize,
    pub objective: Option<f64>,
    /// Largest constraint violation of the returned point.
    pub max_violation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalNoiseResult {
    pub noise: DiscretePmf,
    pub w0: f64,
    pub w1: f64,
    pub w2: f64,
    pub lp_status: LpSummary,
    pub staircase_segments: Vec<Segment>,
    pub privacy_check: PrivacyReport,
}

impl OptimalNoiseResult {
    pub fn to_value(&self) -> Value {
        json!({
            "noise": serde_json::to_value(&self.noise).expect("pmf serializes"),
            "w0": self.w0,
            "w1": self.w1,
            "w2": self.w2,
            "lp_status": {
                "status": self.lp_status.status,
                "iterations": self.lp_status.iterations,
                "objective": self.lp_status.objective,
                "max_violation": self.lp_status.max_violation,
            },
            "staircase_segments": self.staircase_segments.iter().map(|s| json!({
                "start": s.start,
                "end": s.end,
                "level": s.level,
            })).collect::<Vec<_>>(),
            "privacy_check": self.privacy_check.to_value(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("result serializes")
    }

    /// `value,probability` lines with a header.
    pub fn noise_csv(&self) -> String {
        let g = self.noise.grid();
        let mut s = String::from("value,probability\n");
        for (i, p) in self.noise.probs().iter().enumerate() {
            s.push_str(&format!("{},{:e}\n", g.value(i), p));
        }
        s
    }
}

/// The P2 program for `req`, with the rows that seed lazy activation.
pub fn build_p2(req: &OptimizationRequest) -> Result<(LpProblem, Vec<usize>)> {
    let support = &req.noise_support;
    let n = support.len();
    let cons = build_dp_constraints(req.epsilon, &req.m, support, req.p_min);
    let s = req.m.steps() as usize;
    // distance-1 and distance-m pairs plus every edge row
    let mut seed = Vec::new();
    let mut row = 0;
    for j in 0..n {
        for jp in j.saturating_sub(s)..=(j + s).min(n - 1) {
            if jp != j {
                let d = j.abs_diff(jp);
                if d == 1 || d == s {
                    seed.push(row);
                }
                row += 1;
            }
        }
    }
    seed.extend(cons.pair_rows..cons.pair_rows + cons.edge_rows);
    let mut a_eq = SparseRows::new(n);
    a_eq.push((0..n).map(|j| (j, 1.0)).collect())?;
    let problem = LpProblem {
        cost: objective_w2_cost(&req.input, support)?,
        a_ub: cons.a_ub,
        b_ub: cons.b_ub,
        a_eq,
        b_eq: vec![1.0],
        lower_bounds: vec![req.p_min; n],
    };
    Ok((problem, seed))
}

pub fn solve_p2(req: &OptimizationRequest) -> Result<OptimalNoiseResult> {
    req.validate()?;
    let support = &req.noise_support;
    let n = support.len();
    if req.check_support {
        let need = required_half_width(req.epsilon, &req.m);
        let have = (-support.start()).min(support.last());
        if have < need {
            return Err(Error::SupportTooNarrow {
                have: have as f64 * support.delta(),
                need: need as f64 * support.delta(),
            });
        }
    }
    if req.p_min * n as f64 > 1.0 {
        return Err(Error::Infeasible {
            residual: Some(req.p_min * n as f64 - 1.0),
        });
    }
    let reach = max_feasible_mass(req.epsilon, &req.m, n, req.p_min);
    if reach < 1.0 {
        return Err(Error::Infeasible {
            residual: Some(1.0 - reach),
        });
    }
    if n > MAX_SUPPORT_CELLS {
        return Err(Error::invalid(
            "noise_support",
            format!("{n} cells exceeds the solver limit of {MAX_SUPPORT_CELLS}"),
        ));
    }
    let (problem, seed) = build_p2(req)?;
    let sol = solve_lp_dual_lazy(&problem, req.max_iters, &seed)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::Infeasible { residual: sol.residual }),
        LpStatus::Unbounded => return Err(Error::Unbounded),
    }
    let x = sol.x.expect("optimal solution has a point");
    let noise = DiscretePmf::new(*support, x.clone(), 0.0)?;
    let w2 = problem.objective(&x);
    let w1 = objective_w1(&req.input, &noise)?;
    let w0 = wasserstein_w0(&req.input, &convolve(&req.input, &noise)?)?;
    let privacy_check = audit(
        &AuditSubject::Pmf(noise.clone()),
        &req.m,
        &AuditOptions {
            exterior: Some(Exterior::Constant(req.p_min)),
            ..AuditOptions::default()
        },
    )?;
    Ok(OptimalNoiseResult {
        staircase_segments: detect_staircase(&noise, 1e-6),
        lp_status: LpSummary {
            status: sol.status,
            iterations: sol.iterations,
            objective: sol.objective,
            max_violation: problem.max_violation(&x),
        },
        noise,
        w0,
        w1,
        w2,
        privacy_check,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::{input_distribution, laplacian_noise, staircase_noise, InputKind};

    fn adj(m: f64) -> AdjacencySpec {
        AdjacencySpec::new(m, 1.0).unwrap()
    }

    #[test]
    fn mk_for_point_mass_is_cdf_difference() {
        // point mass at c = 2; noise on [-3, 3]
        let noise = Grid::symmetric(1.0, 3).unwrap();
        let theta = [0.05, 0.1, 0.15, 0.4, 0.15, 0.1, 0.05];
        let tcdf = |v: i64| {
            theta
                .iter()
                .enumerate()
                .filter(|(j, _)| *j as i64 - 3 <= v)
                .map(|(_, p)| p)
                .sum::<f64>()
        };
        let c = 2;
        for k in -5..10 {
            // anchor one below the input cell
            let mk = build_mk(1, k - (c - 1), 7, -3);
            let value: f64 = mk[0].iter().zip(theta).map(|(a, p)| a * p).sum();
            let oracle = if k >= c { 1.0 } else { 0.0 } - tcdf(k - c);
            assert!((value - oracle).abs() < 1e-15, "k = {k}");
            let _ = noise;
        }
    }

    #[test]
    fn mk_edge_cases() {
        let mk = build_mk(3, -2, 4, 0);
        assert!(mk.iter().flatten().all(|&v| v == 0.0));
        let mk = build_mk(3, 50, 4, 0);
        assert!(mk.iter().flatten().all(|&v| v == 0.0));
        let mk = build_mk(2, 0, 3, -1);
        // below the input: only the M² part remains
        assert_eq!(mk[0], vec![-1.0, 0.0, 0.0]);
        assert_eq!(mk[1], vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn mk_row_matches_matrix_product() {
        let x = input_distribution(InputKind::Poisson { gamma: 3.0 }, 1.0, 1e-12).unwrap();
        let noise = Grid::symmetric(1.0, 4).unwrap();
        let c = cdf(&x);
        for k in -6..30 {
            let mk = build_mk(x.len(), k - (x.grid().start() - 1), noise.len(), noise.start());
            let row = mk_row(&c, k, &noise);
            for j in 0..noise.len() {
                let v: f64 = (0..x.len()).map(|i| x.probs()[i] * mk[i][j]).sum();
                assert!((v - row[j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn w1_examples() {
        let x = input_distribution(InputKind::Poisson { gamma: 4.0 }, 1.0, 1e-12).unwrap();
        let id = DiscretePmf::point_mass(1.0, 0.0).unwrap();
        assert!(objective_w1(&x, &id).unwrap().abs() < 1e-15);
        let shift = DiscretePmf::point_mass(1.0, -3.0).unwrap();
        assert!((objective_w1(&x, &shift).unwrap() - 3.0 * x.mass()).abs() < 1e-12);
        let lap = laplacian_noise(0.0, 3.0, 1.0, 1e-12).unwrap();
        let w0 = wasserstein_w0(&x, &convolve(&x, &lap).unwrap()).unwrap();
        assert!((objective_w1(&x, &lap).unwrap() - w0).abs() < 1e-7);
    }

    #[test]
    fn w2_cost_for_point_mass_is_distance() {
        let x = DiscretePmf::point_mass(1.0, 0.0).unwrap();
        let g = Grid::symmetric(1.0, 6).unwrap();
        let cost = objective_w2_cost(&x, &g).unwrap();
        for (j, c) in cost.iter().enumerate() {
            assert_eq!(*c, (j as f64 - 6.0).abs());
        }
        let st = staircase_noise(2, 0.5, 1.0, 1e-12).unwrap();
        let y = input_distribution(InputKind::Poisson { gamma: 2.0 }, 1.0, 1e-12).unwrap();
        let c = objective_w2_cost(&y, st.grid()).unwrap();
        let w2: f64 = c.iter().zip(st.probs()).map(|(a, b)| a * b).sum();
        assert!(w2 + 1e-9 >= objective_w1(&y, &st).unwrap());
    }

    #[test]
    fn constraint_counts() {
        let g = Grid::symmetric(1.0, 1).unwrap();
        let c = build_dp_constraints(1.0, &adj(1.0), &g, 1e-3);
        assert_eq!(c.pair_rows, 4);
        assert_eq!(c.edge_rows, 2);
    }

    #[test]
    fn calibrated_laplacian_satisfies_rows() {
        let m = adj(3.0);
        let g = Grid::symmetric(1.0, 40).unwrap();
        let lap = laplacian_noise(0.0, 4.0, 1.0, 1e-12).unwrap().embed(&g).unwrap();
        // closed-form ε = (3 + 1)/4 = 1
        let c = build_dp_constraints(1.0, &m, &g, 1e-9);
        for i in 0..c.pair_rows {
            assert!(c.a_ub.dot(i, lap.probs()) <= c.b_ub[i]);
        }
        let loose = build_dp_constraints(200.0, &m, &g, 1e-9);
        let ones = vec![1.0; g.len()];
        assert!((0..loose.pair_rows).all(|i| loose.a_ub.dot(i, &ones) <= 0.0));
    }

    #[test]
    fn default_support_sizes() {
        assert_eq!(default_noise_support(2.0, &adj(15.0)).unwrap().len(), 421);
        assert_eq!(default_noise_support(0.5, &adj(15.0)).unwrap().len(), 1681);
    }

    #[test]
    fn detect_staircase_examples() {
        let st = staircase_noise(5, 0.5, 1.0, 1e-12).unwrap();
        let segs = detect_staircase(&st, 1e-6);
        // the two innermost stairs share a level and merge across zero
        for s in &segs {
            let want = if s.start == -5.0 { 10 } else { 5 };
            assert_eq!(s.cells(1.0), want, "{s:?}");
        }
        for w in segs.windows(2).filter(|w| w[0].start >= 0.0) {
            assert!((w[1].level / w[0].level - 0.5).abs() < 1e-12);
        }
        let pm = DiscretePmf::new(Grid::symmetric(1.0, 2).unwrap(), vec![0.0, 0.0, 1.0, 0.0, 0.0], 0.0).unwrap();
        let segs = detect_staircase(&pm, 1e-6);
        assert_eq!(segs.len(), 3);
        assert_eq!(segs[1].cells(1.0), 1);
        let lap = laplacian_noise(0.0, 8.0, 1.0, 1e-12).unwrap();
        // symmetric about -1/2: only cells -1 and 0 pair up
        let segs = detect_staircase(&lap, 1e-6);
        assert_eq!(segs.len(), lap.len() - 1);
        assert!(segs.iter().all(|s| s.cells(1.0) == 1 || s.start == -1.0));
    }

    #[test]
    fn infeasible_floor_is_reported() {
        let x = DiscretePmf::point_mass(1.0, 0.0).unwrap();
        let mut req = OptimizationRequest::new(x, 1.0, adj(1.0)).unwrap();
        req.p_min = 0.5;
        assert!(matches!(solve_p2(&req), Err(Error::Infeasible { residual: Some(_) })));
        req.p_min = 1e-9;
        req.noise_support = Grid::symmetric(1.0, 3).unwrap();
        assert!(matches!(solve_p2(&req), Err(Error::SupportTooNarrow { .. })));
    }

    #[test]
    fn feasibility_margin_bound() {
        // 3 cells, m = 1: edges pinned, centre at most e^{2ε} p_min
        let b = max_feasible_mass(1.0, &adj(1.0), 3, 0.1);
        let want = 0.1 * 1f64.exp() * 2.0 + 0.1 * 2f64.exp();
        assert!((b - want).abs() < 1e-12, "{b} {want}");
        let x = DiscretePmf::point_mass(1.0, 0.0).unwrap();
        let mut req = OptimizationRequest::new(x, 0.01, adj(15.0)).unwrap();
        req.noise_support = Grid::symmetric(1.0, 20).unwrap();
        req.check_support = false;
        match solve_p2(&req) {
            Err(Error::Infeasible { residual: Some(r) }) => assert!(r > 0.99),
            other => panic!("{other:?}"),
        }
        // the default support at this epsilon is far beyond the dense limit
        let req = OptimizationRequest::new(DiscretePmf::point_mass(1.0, 0.0).unwrap(), 0.01, adj(15.0)).unwrap();
        assert!(matches!(
            solve_p2(&req),
            Err(Error::InvalidField {
                field: "noise_support",
                ..
            })
        ));
    }

    #[test]
    fn small_synthesis_is_private_and_feasible() {
        let x = input_distribution(InputKind::Poisson { gamma: 3.0 }, 1.0, 1e-12).unwrap();
        let req = OptimizationRequest::new(x, 2.0, adj(3.0)).unwrap();
        let r = solve_p2(&req).unwrap();
        assert!(r.lp_status.max_violation <= 1e-8, "{:?}", r.lp_status);
        assert!(r.noise.probs().iter().all(|&p| p >= req.p_min - 1e-12));
        assert!((r.w1 - r.w0).abs() <= 1e-7);
        assert!(r.w1 <= r.w2 + 1e-9);
        assert!(r.privacy_check.is_pure(), "{}", r.privacy_check.to_json());
        assert!(r.privacy_check.epsilon().unwrap() <= 2.0 + 1e-6);
    }
}
