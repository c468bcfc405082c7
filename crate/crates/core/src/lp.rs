//! Dense two-phase simplex.
//!
//! Problems are `min cᵀx` subject to `A_ub x <= b_ub`, `A_eq x = b_eq` and
//! `x >= lower_bounds`. Lower bounds are shifted to zero before the tableau
//! is built. Pricing is Dantzig's rule until `2(n + r_ub + r_eq)` pivots have
//! been taken, then Bland's rule, which cannot cycle.
//!
//! [`solve_lp_dual`] runs the same simplex on the dual program. Its slack
//! basis is feasible whenever the costs are nonnegative, so no phase 1 is
//! needed, and inequality rows of the primal can be activated lazily.

use serde::Serialize;

use crate::error::{Error, Result};

pub const PIVOT_TOL: f64 = 1e-9;
pub const OPTIMALITY_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITERS: usize = 1_000_000;

/// Relative tolerance once reduced costs are recomputed from the basis.
const REFINE_TOL: f64 = 1e-12;
const MAX_REFINEMENTS: usize = 50;

/// Row-wise sparse matrix.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseRows {
    ncols: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseRows {
    pub fn new(ncols: usize) -> Self {
        Self {
            ncols,
            rows: Vec::new(),
        }
    }

    pub fn from_dense(ncols: usize, dense: &[Vec<f64>]) -> Result<Self> {
        let mut m = Self::new(ncols);
        for row in dense {
            if row.len() != ncols {
                return Err(Error::invalid(
                    "a",
                    format!("row has {} entries, expected {ncols}", row.len()),
                ));
            }
            m.push(
                row.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(j, v)| (j, *v))
                    .collect(),
            )?;
        }
        Ok(m)
    }

    pub fn push(&mut self, mut row: Vec<(usize, f64)>) -> Result<()> {
        if let Some(&(j, _)) = row.iter().find(|(j, _)| *j >= self.ncols) {
            return Err(Error::invalid("a", format!("column {j} out of range")));
        }
        if row.iter().any(|(_, v)| !v.is_finite()) {
            return Err(Error::invalid("a", "entries must be finite"));
        }
        row.sort_by_key(|&(j, _)| j);
        self.rows.push(row);
        Ok(())
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn dot(&self, i: usize, x: &[f64]) -> f64 {
        self.rows[i].iter().map(|&(j, v)| v * x[j]).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| {
                let mut d = vec![0.0; self.ncols];
                for &(j, v) in r {
                    d[j] += v;
                }
                d
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub cost: Vec<f64>,
    pub a_ub: SparseRows,
    pub b_ub: Vec<f64>,
    pub a_eq: SparseRows,
    pub b_eq: Vec<f64>,
    pub lower_bounds: Vec<f64>,
}

impl LpProblem {
    /// From dense matrices; `lower_bounds` defaults to zeros.
    pub fn dense(
        cost: Vec<f64>,
        a_ub: &[Vec<f64>],
        b_ub: Vec<f64>,
        a_eq: &[Vec<f64>],
        b_eq: Vec<f64>,
        lower_bounds: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n = cost.len();
        let p = Self {
            lower_bounds: lower_bounds.unwrap_or_else(|| vec![0.0; n]),
            a_ub: SparseRows::from_dense(n, a_ub)?,
            a_eq: SparseRows::from_dense(n, a_eq)?,
            cost,
            b_ub,
            b_eq,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.cost.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.a_ub.ncols() != n || self.a_eq.ncols() != n {
            return Err(Error::invalid("a", "column count differs from the cost length"));
        }
        if self.a_ub.nrows() != self.b_ub.len() {
            return Err(Error::invalid("b_ub", "length differs from the row count of a_ub"));
        }
        if self.a_eq.nrows() != self.b_eq.len() {
            return Err(Error::invalid("b_eq", "length differs from the row count of a_eq"));
        }
        if self.lower_bounds.len() != n {
            return Err(Error::invalid("lower_bounds", "length differs from the cost length"));
        }
        for (field, v) in [
            ("cost", &self.cost),
            ("b_ub", &self.b_ub),
            ("b_eq", &self.b_eq),
            ("lower_bounds", &self.lower_bounds),
        ] {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid(field, "entries must be finite"));
            }
        }
        Ok(())
    }

    /// Largest violation of any constraint or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let ub = (0..self.a_ub.nrows()).map(|i| self.a_ub.dot(i, x) - self.b_ub[i]);
        let eq = (0..self.a_eq.nrows()).map(|i| (self.a_eq.dot(i, x) - self.b_eq[i]).abs());
        let lb = x.iter().zip(&self.lower_bounds).map(|(x, l)| l - x);
        ub.chain(eq).chain(lb).fold(0.0, f64::max)
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.cost.iter().zip(x).map(|(c, x)| c * x).sum()
    }

    /// Right-hand sides after substituting `x = y + lower_bounds`.
    fn shifted_rhs(&self) -> (Vec<f64>, Vec<f64>) {
        let l = &self.lower_bounds;
        let ub = (0..self.a_ub.nrows())
            .map(|i| self.b_ub[i] - self.a_ub.dot(i, l))
            .collect();
        let eq = (0..self.a_eq.nrows())
            .map(|i| self.b_eq[i] - self.a_eq.dot(i, l))
            .collect();
        (ub, eq)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Option<Vec<f64>>,
    pub objective: Option<f64>,
    pub iterations: usize,
    /// Phase-1 objective left over when infeasible.
    pub residual: Option<f64>,
    /// Entering column with no blocking row when unbounded.
    pub unbounded_column: Option<usize>,
    /// Phase-2 reduced costs of the original variables at the optimum.
    pub reduced_costs: Option<Vec<f64>>,
    /// Multipliers `y` of the inequality rows (`y <= 0` at optimality).
    pub duals_ub: Option<Vec<f64>>,
    pub duals_eq: Option<Vec<f64>>,
}

impl LpSolution {
    fn status_only(status: LpStatus, iterations: usize) -> Self {
        Self {
            status,
            x: None,
            objective: None,
            iterations,
            residual: None,
            unbounded_column: None,
            reduced_costs: None,
            duals_ub: None,
            duals_eq: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub max_iters: usize,
    /// Pivots of Dantzig pricing before switching to Bland; `None` uses
    /// `2(n + r_ub + r_eq)`.
    pub bland_after: Option<usize>,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_iters: DEFAULT_MAX_ITERS,
            bland_after: None,
        }
    }
}

enum Outcome {
    Optimal,
    Unbounded(usize),
}

/// Row-major dense tableau. Every row owns one identity column (its slack,
/// or an artificial when the row was flipped or is an equality), which keeps
/// `B⁻¹` readable for duals and column insertion.
struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    cost: Vec<f64>,
    /// Reduced costs `c_j − c_Bᵀ B⁻¹ A_j`.
    d: Vec<f64>,
    value: f64,
    basis: Vec<usize>,
    can_enter: Vec<bool>,
    /// Entering threshold per column: enter when `d_j < -tol_j`.
    tol: Vec<f64>,
    /// Columns in the original row orientation.
    cols: Vec<Vec<(usize, f64)>>,
    ident: Vec<usize>,
    /// `-1` where the row was negated to make its rhs nonnegative.
    sign: Vec<f64>,
    artificial: Vec<bool>,
    iterations: usize,
    bland_after: usize,
    max_iters: usize,
}

impl Tableau {
    /// Columns: structural, one slack per inequality row, then artificials.
    fn build(
        cost: &[f64],
        a_ub: &SparseRows,
        b_ub: &[f64],
        a_eq: &SparseRows,
        b_eq: &[f64],
        opts: &SimplexOptions,
    ) -> Self {
        let n = cost.len();
        let (r_ub, r_eq) = (a_ub.nrows(), a_eq.nrows());
        let m = r_ub + r_eq;
        let need_art: Vec<bool> = (0..m).map(|i| i >= r_ub || b_ub[i] < 0.0).collect();
        let n_art = need_art.iter().filter(|&&b| b).count();
        let ncols = n + r_ub + n_art;
        let mut rows = vec![vec![0.0; ncols]; m];
        let mut rhs = vec![0.0; m];
        let mut sign = vec![1.0; m];
        let mut ident = vec![0; m];
        let mut artificial = vec![false; ncols];
        let mut basis = vec![0; m];
        let mut next_art = n + r_ub;
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); ncols];
        for i in 0..m {
            let (row, b) = if i < r_ub {
                (a_ub.row(i), b_ub[i])
            } else {
                (a_eq.row(i - r_ub), b_eq[i - r_ub])
            };
            let s = if b < 0.0 { -1.0 } else { 1.0 };
            sign[i] = s;
            for &(j, v) in row {
                rows[i][j] += s * v;
                cols[j].push((i, v));
            }
            rhs[i] = s * b;
            if i < r_ub {
                rows[i][n + i] = s;
                cols[n + i].push((i, 1.0));
            }
            if need_art[i] {
                rows[i][next_art] = 1.0;
                cols[next_art].push((i, s));
                artificial[next_art] = true;
                ident[i] = next_art;
                next_art += 1;
            } else {
                ident[i] = n + i;
            }
            basis[i] = ident[i];
        }
        let mut full_cost = cost.to_vec();
        full_cost.resize(ncols, 0.0);
        let can_enter = (0..ncols).map(|j| !artificial[j]).collect();
        Tableau {
            d: full_cost.clone(),
            cost: full_cost,
            value: 0.0,
            rows,
            rhs,
            basis,
            can_enter,
            tol: vec![OPTIMALITY_TOL; ncols],
            cols,
            ident,
            sign,
            artificial,
            iterations: 0,
            bland_after: opts.bland_after.unwrap_or(2 * (n + r_ub + r_eq)),
            max_iters: opts.max_iters,
        }
    }

    fn ncols(&self) -> usize {
        self.cost.len()
    }

    /// Brings `d` and `value` in line with the current basis for `cost`.
    fn price(&mut self, cost: &[f64]) -> (Vec<f64>, f64) {
        let mut d = cost.to_vec();
        let mut value = 0.0;
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                value += cb * self.rhs[i];
                for (dj, a) in d.iter_mut().zip(&self.rows[i]) {
                    *dj -= cb * a;
                }
            }
        }
        for &b in &self.basis {
            d[b] = 0.0;
        }
        (d, value)
    }

    fn choose_entering(&self, d: &[f64]) -> Option<usize> {
        let bland = self.iterations >= self.bland_after;
        let mut best: Option<(usize, f64)> = None;
        for (j, &dj) in d.iter().enumerate() {
            if !self.can_enter[j] || dj >= -self.tol[j] {
                continue;
            }
            if bland {
                return Some(j);
            }
            if best.is_none_or(|(_, b)| dj < b) {
                best = Some((j, dj));
            }
        }
        best.map(|(j, _)| j)
    }

    fn choose_leaving(&self, q: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, row) in self.rows.iter().enumerate() {
            let a = row[q];
            if a <= PIVOT_TOL {
                continue;
            }
            let ratio = self.rhs[i].max(0.0) / a;
            best = match best {
                None => Some((i, ratio)),
                Some((bi, br)) => {
                    let tie = (ratio - br).abs() <= 1e-12 * br.max(1.0);
                    if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                        Some((i, ratio))
                    } else {
                        Some((bi, br))
                    }
                }
            };
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, r: usize, q: usize, extra: Option<&mut (Vec<f64>, f64)>) {
        let inv = 1.0 / self.rows[r][q];
        for v in self.rows[r].iter_mut() {
            *v *= inv;
        }
        self.rows[r][q] = 1.0;
        self.rhs[r] *= inv;
        let nz: Vec<usize> = self.rows[r]
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(j, _)| j)
            .collect();
        let (pivot_row, others) = {
            let (a, b) = self.rows.split_at_mut(r);
            let (p, c) = b.split_first_mut().expect("pivot row exists");
            (p as &Vec<f64>, a.iter_mut().chain(c.iter_mut()))
        };
        let rhs_r = self.rhs[r];
        for (idx, row) in others.enumerate() {
            let f = row[q];
            if f == 0.0 {
                continue;
            }
            for &j in &nz {
                let v = row[j] - f * pivot_row[j];
                row[j] = if v.abs() < 1e-15 { 0.0 } else { v };
            }
            row[q] = 0.0;
            let i = if idx < r { idx } else { idx + 1 };
            self.rhs[i] -= f * rhs_r;
            if self.rhs[i].abs() < 1e-15 {
                self.rhs[i] = 0.0;
            }
        }
        let fold = |d: &mut Vec<f64>, value: &mut f64| {
            let f = d[q];
            if f != 0.0 {
                for &j in &nz {
                    d[j] -= f * pivot_row[j];
                }
                d[q] = 0.0;
                *value += f * rhs_r;
            }
        };
        fold(&mut self.d, &mut self.value);
        if let Some((d, v)) = extra {
            fold(d, v);
        }
        self.basis[r] = q;
        self.iterations += 1;
    }

    /// Primal simplex on `self.d`, or on `phase1` when given.
    fn run(&mut self, mut phase1: Option<&mut (Vec<f64>, f64)>) -> Result<Outcome> {
        loop {
            let q = match phase1.as_deref() {
                Some((d, _)) => self.choose_entering(d),
                None => self.choose_entering(&self.d),
            };
            let Some(q) = q else { return Ok(Outcome::Optimal) };
            let Some(r) = self.choose_leaving(q) else {
                return Ok(Outcome::Unbounded(q));
            };
            if self.iterations >= self.max_iters {
                return Err(Error::IterationLimit {
                    iterations: self.iterations,
                });
            }
            self.pivot(r, q, phase1.as_deref_mut());
        }
    }

    /// Phase 1. Returns the leftover infeasibility.
    fn phase1(&mut self) -> Result<f64> {
        if !self.basis.iter().any(|&b| self.artificial[b]) {
            return Ok(0.0);
        }
        let art_cost: Vec<f64> = (0..self.ncols())
            .map(|j| if self.artificial[j] { 1.0 } else { 0.0 })
            .collect();
        let mut aux = self.price(&art_cost);
        match self.run(Some(&mut aux))? {
            Outcome::Optimal => {}
            Outcome::Unbounded(_) => unreachable!("phase 1 is bounded below by zero"),
        }
        let residual = aux.1.max(0.0);
        let scale = 1.0 + self.rhs.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
        if residual > 1e-9 * scale {
            return Ok(residual);
        }
        // drive zero-level artificials out where a real column can replace them
        for r in 0..self.basis.len() {
            if !self.artificial[self.basis[r]] {
                continue;
            }
            if let Some(q) = (0..self.ncols()).find(|&j| self.can_enter[j] && self.rows[r][j].abs() > PIVOT_TOL) {
                self.pivot(r, q, Some(&mut aux));
            }
        }
        Ok(0.0)
    }

    /// Multiplier of each (unflipped) row.
    fn row_duals(&self) -> Vec<f64> {
        (0..self.rows.len())
            .map(|i| {
                let c = self.ident[i];
                self.sign[i] * (self.cost[c] - self.d[c])
            })
            .collect()
    }

    fn column_values(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < n {
                x[b] = self.rhs[i].max(0.0);
            }
        }
        x
    }

    /// Appends a column with entries `a` (original row orientation) and cost `c`.
    fn add_column(&mut self, a: &[(usize, f64)], c: f64) {
        let mut reduced = c;
        let mut mag = c.abs();
        let mut col = vec![0.0; self.rows.len()];
        for &(r, v) in a {
            let sv = self.sign[r] * v;
            let id = self.ident[r];
            reduced -= sv * (self.cost[id] - self.d[id]);
            mag += (sv * (self.cost[id] - self.d[id])).abs();
            for (i, row) in self.rows.iter().enumerate() {
                let b = row[id];
                if b != 0.0 {
                    col[i] += sv * b;
                }
            }
        }
        for (row, v) in self.rows.iter_mut().zip(col) {
            row.push(if v.abs() < 1e-15 { 0.0 } else { v });
        }
        self.cost.push(c);
        self.d.push(reduced);
        self.can_enter.push(true);
        self.artificial.push(false);
        self.tol.push(OPTIMALITY_TOL.min(REFINE_TOL * mag) + f64::MIN_POSITIVE);
        self.cols.push(a.to_vec());
    }
}

impl Tableau {
    /// Recomputes the row multipliers from the current basis by dense LU,
    /// then every reduced cost from them, discarding drift accumulated over
    /// many pivots. Entering thresholds become relative to each column's
    /// own magnitude. Returns the multipliers in the original orientation,
    /// or `None` when the basis matrix is numerically singular.
    fn refine(&mut self, rel_tol: f64) -> Option<Vec<f64>> {
        let m = self.rows.len();
        // Bᵀ π = c_B, row k of Bᵀ is basic column k
        let mut a = vec![vec![0.0; m + 1]; m];
        for (k, &b) in self.basis.iter().enumerate() {
            for &(i, v) in &self.cols[b] {
                a[k][i] += v;
            }
            a[k][m] = self.cost[b];
        }
        for c in 0..m {
            let p = (c..m).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))?;
            if a[p][c].abs() < 1e-14 {
                return None;
            }
            a.swap(c, p);
            let (head, tail) = a.split_at_mut(c + 1);
            let pivot = &head[c];
            for row in tail.iter_mut() {
                let f = row[c] / pivot[c];
                if f != 0.0 {
                    for j in c..=m {
                        row[j] -= f * pivot[j];
                    }
                }
            }
        }
        let mut pi = vec![0.0; m];
        for c in (0..m).rev() {
            let s: f64 = (c + 1..m).map(|j| a[c][j] * pi[j]).sum();
            pi[c] = (a[c][m] - s) / a[c][c];
        }
        for j in 0..self.ncols() {
            let mut dot = 0.0;
            let mut mag = 0.0;
            for &(i, v) in &self.cols[j] {
                dot += v * pi[i];
                mag += (v * pi[i]).abs();
            }
            self.d[j] = self.cost[j] - dot;
            self.tol[j] = rel_tol * (self.cost[j].abs() + mag) + f64::MIN_POSITIVE;
        }
        for &b in &self.basis {
            self.d[b] = 0.0;
        }
        Some(pi)
    }
}

pub fn solve_lp(p: &LpProblem, max_iters: usize) -> Result<LpSolution> {
    solve_lp_with(
        p,
        &SimplexOptions {
            max_iters,
            bland_after: None,
        },
    )
}

pub fn solve_lp_with(p: &LpProblem, opts: &SimplexOptions) -> Result<LpSolution> {
    p.validate()?;
    let n = p.n();
    let (b_ub, b_eq) = p.shifted_rhs();
    let mut t = Tableau::build(&p.cost, &p.a_ub, &b_ub, &p.a_eq, &b_eq, opts);
    let residual = t.phase1()?;
    if residual > 0.0 {
        let mut s = LpSolution::status_only(LpStatus::Infeasible, t.iterations);
        s.residual = Some(residual);
        return Ok(s);
    }
    let cost = t.cost.clone();
    let (d, value) = t.price(&cost);
    t.d = d;
    t.value = value;
    match t.run(None)? {
        Outcome::Unbounded(q) => {
            let mut s = LpSolution::status_only(LpStatus::Unbounded, t.iterations);
            s.unbounded_column = Some(q);
            Ok(s)
        }
        Outcome::Optimal => {
            let y = t.column_values(n);
            let x: Vec<f64> = y.iter().zip(&p.lower_bounds).map(|(y, l)| y + l).collect();
            let duals = t.row_duals();
            let r_ub = p.a_ub.nrows();
            Ok(LpSolution {
                status: LpStatus::Optimal,
                objective: Some(p.objective(&x)),
                x: Some(x),
                iterations: t.iterations,
                residual: None,
                unbounded_column: None,
                reduced_costs: Some(t.d[..n].to_vec()),
                duals_ub: Some(duals[..r_ub].to_vec()),
                duals_eq: Some(duals[r_ub..].to_vec()),
            })
        }
    }
}

/// Solves `p` through its dual with every inequality row active.
pub fn solve_lp_dual(p: &LpProblem, max_iters: usize) -> Result<LpSolution> {
    let all: Vec<usize> = (0..p.a_ub.nrows()).collect();
    solve_lp_dual_lazy(p, max_iters, &all)
}

/// Dual simplex route with lazy inequality rows.
///
/// The dual of `min cᵀy, A_ub y <= b, A_eq y = e, y >= 0` is solved as
/// `min bᵀw − eᵀv⁺ + eᵀv⁻` subject to `−A_ubᵀw + A_eqᵀ(v⁺ − v⁻) <= c`. Only
/// the rows in `initial` start as dual columns; after each optimum the primal
/// point is read off the row multipliers, violated primal rows are appended
/// as new columns, and pivoting resumes from the current basis.
pub fn solve_lp_dual_lazy(p: &LpProblem, max_iters: usize, initial: &[usize]) -> Result<LpSolution> {
    p.validate()?;
    let n = p.n();
    let (b_ub, b_eq) = p.shifted_rhs();
    let r_eq = p.a_eq.nrows();
    let opts = SimplexOptions {
        max_iters,
        bland_after: Some(2 * (n + p.a_ub.nrows() + r_eq)),
    };
    // dual rows are the primal variables; columns start with v⁺ and v⁻
    let mut a_cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut cost = Vec::new();
    for (e, rhs) in b_eq.iter().enumerate() {
        for s in [1.0, -1.0] {
            for &(j, v) in p.a_eq.row(e) {
                a_cols[j].push((cost.len(), s * v));
            }
            cost.push(-s * rhs);
        }
    }
    let base_cols = cost.len();
    let mut active = vec![false; p.a_ub.nrows()];
    let mut order: Vec<usize> = Vec::new();
    for &i in initial {
        if !active[i] {
            active[i] = true;
            order.push(i);
        }
    }
    for (k, &i) in order.iter().enumerate() {
        for &(j, v) in p.a_ub.row(i) {
            a_cols[j].push((base_cols + k, -v));
        }
        cost.push(b_ub[i]);
    }
    let dual_a = SparseRows {
        ncols: cost.len(),
        rows: a_cols,
    };
    let mut t = Tableau::build(&cost, &dual_a, &p.cost, &SparseRows::new(cost.len()), &[], &opts);
    let residual = t.phase1()?;
    if residual > 0.0 {
        // dual infeasible: the primal is unbounded (it is feasible whenever solvable)
        return Ok(LpSolution::status_only(LpStatus::Unbounded, t.iterations));
    }
    let c = t.cost.clone();
    let (d, value) = t.price(&c);
    t.d = d;
    t.value = value;
    let n_dual_struct = cost.len();
    let mut column_of: Vec<usize> = (0..order.len()).map(|k| base_cols + k).collect();
    let violations = |y: &[f64], active: &[bool]| -> Vec<(f64, usize)> {
        (0..p.a_ub.nrows())
            .filter(|&i| !active[i])
            .filter_map(|i| {
                let row = p.a_ub.row(i);
                let v = p.a_ub.dot(i, y) - b_ub[i];
                let scale = b_ub[i].abs() + row.iter().map(|&(j, a)| (a * y[j]).abs()).sum::<f64>();
                (v > REFINE_TOL * scale).then_some((v, i))
            })
            .collect()
    };
    let mut refinements = 0;
    loop {
        if let Outcome::Unbounded(_) = t.run(None)? {
            return Ok(LpSolution::status_only(LpStatus::Infeasible, t.iterations));
        }
        let mut y: Vec<f64> = t.row_duals().iter().map(|v| (-v).max(0.0)).collect();
        let mut violated = violations(&y, &active);
        if violated.is_empty() && refinements < MAX_REFINEMENTS {
            refinements += 1;
            if let Some(pi) = t.refine(REFINE_TOL) {
                y = pi.iter().map(|v| (-v).max(0.0)).collect();
                let improvable = (0..t.ncols()).any(|j| t.can_enter[j] && t.d[j] < -t.tol[j]);
                if improvable {
                    continue;
                }
                violated = violations(&y, &active);
            }
        }
        if violated.is_empty() {
            let x: Vec<f64> = y.iter().zip(&p.lower_bounds).map(|(y, l)| y + l).collect();
            let w = t.column_values(t.ncols());
            let mut duals_ub = vec![0.0; p.a_ub.nrows()];
            for (&i, &col) in order.iter().zip(&column_of) {
                duals_ub[i] = -w[col];
            }
            let duals_eq = (0..r_eq).map(|e| w[2 * e] - w[2 * e + 1]).collect();
            // primal reduced costs are the dual slacks
            let reduced = (0..n).map(|j| w[n_dual_struct + j]).collect();
            return Ok(LpSolution {
                status: LpStatus::Optimal,
                objective: Some(p.objective(&x)),
                x: Some(x),
                iterations: t.iterations,
                residual: None,
                unbounded_column: None,
                reduced_costs: Some(reduced),
                duals_ub: Some(duals_ub),
                duals_eq: Some(duals_eq),
            });
        }
        violated.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        violated.truncate(n.max(64));
        violated.sort_by_key(|&(_, i)| i);
        for (_, i) in violated {
            active[i] = true;
            order.push(i);
            column_of.push(t.ncols());
            let col: Vec<(usize, f64)> = p.a_ub.row(i).iter().map(|&(j, v)| (j, -v)).collect();
            t.add_column(&col, b_ub[i]);
        }
    }
}
