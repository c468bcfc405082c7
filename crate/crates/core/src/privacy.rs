//! Privacy certification for additive lattice noise.
//!
//! The numerical side computes the worst ratio `p(k − s) / p(k)` over shifts
//! `|s| <= m` and window points `k`. When that ratio is unbounded it falls
//! back to an `(ε, δ)` split, where numerators in a set `Θ₀` are charged to
//! `δ` and the ratio is only bounded on the rest. Known families also get
//! their closed-form parameters for cross-checking.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::grid::{lattice_steps, DiscretePmf, Grid, DEFAULT_TAU};
use crate::mechanisms::{upper_normal_tail, Family, MechanismSpec};

/// Default probability at or below which a cell counts as zero.
pub const DEFAULT_FLOOR: f64 = 1e-300;

/// Relative tolerance for numerical vs closed-form agreement.
pub const AGREEMENT_TOL: f64 = 1e-6;

/// The adjacency radius `m`, a positive multiple of `Δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjacencySpec {
    m: f64,
    delta: f64,
    steps: i64,
}

impl AdjacencySpec {
    pub fn new(m: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::invalid("delta", format!("must be positive, got {delta}")));
        }
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::invalid("m", format!("must be positive, got {m}")));
        }
        let steps = lattice_steps(m, delta)
            .ok_or_else(|| Error::invalid("m", format!("{m} is not a multiple of delta = {delta}")))?;
        Ok(Self { m, delta, steps })
    }

    pub fn value(&self) -> f64 {
        self.m
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `m / Δ`.
    pub fn steps(&self) -> i64 {
        self.steps
    }
}

/// How probabilities outside a PMF's window are treated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exterior {
    /// Outside points carry probability zero.
    Zero,
    /// Only pairs with both points inside the window are compared.
    Ignore,
    /// Outside points carry this constant probability.
    Constant(f64),
}

impl Exterior {
    /// `Zero` for a PMF with no truncated mass, `Ignore` otherwise.
    pub fn default_for(pmf: &DiscretePmf) -> Self {
        if pmf.tail_mass() > 0.0 {
            Exterior::Ignore
        } else {
            Exterior::Zero
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioOptions {
    pub floor: f64,
    pub threshold: f64,
    pub exterior: Exterior,
}

impl RatioOptions {
    pub fn for_pmf(pmf: &DiscretePmf, floor: f64) -> Self {
        Self {
            floor,
            threshold: 1.0 / floor,
            exterior: Exterior::default_for(pmf),
        }
    }
}

/// A concrete shift and denominator point (lattice values).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub shift: f64,
    pub point: f64,
    /// `p(point − shift) / p(point)`, infinite for a zero denominator.
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RatioSup {
    Bounded { c_b: f64, shift: f64, point: f64 },
    Unbounded(Witness),
}

impl RatioSup {
    pub fn c_b(&self) -> Option<f64> {
        match self {
            RatioSup::Bounded { c_b, .. } => Some(*c_b),
            RatioSup::Unbounded(_) => None,
        }
    }
}

/// Read access to a PMF extended by an exterior rule.
struct Extended<'a> {
    pmf: &'a DiscretePmf,
    exterior: Exterior,
}

impl Extended<'_> {
    fn at(&self, index: i64) -> Option<f64> {
        match self.pmf.grid().position(index) {
            Some(i) => Some(self.pmf.probs()[i]),
            None => match self.exterior {
                Exterior::Zero => Some(0.0),
                Exterior::Constant(c) => Some(c),
                Exterior::Ignore => None,
            },
        }
    }

    /// Denominator indices worth visiting for shifts up to `s_max`.
    fn denominators(&self, s_max: i64) -> std::ops::Range<i64> {
        let g = self.pmf.grid();
        match self.exterior {
            Exterior::Ignore => g.start()..g.end(),
            _ => g.start() - s_max..g.end() + s_max,
        }
    }
}

fn check_window(noise: &DiscretePmf, m: &AdjacencySpec) -> Result<()> {
    if noise.is_empty() || noise.probs().iter().all(|&p| p == 0.0) {
        return Err(Error::EmptyWindow);
    }
    noise.grid().check_spacing(&Grid::from_indices(m.delta(), 0, 1)?)
}

/// `sup p(k − s) / p(k)` over `|s| <= m` and window points `k`, with the
/// default exterior for `noise` and no explicit threshold beyond `1/floor`.
pub fn ratio_sup(noise: &DiscretePmf, m: &AdjacencySpec, floor: f64) -> Result<RatioSup> {
    ratio_sup_with(noise, m, &RatioOptions::for_pmf(noise, floor))
}

pub fn ratio_sup_with(noise: &DiscretePmf, m: &AdjacencySpec, opts: &RatioOptions) -> Result<RatioSup> {
    check_window(noise, m)?;
    if !(opts.floor >= 0.0) {
        return Err(Error::invalid("floor", "must be nonnegative"));
    }
    let ext = Extended {
        pmf: noise,
        exterior: opts.exterior,
    };
    let delta = m.delta();
    let s_max = m.steps();
    let mut best: Option<(f64, i64, i64)> = None;
    for s in -s_max..=s_max {
        for k in ext.denominators(s_max) {
            let (Some(num), Some(den)) = (ext.at(k - s), ext.at(k)) else {
                continue;
            };
            if num <= opts.floor {
                continue;
            }
            if den <= opts.floor {
                return Ok(RatioSup::Unbounded(Witness {
                    shift: s as f64 * delta,
                    point: k as f64 * delta,
                    ratio: f64::INFINITY,
                }));
            }
            let r = num / den;
            if r > opts.threshold {
                return Ok(RatioSup::Unbounded(Witness {
                    shift: s as f64 * delta,
                    point: k as f64 * delta,
                    ratio: r,
                }));
            }
            if best.is_none_or(|(b, _, _)| r > b) {
                best = Some((r, s, k));
            }
        }
    }
    let (c_b, s, k) = best.ok_or(Error::EmptyWindow)?;
    Ok(RatioSup::Bounded {
        c_b,
        shift: s as f64 * delta,
        point: k as f64 * delta,
    })
}

pub fn epsilon_from_cb(c_b: f64) -> Result<f64> {
    if !(c_b >= 1.0) {
        return Err(Error::SubUnitRatio { c_b });
    }
    Ok(c_b.ln())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    PureDp {
        epsilon: f64,
        c_b: f64,
    },
    ApproxDp {
        epsilon: f64,
        delta: f64,
        c_b: f64,
        /// Mass of `Θ₀` inside the window (`delta` adds the truncated tail).
        theta0_mass: f64,
        /// Band boundary `M` when `Θ₀ = {|θ| >= M}`; `None` for the per-shift split.
        split_boundary_m: Option<f64>,
    },
    NotDp {
        witness_shift: f64,
        witness_point: f64,
        ratio_lower_bound: f64,
    },
}

/// Closed-form parameters attached to a numerical audit.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormCheck {
    pub report: Box<PrivacyReport>,
    pub agrees: bool,
    /// Relative gap of the compared quantity (ε for pure families, δ otherwise).
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrivacyReport {
    pub verdict: Verdict,
    /// Window the numbers were computed on; `None` for closed forms.
    pub window: Option<Grid>,
    pub truncation_tau: f64,
    pub exterior: Option<Exterior>,
    /// Why the pure path failed, when a fallback produced the verdict.
    pub pure_witness: Option<Witness>,
    pub closed_form: Option<ClosedFormCheck>,
}

impl PrivacyReport {
    fn bare(verdict: Verdict) -> Self {
        Self {
            verdict,
            window: None,
            truncation_tau: 0.0,
            exterior: None,
            pure_witness: None,
            closed_form: None,
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.verdict, Verdict::PureDp { .. })
    }

    pub fn is_not_dp(&self) -> bool {
        matches!(self.verdict, Verdict::NotDp { .. })
    }

    pub fn epsilon(&self) -> Option<f64> {
        match self.verdict {
            Verdict::PureDp { epsilon, .. } | Verdict::ApproxDp { epsilon, .. } => Some(epsilon),
            Verdict::NotDp { .. } => None,
        }
    }

    pub fn delta(&self) -> Option<f64> {
        match self.verdict {
            Verdict::PureDp { .. } => Some(0.0),
            Verdict::ApproxDp { delta, .. } => Some(delta),
            Verdict::NotDp { .. } => None,
        }
    }

    pub fn c_b(&self) -> Option<f64> {
        match self.verdict {
            Verdict::PureDp { c_b, .. } | Verdict::ApproxDp { c_b, .. } => Some(c_b),
            Verdict::NotDp { .. } => None,
        }
    }

    pub fn to_value(&self) -> Value {
        let finite = |x: f64| if x.is_finite() { json!(x) } else { Value::Null };
        let (name, witness, boundary, theta0, lower) = match self.verdict {
            Verdict::PureDp { .. } => ("pure", self.pure_witness, None, None, None),
            Verdict::ApproxDp {
                theta0_mass,
                split_boundary_m,
                ..
            } => ("approx", self.pure_witness, split_boundary_m, Some(theta0_mass), None),
            Verdict::NotDp {
                witness_shift,
                witness_point,
                ratio_lower_bound,
            } => (
                "not_dp",
                Some(Witness {
                    shift: witness_shift,
                    point: witness_point,
                    ratio: ratio_lower_bound,
                }),
                None,
                None,
                Some(ratio_lower_bound),
            ),
        };
        json!({
            "verdict": name,
            "epsilon": self.epsilon().map(finite),
            "delta": self.delta(),
            "c_b": self.c_b().map(finite),
            "witness": witness.map(|w| json!({
                "shift": w.shift,
                "point": w.point,
                "ratio": finite(w.ratio),
            })),
            "boundary_M": boundary,
            "theta0_mass": theta0,
            "ratio_lower_bound": lower.map(finite),
            "window": self.window.map(|g| json!({
                "delta": g.delta(),
                "start": g.start(),
                "len": g.len(),
                "lo": g.value_of_index(g.start()),
                "hi": g.value_of_index(g.last()),
            })),
            "truncation_tau": self.truncation_tau,
            "exterior": self.exterior,
            "closed_form": self.closed_form.as_ref().map(|c| {
                let mut v = c.report.to_value();
                let obj = v.as_object_mut().expect("report is an object");
                obj.retain(|k, _| matches!(k.as_str(), "verdict" | "epsilon" | "delta" | "c_b" | "boundary_M"));
                obj.insert("agrees".into(), json!(c.agrees));
                obj.insert("relative_error".into(), finite(c.relative_error));
                v
            }),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("report serializes")
    }
}

struct SplitOutcome {
    c_b: f64,
    theta0_mass: f64,
    unbounded: Option<Witness>,
}

/// Band split: `Θ₁` holds numerators `θ` with `|θ| < M`.
fn band_split(noise: &DiscretePmf, m: &AdjacencySpec, m_steps: i64, opts: &RatioOptions) -> Result<SplitOutcome> {
    let ext = Extended {
        pmf: noise,
        exterior: opts.exterior,
    };
    let g = noise.grid();
    let delta = m.delta();
    let inner = (g.start().max(-m_steps + 1))..(g.end().min(m_steps));
    if inner.is_empty() {
        return Err(Error::EmptyTheta1 {
            boundary: m_steps as f64 * delta,
        });
    }
    let theta0_mass: f64 = (g.start()..g.end())
        .filter(|t| !inner.contains(t))
        .map(|t| noise.prob_at(t))
        .sum();
    let s_max = m.steps();
    let mut c_b: f64 = 1.0;
    for s in -s_max..=s_max {
        for theta in inner.clone() {
            let num = noise.prob_at(theta);
            if num <= opts.floor {
                continue;
            }
            // the denominator sits at k = θ + s
            let Some(den) = ext.at(theta + s) else { continue };
            let r = if den <= opts.floor { f64::INFINITY } else { num / den };
            if r > opts.threshold {
                return Ok(SplitOutcome {
                    c_b: r,
                    theta0_mass,
                    unbounded: Some(Witness {
                        shift: s as f64 * delta,
                        point: (theta + s) as f64 * delta,
                        ratio: r,
                    }),
                });
            }
            c_b = c_b.max(r);
        }
    }
    Ok(SplitOutcome {
        c_b,
        theta0_mass,
        unbounded: None,
    })
}

/// Per-shift split: for each shift, numerators whose partner is zero or
/// beyond the threshold go to `Θ₀(s)`; `δ` takes the worst shift.
fn threshold_split(noise: &DiscretePmf, m: &AdjacencySpec, opts: &RatioOptions) -> SplitOutcome {
    let ext = Extended {
        pmf: noise,
        exterior: opts.exterior,
    };
    let s_max = m.steps();
    let mut c_b: f64 = 1.0;
    let mut worst: f64 = 0.0;
    for s in -s_max..=s_max {
        let mut charged = 0.0;
        for k in ext.denominators(s_max) {
            let (Some(num), Some(den)) = (ext.at(k - s), ext.at(k)) else {
                continue;
            };
            if num <= opts.floor {
                continue;
            }
            if den <= opts.floor || num / den > opts.threshold {
                // only in-window numerators carry real mass
                if noise.grid().contains_index(k - s) {
                    charged += num;
                }
            } else {
                c_b = c_b.max(num / den);
            }
        }
        worst = worst.max(charged);
    }
    SplitOutcome {
        c_b,
        theta0_mass: worst,
        unbounded: None,
    }
}

fn approx_verdict(out: &SplitOutcome, tail: f64, boundary: Option<f64>) -> Verdict {
    match out.unbounded {
        Some(w) => Verdict::NotDp {
            witness_shift: w.shift,
            witness_point: w.point,
            ratio_lower_bound: w.ratio,
        },
        None => Verdict::ApproxDp {
            epsilon: out.c_b.ln(),
            delta: (out.theta0_mass + tail).min(1.0),
            c_b: out.c_b,
            theta0_mass: out.theta0_mass,
            split_boundary_m: boundary,
        },
    }
}

fn boundary_steps(boundary_m: f64, m: &AdjacencySpec) -> Result<i64> {
    let steps = lattice_steps(boundary_m, m.delta())
        .ok_or_else(|| Error::invalid("boundary_M", format!("{boundary_m} is not a lattice point")))?;
    if steps < m.steps() {
        return Err(Error::invalid(
            "boundary_M",
            format!("must be at least m = {}, got {boundary_m}", m.value()),
        ));
    }
    Ok(steps)
}

/// `(ε, δ)` with `Θ₀ = {θ : |θ| >= M}` plus the truncated tail.
pub fn split_epsilon_delta(noise: &DiscretePmf, m: &AdjacencySpec, boundary_m: f64) -> Result<PrivacyReport> {
    split_epsilon_delta_with(noise, m, boundary_m, &RatioOptions::for_pmf(noise, DEFAULT_FLOOR))
}

pub fn split_epsilon_delta_with(
    noise: &DiscretePmf,
    m: &AdjacencySpec,
    boundary_m: f64,
    opts: &RatioOptions,
) -> Result<PrivacyReport> {
    check_window(noise, m)?;
    let steps = boundary_steps(boundary_m, m)?;
    let out = band_split(noise, m, steps, opts)?;
    Ok(PrivacyReport {
        verdict: approx_verdict(&out, noise.tail_mass(), Some(boundary_m)),
        window: Some(*noise.grid()),
        truncation_tau: noise.tail_mass(),
        exterior: Some(opts.exterior),
        pure_witness: None,
        closed_form: None,
    })
}

/// `(ε, δ)` with `Θ₀` chosen per shift from zero or over-threshold partners.
pub fn split_by_threshold(noise: &DiscretePmf, m: &AdjacencySpec, opts: &RatioOptions) -> Result<PrivacyReport> {
    check_window(noise, m)?;
    let out = threshold_split(noise, m, opts);
    Ok(PrivacyReport {
        verdict: approx_verdict(&out, noise.tail_mass(), None),
        window: Some(*noise.grid()),
        truncation_tau: noise.tail_mass(),
        exterior: Some(opts.exterior),
        pure_witness: None,
        closed_form: None,
    })
}

/// Parameters from the per-family closed forms.
pub fn closed_form_privacy(spec: &MechanismSpec, m: &AdjacencySpec, boundary_m: Option<f64>) -> Result<PrivacyReport> {
    spec.validate()?;
    let delta = spec.delta;
    if (delta - m.delta()).abs() > 1e-12 * delta {
        return Err(Error::GridMismatch {
            left: delta,
            right: m.delta(),
        });
    }
    let mv = m.value();
    let pure = |epsilon: f64| Verdict::PureDp {
        epsilon,
        c_b: epsilon.exp(),
    };
    let verdict = match spec.family {
        Family::Laplacian { lambda, .. } => pure((mv + delta) / lambda),
        Family::Staircase { a, rho } => {
            let a = a as i64;
            let crossings = m.steps() / a + i64::from(m.steps() % a != 0);
            pure(-(crossings as f64) * rho.ln())
        }
        Family::Exponential { eta } => pure(eta * mv),
        Family::Uniform { lo, hi } => {
            let d = mv * delta / (hi - lo + delta);
            Verdict::ApproxDp {
                epsilon: 0.0,
                delta: d.min(1.0),
                c_b: 1.0,
                theta0_mass: d.min(1.0),
                split_boundary_m: None,
            }
        }
        Family::Gaussian { mu, sigma } => {
            let bm = boundary_m.ok_or(Error::MissingBoundary)?;
            boundary_steps(bm, m)?;
            let epsilon = (mv + delta) * (2.0 * bm + delta - mv - 2.0 * mu) / (2.0 * sigma * sigma);
            // Θ₀ = cells at or beyond ±M, i.e. (−∞, −M + Δ) ∪ [M, ∞)
            let d = upper_normal_tail((bm - delta + mu) / sigma) + upper_normal_tail((bm - mu) / sigma);
            Verdict::ApproxDp {
                epsilon,
                delta: d,
                c_b: epsilon.exp(),
                theta0_mass: d,
                split_boundary_m: Some(bm),
            }
        }
    };
    Ok(PrivacyReport::bare(verdict))
}

#[derive(Debug, Clone, PartialEq)]
pub enum AuditSubject {
    Spec(MechanismSpec),
    Pmf(DiscretePmf),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditOptions {
    pub floor: f64,
    pub boundary_m: Option<f64>,
    /// Ratio above which a pair counts as unbounded; defaults to `1/floor`.
    pub unbounded_threshold: Option<f64>,
    /// Truncation budget when materializing a spec.
    pub tau: f64,
    /// Overrides the tail-based default.
    pub exterior: Option<Exterior>,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            floor: DEFAULT_FLOOR,
            boundary_m: None,
            unbounded_threshold: None,
            tau: DEFAULT_TAU,
            exterior: None,
        }
    }
}

fn not_dp(w: Witness) -> Verdict {
    Verdict::NotDp {
        witness_shift: w.shift,
        witness_point: w.point,
        ratio_lower_bound: w.ratio,
    }
}

/// Pure check first; on failure an `(ε, δ)` split. Specs are cross-checked
/// against their closed form.
pub fn audit(subject: &AuditSubject, m: &AdjacencySpec, opts: &AuditOptions) -> Result<PrivacyReport> {
    let (pmf, spec) = match subject {
        AuditSubject::Spec(spec) => (spec.pmf(opts.tau)?, Some(*spec)),
        AuditSubject::Pmf(p) => (p.clone(), None),
    };
    check_window(&pmf, m)?;
    let ropts = RatioOptions {
        floor: opts.floor,
        threshold: opts.unbounded_threshold.unwrap_or(1.0 / opts.floor),
        exterior: opts.exterior.unwrap_or_else(|| Exterior::default_for(&pmf)),
    };
    let base = |verdict: Verdict, witness: Option<Witness>| PrivacyReport {
        verdict,
        window: Some(*pmf.grid()),
        truncation_tau: pmf.tail_mass(),
        exterior: Some(ropts.exterior),
        pure_witness: witness,
        closed_form: None,
    };

    let pure = ratio_sup_with(&pmf, m, &ropts)?;
    let witness = match pure {
        RatioSup::Unbounded(w) => Some(w),
        // a truncated window can hide growth; compare against a doubled one
        RatioSup::Bounded { c_b, .. } => match (spec, ropts.exterior) {
            (Some(spec), Exterior::Ignore) => growth_witness(&spec, &pmf, m, &ropts, c_b)?,
            _ => None,
        },
    };

    let mut report = match witness {
        None => {
            let c_b = pure.c_b().expect("bounded without a witness");
            base(
                Verdict::PureDp {
                    epsilon: epsilon_from_cb(c_b)?,
                    c_b,
                },
                None,
            )
        }
        Some(w) => {
            let structural = w.ratio.is_infinite() || w.ratio > ropts.threshold;
            let fallback = if let Some(bm) = opts.boundary_m {
                let steps = boundary_steps(bm, m)?;
                Some(approx_verdict(
                    &band_split(&pmf, m, steps, &ropts)?,
                    pmf.tail_mass(),
                    Some(bm),
                ))
            } else if structural {
                Some(approx_verdict(&threshold_split(&pmf, m, &ropts), pmf.tail_mass(), None))
            } else {
                band_search(&pmf, m, &ropts)?
            };
            match fallback {
                Some(v @ Verdict::ApproxDp { .. }) => base(v, Some(w)),
                _ => base(not_dp(w), None),
            }
        }
    };

    if let Some(spec) = spec {
        let boundary = match report.verdict {
            Verdict::ApproxDp { split_boundary_m, .. } => split_boundary_m.or(opts.boundary_m),
            _ => opts.boundary_m,
        };
        if let Ok(closed) = closed_form_privacy(&spec, m, boundary) {
            report.closed_form = Some(compare(&report, closed, &spec));
        }
    }
    Ok(report)
}

/// Witness when the sup on a doubled window exceeds `c_b`.
fn growth_witness(
    spec: &MechanismSpec,
    pmf: &DiscretePmf,
    m: &AdjacencySpec,
    opts: &RatioOptions,
    c_b: f64,
) -> Result<Option<Witness>> {
    let g = pmf.grid();
    let half = g.len().div_ceil(2);
    let wide = spec.pmf_on(&g.widen(half, half))?.trimmed();
    Ok(match ratio_sup_with(&wide, m, opts)? {
        RatioSup::Bounded { c_b: c2, shift, point } if c2 > c_b * (1.0 + 1e-9) => Some(Witness {
            shift,
            point,
            ratio: c2,
        }),
        RatioSup::Bounded { .. } => None,
        RatioSup::Unbounded(w) => Some(w),
    })
}

/// Smallest band boundary `M ∈ {m, 2m, 4m, …}` with a bounded restricted ratio.
fn band_search(pmf: &DiscretePmf, m: &AdjacencySpec, opts: &RatioOptions) -> Result<Option<Verdict>> {
    let g = pmf.grid();
    let reach = g.start().abs().max(g.last().abs()) + 1;
    let mut steps = m.steps();
    while steps <= reach {
        match band_split(pmf, m, steps, opts) {
            Ok(out) if out.unbounded.is_none() => {
                return Ok(Some(approx_verdict(
                    &out,
                    pmf.tail_mass(),
                    Some(steps as f64 * m.delta()),
                )))
            }
            Ok(_) | Err(Error::EmptyTheta1 { .. }) => {}
            Err(e) => return Err(e),
        }
        steps *= 2;
    }
    Ok(None)
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

fn compare(numeric: &PrivacyReport, closed: PrivacyReport, spec: &MechanismSpec) -> ClosedFormCheck {
    let (agrees, relative_error) = match (numeric.verdict, closed.verdict) {
        (Verdict::PureDp { epsilon: a, .. }, Verdict::PureDp { epsilon: b, .. }) => {
            let e = rel(a, b);
            (e <= AGREEMENT_TOL, e)
        }
        (
            Verdict::ApproxDp {
                epsilon: ea, delta: da, ..
            },
            Verdict::ApproxDp {
                epsilon: eb, delta: db, ..
            },
        ) => {
            let e = rel(da, db);
            let eps_ok = match spec.family {
                // the closed form is an upper bound on the true ratio
                Family::Gaussian { .. } => ea <= eb * (1.0 + AGREEMENT_TOL),
                _ => (ea - eb).abs() <= AGREEMENT_TOL * eb.max(1.0),
            };
            (eps_ok && e <= AGREEMENT_TOL, e)
        }
        _ => (false, f64::INFINITY),
    };
    ClosedFormCheck {
        report: Box::new(closed),
        agrees,
        relative_error,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::{gaussian_noise, laplacian_noise, staircase_noise, uniform_noise};
    use proptest::prelude::*;

    fn adj(m: f64) -> AdjacencySpec {
        AdjacencySpec::new(m, 1.0).unwrap()
    }

    /// Exhaustive sup over every shift and every lattice point touched.
    fn brute_sup(p: &DiscretePmf, m: i64) -> f64 {
        let g = p.grid();
        let mut best: f64 = 1.0;
        for k in g.start() - m..g.end() + m {
            for s in -m..=m {
                let (num, den) = (p.prob_at(k - s), p.prob_at(k));
                if num > 0.0 {
                    best = best.max(if den > 0.0 { num / den } else { f64::INFINITY });
                }
            }
        }
        best
    }

    #[test]
    fn adjacency_validation() {
        assert!(AdjacencySpec::new(0.0, 1.0).is_err());
        assert!(AdjacencySpec::new(1.5, 1.0).is_err());
        assert_eq!(AdjacencySpec::new(1.5, 0.5).unwrap().steps(), 3);
    }

    #[test]
    fn epsilon_from_cb_examples() {
        assert_eq!(epsilon_from_cb(1.0).unwrap(), 0.0);
        assert!((epsilon_from_cb(2.0_f64.exp()).unwrap() - 2.0).abs() < 1e-15);
        assert!((epsilon_from_cb(4.0).unwrap() - 1.386_294_361_119_890_6).abs() < 1e-15);
        assert!(matches!(epsilon_from_cb(0.5), Err(Error::SubUnitRatio { .. })));
    }

    #[test]
    fn staircase_sup_is_two_stairs() {
        let p = staircase_noise(5, 0.5, 1.0, 1e-12).unwrap();
        match ratio_sup(&p, &adj(7.0), DEFAULT_FLOOR).unwrap() {
            RatioSup::Bounded { c_b, .. } => assert!((c_b - 4.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn laplacian_sup_is_reached_in_the_tails() {
        // exact cells put the sup at e^{m/λ}; the crossing at μ stays below it
        let p = laplacian_noise(0.0, 8.0, 1.0, 1e-12).unwrap();
        let c_b = ratio_sup(&p, &adj(15.0), DEFAULT_FLOOR).unwrap().c_b().unwrap();
        assert!((c_b - (15.0_f64 / 8.0).exp()).abs() < 1e-12);
        let tail_ratio = p.prob_at(100 - 15) / p.prob_at(100);
        assert!((tail_ratio - c_b).abs() < 1e-12);
    }

    #[test]
    fn uniform_is_unbounded_outside_support() {
        let p = uniform_noise(0.0, 9.0, 1.0).unwrap();
        match ratio_sup(&p, &adj(2.0), DEFAULT_FLOOR).unwrap() {
            RatioSup::Unbounded(w) => {
                assert!(w.point < 0.0 || w.point > 9.0);
                assert_eq!(p.prob_at(w.point as i64), 0.0);
                assert!(p.prob_at((w.point - w.shift) as i64) > 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn uniform_threshold_split() {
        let p = uniform_noise(0.0, 9.0, 1.0).unwrap();
        let opts = RatioOptions::for_pmf(&p, DEFAULT_FLOOR);
        let r = split_by_threshold(&p, &adj(2.0), &opts).unwrap();
        assert_eq!(r.epsilon(), Some(0.0));
        assert!((r.delta().unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn gaussian_band_split() {
        let p = gaussian_noise(0.0, 10.0, 1.0, 1e-12).unwrap();
        let r = split_epsilon_delta(&p, &adj(1.0), 50.0).unwrap();
        let eps = r.epsilon().unwrap();
        assert!(eps > 0.0 && eps <= 1.0);
        let closed = upper_normal_tail(4.9) + upper_normal_tail(5.0);
        assert!((r.delta().unwrap() - closed).abs() < 1e-12);
        let cf = closed_form_privacy(
            &MechanismSpec::new(Family::Gaussian { mu: 0.0, sigma: 10.0 }, 1.0).unwrap(),
            &adj(1.0),
            Some(50.0),
        )
        .unwrap();
        assert!((cf.epsilon().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn band_split_beyond_window_degenerates_to_pure() {
        let p = laplacian_noise(0.0, 4.0, 1.0, 1e-12).unwrap();
        let r = split_epsilon_delta(&p, &adj(3.0), 1000.0).unwrap();
        assert_eq!(r.delta(), Some(p.tail_mass()));
        let c = ratio_sup(&p, &adj(3.0), DEFAULT_FLOOR).unwrap().c_b().unwrap();
        assert!((r.c_b().unwrap() - c).abs() < 1e-15);
        assert!(matches!(
            split_epsilon_delta(&p, &adj(3.0), 2.5),
            Err(Error::InvalidField { .. })
        ));
    }

    #[test]
    fn closed_form_examples() {
        let m15 = adj(15.0);
        let lap = MechanismSpec::new(Family::Laplacian { mu: 0.0, lambda: 8.0 }, 1.0).unwrap();
        assert!((closed_form_privacy(&lap, &m15, None).unwrap().epsilon().unwrap() - 2.0).abs() < 1e-15);
        let ex = MechanismSpec::new(Family::Exponential { eta: 0.2 }, 1.0).unwrap();
        assert!((closed_form_privacy(&ex, &adj(10.0), None).unwrap().epsilon().unwrap() - 2.0).abs() < 1e-15);
        let st = MechanismSpec::new(
            Family::Staircase {
                a: 5,
                rho: (-2.0_f64 / 3.0).exp(),
            },
            1.0,
        )
        .unwrap();
        assert!((closed_form_privacy(&st, &m15, None).unwrap().epsilon().unwrap() - 2.0).abs() < 1e-12);
        let g = MechanismSpec::new(Family::Gaussian { mu: 0.0, sigma: 1.0 }, 1.0).unwrap();
        assert!(matches!(
            closed_form_privacy(&g, &m15, None),
            Err(Error::MissingBoundary)
        ));
    }

    #[test]
    fn audit_interior_zero_rejects_pure_path() {
        let g = Grid::from_indices(1.0, -2, 5).unwrap();
        let p = DiscretePmf::new(g, vec![0.25, 0.25, 0.0, 0.25, 0.25], 0.0).unwrap();
        let r = audit(&AuditSubject::Pmf(p), &adj(1.0), &AuditOptions::default()).unwrap();
        let w = r.pure_witness.expect("pure path failed");
        assert!(w.ratio.is_infinite());
    }

    #[test]
    fn audit_gaussian_falls_back() {
        let spec = MechanismSpec::new(Family::Gaussian { mu: 0.0, sigma: 10.0 }, 1.0).unwrap();
        let opts = AuditOptions {
            boundary_m: Some(50.0),
            ..AuditOptions::default()
        };
        let r = audit(&AuditSubject::Spec(spec), &adj(1.0), &opts).unwrap();
        assert!(matches!(r.verdict, Verdict::ApproxDp { .. }));
        assert!(r.pure_witness.is_some());
        let cf = r.closed_form.as_ref().unwrap();
        assert!(cf.agrees, "{:?}", cf);
        let v = r.to_value();
        assert_eq!(v["verdict"], "approx");
        assert_eq!(v["boundary_M"], 50.0);
        assert_eq!(v["closed_form"]["epsilon"], 1.0);
    }

    #[test]
    fn audit_gaussian_without_boundary_searches() {
        let spec = MechanismSpec::new(Family::Gaussian { mu: 0.0, sigma: 3.0 }, 1.0).unwrap();
        let r = audit(&AuditSubject::Spec(spec), &adj(1.0), &AuditOptions::default()).unwrap();
        match r.verdict {
            Verdict::ApproxDp { split_boundary_m, .. } => assert_eq!(split_boundary_m, Some(1.0)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn audit_staircase_and_exponential_agree() {
        let st = MechanismSpec::new(Family::Staircase { a: 5, rho: 0.5 }, 1.0).unwrap();
        let r = audit(&AuditSubject::Spec(st), &adj(7.0), &AuditOptions::default()).unwrap();
        assert!(r.is_pure());
        assert!(r.closed_form.unwrap().agrees);
        let ex = MechanismSpec::new(Family::Exponential { eta: 0.2 }, 1.0).unwrap();
        let r = audit(&AuditSubject::Spec(ex), &adj(10.0), &AuditOptions::default()).unwrap();
        assert!((r.epsilon().unwrap() - 2.0).abs() < 1e-12);
        assert!(r.closed_form.unwrap().agrees);
    }

    #[test]
    fn report_json_shape() {
        let p = uniform_noise(0.0, 9.0, 1.0).unwrap();
        let r = audit(&AuditSubject::Pmf(p), &adj(2.0), &AuditOptions::default()).unwrap();
        let v = r.to_value();
        for key in [
            "verdict",
            "epsilon",
            "delta",
            "c_b",
            "witness",
            "boundary_M",
            "window",
            "closed_form",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["verdict"], "approx");
        assert_eq!(v["window"]["len"], 10);
        assert!(v["closed_form"].is_null());
    }

    fn pmf_strategy() -> impl Strategy<Value = DiscretePmf> {
        (prop::collection::vec(0.01f64..1.0, 2..40), -20i64..20).prop_map(|(w, start)| {
            let total: f64 = w.iter().sum();
            let probs = w.iter().map(|x| x / total).collect::<Vec<_>>();
            let n = probs.len();
            let sum: f64 = probs.iter().sum();
            DiscretePmf::new(Grid::from_indices(1.0, start, n).unwrap(), probs, (1.0 - sum).max(0.0)).unwrap()
        })
    }

    proptest! {
        #[test]
        fn sup_is_monotone_in_m(p in pmf_strategy(), m1 in 1i64..6, extra in 0i64..6) {
            let opts = RatioOptions { floor: DEFAULT_FLOOR, threshold: f64::INFINITY, exterior: Exterior::Ignore };
            let a = ratio_sup_with(&p, &adj(m1 as f64), &opts).unwrap().c_b().unwrap();
            let b = ratio_sup_with(&p, &adj((m1 + extra) as f64), &opts).unwrap().c_b().unwrap();
            prop_assert!(a >= 1.0);
            prop_assert!(a <= b + 1e-12);
        }

        #[test]
        fn sup_matches_exhaustive_scan(p in pmf_strategy(), m in 1i64..5) {
            let opts = RatioOptions { floor: 0.0, threshold: f64::INFINITY, exterior: Exterior::Zero };
            let expected = brute_sup(&p, m);
            match ratio_sup_with(&p, &adj(m as f64), &opts).unwrap() {
                RatioSup::Bounded { c_b, .. } => prop_assert!((c_b - expected).abs() <= 1e-12 * expected),
                RatioSup::Unbounded(_) => prop_assert!(expected.is_infinite()),
            }
        }
    }
}
