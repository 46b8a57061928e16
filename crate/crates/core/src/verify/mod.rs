//! Safety verdicts for learned models.
//!
//! The tube `[z(t) - xi, z(t) + xi]` is enclosed over the horizon (and over
//! the inputs in scope), intersected with the unsafe set, and turned into a
//! statement about how long the true system can spend in the unsafe set.
//!
//! Enclosures are rigorous for polynomial templates: input-independent
//! models and single inputs use root isolation on the univariate polynomial
//! in scaled time, and input-dependent models over an input set use interval
//! branch and bound over the set's bounding box. Other templates fall back
//! to dense grids and are flagged as approximate.

pub mod interval;
pub mod poly;
mod unsafe_set;

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::LearnedModel;
use crate::pac::Budget;
use crate::sampling::InputSet;
use crate::template::Monomial;

pub use interval::Interval;
pub use unsafe_set::UnsafeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rigor {
    Certified,
    GridApproximate,
}

impl Rigor {
    fn and(self, other: Rigor) -> Rigor {
        if self == Rigor::Certified && other == Rigor::Certified {
            Rigor::Certified
        } else {
            Rigor::GridApproximate
        }
    }
}

impl fmt::Display for Rigor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rigor::Certified => "certified",
            Rigor::GridApproximate => "grid-approximate",
        })
    }
}

/// Inputs a verdict speaks about.
#[derive(Debug, Clone, PartialEq)]
pub enum InputScope {
    Single(Vec<f64>),
    Listed(Vec<Vec<f64>>),
    Set(InputSet),
}

impl InputScope {
    pub fn kind(&self) -> ScopeKind {
        match self {
            InputScope::Single(_) => ScopeKind::OneTrajectory,
            InputScope::Listed(_) => ScopeKind::ListedInputs,
            InputScope::Set(_) => ScopeKind::AllInputs,
        }
    }

    fn describe(&self) -> String {
        match self {
            InputScope::Single(x) => format!("x0 = {x:?}"),
            InputScope::Listed(xs) => format!("{} listed inputs", xs.len()),
            InputScope::Set(set) => format!("x0 in {set}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScopeKind {
    OneTrajectory,
    ListedInputs,
    AllInputs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Width, in time units, to which crossing times are isolated.
    pub root_tol: f64,
    /// Branch and bound stops once the enclosure is within this relative
    /// gap of the best attained value.
    pub gain_tol: f64,
    pub max_depth: u32,
    pub max_boxes: usize,
    /// Grid resolution for non-polynomial templates.
    pub grid_times: usize,
    pub grid_inputs: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            root_tol: 1e-9,
            gain_tol: 1e-3,
            max_depth: 20,
            max_boxes: 200_000,
            grid_times: 100_000,
            grid_inputs: 1_000,
        }
    }
}

/// Enclosure `[low, high]` of the tube over the scope and `[0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeRange {
    pub low: f64,
    pub high: f64,
    pub rigor: Rigor,
    pub domain: String,
}

pub fn tube_range(model: &LearnedModel, scope: &InputScope, horizon: f64) -> Result<TubeRange> {
    tube_range_with(model, scope, horizon, &VerifyOptions::default())
}

pub fn tube_range_with(
    model: &LearnedModel,
    scope: &InputScope,
    horizon: f64,
    opts: &VerifyOptions,
) -> Result<TubeRange> {
    check_scope(model, scope)?;
    check_horizon(horizon)?;
    let template = &model.template;
    let ts = template.time_scale();
    let s_max = horizon / ts;
    let tol_s = opts.root_tol / ts;
    let domain = format!("{}, t in [0, {horizon}]", scope.describe());
    let widen = |z: Interval<f64>, rigor| TubeRange {
        low: z.lo - model.xi,
        high: z.hi + model.xi,
        rigor,
        domain: domain.clone(),
    };

    let Some(terms) = template.polynomial_terms(&model.coefficients) else {
        let (lo, hi) = grid_extrema(model, scope, horizon, opts)?;
        return Ok(widen(Interval::new(lo, hi), Rigor::GridApproximate));
    };
    let univariate = |x0: Option<&[f64]>| -> Interval<f64> {
        let p = template
            .univariate_in_s(&model.coefficients, x0)
            .expect("polynomial template with inputs supplied");
        poly::range(&p, 0.0, s_max, tol_s)
    };
    let z = if template.is_input_independent() {
        univariate(None)
    } else {
        match scope {
            InputScope::Single(x) => univariate(Some(x)),
            InputScope::Listed(xs) => xs
                .iter()
                .map(|x| univariate(Some(x)))
                .reduce(|a, b| a.hull(&b))
                .ok_or_else(|| Error::InvalidArgument("listed scope has no inputs".into()))?,
            InputScope::Set(set) => {
                let (lower, upper) = set.bounding_box();
                let mut root: Vec<Interval<f64>> = lower
                    .iter()
                    .zip(&upper)
                    .map(|(&l, &u)| {
                        Interval::new(l - l.abs() * f64::EPSILON, u + u.abs() * f64::EPSILON)
                    })
                    .collect();
                root.push(Interval::new(0.0, s_max));
                let hi = upper_bound(&terms, root.clone(), opts);
                let negated: Vec<(Monomial, f64)> =
                    terms.iter().map(|(m, c)| (m.clone(), -c)).collect();
                let lo = -upper_bound(&negated, root, opts);
                Interval::new(lo, hi)
            }
        }
    };
    Ok(widen(z, Rigor::Certified))
}

fn check_horizon(horizon: f64) -> Result<()> {
    if horizon > 0.0 && horizon.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "horizon must be positive, got {horizon}"
        )))
    }
}

fn check_scope(model: &LearnedModel, scope: &InputScope) -> Result<()> {
    let n = model.template.input_dimension();
    if n == 0 {
        return Ok(());
    }
    let bad = |d: usize| {
        Error::Contract(format!(
            "model expects inputs of dimension {n}, scope has dimension {d}"
        ))
    };
    match scope {
        InputScope::Single(x) if x.len() != n => Err(bad(x.len())),
        InputScope::Listed(xs) => match xs.iter().find(|x| x.len() != n) {
            Some(x) => Err(bad(x.len())),
            None => Ok(()),
        },
        InputScope::Set(set) if set.dimension() != n => Err(bad(set.dimension())),
        _ => Ok(()),
    }
}

fn enclose(terms: &[(Monomial, f64)], b: &[Interval<f64>]) -> Interval<f64> {
    let time = b[b.len() - 1];
    terms.iter().fold(Interval::point(0.0), |acc, (m, c)| {
        let mut term = time.powi(m.time_exponent);
        for (v, &e) in m.input_exponents.iter().enumerate() {
            if e > 0 {
                term = term * b[v].powi(e);
            }
        }
        acc + term * *c
    })
}

fn point_value(terms: &[(Monomial, f64)], p: &[f64]) -> f64 {
    let s = p[p.len() - 1];
    terms.iter().fold(0.0, |acc, (m, c)| {
        let mut v = c * s.powi(m.time_exponent as i32);
        for (x, &e) in p.iter().zip(&m.input_exponents) {
            v *= x.powi(e as i32);
        }
        acc + v
    })
}

struct Node {
    ub: f64,
    depth: u32,
    dims: Vec<Interval<f64>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ub
            .total_cmp(&other.ub)
            .then_with(|| other.depth.cmp(&self.depth))
    }
}

/// Partial derivatives of a polynomial in `(x0, s)`, one term list per
/// variable with time last.
fn gradient(terms: &[(Monomial, f64)], vars: usize) -> Vec<Vec<(Monomial, f64)>> {
    (0..vars)
        .map(|v| {
            terms
                .iter()
                .filter_map(|(m, c)| {
                    let mut d = m.clone();
                    let e = if v + 1 == vars {
                        &mut d.time_exponent
                    } else {
                        &mut d.input_exponents[v]
                    };
                    if *e == 0 {
                        return None;
                    }
                    let factor = f64::from(*e);
                    *e -= 1;
                    Some((d, c * factor))
                })
                .collect()
        })
        .collect()
}

/// Natural enclosure intersected with the mean-value form around the box
/// centre.
fn enclose_mv(
    terms: &[(Monomial, f64)],
    grad: &[Vec<(Monomial, f64)>],
    b: &[Interval<f64>],
) -> Interval<f64> {
    let natural = enclose(terms, b);
    let centre: Vec<Interval<f64>> = b.iter().map(|iv| Interval::point(iv.mid())).collect();
    let mut mv = enclose(terms, &centre);
    for (v, g) in grad.iter().enumerate() {
        mv = mv + enclose(g, b) * (b[v] - centre[v]);
    }
    Interval::new(natural.lo.max(mv.lo), natural.hi.min(mv.hi))
}

/// Sound upper bound of the polynomial over the box, refined by always
/// splitting the box with the largest bound along its widest side.
fn upper_bound(terms: &[(Monomial, f64)], root: Vec<Interval<f64>>, opts: &VerifyOptions) -> f64 {
    let grad = gradient(terms, root.len());
    let centre = |b: &[Interval<f64>]| -> Vec<f64> { b.iter().map(Interval::mid).collect() };
    let mut best = point_value(terms, &centre(&root));
    let mut heap = BinaryHeap::new();
    heap.push(Node {
        ub: enclose_mv(terms, &grad, &root).hi,
        depth: 0,
        dims: root,
    });
    let mut processed = 0usize;
    while let Some(node) = heap.pop() {
        processed += 1;
        let converged = node.ub - best <= opts.gain_tol * (1.0 + best.abs());
        if converged || node.depth >= opts.max_depth || processed >= opts.max_boxes {
            return node.ub;
        }
        let axis = (0..node.dims.len())
            .max_by(|&a, &b| {
                node.dims[a]
                    .width()
                    .total_cmp(&node.dims[b].width())
                    .then(b.cmp(&a))
            })
            .expect("non-empty box");
        let (left, right) = node.dims[axis].split();
        for half in [left, right] {
            let mut dims = node.dims.clone();
            dims[axis] = half;
            best = best.max(point_value(terms, &centre(&dims)));
            let ub = enclose_mv(terms, &grad, &dims).hi.min(node.ub);
            heap.push(Node {
                ub,
                depth: node.depth + 1,
                dims,
            });
        }
    }
    unreachable!("the heap only empties after a return")
}

/// Inputs used by grid evaluation: the listed inputs, or a lattice over the
/// set (restricted to the set for balls).
fn grid_inputs(model: &LearnedModel, scope: &InputScope, count: usize) -> Vec<Vec<f64>> {
    if model.template.input_dimension() == 0 {
        return vec![Vec::new()];
    }
    match scope {
        InputScope::Single(x) => vec![x.clone()],
        InputScope::Listed(xs) => xs.clone(),
        InputScope::Set(set) => {
            let (lower, upper) = set.bounding_box();
            let d = lower.len();
            let per_axis = ((count.max(1) as f64).powf(1.0 / d as f64).floor() as usize).max(1);
            let axis_value = |a: usize, k: usize| {
                if per_axis == 1 {
                    (lower[a] + upper[a]) / 2.0
                } else {
                    lower[a] + (upper[a] - lower[a]) * k as f64 / (per_axis - 1) as f64
                }
            };
            let mut out = Vec::new();
            let mut idx = vec![0usize; d];
            loop {
                let x: Vec<f64> = idx
                    .iter()
                    .enumerate()
                    .map(|(a, &k)| axis_value(a, k))
                    .collect();
                if set.contains(&x) {
                    out.push(x);
                }
                let mut a = 0;
                while a < d {
                    idx[a] += 1;
                    if idx[a] < per_axis {
                        break;
                    }
                    idx[a] = 0;
                    a += 1;
                }
                if a == d {
                    break;
                }
            }
            if let InputSet::Ball { center, .. } = set {
                out.push(center.clone());
            }
            out
        }
    }
}

fn time_grid(horizon: f64, count: usize) -> Vec<f64> {
    let count = count.max(2);
    (0..count)
        .map(|k| horizon * k as f64 / (count - 1) as f64)
        .collect()
}

fn grid_extrema(
    model: &LearnedModel,
    scope: &InputScope,
    horizon: f64,
    opts: &VerifyOptions,
) -> Result<(f64, f64)> {
    let times = time_grid(horizon, opts.grid_times);
    let per_input = grid_inputs(model, scope, opts.grid_inputs)
        .par_iter()
        .map(|x| {
            let z = model.evaluate_many(x, &times)?;
            Ok(z.iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_input
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (a, b)| {
            (lo.min(a), hi.max(b))
        }))
}

/// Time during which the tube may meet the unsafe set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeBudget {
    pub tau: f64,
    /// `epsilon * T + tau`.
    pub bound: f64,
    pub rigor: Rigor,
}

pub fn unsafe_time_budget(
    model: &LearnedModel,
    uns: &UnsafeSet,
    scope: &InputScope,
    horizon: f64,
    epsilon: f64,
) -> Result<TimeBudget> {
    unsafe_time_budget_with(
        model,
        uns,
        scope,
        horizon,
        epsilon,
        &VerifyOptions::default(),
    )
}

pub fn unsafe_time_budget_with(
    model: &LearnedModel,
    uns: &UnsafeSet,
    scope: &InputScope,
    horizon: f64,
    epsilon: f64,
    opts: &VerifyOptions,
) -> Result<TimeBudget> {
    check_scope(model, scope)?;
    check_horizon(horizon)?;
    let finish = |tau: f64, rigor| TimeBudget {
        tau: tau.clamp(0.0, horizon),
        bound: epsilon * horizon + tau.clamp(0.0, horizon),
        rigor,
    };
    if uns.is_empty() {
        return Ok(finish(0.0, Rigor::Certified));
    }
    let template = &model.template;
    if template.is_polynomial() {
        let tau_for = |x0: Option<&[f64]>| {
            let p = template
                .univariate_in_s(&model.coefficients, x0)
                .expect("polynomial template with inputs supplied");
            univariate_tau(
                &p,
                uns,
                model.xi,
                horizon,
                template.time_scale(),
                opts.root_tol,
            )
        };
        if template.is_input_independent() {
            return Ok(finish(tau_for(None), Rigor::Certified));
        }
        let (inputs, rigor) = match scope {
            InputScope::Set(_) => (
                grid_inputs(model, scope, opts.grid_inputs),
                Rigor::GridApproximate,
            ),
            _ => (grid_inputs(model, scope, 0), Rigor::Certified),
        };
        let tau = inputs
            .par_iter()
            .map(|x| tau_for(Some(x)))
            .reduce(|| 0.0, f64::max);
        return Ok(finish(tau, rigor));
    }

    let times = time_grid(horizon, opts.grid_times);
    let per_input = grid_inputs(model, scope, opts.grid_inputs)
        .par_iter()
        .map(|x| {
            let z = model.evaluate_many(x, &times)?;
            let hit: Vec<bool> = z
                .iter()
                .map(|&v| uns.meets(v - model.xi, v + model.xi))
                .collect();
            Ok(times
                .windows(2)
                .zip(hit.windows(2))
                .filter(|(_, h)| h[0] || h[1])
                .map(|(t, _)| t[1] - t[0])
                .sum::<f64>())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(finish(
        per_input.into_iter().fold(0.0, f64::max),
        Rigor::GridApproximate,
    ))
}

/// Measure of `{t : [z(t) - xi, z(t) + xi] meets uns}` for `z` given in
/// scaled time. Crossing intervals count in full.
fn univariate_tau(
    p: &[f64],
    uns: &UnsafeSet,
    xi: f64,
    horizon: f64,
    ts: f64,
    root_tol: f64,
) -> f64 {
    let s_max = horizon / ts;
    let tol_s = root_tol / ts;
    let shifted = |level: f64| {
        let mut q = if p.is_empty() { vec![0.0] } else { p.to_vec() };
        q[0] -= level;
        q
    };
    let mut crossings = Vec::new();
    for &(a, b) in uns.intervals() {
        for level in [a - xi, b + xi] {
            if level.is_finite() {
                crossings.extend(poly::isolate_roots(&shifted(level), 0.0, s_max, tol_s));
            }
        }
    }
    crossings.sort_by(|x, y| x.lo.total_cmp(&y.lo));
    let inside = |s: f64| uns.meets(poly::eval(p, s) - xi, poly::eval(p, s) + xi);
    let mut measure = 0.0;
    let mut cursor = 0.0;
    for c in crossings {
        if c.hi <= cursor {
            continue;
        }
        let lo = c.lo.max(cursor);
        if lo > cursor && inside(cursor + (lo - cursor) / 2.0) {
            measure += lo - cursor;
        }
        measure += c.hi - lo;
        cursor = c.hi;
    }
    if s_max > cursor && inside(cursor + (s_max - cursor) / 2.0) {
        measure += s_max - cursor;
    }
    measure * ts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictKind {
    SafeWithBudget,
    BudgetedWithTau,
    Inconclusive,
}

/// Accuracy and confidence parameters the verdict rests on. For the
/// all-inputs scope `epsilon`/`beta` are the time-level pair and
/// `epsilon2`/`beta2` the input-level pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceStatement {
    pub scope: ScopeKind,
    pub epsilon: f64,
    pub beta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    /// Upper bound on time spent in the unsafe set; absent when inconclusive.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unsafe_time_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    pub confidence: ConfidenceStatement,
    pub rigor: Rigor,
    pub horizon: f64,
    pub xi: f64,
    pub unsafe_set: String,
    pub tube: TubeRange,
    pub statement: String,
}

pub fn check_safety(
    model: &LearnedModel,
    uns: &UnsafeSet,
    scope: &InputScope,
    budget: &Budget,
) -> Result<Verdict> {
    check_safety_with(model, uns, scope, budget, &VerifyOptions::default())
}

pub fn check_safety_with(
    model: &LearnedModel,
    uns: &UnsafeSet,
    scope: &InputScope,
    budget: &Budget,
    opts: &VerifyOptions,
) -> Result<Verdict> {
    let confidence = confidence_for(model, scope, budget)?;
    let horizon = model.provenance.horizon;
    let tube = tube_range_with(model, scope, horizon, opts)?;
    let eps_t = confidence.epsilon * horizon;
    let (kind, bound, tau, rigor) = if !uns.meets(tube.low, tube.high) {
        (VerdictKind::SafeWithBudget, Some(eps_t), None, tube.rigor)
    } else {
        let tb = unsafe_time_budget_with(model, uns, scope, horizon, confidence.epsilon, opts)?;
        let rigor = tube.rigor.and(tb.rigor);
        if tb.bound >= horizon {
            (VerdictKind::Inconclusive, None, Some(tb.tau), rigor)
        } else {
            (
                VerdictKind::BudgetedWithTau,
                Some(tb.bound),
                Some(tb.tau),
                rigor,
            )
        }
    };
    let mut verdict = Verdict {
        kind,
        unsafe_time_bound: bound,
        tau,
        confidence,
        rigor,
        horizon,
        xi: model.xi,
        unsafe_set: uns.to_string(),
        tube,
        statement: String::new(),
    };
    verdict.statement = statement(&verdict, scope);
    Ok(verdict)
}

fn confidence_for(
    model: &LearnedModel,
    scope: &InputScope,
    budget: &Budget,
) -> Result<ConfidenceStatement> {
    match model.provenance.budget {
        None => {
            return Err(Error::Contract(
                "model carries no sample budget, so it supports no guarantee".into(),
            ))
        }
        Some(b) if b != *budget => {
            return Err(Error::Contract(format!(
            "requested budget {budget:?} differs from the one the model was learned with ({b:?})"
        )))
        }
        Some(_) => {}
    }
    match (budget, scope) {
        (Budget::Single(b), InputScope::Single(x)) => {
            if let Some(trained) = &model.provenance.training_input {
                if trained != x {
                    return Err(Error::Contract(format!(
                        "one-trajectory model was learned for x0 = {trained:?}, not {x:?}"
                    )));
                }
            }
            Ok(ConfidenceStatement {
                scope: ScopeKind::OneTrajectory,
                epsilon: b.epsilon,
                beta: b.beta,
                epsilon2: None,
                beta2: None,
            })
        }
        (Budget::Single(b), InputScope::Listed(_)) => Ok(ConfidenceStatement {
            scope: ScopeKind::ListedInputs,
            epsilon: b.epsilon,
            beta: b.beta,
            epsilon2: None,
            beta2: None,
        }),
        (Budget::TwoLevel(b), InputScope::Set(_)) => Ok(ConfidenceStatement {
            scope: ScopeKind::AllInputs,
            epsilon: b.epsilon1,
            beta: b.beta1,
            epsilon2: Some(b.epsilon2),
            beta2: Some(b.beta2),
        }),
        (Budget::Single(_), InputScope::Set(_)) => Err(Error::Contract(
            "a single-level budget cannot support a statement over a whole input set".into(),
        )),
        (Budget::TwoLevel(_), _) => Err(Error::Contract(
            "a two-level budget needs the input set as its scope".into(),
        )),
    }
}

fn confidence_text(beta: f64) -> String {
    format!("1 - {beta:e}")
}

fn statement(v: &Verdict, scope: &InputScope) -> String {
    let c = &v.confidence;
    let t = v.horizon;
    let tube_note = match v.kind {
        VerdictKind::SafeWithBudget => format!(
            "The tube z(t) +/- {} stays within [{:.6}, {:.6}], which avoids the unsafe set {} ({}).",
            v.xi, v.tube.low, v.tube.high, v.unsafe_set, v.rigor
        ),
        _ => format!(
            "The tube z(t) +/- {} meets the unsafe set {} for at most tau = {:.6} time units ({}).",
            v.xi,
            v.unsafe_set,
            v.tau.unwrap_or(0.0),
            v.rigor
        ),
    };
    let Some(bound) = v.unsafe_time_bound else {
        return format!(
            "{tube_note} Inconclusive: the bound epsilon*T + tau is not below the horizon T = {t}, so no useful statement follows."
        );
    };
    let claim = match c.scope {
        ScopeKind::OneTrajectory => format!(
            "With confidence at least {}, the trajectory from {} spends at most {bound:.6} time units of [0, {t}] in the unsafe set.",
            confidence_text(c.beta),
            scope.describe()
        ),
        ScopeKind::ListedInputs => format!(
            "For each of the {}, with confidence at least {}, the trajectory spends at most {bound:.6} time units of [0, {t}] in the unsafe set.",
            scope.describe(),
            confidence_text(c.beta)
        ),
        ScopeKind::AllInputs => format!(
            "With confidence at least {}, inputs of probability measure at least {} among {} have trajectories that, each with confidence at least {}, spend at most {bound:.6} time units of [0, {t}] in the unsafe set.",
            confidence_text(c.beta2.unwrap_or(c.beta)),
            1.0 - c.epsilon2.unwrap_or(0.0),
            scope.describe(),
            confidence_text(c.beta)
        ),
    };
    format!("{tube_note} {claim}")
}

impl Verdict {
    /// Human-readable statement followed by a machine-readable TOML block.
    pub fn to_report(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Wrapper<'a> {
            verdict: &'a Verdict,
        }
        let block = toml::to_string(&Wrapper { verdict: self })
            .map_err(|e| Error::Config(format!("cannot serialize verdict: {e}")))?;
        Ok(format!("# {}\n\n{block}", self.statement))
    }

    pub fn from_report(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Wrapper {
            verdict: Verdict,
        }
        let w: Wrapper = toml::from_str(text)
            .map_err(|e| Error::Config(format!("malformed verdict report: {e}")))?;
        Ok(w.verdict)
    }
}
