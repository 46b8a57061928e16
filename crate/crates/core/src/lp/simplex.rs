//! Dense simplex method for linear programs in inequality form
//!
//! ```text
//! minimize    c^T x
//! subject to  A x <= b,   lower <= x <= upper
//! ```
//!
//! with few variables and many rows. The method walks vertices described by
//! a working set of `n` active constraints (rows or variable bounds), which
//! is the primal simplex method on the dual: the basis is `n x n` no matter
//! how many rows there are, and each pivot costs one pass over the rows.
//!
//! The constraint with the most negative multiplier leaves; after a run of
//! degenerate pivots the solver switches to Bland's smallest-index rule
//! until progress resumes. Minimum-ratio ties go to the smallest index, so
//! the solver is deterministic. Variables whose starting value is not
//! at a bound begin on a temporary pin that is released before any real
//! constraint; this lets the solver start from the origin and handles free
//! variables. Infeasible starts go through a phase that minimizes the
//! largest row violation first.

use crate::error::{Error, Result};
use crate::lp::lu::Lu;
use crate::scalar::Scalar;

/// `minimize objective . x  s.t.  rows x <= rhs, lower <= x <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityLp<T = f64> {
    pub objective: Vec<T>,
    /// Row-major, `rhs.len() x objective.len()`.
    pub rows: Vec<T>,
    pub rhs: Vec<T>,
    /// May contain `-inf`.
    pub lower: Vec<T>,
    /// May contain `+inf`.
    pub upper: Vec<T>,
}

impl<T: Scalar> InequalityLp<T> {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn row(&self, i: usize) -> &[T] {
        let n = self.num_vars();
        &self.rows[i * n..(i + 1) * n]
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if n == 0 {
            return Err(Error::InvalidArgument(
                "linear program has no variables".into(),
            ));
        }
        if self.rows.len() != n * self.rhs.len() || self.lower.len() != n || self.upper.len() != n {
            return Err(Error::InvalidArgument(
                "linear program has inconsistent dimensions".into(),
            ));
        }
        if self
            .rows
            .iter()
            .chain(&self.rhs)
            .chain(&self.objective)
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidArgument(
                "linear program has non-finite coefficients".into(),
            ));
        }
        for j in 0..n {
            let (l, u) = (self.lower[j], self.upper[j]);
            if l.is_nan() || u.is_nan() || l > u || l == T::infinity() || u == T::neg_infinity() {
                return Err(Error::InvalidArgument(format!(
                    "variable {j} has invalid bounds"
                )));
            }
        }
        Ok(())
    }

    /// Largest violation of any row or bound at `x` (zero when feasible).
    pub fn max_violation(&self, x: &[T]) -> T {
        let mut worst = T::zero();
        for i in 0..self.num_rows() {
            worst = worst.max(dot(self.row(i), x) - self.rhs[i]);
        }
        for j in 0..self.num_vars() {
            worst = worst.max(self.lower[j] - x[j]).max(x[j] - self.upper[j]);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions<T> {
    /// Tolerance for multiplier signs and for declaring a point feasible.
    pub tolerance: T,
    /// Minimum ratio-test denominator, relative to the row and direction
    /// magnitudes.
    pub pivot_tolerance: T,
    /// Defaults to `max(50 * rows, 1000)`.
    pub max_iterations: Option<usize>,
}

impl<T: Scalar> Default for SimplexOptions<T> {
    fn default() -> Self {
        Self {
            tolerance: T::FEAS_TOL,
            pivot_tolerance: T::PIVOT_TOL,
            max_iterations: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimplexStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexSolution<T> {
    pub status: SimplexStatus,
    pub x: Vec<T>,
    pub objective: T,
    /// Pivots over both phases.
    pub iterations: usize,
    /// Smallest achievable maximum row violation; zero unless infeasible.
    pub infeasibility: T,
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Constraint identifiers. Their order is Bland's index order: rows, then
/// upper bounds, then lower bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Active {
    Row(usize),
    Upper(usize),
    Lower(usize),
    /// Temporary pin of a variable at its starting value.
    Pin(usize),
}

/// The LP seen by the active-set loop, optionally augmented with an extra
/// variable `s` that is subtracted from every row (for the feasibility
/// phase).
struct View<'a, T> {
    lp: &'a InequalityLp<T>,
    augmented: bool,
    pins: &'a [T],
    /// Max-norm of each row of `lp`.
    norms: &'a [T],
}

impl<'a, T: Scalar> View<'a, T> {
    fn nv(&self) -> usize {
        self.lp.num_vars() + usize::from(self.augmented)
    }

    fn lower(&self, j: usize) -> T {
        if j < self.lp.num_vars() {
            self.lp.lower[j]
        } else {
            T::zero()
        }
    }

    fn upper(&self, j: usize) -> T {
        if j < self.lp.num_vars() {
            self.lp.upper[j]
        } else {
            T::infinity()
        }
    }

    /// Fills `normal` with the constraint's left-hand side; returns its
    /// right-hand side.
    fn constraint(&self, c: Active, normal: &mut [T]) -> T {
        normal.iter_mut().for_each(|v| *v = T::zero());
        match c {
            Active::Row(i) => {
                let n = self.lp.num_vars();
                normal[..n].copy_from_slice(self.lp.row(i));
                if self.augmented {
                    normal[n] = -T::one();
                }
                self.lp.rhs[i]
            }
            Active::Upper(j) => {
                normal[j] = T::one();
                self.upper(j)
            }
            Active::Lower(j) => {
                normal[j] = -T::one();
                -self.lower(j)
            }
            Active::Pin(j) => {
                normal[j] = T::one();
                self.pins[j]
            }
        }
    }

    fn row_dot(&self, i: usize, v: &[T]) -> T {
        let n = self.lp.num_vars();
        let base = dot(self.lp.row(i), &v[..n]);
        if self.augmented {
            base - v[n]
        } else {
            base
        }
    }

    fn row_norm(&self, i: usize) -> T {
        if self.augmented {
            self.norms[i].max(T::one())
        } else {
            self.norms[i]
        }
    }
}

enum LoopEnd<T> {
    Optimal(Vec<T>),
    Unbounded(Vec<T>),
}

/// Consecutive degenerate pivots before falling back to Bland's rule.
const BLAND_AFTER: usize = 50;

struct Solver<T> {
    opts: SimplexOptions<T>,
    max_iterations: usize,
    iterations: usize,
}

impl<T: Scalar> Solver<T> {
    fn factor(&self, view: &View<'_, T>, working: &[Active]) -> Result<(Lu<T>, Vec<T>)> {
        let nv = view.nv();
        let mut matrix = vec![T::zero(); nv * nv];
        let mut rhs = vec![T::zero(); nv];
        for (r, &c) in working.iter().enumerate() {
            rhs[r] = view.constraint(c, &mut matrix[r * nv..(r + 1) * nv]);
        }
        let lu = Lu::factor(matrix, nv, T::epsilon() * T::lit(16.0)).ok_or_else(|| {
            Error::NumericalBreakdown("working-set matrix became singular".into())
        })?;
        Ok((lu, rhs))
    }

    /// Runs pivots from the vertex defined by `working` until optimal.
    fn run(
        &mut self,
        view: &View<'_, T>,
        objective: &[T],
        working: &mut [Active],
    ) -> Result<LoopEnd<T>> {
        let nv = view.nv();
        let m = view.lp.num_rows();
        let tol = self.opts.tolerance;
        let mut row_active = vec![false; m];
        let mut upper_active = vec![false; nv];
        let mut lower_active = vec![false; nv];
        let mark = |c: Active, on: bool, ra: &mut [bool], ua: &mut [bool], la: &mut [bool]| match c
        {
            Active::Row(i) => ra[i] = on,
            Active::Upper(j) => ua[j] = on,
            Active::Lower(j) => la[j] = on,
            Active::Pin(_) => {}
        };
        for &c in working.iter() {
            mark(
                c,
                true,
                &mut row_active,
                &mut upper_active,
                &mut lower_active,
            );
        }
        let obj_scale = objective.iter().fold(T::one(), |s, v| s.max(v.abs()));
        let mut degenerate_run = 0usize;

        loop {
            let (lu, rhs) = self.factor(view, working)?;
            let mut x = rhs;
            lu.solve(&mut x);
            let mut lambda: Vec<T> = objective.iter().map(|&v| -v).collect();
            lu.solve_transpose(&mut lambda);

            // Pins are released first. Otherwise the most negative multiplier
            // leaves, switching to Bland's smallest-index rule while pivots
            // stay degenerate.
            let lam_scale = lambda.iter().fold(obj_scale, |s, v| s.max(v.abs()));
            let bland = degenerate_run >= BLAND_AFTER;
            let mut leave: Option<(usize, T)> = None;
            let mut best: Option<(Active, T)> = None;
            for (pos, (&c, &l)) in working.iter().zip(&lambda).enumerate() {
                let candidate = match c {
                    Active::Pin(_) => l.abs() > tol * obj_scale,
                    _ => l < -tol * lam_scale,
                };
                if !candidate {
                    continue;
                }
                let better = match (best, c) {
                    (None, _) => true,
                    (Some((Active::Pin(_), _)), Active::Pin(_)) => c < best.unwrap().0,
                    (Some((Active::Pin(_), _)), _) => false,
                    (Some(_), Active::Pin(_)) => true,
                    (Some((b, _)), _) if bland => c < b,
                    (Some((_, bl)), _) => l < bl,
                };
                if better {
                    best = Some((c, l));
                    // Moving off a pin may go either way; real constraints
                    // are left towards their interior.
                    let sign = if matches!(c, Active::Pin(_)) && l > T::zero() {
                        T::one()
                    } else {
                        -T::one()
                    };
                    leave = Some((pos, sign));
                }
            }
            let Some((q, sign)) = leave else {
                return Ok(LoopEnd::Optimal(x));
            };

            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(Error::SolverStall {
                    iterations: self.iterations - 1,
                });
            }

            let mut d = vec![T::zero(); nv];
            d[q] = sign;
            lu.solve(&mut d);
            let d_norm = d.iter().fold(T::zero(), |a, v| a.max(v.abs()));

            // Ratio test; scanning in index order keeps the smallest index
            // among ties.
            let mut entering: Option<(Active, T)> = None;
            let tie =
                |ratio: T, best: T| ratio < best - tol * T::lit(1e-3) * (T::one() + best.abs());
            // Slacks at rounding level count as zero, so degenerate ties are
            // exact and resolved by index.
            let snap = |slack: T, rhs: T| {
                if slack <= tol * (T::one() + rhs.abs()) {
                    T::zero()
                } else {
                    slack
                }
            };
            let pivot_floor = |norm: T| self.opts.pivot_tolerance * (T::one() + norm * d_norm);
            for i in 0..m {
                if row_active[i] {
                    continue;
                }
                let g = view.row_dot(i, &d);
                if g > pivot_floor(view.row_norm(i)) {
                    let slack = snap(view.lp.rhs[i] - view.row_dot(i, &x), view.lp.rhs[i]);
                    let ratio = slack / g;
                    if entering.is_none_or(|(_, b)| tie(ratio, b)) {
                        entering = Some((Active::Row(i), ratio));
                    }
                }
            }
            for j in 0..nv {
                let hi = view.upper(j);
                if !upper_active[j] && hi.is_finite() && d[j] > pivot_floor(T::one()) {
                    let ratio = snap(hi - x[j], hi) / d[j];
                    if entering.is_none_or(|(_, b)| tie(ratio, b)) {
                        entering = Some((Active::Upper(j), ratio));
                    }
                }
            }
            for j in 0..nv {
                let lo = view.lower(j);
                if !lower_active[j] && lo.is_finite() && -d[j] > pivot_floor(T::one()) {
                    let ratio = snap(x[j] - lo, lo) / -d[j];
                    if entering.is_none_or(|(_, b)| tie(ratio, b)) {
                        entering = Some((Active::Lower(j), ratio));
                    }
                }
            }
            let Some((enter, step)) = entering else {
                return Ok(LoopEnd::Unbounded(x));
            };
            if step > T::zero() {
                degenerate_run = 0;
            } else {
                degenerate_run += 1;
            }
            mark(
                working[q],
                false,
                &mut row_active,
                &mut upper_active,
                &mut lower_active,
            );
            mark(
                enter,
                true,
                &mut row_active,
                &mut upper_active,
                &mut lower_active,
            );
            working[q] = enter;
        }
    }
}

/// Clamps `start` into the bounds. Variables landing on a bound start on
/// that bound; the rest are pinned.
fn initial_working_set<T: Scalar>(lp: &InequalityLp<T>, start: &[T]) -> (Vec<T>, Vec<Active>) {
    let n = lp.num_vars();
    let mut x = Vec::with_capacity(n);
    let mut working = Vec::with_capacity(n + 1);
    for j in 0..n {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        let v = start[j];
        if v <= lo {
            x.push(lo);
            working.push(Active::Lower(j));
        } else if v >= hi {
            x.push(hi);
            working.push(Active::Upper(j));
        } else {
            x.push(v);
            working.push(Active::Pin(j));
        }
    }
    (x, working)
}

/// Solves the program starting from the origin.
pub fn solve<T: Scalar>(
    lp: &InequalityLp<T>,
    opts: &SimplexOptions<T>,
) -> Result<SimplexSolution<T>> {
    solve_from(lp, &vec![T::zero(); lp.num_vars()], opts)
}

/// Solves the program starting from `start` (clamped into the bounds). A
/// feasible start skips the feasibility phase.
///
/// Columns are scaled by powers of two so that each has largest entry
/// near one; the scaling is exact and invisible in the result.
pub fn solve_from<T: Scalar>(
    lp: &InequalityLp<T>,
    start: &[T],
    opts: &SimplexOptions<T>,
) -> Result<SimplexSolution<T>> {
    lp.validate()?;
    let n = lp.num_vars();
    if start.len() != n || start.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument(
            "start point has the wrong length or NaN entries".into(),
        ));
    }
    let scale: Vec<T> = (0..n)
        .map(|j| {
            let big = (0..lp.num_rows()).fold(T::zero(), |a, i| a.max(lp.rows[i * n + j].abs()));
            if big > T::zero() {
                T::lit(2.0).powi(big.log2().round().to_f64_lossy() as i32)
            } else {
                T::one()
            }
        })
        .collect();
    let scaled = InequalityLp {
        objective: lp
            .objective
            .iter()
            .zip(&scale)
            .map(|(&c, &d)| c / d)
            .collect(),
        rows: lp
            .rows
            .iter()
            .enumerate()
            .map(|(e, &a)| a / scale[e % n])
            .collect(),
        rhs: lp.rhs.clone(),
        lower: lp.lower.iter().zip(&scale).map(|(&l, &d)| l * d).collect(),
        upper: lp.upper.iter().zip(&scale).map(|(&u, &d)| u * d).collect(),
    };
    let start: Vec<T> = start.iter().zip(&scale).map(|(&v, &d)| v * d).collect();
    let mut sol = solve_scaled(&scaled, &start, opts)?;
    for (v, &d) in sol.x.iter_mut().zip(&scale) {
        *v /= d;
    }
    sol.objective = dot(&lp.objective, &sol.x);
    Ok(sol)
}

fn solve_scaled<T: Scalar>(
    lp: &InequalityLp<T>,
    start: &[T],
    opts: &SimplexOptions<T>,
) -> Result<SimplexSolution<T>> {
    let n = lp.num_vars();
    let m = lp.num_rows();
    let mut solver = Solver {
        opts: *opts,
        max_iterations: opts.max_iterations.unwrap_or((50 * m).max(1000)),
        iterations: 0,
    };
    let (x0, mut working) = initial_working_set(lp, start);
    let norms: Vec<T> = (0..m)
        .map(|i| lp.row(i).iter().fold(T::zero(), |a, v| a.max(v.abs())))
        .collect();
    let rhs_scale = lp.rhs.iter().fold(T::one(), |s, v| s.max(v.abs()));
    let feasible_tol = opts.tolerance * rhs_scale;

    // Worst row at the starting point, smallest index on ties.
    let mut worst: Option<(usize, T)> = None;
    for i in 0..m {
        let v = dot(lp.row(i), &x0) - lp.rhs[i];
        if worst.is_none_or(|(_, w)| v > w) {
            worst = Some((i, v));
        }
    }

    if let Some((worst_row, _)) = worst.filter(|&(_, v)| v > feasible_tol) {
        // Feasibility phase on (x, s): rows become a_i x - s <= b_i.
        let view = View {
            lp,
            augmented: true,
            pins: &x0,
            norms: &norms,
        };
        working.push(Active::Row(worst_row));
        let mut objective = vec![T::zero(); n + 1];
        objective[n] = T::one();
        let xs = match solver.run(&view, &objective, &mut working)? {
            LoopEnd::Optimal(xs) => xs,
            LoopEnd::Unbounded(_) => {
                return Err(Error::NumericalBreakdown(
                    "feasibility phase reported unbounded".into(),
                ))
            }
        };
        let s = xs[n];
        if s > feasible_tol {
            let x = xs[..n].to_vec();
            return Ok(SimplexSolution {
                status: SimplexStatus::Infeasible,
                objective: dot(&lp.objective, &x),
                x,
                iterations: solver.iterations,
                infeasibility: s,
            });
        }
        // Make `s >= 0` part of the working set, then drop it.
        let s_bound = Active::Lower(n);
        if !working.contains(&s_bound) {
            let (lu, _) = solver.factor(&view, &working)?;
            let mut mu = vec![T::zero(); n + 1];
            mu[n] = T::one();
            lu.solve_transpose(&mut mu);
            let r = (0..=n)
                .max_by(|&a, &b| mu[a].abs().partial_cmp(&mu[b].abs()).expect("finite"))
                .expect("non-empty");
            working[r] = s_bound;
        }
        working.retain(|&c| c != s_bound);
    }

    let view = View {
        lp,
        augmented: false,
        pins: &x0,
        norms: &norms,
    };
    let end = solver.run(&view, &lp.objective, &mut working)?;
    let (status, x) = match end {
        LoopEnd::Optimal(x) => (SimplexStatus::Optimal, x),
        LoopEnd::Unbounded(x) => (SimplexStatus::Unbounded, x),
    };
    Ok(SimplexSolution {
        status,
        objective: dot(&lp.objective, &x),
        x,
        iterations: solver.iterations,
        infeasibility: T::zero(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(
        objective: Vec<f64>,
        rows: Vec<f64>,
        rhs: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> InequalityLp<f64> {
        InequalityLp {
            objective,
            rows,
            rhs,
            lower,
            upper,
        }
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18, x, y >= 0 -> (2, 6), 36
        let p = lp(
            vec![-3.0, -5.0],
            vec![1.0, 0.0, 0.0, 2.0, 3.0, 2.0],
            vec![4.0, 12.0, 18.0],
            vec![0.0, 0.0],
            vec![f64::INFINITY; 2],
        );
        let sol = solve(&p, &SimplexOptions::default()).unwrap();
        assert_eq!(sol.status, SimplexStatus::Optimal);
        assert!((sol.x[0] - 2.0).abs() < 1e-12 && (sol.x[1] - 6.0).abs() < 1e-12);
        assert!((sol.objective + 36.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_start_goes_through_phase_one() {
        // min x + y s.t. x + y >= 2 (as -x - y <= -2), x - y <= 1, free vars
        let p = lp(
            vec![1.0, 2.0],
            vec![-1.0, -1.0, 1.0, -1.0],
            vec![-2.0, 1.0],
            vec![f64::NEG_INFINITY; 2],
            vec![f64::INFINITY; 2],
        );
        let sol = solve(&p, &SimplexOptions::default()).unwrap();
        assert_eq!(sol.status, SimplexStatus::Optimal);
        assert!(
            (sol.x[0] - 1.5).abs() < 1e-12 && (sol.x[1] - 0.5).abs() < 1e-12,
            "{:?}",
            sol.x
        );
    }

    #[test]
    fn detects_infeasibility() {
        // x <= 1 and x >= 3
        let p = lp(
            vec![1.0],
            vec![1.0, -1.0],
            vec![1.0, -3.0],
            vec![-10.0],
            vec![10.0],
        );
        let sol = solve(&p, &SimplexOptions::default()).unwrap();
        assert_eq!(sol.status, SimplexStatus::Infeasible);
        assert!((sol.infeasibility - 1.0).abs() < 1e-12);
    }

    #[test]
    fn detects_unboundedness() {
        let p = lp(
            vec![-1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0],
            vec![0.0, 0.0],
            vec![f64::INFINITY; 2],
        );
        assert_eq!(
            solve(&p, &SimplexOptions::default()).unwrap().status,
            SimplexStatus::Unbounded
        );
    }

    #[test]
    fn fixed_variables_are_respected() {
        // x fixed at 1, minimize t with |x - y_i| <= t for y = (0, 3)
        let p = lp(
            vec![0.0, 1.0],
            vec![1.0, -1.0, -1.0, -1.0, 1.0, -1.0, -1.0, -1.0],
            vec![0.0, 0.0, 3.0, -3.0],
            vec![1.0, 0.0],
            vec![1.0, 100.0],
        );
        let sol = solve(&p, &SimplexOptions::default()).unwrap();
        assert_eq!(sol.x[0], 1.0);
        assert!((sol.x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Many redundant rows through the same vertex.
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for k in 0..20 {
            let a = 1.0 + k as f64 * 0.1;
            rows.extend([a, 1.0]);
            rhs.push(a);
        }
        let p = lp(
            vec![-1.0, -1.0],
            rows,
            rhs,
            vec![0.0, 0.0],
            vec![f64::INFINITY; 2],
        );
        let sol = solve(&p, &SimplexOptions::default()).unwrap();
        assert_eq!(sol.status, SimplexStatus::Optimal);
        assert!((sol.objective + 1.0).abs() < 1e-9, "{sol:?}");
    }

    #[test]
    fn feasible_start_matches_origin_start() {
        let p = lp(
            vec![1.0, 2.0],
            vec![-1.0, -1.0, 1.0, -1.0],
            vec![-2.0, 1.0],
            vec![f64::NEG_INFINITY; 2],
            vec![f64::INFINITY; 2],
        );
        let a = solve(&p, &SimplexOptions::default()).unwrap();
        let b = solve_from(&p, &[5.0, 5.0], &SimplexOptions::default()).unwrap();
        assert!((a.objective - b.objective).abs() < 1e-12);
        assert!(solve_from(&p, &[1.0], &SimplexOptions::default()).is_err());
    }

    #[test]
    fn iteration_cap_reports_stall() {
        let p = lp(
            vec![-3.0, -5.0],
            vec![1.0, 0.0, 0.0, 2.0, 3.0, 2.0],
            vec![4.0, 12.0, 18.0],
            vec![0.0, 0.0],
            vec![f64::INFINITY; 2],
        );
        let opts = SimplexOptions {
            max_iterations: Some(1),
            ..SimplexOptions::default()
        };
        assert!(matches!(solve(&p, &opts), Err(Error::SolverStall { .. })));
    }

    #[test]
    fn single_precision_solve() {
        let p = InequalityLp::<f32> {
            objective: vec![-3.0, -5.0],
            rows: vec![1.0, 0.0, 0.0, 2.0, 3.0, 2.0],
            rhs: vec![4.0, 12.0, 18.0],
            lower: vec![0.0, 0.0],
            upper: vec![f32::INFINITY; 2],
        };
        let sol = solve(&p, &SimplexOptions::default()).unwrap();
        assert!((sol.objective + 36.0).abs() < 1e-4);
    }

    #[test]
    fn rejects_malformed_programs() {
        let p = lp(vec![1.0], vec![1.0, 2.0], vec![1.0], vec![0.0], vec![1.0]);
        assert!(solve(&p, &SimplexOptions::default()).is_err());
        let p = lp(vec![1.0], vec![1.0], vec![1.0], vec![2.0], vec![1.0]);
        assert!(solve(&p, &SimplexOptions::default()).is_err());
    }
}
