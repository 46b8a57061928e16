//! Scenario linear programs: fit a template to a dataset in the minimax
//! sense, so that every sampled value lies within `xi` of the model.
//!
//! ```text
//! minimize xi  over (c_1..c_k, xi)
//!   s.t.   +(sum_l c_l phi_l(x0_i, t_j) - y_ij) <= xi
//!          -(sum_l c_l phi_l(x0_i, t_j) - y_ij) <= xi
//!          |c_l| <= bound_l,  0 <= xi <= U_xi
//! ```

mod lu;
mod model_file;
pub mod simplex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::TrajectoryOracle;
use crate::pac::Budget;
use crate::sampling::{generate_dataset_on, Dataset, InputSet, Stream};
use crate::template::{freeze, ModelTemplate};

pub use model_file::{
    load_model, model_from_str, model_from_str_with, model_to_string, save_model,
};
pub use simplex::{InequalityLp, SimplexOptions, SimplexSolution, SimplexStatus};

/// Default coefficient and tube-width bounds.
pub const DEFAULT_BOUND: f64 = 100.0;

/// The assembled program together with what is needed to interpret it.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub lp: InequalityLp<f64>,
    /// Number of template coefficients `k`; the tube width is variable `k`.
    pub k: usize,
    pub uc: f64,
    pub uxi: f64,
    /// Basis values, one row of length `k` per `(i, j)` in i-major order.
    phi: Vec<f64>,
    targets: Vec<f64>,
}

impl LinearProgram {
    pub fn num_rows(&self) -> usize {
        self.lp.num_rows()
    }

    pub fn num_vars(&self) -> usize {
        self.lp.num_vars()
    }

    /// Number of data points (half the row count).
    pub fn num_points(&self) -> usize {
        self.targets.len()
    }

    /// `|w(c) - y|` at every data point.
    pub fn residuals(&self, c: &[f64]) -> Vec<f64> {
        self.phi
            .chunks_exact(self.k)
            .zip(&self.targets)
            .map(|(row, &y)| (dot(row, c) - y).abs())
            .collect()
    }

    /// Largest `|w(c) - y|` over the data.
    pub fn max_residual(&self, c: &[f64]) -> f64 {
        self.residuals(c).into_iter().fold(0.0, f64::max)
    }

    /// The program over the listed data points only.
    fn restrict(&self, points: &[usize]) -> LinearProgram {
        let k = self.k;
        let nv = k + 1;
        let mut phi = Vec::with_capacity(points.len() * k);
        let mut targets = Vec::with_capacity(points.len());
        let mut rows = Vec::with_capacity(2 * points.len() * nv);
        let mut rhs = Vec::with_capacity(2 * points.len());
        for &p in points {
            phi.extend_from_slice(&self.phi[p * k..(p + 1) * k]);
            targets.push(self.targets[p]);
            rows.extend_from_slice(self.lp.row(2 * p));
            rows.extend_from_slice(self.lp.row(2 * p + 1));
            rhs.extend_from_slice(&self.lp.rhs[2 * p..2 * p + 2]);
        }
        LinearProgram {
            lp: InequalityLp {
                objective: self.lp.objective.clone(),
                rows,
                rhs,
                lower: self.lp.lower.clone(),
                upper: self.lp.upper.clone(),
            },
            k,
            uc: self.uc,
            uxi: self.uxi,
            phi,
            targets,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

fn check_bound(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

/// Assembles the program. Rows are ordered i-major, j-minor, with the `+`
/// row before the `-` row of each datum.
pub fn build_lp(
    ds: &Dataset,
    template: &ModelTemplate,
    uc: f64,
    uxi: f64,
) -> Result<LinearProgram> {
    check_bound("U_c", uc)?;
    check_bound("U_xi", uxi)?;
    ds.validate()?;
    let n_in = template.input_dimension();
    if n_in != 0 && n_in != ds.input_dimension() {
        return Err(Error::Contract(format!(
            "template expects inputs of dimension {n_in}, dataset has {}",
            ds.input_dimension()
        )));
    }
    let k = template.len();
    let m = ds.n_times();

    let blocks: Vec<Vec<f64>> = ds
        .inputs
        .par_iter()
        .enumerate()
        .map(|(i, x0)| {
            let mut block = vec![0.0; m * k];
            for (j, &t) in ds.times.iter().enumerate() {
                let out = &mut block[j * k..(j + 1) * k];
                template.basis_values(x0, t, out)?;
                if let Some(l) = out.iter().position(|v| !v.is_finite()) {
                    return Err(Error::ModelDomain {
                        input: i,
                        time: j,
                        basis: l,
                    });
                }
            }
            Ok(block)
        })
        .collect::<Result<_>>()?;
    let phi = blocks.concat();
    let targets = ds.values.clone();

    let nv = k + 1;
    let mut rows = Vec::with_capacity(2 * targets.len() * nv);
    let mut rhs = Vec::with_capacity(2 * targets.len());
    for (row, &y) in phi.chunks_exact(k).zip(&targets) {
        rows.extend_from_slice(row);
        rows.push(-1.0);
        rhs.push(y);
        rows.extend(row.iter().map(|v| -v));
        rows.push(-1.0);
        rhs.push(-y);
    }
    let (mut lower, mut upper): (Vec<f64>, Vec<f64>) =
        template.coefficient_bounds(uc).into_iter().unzip();
    lower.push(0.0);
    upper.push(uxi);
    let mut objective = vec![0.0; nv];
    objective[k] = 1.0;
    Ok(LinearProgram {
        lp: InequalityLp {
            objective,
            rows,
            rhs,
            lower,
            upper,
        },
        k,
        uc,
        uxi,
        phi,
        targets,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    /// No coefficients within bounds fit the data with `xi <= U_xi`.
    BoundInfeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub coefficients: Vec<f64>,
    pub xi: f64,
    pub status: LpStatus,
    pub iterations: usize,
    pub max_residual: f64,
    /// Smallest tube width achievable within the coefficient bounds when
    /// `U_xi` is too small; equals `xi` otherwise.
    pub best_xi: f64,
}

/// Data points above which [`solve_lp`] switches to constraint generation.
const DIRECT_LIMIT: usize = 1_500;
/// Data points in the first subproblem and added per round.
const SEED_POINTS: usize = 400;
const ADD_POINTS: usize = 200;
const MAX_ROUNDS: usize = 200;

/// Solves the program to optimality.
///
/// Large programs are solved by constraint generation: a subproblem over a
/// spread-out subset of the data is solved, the worst-fitting data points
/// are added, and the process repeats until every residual is within the
/// subproblem's tube. The result is optimal for the full program.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    solve_lp_with(lp, &SimplexOptions::default())
}

pub fn solve_lp_with(lp: &LinearProgram, opts: &SimplexOptions<f64>) -> Result<LpSolution> {
    let points = lp.targets.len();
    if points <= DIRECT_LIMIT {
        return solve_direct(lp, opts);
    }
    let stride = points.div_ceil(SEED_POINTS);
    let mut selected: Vec<bool> = (0..points).map(|p| p % stride == 0).collect();
    let mut iterations = 0;
    for _ in 0..MAX_ROUNDS {
        let subset: Vec<usize> = (0..points).filter(|&p| selected[p]).collect();
        let sub = lp.restrict(&subset);
        let sol = solve_direct(&sub, opts)?;
        iterations += sol.iterations;
        if sol.status == LpStatus::BoundInfeasible {
            break;
        }
        let residuals = lp.residuals(&sol.coefficients);
        let cutoff = sol.xi + opts.tolerance * (1.0 + sol.xi);
        let mut violated: Vec<usize> = (0..points)
            .filter(|&p| !selected[p] && residuals[p] > cutoff)
            .collect();
        if violated.is_empty() {
            let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
            let xi = sol.xi.max(max_residual);
            return Ok(LpSolution {
                iterations,
                max_residual,
                xi,
                best_xi: xi,
                ..sol
            });
        }
        violated.sort_by(|&a, &b| residuals[b].total_cmp(&residuals[a]).then(a.cmp(&b)));
        for &p in violated.iter().take(ADD_POINTS) {
            selected[p] = true;
        }
    }
    let mut sol = solve_direct(lp, opts)?;
    sol.iterations += iterations;
    Ok(sol)
}

/// One simplex solve from `c = 0` (clamped into the bounds) and the tube
/// width that makes this start feasible.
fn solve_direct(lp: &LinearProgram, opts: &SimplexOptions<f64>) -> Result<LpSolution> {
    let k = lp.k;
    let mut start: Vec<f64> = (0..k)
        .map(|l| 0.0f64.clamp(lp.lp.lower[l], lp.lp.upper[l]))
        .collect();
    start.push(lp.max_residual(&start));
    let sol = simplex::solve_from(&lp.lp, &start, opts)?;
    match sol.status {
        SimplexStatus::Unbounded => Err(Error::Unbounded),
        SimplexStatus::Infeasible => {
            let c = clamp_to_bounds(&lp.lp, &sol.x[..k]);
            let max_residual = lp.max_residual(&c);
            Ok(LpSolution {
                coefficients: c,
                xi: lp.uxi,
                status: LpStatus::BoundInfeasible,
                iterations: sol.iterations,
                max_residual,
                best_xi: lp.uxi + sol.infeasibility,
            })
        }
        SimplexStatus::Optimal => {
            let c = clamp_to_bounds(&lp.lp, &sol.x[..k]);
            let max_residual = lp.max_residual(&c);
            // The reported width always covers the data exactly.
            let xi = sol.x[k].max(max_residual).max(0.0);
            Ok(LpSolution {
                coefficients: c,
                xi,
                status: LpStatus::Optimal,
                iterations: sol.iterations,
                max_residual,
                best_xi: xi,
            })
        }
    }
}

fn clamp_to_bounds(lp: &InequalityLp<f64>, c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .map(|(l, &v)| v.clamp(lp.lower[l], lp.upper[l]))
        .collect()
}

/// Pilot sizes of a staged fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PilotSizes {
    pub times: usize,
    pub inputs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// Time samples per input `M`.
    pub times: usize,
    /// Inputs `N`.
    pub inputs: usize,
    pub uc: f64,
    pub uxi: f64,
    pub seed: Option<u64>,
    /// Absent for pilot fits, which carry no guarantee.
    pub budget: Option<Budget>,
    pub horizon: f64,
    pub input_set: Option<String>,
    pub pilot: Option<PilotSizes>,
    pub iterations: usize,
    pub max_residual: f64,
    /// The single input of a one-trajectory fit.
    pub training_input: Option<Vec<f64>>,
    pub config_hash: Option<String>,
}

#[derive(Debug, Clone)]
pub struct LearnedModel {
    pub template: ModelTemplate,
    pub coefficients: Vec<f64>,
    pub xi: f64,
    pub provenance: Provenance,
}

impl LearnedModel {
    /// Model value `z(x0, t)`.
    pub fn evaluate(&self, x0: &[f64], t: f64) -> Result<f64> {
        self.template.evaluate(&self.coefficients, x0, t)
    }

    /// Model values at many times for one input.
    pub fn evaluate_many(&self, x0: &[f64], times: &[f64]) -> Result<Vec<f64>> {
        let mut phi = vec![0.0; self.template.len()];
        times
            .iter()
            .map(|&t| {
                self.template.basis_values(x0, t, &mut phi)?;
                Ok(phi
                    .iter()
                    .zip(&self.coefficients)
                    .fold(0.0, |acc, (p, c)| acc + c * p))
            })
            .collect()
    }
}

/// Checks that `ds` is large enough for `budget`.
pub fn check_sample_sizes(ds: &Dataset, budget: &Budget) -> Result<()> {
    budget.validate()?;
    let (m_req, n_req) = budget.required_sizes()?;
    let m = ds.n_times() as u64;
    if m < m_req {
        return Err(Error::InsufficientSamples {
            what: "time samples per input (M)",
            required: m_req,
            provided: m,
        });
    }
    if let Some(n_req) = n_req {
        let n = ds.n_inputs() as u64;
        if n < n_req {
            return Err(Error::InsufficientSamples {
                what: "input samples (N)",
                required: n_req,
                provided: n,
            });
        }
    }
    Ok(())
}

/// Fits without a sample-size check or guarantee.
fn fit(
    ds: &Dataset,
    template: &ModelTemplate,
    uc: f64,
    uxi: f64,
    budget: Option<Budget>,
) -> Result<LearnedModel> {
    let lp = build_lp(ds, template, uc, uxi)?;
    let sol = solve_lp(&lp)?;
    if sol.status == LpStatus::BoundInfeasible {
        return Err(Error::BoundInfeasible {
            best_xi: sol.best_xi,
        });
    }
    Ok(LearnedModel {
        template: template.clone(),
        coefficients: sol.coefficients,
        xi: sol.xi,
        provenance: Provenance {
            times: ds.n_times(),
            inputs: ds.n_inputs(),
            uc,
            uxi,
            seed: ds.seed,
            budget,
            horizon: ds.horizon,
            input_set: ds.input_set.clone(),
            pilot: None,
            iterations: sol.iterations,
            max_residual: sol.max_residual,
            training_input: (ds.n_inputs() == 1).then(|| ds.inputs[0].clone()),
            config_hash: None,
        },
    })
}

/// Solves the scenario program for `ds`, refusing datasets smaller than
/// `budget` requires. The budget's decision dimension must equal the
/// template's.
pub fn learn(
    ds: &Dataset,
    template: &ModelTemplate,
    uc: f64,
    uxi: f64,
    budget: Budget,
) -> Result<LearnedModel> {
    if budget.decision_dims() != template.decision_dims() {
        return Err(Error::Contract(format!(
            "budget is for {} decision variables but the template has {}",
            budget.decision_dims(),
            template.decision_dims()
        )));
    }
    check_sample_sizes(ds, &budget)?;
    fit(ds, template, uc, uxi, Some(budget))
}

/// Fits coefficients on a pilot sample, freezes them, and certifies only the
/// tube width on a fresh sample drawn from disjoint random streams.
///
/// Sizes for the fresh sample come from `full_budget` at one decision
/// variable. A single-level budget draws one input.
#[allow(clippy::too_many_arguments)]
pub fn staged_learn(
    oracle: &dyn TrajectoryOracle,
    input_set: &InputSet,
    template: &ModelTemplate,
    pilot: PilotSizes,
    full_budget: Budget,
    uc: f64,
    uxi: f64,
    seed: u64,
) -> Result<LearnedModel> {
    let (pilot_ds, fresh) = staged_datasets(oracle, input_set, pilot, full_budget, seed)?;
    learn_staged(&pilot_ds, &fresh, template, uc, uxi, full_budget)
}

/// The pilot and fresh datasets used by [`staged_learn`].
pub fn staged_datasets(
    oracle: &dyn TrajectoryOracle,
    input_set: &InputSet,
    pilot: PilotSizes,
    full_budget: Budget,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if pilot.times == 0 || pilot.inputs == 0 {
        return Err(Error::InvalidArgument(
            "pilot sizes must be at least 1".into(),
        ));
    }
    let budget = full_budget.with_decision_dims(1);
    budget.validate()?;
    let pilot_ds = generate_dataset_on(
        oracle,
        input_set,
        pilot.times,
        pilot.inputs,
        seed,
        Stream::PilotTimes,
        Stream::PilotInputs,
    )?;
    let (m, n) = budget.required_sizes()?;
    let fresh = generate_dataset_on(
        oracle,
        input_set,
        m as usize,
        n.unwrap_or(1) as usize,
        seed,
        Stream::Times,
        Stream::Inputs,
    )?;
    Ok((pilot_ds, fresh))
}

/// Second half of [`staged_learn`] on datasets already at hand.
pub fn learn_staged(
    pilot_ds: &Dataset,
    fresh: &Dataset,
    template: &ModelTemplate,
    uc: f64,
    uxi: f64,
    full_budget: Budget,
) -> Result<LearnedModel> {
    let pilot_model = fit(pilot_ds, template, uc, uxi, None)?;
    let frozen = freeze(template, &pilot_model.coefficients)?;
    let mut model = learn(fresh, &frozen, uc, uxi, full_budget.with_decision_dims(1))?;
    model.provenance.pilot = Some(PilotSizes {
        times: pilot_ds.n_times(),
        inputs: pilot_ds.n_inputs(),
    });
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pac::PacBudget;
    use crate::template::{poly_input_time_template, poly_time_template};

    fn time_data(times: Vec<f64>, values: Vec<f64>, horizon: f64) -> Dataset {
        Dataset::new(vec![vec![0.0]], times, values, horizon).unwrap()
    }

    #[test]
    fn shape_of_constant_fit() {
        let ds = time_data(vec![0.1, 0.5, 0.9], vec![1.0, 2.0, 3.0], 1.0);
        let lp = build_lp(&ds, &poly_time_template(0, 1.0).unwrap(), 100.0, 100.0).unwrap();
        assert_eq!(lp.num_rows(), 6);
        assert_eq!(lp.num_vars(), 2);
        assert_eq!(lp.lp.row(0), &[1.0, -1.0]);
        assert_eq!(lp.lp.row(1), &[-1.0, -1.0]);
        assert_eq!(lp.lp.rhs[..2], [1.0, -1.0]);
    }

    #[test]
    fn exact_constant_fit() {
        let ds = time_data(vec![0.0, 1.0], vec![1.0, 1.0], 1.0);
        let lp = build_lp(&ds, &poly_time_template(0, 1.0).unwrap(), 100.0, 100.0).unwrap();
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.coefficients[0] - 1.0).abs() < 1e-12);
        assert!(sol.xi.abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_minimax() {
        let ds = time_data(vec![0.0, 1.0], vec![0.0, 1.0], 1.0);
        let lp = build_lp(&ds, &poly_time_template(0, 1.0).unwrap(), 100.0, 100.0).unwrap();
        let sol = solve_lp(&lp).unwrap();
        assert!((sol.coefficients[0] - 0.5).abs() < 1e-12);
        assert!((sol.xi - 0.5).abs() < 1e-12);
    }

    #[test]
    fn representable_data_gives_zero_width() {
        let times: Vec<f64> = (0..20).map(|j| j as f64 * 0.5).collect();
        let values: Vec<f64> = times.iter().map(|t| 1.0 - 0.3 * t + 0.02 * t * t).collect();
        let ds = time_data(times, values, 10.0);
        let lp = build_lp(&ds, &poly_time_template(2, 10.0).unwrap(), 100.0, 100.0).unwrap();
        let sol = solve_lp(&lp).unwrap();
        assert!(sol.xi < 1e-9, "{sol:?}");
    }

    #[test]
    fn small_bound_is_reported_not_fatal() {
        let ds = time_data(vec![0.0, 1.0], vec![0.0, 1.0], 1.0);
        let lp = build_lp(&ds, &poly_time_template(0, 1.0).unwrap(), 100.0, 0.1).unwrap();
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::BoundInfeasible);
        assert!((sol.best_xi - 0.5).abs() < 1e-9, "{sol:?}");
        let ds = time_data(
            vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
            vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0],
            1.0,
        );
        let budget = Budget::Single(PacBudget::new(0.9, 0.5, 2).unwrap());
        let err = learn(
            &ds,
            &poly_time_template(0, 1.0).unwrap(),
            100.0,
            0.1,
            budget,
        )
        .unwrap_err();
        assert!(matches!(err, Error::BoundInfeasible { .. }));
    }

    #[test]
    fn coefficient_bounds_bind() {
        // Best constant is 50 but |c| <= 2.
        let ds = time_data(vec![0.0, 1.0], vec![50.0, 50.0], 1.0);
        let lp = build_lp(&ds, &poly_time_template(0, 1.0).unwrap(), 2.0, 100.0).unwrap();
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.coefficients, vec![2.0]);
        assert!((sol.xi - 48.0).abs() < 1e-9);
    }

    #[test]
    fn non_finite_basis_names_its_position() {
        use crate::template::{custom_template, CustomBasis};
        let t = custom_template(vec![CustomBasis::new("1/t", |_, t| 1.0 / t)], 0, 1.0).unwrap();
        let ds = time_data(vec![0.5, 0.0], vec![1.0, 1.0], 1.0);
        let err = build_lp(&ds, &t, 1.0, 1.0).unwrap_err();
        assert!(
            matches!(
                err,
                Error::ModelDomain {
                    input: 0,
                    time: 1,
                    basis: 0
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn learn_refuses_small_samples() {
        let ds = time_data(vec![0.1, 0.2], vec![0.0, 0.0], 1.0);
        let budget = Budget::Single(PacBudget::new(0.1, 1e-10, 2).unwrap());
        match learn(&ds, &poly_time_template(0, 1.0).unwrap(), 1.0, 1.0, budget) {
            Err(Error::InsufficientSamples {
                required, provided, ..
            }) => {
                assert_eq!((required, provided), (481 + 20, 2));
            }
            other => panic!("{other:?}"),
        }
        let wrong_dims = Budget::Single(PacBudget::new(0.1, 1e-10, 5).unwrap());
        assert!(matches!(
            learn(
                &ds,
                &poly_time_template(0, 1.0).unwrap(),
                1.0,
                1.0,
                wrong_dims
            ),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn constraint_generation_matches_direct_solve() {
        let times: Vec<f64> = (0..2_000)
            .map(|j| (j as f64 * 0.6180339887).fract() * 5.0)
            .collect();
        let values: Vec<f64> = times.iter().map(|t| (1.3 * t).sin() + 0.1 * t).collect();
        let ds = time_data(times, values, 5.0);
        let lp = build_lp(&ds, &poly_time_template(4, 5.0).unwrap(), 100.0, 100.0).unwrap();
        let fast = solve_lp(&lp).unwrap();
        let direct = solve_direct(&lp, &SimplexOptions::default()).unwrap();
        assert!(
            (fast.xi - direct.xi).abs() < 1e-9,
            "{} vs {}",
            fast.xi,
            direct.xi
        );
        assert!((fast.max_residual - fast.xi).abs() < 1e-9);
    }

    #[test]
    fn input_dependent_fit_on_product_grid() {
        let inputs = vec![vec![0.0, 1.0], vec![1.0, 0.5], vec![0.3, 0.2]];
        let times = vec![0.0, 0.4, 1.0, 2.0];
        let mut values = Vec::new();
        for x in &inputs {
            for &t in &times {
                values.push(x[0] + 2.0 * x[1] * t);
            }
        }
        let ds = Dataset::new(inputs, times, values, 2.0).unwrap();
        let t = poly_input_time_template(2, 2, 2.0).unwrap();
        let sol = solve_lp(&build_lp(&ds, &t, 100.0, 100.0).unwrap()).unwrap();
        assert!(sol.xi < 1e-9);
        assert!(sol.max_residual < 1e-9);
    }
}
