//! Monte-Carlo cross-checks of a learned tube against fresh simulations.
//!
//! Each validation trajectory is compared with the model on the grid
//! `t_j = j * delta_t`, `j = 0..=floor(T / delta_t)`; the violation fraction
//! is the share of grid points where `|y(t_j) - z(t_j)| > xi`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::LearnedModel;
use crate::oracle::TrajectoryOracle;
use crate::sampling::{sample_inputs_with, stream_rng, InputSet, Stream};

/// Default number of validation inputs.
pub const DEFAULT_COUNT: usize = 200;
/// Default validation grid spacing.
pub const DEFAULT_DELTA_T: f64 = 1e-3;
/// Number of time points in plot data.
pub const PLOT_POINTS: usize = 1_000;

/// `0, delta_t, 2 delta_t, ...` up to the horizon.
pub fn validation_grid(delta_t: f64, horizon: f64) -> Result<Vec<f64>> {
    if !(delta_t > 0.0) || !delta_t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "delta_t must be positive, got {delta_t}"
        )));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let last = (horizon / delta_t + 1e-9).floor() as usize;
    Ok((0..=last)
        .map(|j| (j as f64 * delta_t).min(horizon))
        .collect())
}

fn fraction_outside(y: &[f64], z: &[f64], xi: f64) -> f64 {
    let outside = y
        .iter()
        .zip(z)
        .filter(|(a, b)| (*a - *b).abs() > xi)
        .count();
    outside as f64 / y.len() as f64
}

/// Share of grid points at which the trajectory from `x0` leaves the tube.
pub fn validate_trajectory(
    oracle: &dyn TrajectoryOracle,
    model: &LearnedModel,
    x0: &[f64],
    delta_t: f64,
    horizon: f64,
) -> Result<f64> {
    let grid = validation_grid(delta_t, horizon)?;
    let y = oracle.evaluate_many(x0, &grid)?;
    let z = model.evaluate_many(x0, &grid)?;
    Ok(fraction_outside(&y, &z, model.xi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationSettings {
    pub delta_t: f64,
    /// A trajectory passes when its violation fraction is at most this.
    pub threshold: f64,
    pub count: usize,
    pub seed: u64,
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryResult {
    pub input: Vec<f64>,
    pub violation_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub per_trajectory: Vec<TrajectoryResult>,
    /// Fraction of trajectories that pass.
    pub ratio: f64,
    pub xi: f64,
    pub settings: ValidationSettings,
}

/// Draws `count` inputs from the validation stream of `seed` and validates
/// each; results keep the draw order.
pub fn validate_ensemble(
    oracle: &dyn TrajectoryOracle,
    model: &LearnedModel,
    input_set: &InputSet,
    count: usize,
    delta_t: f64,
    threshold: f64,
    seed: u64,
) -> Result<ValidationReport> {
    if count == 0 {
        return Err(Error::InvalidArgument(
            "validation needs at least one input".into(),
        ));
    }
    let mut rng = stream_rng(seed, Stream::Validation);
    let inputs = sample_inputs_with(input_set, count, &mut rng)?;
    validate_inputs(oracle, model, inputs, delta_t, threshold, seed)
}

/// Validates the given inputs; `seed` is only recorded.
pub fn validate_inputs(
    oracle: &dyn TrajectoryOracle,
    model: &LearnedModel,
    inputs: Vec<Vec<f64>>,
    delta_t: f64,
    threshold: f64,
    seed: u64,
) -> Result<ValidationReport> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidArgument(format!(
            "threshold must lie in [0, 1], got {threshold}"
        )));
    }
    let horizon = oracle.horizon();
    let grid = validation_grid(delta_t, horizon)?;
    let per_trajectory = inputs
        .into_par_iter()
        .map(|x| {
            let y = oracle.evaluate_many(&x, &grid)?;
            let z = model.evaluate_many(&x, &grid)?;
            Ok(TrajectoryResult {
                violation_fraction: fraction_outside(&y, &z, model.xi),
                input: x,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = per_trajectory
        .iter()
        .filter(|r| r.violation_fraction <= threshold)
        .count();
    Ok(ValidationReport {
        ratio: passed as f64 / per_trajectory.len() as f64,
        xi: model.xi,
        settings: ValidationSettings {
            delta_t,
            threshold,
            count: per_trajectory.len(),
            seed,
            horizon,
        },
        per_trajectory,
    })
}

impl ValidationReport {
    /// One row per trajectory: index, input coordinates, violation fraction.
    pub fn to_csv(&self) -> String {
        let dim = self.per_trajectory.first().map_or(0, |r| r.input.len());
        let mut out = String::from("index");
        for d in 0..dim {
            let _ = write!(out, ",x{}", d + 1);
        }
        out.push_str(",violation_fraction,pass\n");
        for (i, r) in self.per_trajectory.iter().enumerate() {
            let _ = write!(out, "{i}");
            for v in &r.input {
                let _ = write!(out, ",{v:e}");
            }
            let pass = r.violation_fraction <= self.settings.threshold;
            let _ = writeln!(out, ",{:e},{}", r.violation_fraction, u8::from(pass));
        }
        out
    }

    pub fn summary(&self) -> String {
        let worst = self
            .per_trajectory
            .iter()
            .map(|r| r.violation_fraction)
            .fold(0.0, f64::max);
        format!(
            "satisfiability ratio {:.4} ({} of {} trajectories with violation fraction <= {}); \
             worst violation fraction {worst:e}; xi = {}, delta_t = {}, seed = {}",
            self.ratio,
            (self.ratio * self.settings.count as f64).round() as usize,
            self.settings.count,
            self.settings.threshold,
            self.xi,
            self.settings.delta_t,
            self.settings.seed
        )
    }
}

/// Tube and trajectory curves on an even time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotData {
    pub times: Vec<f64>,
    /// Model curve for the first input.
    pub z: Vec<f64>,
    pub xi: f64,
    pub trajectories: Vec<Vec<f64>>,
    /// Per-input model curves, present for input-dependent models.
    pub models: Option<Vec<Vec<f64>>>,
}

pub fn plot_data(
    oracle: &dyn TrajectoryOracle,
    model: &LearnedModel,
    inputs: &[Vec<f64>],
    points: usize,
) -> Result<PlotData> {
    if inputs.is_empty() {
        return Err(Error::InvalidArgument(
            "plot data needs at least one input".into(),
        ));
    }
    let horizon = oracle.horizon();
    let n = points.max(2);
    let times: Vec<f64> = (0..n)
        .map(|k| horizon * k as f64 / (n - 1) as f64)
        .collect();
    let trajectories = inputs
        .par_iter()
        .map(|x| oracle.evaluate_many(x, &times))
        .collect::<Result<Vec<_>>>()?;
    let models = if model.template.is_input_independent() {
        None
    } else {
        Some(
            inputs
                .iter()
                .map(|x| model.evaluate_many(x, &times))
                .collect::<Result<Vec<_>>>()?,
        )
    };
    Ok(PlotData {
        z: model.evaluate_many(&inputs[0], &times)?,
        times,
        xi: model.xi,
        trajectories,
        models,
    })
}

impl PlotData {
    /// Columns `t, z, z_minus_xi, z_plus_xi, y_1.., [z_1..]`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,z,z_minus_xi,z_plus_xi");
        for k in 0..self.trajectories.len() {
            let _ = write!(out, ",y_{}", k + 1);
        }
        if let Some(models) = &self.models {
            for k in 0..models.len() {
                let _ = write!(out, ",z_{}", k + 1);
            }
        }
        out.push('\n');
        for (i, &t) in self.times.iter().enumerate() {
            let z = self.z[i];
            let _ = write!(out, "{t:e},{z:e},{:e},{:e}", z - self.xi, z + self.xi);
            for y in &self.trajectories {
                let _ = write!(out, ",{:e}", y[i]);
            }
            if let Some(models) = &self.models {
                for m in models {
                    let _ = write!(out, ",{:e}", m[i]);
                }
            }
            out.push('\n');
        }
        out
    }
}
