//! Fixed-step RK4 integration for ODEs and constant-history DDEs, with
//! linear interpolation between integration nodes.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Right-hand side of `x'(t) = f(t, x(t), x(t - delay))`.
pub trait VectorField<T: Scalar>: Send + Sync {
    fn dimension(&self) -> usize;

    /// Zero for ordinary differential equations.
    fn delay(&self) -> T {
        T::zero()
    }

    /// Writes `f(t, x, delayed)` into `dx`. For ODEs `delayed` aliases `x`.
    fn eval(&self, t: T, x: &[T], delayed: &[T], dx: &mut [T]);
}

/// A vector field backed by a closure, for user-supplied systems.
pub struct FnField<T, F> {
    dimension: usize,
    delay: T,
    f: F,
}

impl<T: Scalar, F> FnField<T, F>
where
    F: Fn(T, &[T], &[T], &mut [T]) + Send + Sync,
{
    pub fn ode(dimension: usize, f: F) -> Self {
        Self {
            dimension,
            delay: T::zero(),
            f,
        }
    }

    pub fn dde(dimension: usize, delay: T, f: F) -> Self {
        Self {
            dimension,
            delay,
            f,
        }
    }
}

impl<T: Scalar, F> VectorField<T> for FnField<T, F>
where
    F: Fn(T, &[T], &[T], &mut [T]) + Send + Sync,
{
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn delay(&self) -> T {
        self.delay
    }

    fn eval(&self, t: T, x: &[T], delayed: &[T], dx: &mut [T]) {
        (self.f)(t, x, delayed, dx)
    }
}

/// States at integration nodes `0 = t_0 < ... < t_K = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTrajectory<T = f64> {
    nodes: Vec<T>,
    /// Row-major, `nodes.len() * dimension`.
    values: Vec<T>,
    dimension: usize,
    observed_index: usize,
}

impl<T: Scalar> DenseTrajectory<T> {
    /// Builds a trajectory from raw parts. `values` is row-major with one
    /// state per node.
    pub fn from_parts(
        nodes: Vec<T>,
        values: Vec<T>,
        dimension: usize,
        observed_index: usize,
    ) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidArgument(
                "trajectory needs at least one node".into(),
            ));
        }
        if dimension == 0 || values.len() != nodes.len() * dimension {
            return Err(Error::InvalidArgument(format!(
                "expected {} values for {} nodes of dimension {dimension}, got {}",
                nodes.len() * dimension,
                nodes.len(),
                values.len()
            )));
        }
        if observed_index >= dimension {
            return Err(Error::InvalidArgument(format!(
                "observed index {observed_index} out of range for dimension {dimension}"
            )));
        }
        if nodes[0] != T::zero() || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "nodes must start at 0 and be strictly increasing".into(),
            ));
        }
        Ok(Self {
            nodes,
            values,
            dimension,
            observed_index,
        })
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn observed_index(&self) -> usize {
        self.observed_index
    }

    pub fn horizon(&self) -> T {
        *self.nodes.last().expect("non-empty")
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn state(&self, k: usize) -> &[T] {
        &self.values[k * self.dimension..(k + 1) * self.dimension]
    }

    pub fn final_state(&self) -> &[T] {
        self.state(self.nodes.len() - 1)
    }

    /// Observed coordinate at node `k`.
    pub fn observed(&self, k: usize) -> T {
        self.values[k * self.dimension + self.observed_index]
    }

    /// Keeps only the observed coordinate.
    pub fn project_observed(&self) -> DenseTrajectory<T> {
        let values = (0..self.nodes.len()).map(|k| self.observed(k)).collect();
        DenseTrajectory {
            nodes: self.nodes.clone(),
            values,
            dimension: 1,
            observed_index: 0,
        }
    }

    /// Linear interpolation of the observed coordinate; exact at nodes.
    pub fn query_state(&self, t: T) -> Result<T> {
        let horizon = self.horizon();
        if !(t >= T::zero() && t <= horizon) {
            return Err(Error::OutOfHorizon {
                t: t.to_f64_lossy(),
                horizon: horizon.to_f64_lossy(),
            });
        }
        // Largest k with nodes[k] <= t.
        let k = self.nodes.partition_point(|&node| node <= t) - 1;
        let y0 = self.observed(k);
        if self.nodes[k] == t || k + 1 == self.nodes.len() {
            return Ok(y0);
        }
        let (t0, t1) = (self.nodes[k], self.nodes[k + 1]);
        let y1 = self.observed(k + 1);
        Ok(y0 + (y1 - y0) * ((t - t0) / (t1 - t0)))
    }
}

/// Number of steps of length `step` needed to cover `horizon`; a trailing
/// remainder below one part in 1e9 of a step is treated as rounding noise.
fn step_count<T: Scalar>(horizon: T, step: T) -> usize {
    let ratio = horizon / step;
    let nearest = ratio.round();
    let count = if (ratio - nearest).abs() <= T::lit(1e-9) * nearest.max(T::one()) {
        nearest
    } else {
        ratio.ceil()
    };
    count.to_usize().unwrap_or(usize::MAX).max(1)
}

fn node_times<T: Scalar>(horizon: T, step: T) -> Vec<T> {
    let count = step_count(horizon, step);
    let mut nodes: Vec<T> = (0..count).map(|k| T::from_usize_lossy(k) * step).collect();
    nodes.push(horizon);
    nodes
}

fn check_common<T: Scalar>(dimension: usize, x0: &[T], horizon: T, step: T) -> Result<()> {
    if !(step > T::zero()) || !step.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "step must be positive, got {step}"
        )));
    }
    if !(horizon > T::zero()) || !horizon.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    if x0.len() != dimension {
        return Err(Error::InvalidArgument(format!(
            "initial state has dimension {}, system expects {dimension}",
            x0.len()
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("initial state is not finite".into()));
    }
    Ok(())
}

struct Rk4Scratch<T> {
    k1: Vec<T>,
    k2: Vec<T>,
    k3: Vec<T>,
    k4: Vec<T>,
    tmp: Vec<T>,
}

impl<T: Scalar> Rk4Scratch<T> {
    fn new(dimension: usize) -> Self {
        Self {
            k1: vec![T::zero(); dimension],
            k2: vec![T::zero(); dimension],
            k3: vec![T::zero(); dimension],
            k4: vec![T::zero(); dimension],
            tmp: vec![T::zero(); dimension],
        }
    }

    /// One classical RK4 step; `delayed[i]` is x(t_i - delay) for the stage
    /// times t, t + h/2, t + h/2, t + h (ignored for ODEs).
    fn step<F: VectorField<T> + ?Sized>(
        &mut self,
        field: &F,
        t: T,
        h: T,
        x: &[T],
        delayed: [Option<&[T]>; 3],
        out: &mut [T],
    ) {
        let half = h * T::lit(0.5);
        let two = T::lit(2.0);
        let six = T::lit(6.0);

        field.eval(t, x, delayed[0].unwrap_or(x), &mut self.k1);
        for ((tmp, &xi), &k) in self.tmp.iter_mut().zip(x).zip(&self.k1) {
            *tmp = xi + half * k;
        }
        field.eval(
            t + half,
            &self.tmp,
            delayed[1].unwrap_or(&self.tmp),
            &mut self.k2,
        );
        for ((tmp, &xi), &k) in self.tmp.iter_mut().zip(x).zip(&self.k2) {
            *tmp = xi + half * k;
        }
        field.eval(
            t + half,
            &self.tmp,
            delayed[1].unwrap_or(&self.tmp),
            &mut self.k3,
        );
        for ((tmp, &xi), &k) in self.tmp.iter_mut().zip(x).zip(&self.k3) {
            *tmp = xi + h * k;
        }
        field.eval(
            t + h,
            &self.tmp,
            delayed[2].unwrap_or(&self.tmp),
            &mut self.k4,
        );
        for (i, o) in out.iter_mut().enumerate() {
            *o = x[i] + h / six * (self.k1[i] + two * self.k2[i] + two * self.k3[i] + self.k4[i]);
        }
    }
}

/// Integrates an ODE with classical fixed-step RK4. The last step is
/// shortened so the final node lands exactly on `horizon`.
pub fn integrate_ode<T, F>(
    field: &F,
    x0: &[T],
    horizon: T,
    step: T,
    observed_index: usize,
) -> Result<DenseTrajectory<T>>
where
    T: Scalar,
    F: VectorField<T> + ?Sized,
{
    let dim = field.dimension();
    check_common(dim, x0, horizon, step)?;
    if field.delay() != T::zero() {
        return Err(Error::InvalidArgument(
            "system has a delay; use integrate_dde".into(),
        ));
    }
    let nodes = node_times(horizon, step);
    let mut values = Vec::with_capacity(nodes.len() * dim);
    values.extend_from_slice(x0);
    let mut scratch = Rk4Scratch::new(dim);
    let mut next = vec![T::zero(); dim];
    for k in 0..nodes.len() - 1 {
        let (t, h) = (nodes[k], nodes[k + 1] - nodes[k]);
        let x = &values[k * dim..(k + 1) * dim];
        scratch.step(field, t, h, x, [None; 3], &mut next);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::IntegrationDiverged {
                time: nodes[k + 1].to_f64_lossy(),
            });
        }
        values.extend_from_slice(&next);
    }
    DenseTrajectory::from_parts(nodes, values, dim, observed_index)
}

/// Integrates a DDE with constant initial history by the method of steps.
///
/// The step is reduced to `delay / ceil(delay / step)` so every delayed node
/// time is an integration node; delayed stage values at half steps are read
/// from the linear interpolant of the stored solution (or the history for
/// times at or before zero).
pub fn integrate_dde<T, F>(
    field: &F,
    history: &[T],
    horizon: T,
    step: T,
    observed_index: usize,
) -> Result<DenseTrajectory<T>>
where
    T: Scalar,
    F: VectorField<T> + ?Sized,
{
    let dim = field.dimension();
    check_common(dim, history, horizon, step)?;
    let delay = field.delay();
    if !(delay > T::zero()) {
        return Err(Error::InvalidArgument(
            "system has no delay; use integrate_ode".into(),
        ));
    }
    let lag = step_count(delay, step);
    let step = delay / T::from_usize_lossy(lag);
    let nodes = node_times(horizon, step);

    let mut values: Vec<T> = Vec::with_capacity(nodes.len() * dim);
    values.extend_from_slice(history);
    let mut scratch = Rk4Scratch::new(dim);
    let mut next = vec![T::zero(); dim];
    let mut mid = vec![T::zero(); dim];
    let mut far = vec![T::zero(); dim];
    let half = T::lit(0.5);

    for k in 0..nodes.len() - 1 {
        let (t, h) = (nodes[k], nodes[k + 1] - nodes[k]);
        let full_step = k + 1 < nodes.len() - 1;
        // Delayed node indices relative to the stored solution; negative
        // means the constant history.
        let back = k as isize - lag as isize;
        let node_or_history = |j: isize| -> &[T] {
            if j <= 0 {
                history
            } else {
                &values[j as usize * dim..(j as usize + 1) * dim]
            }
        };
        let delayed_start = node_or_history(back);
        if full_step {
            let a = node_or_history(back);
            let b = node_or_history(back + 1);
            for i in 0..dim {
                mid[i] = (a[i] + b[i]) * half;
            }
            far.copy_from_slice(node_or_history(back + 1));
        } else {
            interpolate_delayed(
                &nodes,
                &values,
                history,
                dim,
                t + h * half - delay,
                &mut mid,
            );
            interpolate_delayed(&nodes, &values, history, dim, t + h - delay, &mut far);
        }
        let x = &values[k * dim..(k + 1) * dim];
        scratch.step(
            field,
            t,
            h,
            x,
            [Some(delayed_start), Some(&mid), Some(&far)],
            &mut next,
        );
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::IntegrationDiverged {
                time: nodes[k + 1].to_f64_lossy(),
            });
        }
        values.extend_from_slice(&next);
    }
    DenseTrajectory::from_parts(nodes, values, dim, observed_index)
}

fn interpolate_delayed<T: Scalar>(
    nodes: &[T],
    values: &[T],
    history: &[T],
    dim: usize,
    t: T,
    out: &mut [T],
) {
    if t <= T::zero() {
        out.copy_from_slice(history);
        return;
    }
    let known = values.len() / dim;
    let k = nodes[..known].partition_point(|&n| n <= t) - 1;
    if k + 1 >= known {
        out.copy_from_slice(&values[k * dim..(k + 1) * dim]);
        return;
    }
    let w = (t - nodes[k]) / (nodes[k + 1] - nodes[k]);
    for i in 0..dim {
        let a = values[k * dim + i];
        let b = values[(k + 1) * dim + i];
        out[i] = a + (b - a) * w;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic() -> FnField<f64, impl Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync> {
        FnField::ode(2, |_t, x: &[f64], _d: &[f64], dx: &mut [f64]| {
            dx[0] = x[1];
            dx[1] = -x[0];
        })
    }

    #[test]
    fn harmonic_oscillator_returns_after_one_period() {
        let traj = integrate_ode(
            &harmonic(),
            &[1.0, 0.0],
            2.0 * std::f64::consts::PI,
            1e-3,
            0,
        )
        .unwrap();
        let end = traj.final_state();
        assert!((end[0] - 1.0).abs() < 1e-8, "{end:?}");
        assert!(end[1].abs() < 1e-8, "{end:?}");
        assert_eq!(traj.horizon(), 2.0 * std::f64::consts::PI);
    }

    #[test]
    fn exponential_growth() {
        let field = FnField::ode(1, |_t, x: &[f64], _d: &[f64], dx: &mut [f64]| dx[0] = x[0]);
        let traj = integrate_ode(&field, &[1.0], 1.0, 1e-4, 0).unwrap();
        assert!((traj.final_state()[0] - std::f64::consts::E).abs() < 1e-10);
        assert_eq!(traj.len(), 10_001);
    }

    #[test]
    fn node_spacing_and_short_last_step() {
        let traj = integrate_ode(&harmonic(), &[1.0, 0.0], 1.05, 0.1, 0).unwrap();
        let nodes = traj.nodes();
        assert_eq!(nodes.len(), 12);
        assert_eq!(nodes[3], 3.0 * 0.1);
        assert_eq!(*nodes.last().unwrap(), 1.05);
        assert!((nodes[11] - nodes[10] - 0.05).abs() < 1e-12);
    }

    #[test]
    fn divergence_names_the_time() {
        let field = FnField::ode(1, |_t, x: &[f64], _d: &[f64], dx: &mut [f64]| {
            dx[0] = x[0] * x[0]
        });
        let err = integrate_ode(&field, &[1.0], 2.0, 1e-2, 0).unwrap_err();
        match err {
            Error::IntegrationDiverged { time } => assert!(time > 0.9 && time <= 2.0, "{time}"),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn ode_rejects_delayed_system() {
        let field = FnField::dde(1, 1.0, |_t, _x: &[f64], d: &[f64], dx: &mut [f64]| {
            dx[0] = d[0]
        });
        assert!(integrate_ode(&field, &[1.0], 1.0, 0.1, 0).is_err());
        assert!(integrate_dde(&harmonic(), &[1.0, 0.0], 1.0, 0.1, 0).is_err());
    }

    #[test]
    fn dde_method_of_steps_matches_piecewise_solution() {
        let field = FnField::dde(1, 1.0, |_t, _x: &[f64], d: &[f64], dx: &mut [f64]| {
            dx[0] = d[0]
        });
        let traj = integrate_dde(&field, &[1.0], 2.0, 1e-3, 0).unwrap();
        assert!((traj.query_state(1.0).unwrap() - 2.0).abs() < 1e-6);
        assert!((traj.query_state(2.0).unwrap() - 3.5).abs() < 1e-6);
    }

    #[test]
    fn dde_step_is_adjusted_to_divide_the_delay() {
        let field = FnField::dde(1, 0.1, |_t, _x: &[f64], d: &[f64], dx: &mut [f64]| {
            dx[0] = -d[0]
        });
        let traj = integrate_dde(&field, &[1.0], 1.0, 0.03, 0).unwrap();
        // 0.1 / ceil(0.1 / 0.03) = 0.025
        assert!((traj.nodes()[1] - 0.025).abs() < 1e-15);
        assert_eq!(traj.len(), 41);
    }

    #[test]
    fn dde_equilibrium_history_stays_put() {
        // x' = x(t - 0.5) * (1 - x) has the equilibrium x = 1.
        let field = FnField::dde(1, 0.5, |_t, x: &[f64], d: &[f64], dx: &mut [f64]| {
            dx[0] = d[0] * (1.0 - x[0])
        });
        let traj = integrate_dde(&field, &[1.0], 3.0, 1e-2, 0).unwrap();
        for k in 0..traj.len() {
            assert!((traj.observed(k) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn query_interpolates_and_is_exact_at_nodes() {
        let traj =
            DenseTrajectory::from_parts(vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 2.0], 1, 0).unwrap();
        assert_eq!(traj.query_state(0.5).unwrap(), 1.0);
        assert_eq!(traj.query_state(1.0).unwrap(), 2.0);
        assert_eq!(traj.query_state(1.75).unwrap(), 2.0);
        assert_eq!(traj.query_state(2.0).unwrap(), 2.0);
        assert!(matches!(
            traj.query_state(2.5),
            Err(Error::OutOfHorizon { .. })
        ));
        assert!(matches!(
            traj.query_state(-0.1),
            Err(Error::OutOfHorizon { .. })
        ));
    }

    #[test]
    fn query_is_exact_at_every_integration_node() {
        let traj = integrate_ode(&harmonic(), &[0.3, 0.7], 1.0, 0.01, 0).unwrap();
        for (k, &t) in traj.nodes().iter().enumerate() {
            assert_eq!(
                traj.query_state(t).unwrap().to_bits(),
                traj.observed(k).to_bits()
            );
        }
    }

    #[test]
    fn single_precision_integration() {
        let field = FnField::ode(1, |_t, x: &[f32], _d: &[f32], dx: &mut [f32]| dx[0] = x[0]);
        let traj = integrate_ode(&field, &[1.0f32], 1.0, 1e-2, 0).unwrap();
        assert!((traj.final_state()[0] - std::f32::consts::E).abs() < 1e-5);
    }
}
