//! Black-box trajectory oracles and the simulated benchmark systems behind
//! them.

pub mod ode;
pub mod systems;

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};

pub use ode::{integrate_dde, integrate_ode, DenseTrajectory, FnField, VectorField};
pub use systems::{BenchmarkSystem, PredatorPreyParams};

/// Default integration step for dataset generation.
pub const DATASET_STEP: f64 = 1e-4;
/// Default integration step for Monte-Carlo ground truth.
pub const GROUND_TRUTH_STEP: f64 = 1e-5;

/// Something that maps an input `x0` and a time `t` to a scalar state.
pub trait TrajectoryOracle: Send + Sync {
    fn input_dimension(&self) -> usize;

    fn horizon(&self) -> f64;

    fn evaluate(&self, x0: &[f64], t: f64) -> Result<f64>;

    /// Evaluates one input at many times. Implementations backed by a
    /// simulation integrate once.
    fn evaluate_many(&self, x0: &[f64], times: &[f64]) -> Result<Vec<f64>> {
        times.iter().map(|&t| self.evaluate(x0, t)).collect()
    }

    fn describe(&self) -> String;
}

/// Oracle given directly as a closure `b(x0, t)`.
pub struct ClosureOracle<F> {
    input_dimension: usize,
    horizon: f64,
    f: F,
}

impl<F> ClosureOracle<F>
where
    F: Fn(&[f64], f64) -> f64 + Send + Sync,
{
    pub fn new(input_dimension: usize, horizon: f64, f: F) -> Self {
        Self {
            input_dimension,
            horizon,
            f,
        }
    }
}

impl<F> TrajectoryOracle for ClosureOracle<F>
where
    F: Fn(&[f64], f64) -> f64 + Send + Sync,
{
    fn input_dimension(&self) -> usize {
        self.input_dimension
    }

    fn horizon(&self) -> f64 {
        self.horizon
    }

    fn evaluate(&self, x0: &[f64], t: f64) -> Result<f64> {
        check_query(self.input_dimension, self.horizon, x0, t)?;
        Ok((self.f)(x0, t))
    }

    fn describe(&self) -> String {
        format!("closure(n={}, T={})", self.input_dimension, self.horizon)
    }
}

fn check_query(dim: usize, horizon: f64, x0: &[f64], t: f64) -> Result<()> {
    if x0.len() != dim {
        return Err(Error::InvalidArgument(format!(
            "input has dimension {}, oracle expects {dim}",
            x0.len()
        )));
    }
    if !(0.0..=horizon).contains(&t) {
        return Err(Error::OutOfHorizon { t, horizon });
    }
    Ok(())
}

type CacheKey = Vec<u64>;

#[derive(Default)]
struct TrajectoryCache {
    map: HashMap<CacheKey, Arc<DenseTrajectory<f64>>>,
    order: VecDeque<CacheKey>,
}

/// Oracle that simulates a vector field from `x0` (the initial state, or the
/// constant history for delayed systems) and reports one state coordinate.
///
/// Trajectories are cached per input, keyed by the exact bit pattern of
/// `x0`; only the observed coordinate is retained. The cache holds at most
/// `cache_capacity` trajectories and evicts the oldest first.
pub struct SimulatedOracle<F> {
    field: F,
    horizon: f64,
    step: f64,
    observed_index: usize,
    label: String,
    cache_capacity: usize,
    cache: Mutex<TrajectoryCache>,
}

impl<F: VectorField<f64>> SimulatedOracle<F> {
    pub fn new(field: F, horizon: f64, step: f64, observed_index: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::Config(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::Config(format!(
                "integration step must be positive, got {step}"
            )));
        }
        if observed_index >= field.dimension() {
            return Err(Error::Config(format!(
                "observed index {observed_index} out of range for dimension {}",
                field.dimension()
            )));
        }
        Ok(Self {
            label: format!("custom(dim={})", field.dimension()),
            field,
            horizon,
            step,
            observed_index,
            cache_capacity: 32,
            cache: Mutex::new(TrajectoryCache::default()),
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_cache_capacity(mut self, capacity: usize) -> Self {
        self.cache_capacity = capacity;
        self
    }

    /// Same system with a different integration step and an empty cache.
    pub fn with_step(&self, step: f64) -> Result<Self>
    where
        F: Clone,
    {
        Ok(
            Self::new(self.field.clone(), self.horizon, step, self.observed_index)?
                .with_label(self.label.clone())
                .with_cache_capacity(self.cache_capacity),
        )
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Full-state integration from `x0`, bypassing the cache.
    pub fn integrate(&self, x0: &[f64]) -> Result<DenseTrajectory<f64>> {
        if self.field.delay() > 0.0 {
            integrate_dde(
                &self.field,
                x0,
                self.horizon,
                self.step,
                self.observed_index,
            )
        } else {
            integrate_ode(
                &self.field,
                x0,
                self.horizon,
                self.step,
                self.observed_index,
            )
        }
    }

    /// Observed-coordinate trajectory for `x0`, served from the cache when
    /// possible.
    pub fn trajectory(&self, x0: &[f64]) -> Result<Arc<DenseTrajectory<f64>>> {
        if x0.len() != self.field.dimension() {
            return Err(Error::InvalidArgument(format!(
                "input has dimension {}, oracle expects {}",
                x0.len(),
                self.field.dimension()
            )));
        }
        let key: CacheKey = x0.iter().map(|v| v.to_bits()).collect();
        if let Some(hit) = self.lock_cache().map.get(&key) {
            return Ok(Arc::clone(hit));
        }
        let traj = Arc::new(self.integrate(x0)?.project_observed());
        if self.cache_capacity > 0 {
            let mut cache = self.lock_cache();
            if !cache.map.contains_key(&key) {
                while cache.order.len() >= self.cache_capacity {
                    if let Some(old) = cache.order.pop_front() {
                        cache.map.remove(&old);
                    }
                }
                cache.order.push_back(key.clone());
                cache.map.insert(key, Arc::clone(&traj));
            }
        }
        Ok(traj)
    }

    fn lock_cache(&self) -> std::sync::MutexGuard<'_, TrajectoryCache> {
        // A panic while holding the lock cannot leave the map inconsistent.
        self.cache.lock().unwrap_or_else(|p| p.into_inner())
    }
}

impl<F: VectorField<f64>> TrajectoryOracle for SimulatedOracle<F> {
    fn input_dimension(&self) -> usize {
        self.field.dimension()
    }

    fn horizon(&self) -> f64 {
        self.horizon
    }

    fn evaluate(&self, x0: &[f64], t: f64) -> Result<f64> {
        check_query(self.field.dimension(), self.horizon, x0, t)?;
        self.trajectory(x0)?.query_state(t)
    }

    fn evaluate_many(&self, x0: &[f64], times: &[f64]) -> Result<Vec<f64>> {
        let traj = self.trajectory(x0)?;
        times.iter().map(|&t| traj.query_state(t)).collect()
    }

    fn describe(&self) -> String {
        format!("{} (T={}, step={})", self.label, self.horizon, self.step)
    }
}

/// Settings for [`make_benchmark`].
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkParams {
    pub horizon: f64,
    pub step: f64,
    /// Pendulum count for the scalable system.
    pub l: Option<usize>,
}

impl BenchmarkParams {
    pub fn new(horizon: f64) -> Self {
        Self {
            horizon,
            step: DATASET_STEP,
            l: None,
        }
    }
}

pub type BenchmarkOracle = SimulatedOracle<BenchmarkSystem>;

/// Builds the oracle for a named benchmark; the observed output is the first
/// state coordinate for every system.
pub fn make_benchmark(name: &str, params: &BenchmarkParams) -> Result<BenchmarkOracle> {
    let system = BenchmarkSystem::from_name(name, params.l)?;
    Ok(
        SimulatedOracle::new(system, params.horizon, params.step, 0)?
            .with_label(system.to_string()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn van_der_pol_starts_at_initial_condition() {
        let oracle = make_benchmark("van_der_pol", &BenchmarkParams::new(10.0)).unwrap();
        assert_eq!(oracle.evaluate(&[1.4, 2.3], 0.0).unwrap(), 1.4);
        assert_eq!(oracle.input_dimension(), 2);
    }

    #[test]
    fn scalable_input_dimension() {
        let params = BenchmarkParams {
            l: Some(50),
            ..BenchmarkParams::new(2.0)
        };
        assert_eq!(
            make_benchmark("scalable", &params)
                .unwrap()
                .input_dimension(),
            101
        );
    }

    #[test]
    fn predator_prey_starts_at_history() {
        let mut params = BenchmarkParams::new(1.0);
        params.step = 1e-3;
        let oracle = make_benchmark("predator_prey", &params).unwrap();
        assert_eq!(oracle.evaluate(&[-5.3, -4.6], 0.0).unwrap(), -5.3);
    }

    #[test]
    fn unknown_benchmark_is_a_config_error() {
        assert!(matches!(
            make_benchmark("duffing", &BenchmarkParams::new(1.0)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn out_of_horizon_queries_fail() {
        let oracle = make_benchmark("van_der_pol", &BenchmarkParams::new(1.0)).unwrap();
        assert!(matches!(
            oracle.evaluate(&[1.0, 1.0], 1.5),
            Err(Error::OutOfHorizon { .. })
        ));
        assert!(oracle.evaluate(&[1.0], 0.5).is_err());
    }

    #[test]
    fn cache_returns_identical_values_and_respects_capacity() {
        let mut params = BenchmarkParams::new(1.0);
        params.step = 1e-3;
        let oracle = make_benchmark("van_der_pol", &params)
            .unwrap()
            .with_cache_capacity(2);
        let a = oracle.trajectory(&[1.0, 0.0]).unwrap();
        let b = oracle.trajectory(&[1.0, 0.0]).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        oracle.trajectory(&[2.0, 0.0]).unwrap();
        oracle.trajectory(&[3.0, 0.0]).unwrap();
        let c = oracle.trajectory(&[1.0, 0.0]).unwrap();
        assert!(!Arc::ptr_eq(&a, &c));
        assert_eq!(*a, *c);
    }

    #[test]
    fn concurrent_queries_agree_with_sequential() {
        use rayon::prelude::*;
        let mut params = BenchmarkParams::new(2.0);
        params.step = 1e-3;
        let oracle = make_benchmark("van_der_pol", &params).unwrap();
        let inputs: Vec<[f64; 2]> = (0..16)
            .map(|i| [1.0 + 0.01 * (i % 4) as f64, 2.0])
            .collect();
        let parallel: Vec<f64> = inputs
            .par_iter()
            .map(|x| oracle.evaluate(x, 1.3).unwrap())
            .collect();
        let fresh = make_benchmark("van_der_pol", &params).unwrap();
        for (x, p) in inputs.iter().zip(parallel) {
            assert_eq!(fresh.evaluate(x, 1.3).unwrap().to_bits(), p.to_bits());
        }
    }

    #[test]
    fn closure_oracle_checks_domain() {
        let oracle = ClosureOracle::new(1, 5.0, |_x: &[f64], _t| 7.0);
        assert_eq!(oracle.evaluate(&[0.0], 2.0).unwrap(), 7.0);
        assert!(oracle.evaluate(&[0.0], 6.0).is_err());
    }
}
