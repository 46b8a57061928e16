//! Datum extraction: i.i.d. uniform time instants and inputs, and the
//! dataset obtained by querying an oracle on their product grid.

mod csv;
mod input_set;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::oracle::TrajectoryOracle;

pub use self::csv::{dataset_to_string, read_dataset, write_dataset};
pub use input_set::InputSet;

/// Independent random streams derived from one master seed. Each purpose
/// gets its own ChaCha20 stream, so changing how many values one purpose
/// draws never perturbs another.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    Times,
    Inputs,
    PilotTimes,
    PilotInputs,
    Validation,
    ValidationTimes,
    /// Free-form stream ids for callers that need more (e.g. repeated runs).
    Custom(u64),
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Times => 1,
            Stream::Inputs => 2,
            Stream::PilotTimes => 3,
            Stream::PilotInputs => 4,
            Stream::Validation => 5,
            Stream::ValidationTimes => 6,
            Stream::Custom(id) => 1_000 + id,
        }
    }
}

/// Seeded generator for one stream.
pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream.id());
    rng
}

/// `count` i.i.d. uniform draws on `[0, horizon]`, in draw order.
pub fn sample_times_with<R: Rng + ?Sized>(
    horizon: f64,
    count: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::InvalidArgument(
            "time sample count must be at least 1".into(),
        ));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    Ok((0..count)
        .map(|_| (horizon * rng.random::<f64>()).min(horizon))
        .collect())
}

pub fn sample_times(horizon: f64, count: usize, seed: u64) -> Result<Vec<f64>> {
    sample_times_with(horizon, count, &mut stream_rng(seed, Stream::Times))
}

pub fn sample_inputs_with<R: Rng + ?Sized>(
    set: &InputSet,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    if count == 0 {
        return Err(Error::InvalidArgument(
            "input sample count must be at least 1".into(),
        ));
    }
    Ok((0..count).map(|_| set.sample(rng)).collect())
}

pub fn sample_inputs(set: &InputSet, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    sample_inputs_with(set, count, &mut stream_rng(seed, Stream::Inputs))
}

/// Observed values `y[i][j] = b(x0_i, t_j)` on a shared time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: Vec<Vec<f64>>,
    pub times: Vec<f64>,
    /// Row-major `inputs.len() x times.len()`.
    pub values: Vec<f64>,
    pub horizon: f64,
    pub seed: Option<u64>,
    /// Textual form of the input set the inputs were drawn from.
    pub input_set: Option<String>,
}

impl Dataset {
    pub fn new(
        inputs: Vec<Vec<f64>>,
        times: Vec<f64>,
        values: Vec<f64>,
        horizon: f64,
    ) -> Result<Self> {
        let ds = Self {
            inputs,
            times,
            values,
            horizon,
            seed: None,
            input_set: None,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        if self.inputs.is_empty() || self.times.is_empty() {
            return Err(Error::InvalidArgument(
                "dataset needs at least one input and one time".into(),
            ));
        }
        let n = self.input_dimension();
        if self.inputs.iter().any(|x| x.len() != n) {
            return Err(Error::InvalidArgument(
                "inputs have inconsistent dimensions".into(),
            ));
        }
        if self.values.len() != self.inputs.len() * self.times.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} values, got {}",
                self.inputs.len() * self.times.len(),
                self.values.len()
            )));
        }
        if let Some(t) = self
            .times
            .iter()
            .find(|t| !(0.0..=self.horizon).contains(*t))
        {
            return Err(Error::OutOfHorizon {
                t: *t,
                horizon: self.horizon,
            });
        }
        Ok(())
    }

    pub fn n_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    pub fn input_dimension(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.times.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.times.len();
        &self.values[i * m..(i + 1) * m]
    }

    /// Iterates `(input index, time index, x0, t, y)` in i-major order.
    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, &[f64], f64, f64)> + '_ {
        self.inputs.iter().enumerate().flat_map(move |(i, x)| {
            self.times
                .iter()
                .enumerate()
                .map(move |(j, &t)| (i, j, x.as_slice(), t, self.value(i, j)))
        })
    }
}

/// Queries `oracle` at every `(input, time)` pair. Inputs are processed in
/// parallel; the result is identical to a sequential run.
pub fn collect_dataset(
    oracle: &dyn TrajectoryOracle,
    inputs: &[Vec<f64>],
    times: &[f64],
) -> Result<Dataset> {
    if inputs.is_empty() || times.is_empty() {
        return Err(Error::InvalidArgument(
            "need at least one input and one time".into(),
        ));
    }
    let horizon = oracle.horizon();
    if let Some(j) = times.iter().position(|t| !(0.0..=horizon).contains(t)) {
        return Err(Error::Oracle {
            input: 0,
            time: j,
            source: Box::new(Error::OutOfHorizon {
                t: times[j],
                horizon,
            }),
        });
    }
    let rows: Vec<Vec<f64>> = inputs
        .par_iter()
        .enumerate()
        .map(|(i, x0)| {
            oracle.evaluate_many(x0, times).map_err(|err| {
                // Locate the first failing time for the error context.
                let j = times
                    .iter()
                    .position(|&t| oracle.evaluate(x0, t).is_err())
                    .unwrap_or(0);
                Error::Oracle {
                    input: i,
                    time: j,
                    source: Box::new(err),
                }
            })
        })
        .collect::<Result<_>>()?;
    Dataset::new(inputs.to_vec(), times.to_vec(), rows.concat(), horizon)
}

/// Draws `n_times` times and `n_inputs` inputs from independent streams of
/// `seed` and collects the dataset.
pub fn generate_dataset(
    oracle: &dyn TrajectoryOracle,
    set: &InputSet,
    n_times: usize,
    n_inputs: usize,
    seed: u64,
) -> Result<Dataset> {
    generate_dataset_on(
        oracle,
        set,
        n_times,
        n_inputs,
        seed,
        Stream::Times,
        Stream::Inputs,
    )
}

pub fn generate_dataset_on(
    oracle: &dyn TrajectoryOracle,
    set: &InputSet,
    n_times: usize,
    n_inputs: usize,
    seed: u64,
    time_stream: Stream,
    input_stream: Stream,
) -> Result<Dataset> {
    if set.dimension() != oracle.input_dimension() {
        return Err(Error::Config(format!(
            "input set has dimension {}, oracle expects {}",
            set.dimension(),
            oracle.input_dimension()
        )));
    }
    let times = sample_times_with(
        oracle.horizon(),
        n_times,
        &mut stream_rng(seed, time_stream),
    )?;
    let inputs = sample_inputs_with(set, n_inputs, &mut stream_rng(seed, input_stream))?;
    let mut ds = collect_dataset(oracle, &inputs, &times)?;
    ds.seed = Some(seed);
    ds.input_set = Some(set.to_string());
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{make_benchmark, BenchmarkParams, ClosureOracle};

    #[test]
    fn times_are_in_range_and_seeded() {
        let a = sample_times(10.0, 5, 42).unwrap();
        assert_eq!(a.len(), 5);
        assert!(a.iter().all(|t| (0.0..=10.0).contains(t)));
        assert_eq!(a, sample_times(10.0, 5, 42).unwrap());
        assert_ne!(a, sample_times(10.0, 5, 43).unwrap());
        assert!(sample_times(10.0, 0, 42).is_err());
    }

    #[test]
    fn time_mean_concentrates() {
        let t = sample_times(10.0, 10811, 7).unwrap();
        let mean = t.iter().sum::<f64>() / t.len() as f64;
        assert!((mean - 5.0).abs() < 0.3, "{mean}");
    }

    #[test]
    fn inputs_stay_in_their_sets() {
        let b = InputSet::new_box(vec![1.25, 2.28], vec![1.55, 2.32]).unwrap();
        assert!(sample_inputs(&b, 125, 3)
            .unwrap()
            .iter()
            .all(|x| b.contains(x)));
        let ball = InputSet::new_ball(vec![-5.0, -5.0], 1.0).unwrap();
        let pts = sample_inputs(&ball, 100, 3).unwrap();
        assert!(pts
            .iter()
            .all(|x| (x[0] + 5.0).powi(2) + (x[1] + 5.0).powi(2) <= 1.0));
    }

    #[test]
    fn streams_are_independent() {
        // Drawing more inputs leaves the time draw unchanged.
        let set = InputSet::cube(0.0, 1.0, 2).unwrap();
        let oracle = ClosureOracle::new(2, 1.0, |x: &[f64], t| x[0] + t);
        let small = generate_dataset(&oracle, &set, 4, 2, 9).unwrap();
        let large = generate_dataset(&oracle, &set, 4, 7, 9).unwrap();
        assert_eq!(small.times, large.times);
        assert_eq!(small.inputs[..], large.inputs[..2]);
    }

    #[test]
    fn dataset_shape_and_values() {
        let oracle = ClosureOracle::new(1, 5.0, |_x: &[f64], _t| 7.0);
        let ds = collect_dataset(&oracle, &[vec![0.0], vec![1.0]], &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!((ds.n_inputs(), ds.n_times()), (2, 3));
        assert!(ds.values.iter().all(|&v| v == 7.0));
        assert_eq!(ds.triples().count(), 6);
    }

    #[test]
    fn van_der_pol_initial_value() {
        let oracle = make_benchmark("van_der_pol", &BenchmarkParams::new(10.0)).unwrap();
        let ds = collect_dataset(&oracle, &[vec![1.4, 2.3]], &[0.0]).unwrap();
        assert_eq!(ds.value(0, 0), 1.4);
    }

    #[test]
    fn oracle_failures_carry_indices() {
        let oracle = ClosureOracle::new(1, 1.0, |_x: &[f64], t| t);
        let err = collect_dataset(&oracle, &[vec![0.0]], &[0.5, 2.0]).unwrap_err();
        assert!(
            matches!(
                err,
                Error::Oracle {
                    input: 0,
                    time: 1,
                    ..
                }
            ),
            "{err}"
        );
        let err = collect_dataset(&oracle, &[vec![0.0], vec![1.0, 2.0]], &[0.5]).unwrap_err();
        assert!(
            matches!(
                err,
                Error::Oracle {
                    input: 1,
                    time: 0,
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn parallel_collection_matches_sequential() {
        let mut params = BenchmarkParams::new(2.0);
        params.step = 1e-3;
        let oracle = make_benchmark("van_der_pol", &params).unwrap();
        let set = InputSet::new_box(vec![1.25, 2.28], vec![1.55, 2.32]).unwrap();
        let ds = generate_dataset(&oracle, &set, 20, 12, 5).unwrap();
        for (i, x) in ds.inputs.iter().enumerate() {
            for (j, &t) in ds.times.iter().enumerate() {
                assert_eq!(
                    ds.value(i, j).to_bits(),
                    oracle.evaluate(x, t).unwrap().to_bits()
                );
            }
        }
    }
}
