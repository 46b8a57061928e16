//! Benchmark dynamics used as black-box ground truth.

use std::fmt;

use crate::error::{Error, Result};
use crate::oracle::ode::VectorField;
use crate::scalar::Scalar;

/// Parameters of the delayed predator-prey model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredatorPreyParams {
    pub a: f64,
    pub m: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub tau: f64,
}

impl Default for PredatorPreyParams {
    fn default() -> Self {
        Self {
            a: 0.25,
            m: 200.0,
            b: -0.01,
            c: -1.0,
            d: 0.01,
            tau: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BenchmarkSystem {
    /// x1' = x2, x2' = (1 - x1^2) x2 - x1
    VanDerPol,
    /// Nine-species biochemical network.
    Bio9,
    /// `2l + 1` states: a drifting coordinate coupled to `l` pendulums.
    Scalable { l: usize },
    /// Logistic prey with a delayed predator response.
    PredatorPrey(PredatorPreyParams),
}

impl BenchmarkSystem {
    pub fn scalable(l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::Config("scalable system needs l >= 1".into()));
        }
        Ok(Self::Scalable { l })
    }

    pub fn predator_prey() -> Self {
        Self::PredatorPrey(PredatorPreyParams::default())
    }

    /// Looks a benchmark up by its identifier. `l` is only used by
    /// `scalable`.
    pub fn from_name(name: &str, l: Option<usize>) -> Result<Self> {
        match name {
            "van_der_pol" => Ok(Self::VanDerPol),
            "bio9" => Ok(Self::Bio9),
            "scalable" => Self::scalable(
                l.ok_or_else(|| Error::Config("scalable system requires parameter l".into()))?,
            ),
            "predator_prey" => Ok(Self::predator_prey()),
            other => Err(Error::Config(format!("unknown benchmark system `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::VanDerPol => "van_der_pol",
            Self::Bio9 => "bio9",
            Self::Scalable { .. } => "scalable",
            Self::PredatorPrey(_) => "predator_prey",
        }
    }

    pub fn state_dimension(&self) -> usize {
        match self {
            Self::VanDerPol | Self::PredatorPrey(_) => 2,
            Self::Bio9 => 9,
            Self::Scalable { l } => 2 * l + 1,
        }
    }

    pub fn delay_f64(&self) -> f64 {
        match self {
            Self::PredatorPrey(p) => p.tau,
            _ => 0.0,
        }
    }
}

impl fmt::Display for BenchmarkSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Scalable { l } => write!(f, "scalable(l={l})"),
            other => f.write_str(other.name()),
        }
    }
}

impl<T: Scalar> VectorField<T> for BenchmarkSystem {
    fn dimension(&self) -> usize {
        self.state_dimension()
    }

    fn delay(&self) -> T {
        T::lit(self.delay_f64())
    }

    fn eval(&self, _t: T, x: &[T], delayed: &[T], dx: &mut [T]) {
        let one = T::one();
        match *self {
            Self::VanDerPol => {
                dx[0] = x[1];
                dx[1] = (one - x[0] * x[0]) * x[1] - x[0];
            }
            Self::Bio9 => {
                let (two, three, five) = (T::lit(2.0), T::lit(3.0), T::lit(5.0));
                let [x1, x2, x3, x4, x5, x6, x7, x8, x9] =
                    [x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7], x[8]];
                dx[0] = three * x3 - x1 * x6;
                dx[1] = x4 - x2 * x6;
                dx[2] = x1 * x6 - three * x3;
                dx[3] = x2 * x6 - x4;
                dx[4] = three * x3 + five * x1 - x5;
                dx[5] = five * x5 + three * x3 + x4 - x6 * (x1 + x2 + two * x8 + one);
                dx[6] = five * x4 + x2 - T::lit(0.5) * x7;
                dx[7] = five * x7 - two * x6 * x8 + x9 - T::lit(0.2) * x8;
                dx[8] = two * x6 * x8 - x9;
            }
            Self::Scalable { l } => {
                // x1' = 1 + (1/l) * sum_{i=1..l} (x_{i+1} + x_{i+2})
                let mut sum = T::zero();
                for i in 1..=l {
                    sum += x[i] + x[i + 1];
                }
                dx[0] = one + sum / T::from_usize_lossy(l);
                let ten = T::lit(10.0);
                for p in 0..l {
                    let (pos, vel) = (1 + 2 * p, 2 + 2 * p);
                    dx[pos] = x[vel];
                    dx[vel] = -ten * x[pos].sin() - x[1];
                }
            }
            Self::PredatorPrey(p) => {
                let (a, m, b, c, d) = (
                    T::lit(p.a),
                    T::lit(p.m),
                    T::lit(p.b),
                    T::lit(p.c),
                    T::lit(p.d),
                );
                dx[0] = a * x[0] * (one - x[0] / m) + b * x[0] * x[1];
                dx[1] = c * x[1] + d * delayed[0] * delayed[1];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        assert_eq!(BenchmarkSystem::VanDerPol.state_dimension(), 2);
        assert_eq!(BenchmarkSystem::Bio9.state_dimension(), 9);
        assert_eq!(
            BenchmarkSystem::scalable(50).unwrap().state_dimension(),
            101
        );
        assert_eq!(BenchmarkSystem::predator_prey().state_dimension(), 2);
        assert!(BenchmarkSystem::scalable(0).is_err());
    }

    #[test]
    fn lookup_by_name() {
        assert_eq!(
            BenchmarkSystem::from_name("bio9", None).unwrap(),
            BenchmarkSystem::Bio9
        );
        assert!(matches!(
            BenchmarkSystem::from_name("lorenz", None),
            Err(Error::Config(_))
        ));
        assert!(BenchmarkSystem::from_name("scalable", None).is_err());
        assert_eq!(
            BenchmarkSystem::from_name("scalable", Some(3))
                .unwrap()
                .to_string(),
            "scalable(l=3)"
        );
    }

    #[test]
    fn van_der_pol_field() {
        let mut dx = [0.0; 2];
        let x = [1.4, 2.3];
        VectorField::<f64>::eval(&BenchmarkSystem::VanDerPol, 0.0, &x, &x, &mut dx);
        assert_eq!(dx[0], 2.3);
        assert!((dx[1] - ((1.0 - 1.96) * 2.3 - 1.4)).abs() < 1e-15);
    }

    #[test]
    fn predator_prey_uses_delayed_state() {
        let sys = BenchmarkSystem::predator_prey();
        let mut dx = [0.0; 2];
        VectorField::<f64>::eval(&sys, 0.0, &[-5.0, -5.0], &[2.0, 3.0], &mut dx);
        assert!((dx[1] - (5.0 + 0.01 * 6.0)).abs() < 1e-12);
        assert_eq!(VectorField::<f64>::delay(&sys), 0.1);
    }
}
