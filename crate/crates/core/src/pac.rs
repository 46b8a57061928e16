//! Scenario sample-size calculus.
//!
//! A scenario linear program with `m` decision variables solved on `K`
//! i.i.d. constraints has violation probability at most `epsilon` with
//! confidence `1 - beta` whenever `epsilon >= (2 / K) (ln(1 / beta) + m)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack subtracted before taking the ceiling, so values that are
/// mathematically integral do not round up because of representation error.
const CEIL_GUARD: f64 = 1e-12;

fn check_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{name} must lie in (0, 1), got {v}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacBudget {
    pub epsilon: f64,
    pub beta: f64,
    /// Number of LP decision variables, including the tube half-width.
    pub decision_dims: usize,
}

impl PacBudget {
    pub fn new(epsilon: f64, beta: f64, decision_dims: usize) -> Result<Self> {
        let b = Self {
            epsilon,
            beta,
            decision_dims,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("epsilon", self.epsilon)?;
        check_unit("beta", self.beta)?;
        if self.decision_dims == 0 {
            return Err(Error::InvalidArgument(
                "decision_dims must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn min_samples(&self) -> Result<u64> {
        min_samples(self.epsilon, self.beta, self.decision_dims)
    }
}

/// Time-level `(epsilon1, beta1)` and input-level `(epsilon2, beta2)`
/// parameters for guarantees over a whole input set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelBudget {
    pub epsilon1: f64,
    pub beta1: f64,
    pub epsilon2: f64,
    pub beta2: f64,
    pub decision_dims: usize,
}

impl TwoLevelBudget {
    pub fn new(
        epsilon1: f64,
        beta1: f64,
        epsilon2: f64,
        beta2: f64,
        decision_dims: usize,
    ) -> Result<Self> {
        let b = Self {
            epsilon1,
            beta1,
            epsilon2,
            beta2,
            decision_dims,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("epsilon1", self.epsilon1)?;
        check_unit("beta1", self.beta1)?;
        check_unit("epsilon2", self.epsilon2)?;
        check_unit("beta2", self.beta2)?;
        if self.decision_dims == 0 {
            return Err(Error::InvalidArgument(
                "decision_dims must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Either kind of budget, as attached to a learned model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Budget {
    Single(PacBudget),
    TwoLevel(TwoLevelBudget),
}

impl Budget {
    pub fn decision_dims(&self) -> usize {
        match self {
            Budget::Single(b) => b.decision_dims,
            Budget::TwoLevel(b) => b.decision_dims,
        }
    }

    pub fn with_decision_dims(self, decision_dims: usize) -> Self {
        match self {
            Budget::Single(b) => Budget::Single(PacBudget { decision_dims, ..b }),
            Budget::TwoLevel(b) => Budget::TwoLevel(TwoLevelBudget { decision_dims, ..b }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Budget::Single(b) => b.validate(),
            Budget::TwoLevel(b) => b.validate(),
        }
    }

    /// Required `(M, N)`; `N` is 1 for single-level budgets, where the
    /// guarantee is per listed input and any number of inputs is allowed.
    pub fn required_sizes(&self) -> Result<(u64, Option<u64>)> {
        match self {
            Budget::Single(b) => Ok((b.min_samples()?, None)),
            Budget::TwoLevel(b) => {
                let (m, n) = two_level_budget(b)?;
                Ok((m, Some(n)))
            }
        }
    }
}

/// `(2 / epsilon) (ln(1 / beta) + decision_dims)` as a real number.
fn sample_bound(epsilon: f64, beta: f64, decision_dims: usize) -> f64 {
    2.0 / epsilon * ((1.0 / beta).ln() + decision_dims as f64)
}

/// Smallest `K` with `epsilon >= (2 / K) (ln(1 / beta) + decision_dims)`.
pub fn min_samples(epsilon: f64, beta: f64, decision_dims: usize) -> Result<u64> {
    PacBudget {
        epsilon,
        beta,
        decision_dims,
    }
    .validate()?;
    let bound = sample_bound(epsilon, beta, decision_dims);
    let k = (bound * (1.0 - CEIL_GUARD)).ceil();
    Ok(k.max(1.0) as u64)
}

/// Tightest `epsilon` certified by `k` samples.
pub fn achieved_epsilon(k: u64, beta: f64, decision_dims: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "sample count must be at least 1".into(),
        ));
    }
    check_unit("beta", beta)?;
    Ok(2.0 / k as f64 * ((1.0 / beta).ln() + decision_dims as f64))
}

/// Time-sample count `M` and input-sample count `N`.
pub fn two_level_budget(b: &TwoLevelBudget) -> Result<(u64, u64)> {
    b.validate()?;
    Ok((
        min_samples(b.epsilon1, b.beta1, b.decision_dims)?,
        min_samples(b.epsilon2, b.beta2, b.decision_dims)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reported_sample_sizes() {
        let table = [
            (0.01, 1e-20, 8, 10811),
            (0.01, 1e-20, 85, 26211),
            (0.3, 1e-10, 8, 207),
            (0.5, 1e-10, 8, 125),
            (0.2, 1e-10, 4, 271),
            (0.3, 1e-10, 4, 181),
            (0.2, 1e-10, 7, 301),
            (0.2, 1e-10, 6, 291),
            (0.1, 1e-10, 6, 581),
            (0.1, 1e-10, 1, 481),
        ];
        for (eps, beta, m, k) in table {
            assert_eq!(
                min_samples(eps, beta, m).unwrap(),
                k,
                "({eps}, {beta}, {m})"
            );
        }
    }

    #[test]
    fn achieved_epsilon_at_reported_size() {
        let e = achieved_epsilon(10811, 1e-20, 8).unwrap();
        assert!(e <= 0.01 && e > 0.00999, "{e}");
        assert!(achieved_epsilon(0, 0.1, 1).is_err());
    }

    #[test]
    fn two_level_sizes() {
        let b = TwoLevelBudget::new(0.2, 1e-10, 0.3, 1e-10, 4).unwrap();
        assert_eq!(two_level_budget(&b).unwrap(), (271, 181));
        let b = TwoLevelBudget::new(0.2, 1e-10, 0.2, 1e-10, 6).unwrap();
        assert_eq!(two_level_budget(&b).unwrap(), (291, 291));
        let b = TwoLevelBudget::new(0.3, 1e-10, 0.5, 1e-10, 8).unwrap();
        assert_eq!(two_level_budget(&b).unwrap(), (207, 125));
    }

    #[test]
    fn invalid_budgets_are_rejected() {
        assert!(min_samples(0.0, 0.1, 1).is_err());
        assert!(min_samples(1.0, 0.1, 1).is_err());
        assert!(min_samples(0.1, 1.0, 1).is_err());
        assert!(min_samples(0.1, 0.1, 0).is_err());
        assert!(TwoLevelBudget::new(0.1, 0.1, 1.5, 0.1, 2).is_err());
    }

    #[test]
    fn achieved_epsilon_decays() {
        let mut prev = f64::INFINITY;
        for k in [1u64, 10, 100, 1_000, 1_000_000] {
            let e = achieved_epsilon(k, 1e-6, 3).unwrap();
            assert!(e < prev);
            prev = e;
        }
        assert!(prev < 1e-4);
    }

    proptest! {
        #[test]
        fn min_samples_is_minimal(eps in 0.001f64..0.999, log_beta in -40.0f64..-0.01, m in 1usize..200) {
            let beta = 10f64.powf(log_beta);
            let k = min_samples(eps, beta, m).unwrap();
            let satisfied = |k: u64| eps >= 2.0 / k as f64 * ((1.0 / beta).ln() + m as f64) * (1.0 - 1e-12);
            prop_assert!(satisfied(k));
            if k > 1 {
                prop_assert!(!satisfied(k - 1));
            }
        }

        #[test]
        fn min_samples_is_monotone(eps in 0.01f64..0.9, d_eps in 0.0f64..0.09, log_beta in -30.0f64..-0.1, m in 1usize..100) {
            let beta = 10f64.powf(log_beta);
            let base = min_samples(eps, beta, m).unwrap();
            prop_assert!(min_samples(eps + d_eps, beta, m).unwrap() <= base);
            prop_assert!(min_samples(eps, beta, m + 1).unwrap() >= base);
            prop_assert!(min_samples(eps, beta / 10.0, m).unwrap() >= base);
        }

        #[test]
        fn achieved_epsilon_round_trips(k in 1u64..100_000, log_beta in -30.0f64..-0.1, m in 1usize..100) {
            let beta = 10f64.powf(log_beta);
            let e = achieved_epsilon(k, beta, m).unwrap();
            prop_assume!(e < 1.0);
            prop_assert!(min_samples(e, beta, m).unwrap() <= k);
        }
    }

    #[test]
    fn halving_beta_exponent_costs_less_than_double() {
        for eps in [0.01, 0.05, 0.1, 0.3] {
            for m in [1usize, 4, 8, 20] {
                let tight = min_samples(eps, 1e-20, m).unwrap();
                let loose = min_samples(eps, 1e-10, m).unwrap();
                assert!(tight < 2 * loose, "eps={eps} m={m}");
            }
        }
    }
}
