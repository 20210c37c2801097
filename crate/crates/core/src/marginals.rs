//! One-dimensional marginal laws.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extended::Extended;

/// A univariate distribution accessed through its CDF and quantile.
pub trait Marginal: Sync {
    fn cdf(&self, x: f64) -> f64;

    fn survival(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }

    /// Inverse CDF on `[0, 1)`.
    fn quantile(&self, u: f64) -> Result<f64>;

    /// E|X|^p, or `Infinite` when the moment does not exist.
    fn abs_moment(&self, p: f64) -> Extended;

    /// Left end of the support (`-∞` when unbounded).
    fn support_min(&self) -> f64 {
        f64::NEG_INFINITY
    }
}

/// Pareto law with scale 1 and tail index `alpha`: F(x) = 1 − x^(−alpha) for x ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParetoMarginal {
    alpha: f64,
}

impl ParetoMarginal {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::parameter(format!(
                "pareto tail index must satisfy alpha > 0, got {alpha}"
            )));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// P{X > k^(1/p)} = k^(−alpha/p).
    pub fn tail_prob_at_threshold(&self, k: u64, p: f64) -> f64 {
        (k as f64).powf(-self.alpha / p)
    }

    /// Mean, when finite.
    pub fn mean(&self) -> Option<f64> {
        self.abs_moment(1.0).finite()
    }
}

impl Marginal for ParetoMarginal {
    fn cdf(&self, x: f64) -> f64 {
        if x <= 1.0 {
            0.0
        } else {
            1.0 - x.powf(-self.alpha)
        }
    }

    fn survival(&self, x: f64) -> f64 {
        if x <= 1.0 {
            1.0
        } else {
            x.powf(-self.alpha)
        }
    }

    fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&u) {
            return Err(Error::domain(format!("quantile requires u in [0, 1), got {u}")));
        }
        Ok((1.0 - u).powf(-1.0 / self.alpha))
    }

    fn abs_moment(&self, p: f64) -> Extended {
        if p < self.alpha {
            Extended::Finite(self.alpha / (self.alpha - p))
        } else {
            Extended::Infinite
        }
    }

    fn support_min(&self) -> f64 {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pareto(alpha: f64) -> ParetoMarginal {
        ParetoMarginal::new(alpha).unwrap()
    }

    #[test]
    fn rejects_bad_alpha() {
        assert!(ParetoMarginal::new(0.0).is_err());
        assert!(ParetoMarginal::new(-2.0).is_err());
        assert!(ParetoMarginal::new(f64::NAN).is_err());
    }

    #[test]
    fn cdf_examples() {
        let m = pareto(2.0);
        assert_eq!(m.cdf(1.0), 0.0);
        assert_eq!(m.cdf(-3.0), 0.0);
        assert_eq!(m.cdf(2.0), 0.75);
        assert!(1.0 - m.cdf(1e12) < 1e-20);
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(pareto(2.0).quantile(0.0).unwrap(), 1.0);
        assert!((pareto(2.0).quantile(0.75).unwrap() - 2.0).abs() < 1e-15);
        assert!((pareto(1.0).quantile(0.9).unwrap() - 10.0).abs() < 1e-12);
        assert!(pareto(2.0).quantile(1.0).is_err());
        assert!(pareto(2.0).quantile(-0.1).is_err());
    }

    #[test]
    fn tail_probability_examples() {
        assert_eq!(pareto(2.0).tail_prob_at_threshold(4, 1.0), 1.0 / 16.0);
        assert!((pareto(2.0).tail_prob_at_threshold(9, 2.0) - 1.0 / 9.0).abs() < 1e-16);
        for alpha in [0.5, 1.0, 3.0] {
            for p in [1.0, 1.5] {
                assert_eq!(pareto(alpha).tail_prob_at_threshold(1, p), 1.0);
            }
        }
    }

    #[test]
    fn moment_examples() {
        let m = pareto(2.0);
        assert_eq!(m.abs_moment(1.0), Extended::Finite(2.0));
        assert_eq!(m.abs_moment(1.5), Extended::Finite(4.0));
        assert_eq!(m.abs_moment(2.0), Extended::Infinite);
        assert_eq!(pareto(1.0).mean(), None);
    }

    #[test]
    fn partial_tail_sums_respect_integral_bound() {
        // Σ_{k≤N} k^(-a) ≤ 1 + (1 − N^(1−a))/(a − 1) for a > 1.
        for (alpha, p) in [(2.0, 1.0), (3.0, 1.5), (1.5, 1.2)] {
            let m = pareto(alpha);
            let a = alpha / p;
            let n = 10_000u64;
            let sum: f64 = (1..=n).map(|k| m.tail_prob_at_threshold(k, p)).sum();
            let bound = 1.0 + (1.0 - (n as f64).powf(1.0 - a)) / (a - 1.0);
            assert!(sum <= bound + 1e-12);
        }
        // and grows without bound at a ≤ 1
        let m = pareto(1.0);
        let s1: f64 = (1..=1000u64).map(|k| m.tail_prob_at_threshold(k, 1.0)).sum();
        let s2: f64 = (1..=100_000u64).map(|k| m.tail_prob_at_threshold(k, 1.0)).sum();
        assert!(s2 - s1 > 4.0);
    }

    proptest! {
        #[test]
        fn quantile_inverts_cdf(alpha in 0.3f64..5.0, t in 0.0f64..1.0) {
            // keep the survival above 1e-5 so 1 − F(x) is representable
            let x = 1.0 + t * (1e5f64.powf(1.0 / alpha) - 1.0);
            let m = pareto(alpha);
            let back = m.quantile(m.cdf(x)).unwrap();
            prop_assert!((back - x).abs() <= 1e-10 * x);
        }

        #[test]
        fn cdf_of_quantile(alpha in 0.3f64..5.0, u in 0.0f64..0.999) {
            let m = pareto(alpha);
            prop_assert!((m.cdf(m.quantile(u).unwrap()) - u).abs() < 1e-12);
        }

        #[test]
        fn tail_nonincreasing(alpha in 0.3f64..5.0, p in 1.0f64..2.0, k in 1u64..100_000) {
            let m = pareto(alpha);
            prop_assert!(m.tail_prob_at_threshold(k + 1, p) <= m.tail_prob_at_threshold(k, p));
        }
    }
}
