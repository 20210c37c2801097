//! Real special functions: gamma, Pochhammer symbol and the Gauss
//! hypergeometric series.

use std::f64::consts::{E, PI};

use crate::error::{Error, Result};

// Lanczos approximation, Pugh's coefficients (r = 10.900511, n = 11).
const LANCZOS_R: f64 = 10.900511;

const LANCZOS_DK: [f64; 11] = [
    2.485_740_891_387_535_655_46e-5,
    1.051_423_785_817_219_742_10,
    -3.456_870_972_220_162_354_69,
    4.512_277_094_668_948_237_00,
    -2.982_852_253_235_766_557_21,
    1.056_397_115_771_267_130_77,
    -1.954_287_731_916_458_695_83e-1,
    1.709_705_434_044_412_243_07e-2,
    -5.719_261_174_043_057_812_83e-4,
    4.633_994_733_599_056_367_08e-6,
    -2.719_949_084_886_077_039_10e-9,
];

const TWO_SQRT_E_OVER_PI: f64 = 1.860_382_734_205_265_717_336_249_247_266_663_112_059_421_8;

/// Relative truncation tolerance of the hypergeometric series.
pub const SERIES_REL_TOL: f64 = 1e-15;

const SERIES_MAX_TERMS: usize = 1_000_000;

fn lanczos_sum(x: f64) -> f64 {
    LANCZOS_DK
        .iter()
        .enumerate()
        .skip(1)
        .fold(LANCZOS_DK[0], |s, (i, &dk)| s + dk / (x + i as f64 - 1.0))
}

/// Γ(x) for x > 0.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("gamma requires x > 0, got {x}")));
    }
    if x < 0.5 {
        // Reflection keeps the approximation on its accurate half-line.
        let reflected = 1.0 - x;
        let g = lanczos_sum(reflected) * TWO_SQRT_E_OVER_PI * ((reflected - 0.5 + LANCZOS_R) / E).powf(reflected - 0.5);
        return Ok(PI / ((PI * x).sin() * g));
    }
    Ok(lanczos_sum(x) * TWO_SQRT_E_OVER_PI * ((x - 0.5 + LANCZOS_R) / E).powf(x - 0.5))
}

/// Rising factorial (a)_n = a(a+1)…(a+n−1), with (a)_0 = 1.
pub fn pochhammer(a: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, i| acc * (a + i as f64))
}

fn nonpositive_integer(x: f64) -> Option<u64> {
    (x <= 0.0 && x.fract() == 0.0 && x.is_finite()).then(|| (-x) as u64)
}

/// Validated arguments of ₂F₁(a, b; c; z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypergeometricArgs {
    a: f64,
    b: f64,
    c: f64,
    z: f64,
}

impl HypergeometricArgs {
    pub fn new(a: f64, b: f64, c: f64, z: f64) -> Result<Self> {
        if [a, b, c, z].iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("hypergeometric arguments must be finite"));
        }
        if nonpositive_integer(c).is_some() {
            return Err(Error::domain(format!(
                "hypergeometric c must not be zero or a negative integer, got {c}"
            )));
        }
        let args = Self { a, b, c, z };
        if args.terminating_degree().is_none() && z.abs() >= 1.0 {
            return Err(Error::domain(format!(
                "non-terminating hypergeometric series needs |z| < 1, got z = {z}"
            )));
        }
        Ok(args)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    /// Polynomial degree when a or b is a nonpositive integer.
    pub fn terminating_degree(&self) -> Option<u64> {
        match (nonpositive_integer(self.a), nonpositive_integer(self.b)) {
            (Some(m), Some(n)) => Some(m.min(n)),
            (m, n) => m.or(n),
        }
    }
}

/// ₂F₁(a, b; c; z) by direct summation of its power series.
///
/// Terminating series are summed exactly to their last nonzero term.
/// Otherwise summation stops once a term falls below
/// [`SERIES_REL_TOL`] times the running sum.
pub fn gauss_2f1(args: &HypergeometricArgs) -> Result<f64> {
    let HypergeometricArgs { a, b, c, z } = *args;
    if z == 0.0 {
        return Ok(1.0);
    }
    let degree = args.terminating_degree();
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..SERIES_MAX_TERMS {
        if degree == Some(n as u64) {
            return Ok(sum);
        }
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        sum += term;
        if degree.is_none() && term.abs() < SERIES_REL_TOL * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::Numeric {
        message: format!("hypergeometric series did not converge in {SERIES_MAX_TERMS} terms"),
        estimate: sum,
        error_bound: term.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gamma_examples() {
        assert!(rel(gamma(1.0).unwrap(), 1.0) < 1e-14);
        assert!(rel(gamma(5.0).unwrap(), 24.0) < 1e-14);
        assert!(rel(gamma(0.5).unwrap(), 1.772_453_850_905_516) < 1e-14);
    }

    #[test]
    fn gamma_factorials_and_half_integers() {
        // Γ(n+1) = n!, Γ(n+1/2) = (2n)! √π / (4ⁿ n!)
        let mut fact = 1.0f64;
        for n in 1..=40u32 {
            fact *= n as f64;
            assert!(rel(gamma(n as f64 + 1.0).unwrap(), fact) < 1e-12, "n={n}");
        }
        let mut half = PI.sqrt();
        for n in 1..=45u32 {
            half *= n as f64 - 0.5;
            assert!(rel(gamma(n as f64 + 0.5).unwrap(), half) < 1e-12, "n={n}");
        }
    }

    #[test]
    fn gamma_rejects_nonpositive() {
        assert!(matches!(gamma(0.0), Err(Error::Domain(_))));
        assert!(matches!(gamma(-1.5), Err(Error::Domain(_))));
        assert!(matches!(gamma(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn gamma_small_argument_reflection() {
        // Γ(1/4) = 3.6256099082219083119...
        assert!(rel(gamma(0.25).unwrap(), 3.625_609_908_221_908_3) < 1e-13);
    }

    #[test]
    fn pochhammer_examples() {
        assert_eq!(pochhammer(7.3, 0), 1.0);
        assert_eq!(pochhammer(3.0, 2), 12.0);
        assert_eq!(pochhammer(-1.0, 2), 0.0);
    }

    #[test]
    fn hypergeometric_examples() {
        let at0 = HypergeometricArgs::new(2.5, -0.7, 1.25, 0.0).unwrap();
        assert_eq!(gauss_2f1(&at0).unwrap(), 1.0);
        for z in [0.1, 0.25, 0.9, 3.0] {
            let args = HypergeometricArgs::new(-1.0, 0.5, 1.5, z).unwrap();
            assert!((gauss_2f1(&args).unwrap() - (1.0 - z / 3.0)).abs() < 1e-15);
        }
        // -ln(1-z)/z at z = 1/2
        let log_oracle = -(1.0f64 - 0.5).ln() / 0.5;
        assert!((log_oracle - 1.386_294_361_119_890_6).abs() < 1e-15);
        let args = HypergeometricArgs::new(1.0, 1.0, 2.0, 0.5).unwrap();
        assert!(rel(gauss_2f1(&args).unwrap(), log_oracle) < 1e-14);
    }

    #[test]
    fn hypergeometric_domain_errors() {
        assert!(matches!(
            HypergeometricArgs::new(1.0, 1.0, 0.0, 0.5),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            HypergeometricArgs::new(1.0, 1.0, -3.0, 0.5),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            HypergeometricArgs::new(0.5, 1.0, 2.0, 1.0),
            Err(Error::Domain(_))
        ));
        // terminating series are fine anywhere
        assert!(HypergeometricArgs::new(-2.0, 1.0, 2.0, -5.0).is_ok());
    }

    #[test]
    fn terminating_series_is_interpolating_polynomial() {
        // Degree-m polynomial: Lagrange interpolation on m+2 nodes reproduces it.
        for m in 0..6u32 {
            let f = |z: f64| gauss_2f1(&HypergeometricArgs::new(-(m as f64), 0.7, 1.9, z).unwrap()).unwrap();
            let nodes: Vec<f64> = (0..m + 2).map(|i| -1.0 + i as f64 * 0.4).collect();
            let values: Vec<f64> = nodes.iter().map(|&z| f(z)).collect();
            for &z in &[-0.93, -0.31, 0.05, 0.47, 0.88] {
                let interp: f64 = (0..nodes.len())
                    .map(|i| {
                        let basis: f64 = (0..nodes.len())
                            .filter(|&j| j != i)
                            .map(|j| (z - nodes[j]) / (nodes[i] - nodes[j]))
                            .product();
                        values[i] * basis
                    })
                    .sum();
                assert!((interp - f(z)).abs() < 1e-12, "m={m} z={z}");
            }
        }
    }

    proptest! {
        #[test]
        fn gamma_recurrence(x in 0.5f64..49.0) {
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            prop_assert!(rel(lhs, rhs) < 1e-12);
        }

        #[test]
        fn pochhammer_gamma_ratio(a in 0.1f64..10.0, n in 0u32..=20) {
            let ratio = gamma(a + n as f64).unwrap() / gamma(a).unwrap();
            prop_assert!(rel(pochhammer(a, n), ratio) < 1e-10);
        }

        #[test]
        fn hypergeometric_symmetric(a in -3.0f64..3.0, b in -3.0f64..3.0,
                                    c in 0.3f64..4.0, z in -0.9f64..0.9) {
            let ab = gauss_2f1(&HypergeometricArgs::new(a, b, c, z).unwrap()).unwrap();
            let ba = gauss_2f1(&HypergeometricArgs::new(b, a, c, z).unwrap()).unwrap();
            prop_assert!((ab - ba).abs() <= 1e-12 * ab.abs().max(1.0));
        }
    }
}
