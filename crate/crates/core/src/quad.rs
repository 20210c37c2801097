//! Globally adaptive Gauss–Kronrod quadrature in one and two dimensions.
//!
//! Each panel is integrated with the 7/15-point Gauss–Kronrod pair; the panel
//! with the largest error estimate is bisected until the summed estimate meets
//! the tolerance or the panel budget runs out. Double integrals are computed as
//! iterated integrals with a tightened inner tolerance.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::sum::compensated_sum;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerance and budget for an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            max_panels: 1 << 16,
        }
    }
}

/// Integral value with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

impl Quadrature {
    pub fn with_tolerance(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }

    /// Integrates `f` over `[a, b]`. Reversed limits flip the sign; equal
    /// limits give zero without evaluating `f`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> Result<Estimate> {
        if a == b {
            return Ok(Estimate { value: 0.0, error: 0.0 });
        }
        if a > b {
            let est = self.integrate(f, b, a)?;
            return Ok(Estimate {
                value: -est.value,
                error: est.error,
            });
        }
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::domain(format!(
                "quadrature limits must be finite, got [{a}, {b}]"
            )));
        }

        let first = gauss_kronrod(&mut f, a, b);
        let mut heap = BinaryHeap::new();
        let mut total_error = first.error;
        heap.push(first);

        while total_error > self.abs_tol {
            if heap.len() >= self.max_panels {
                return Err(Error::Numeric {
                    message: format!("adaptive quadrature on [{a}, {b}] exhausted {} panels", self.max_panels),
                    estimate: compensated_sum(heap.iter().map(|p| p.value)),
                    error_bound: total_error,
                });
            }
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // Panel below floating-point resolution; keep it and give up.
                heap.push(worst);
                return Err(Error::Numeric {
                    message: format!("adaptive quadrature on [{a}, {b}] reached panel width limit"),
                    estimate: compensated_sum(heap.iter().map(|p| p.value)),
                    error_bound: total_error,
                });
            }
            let left = gauss_kronrod(&mut f, worst.a, mid);
            let right = gauss_kronrod(&mut f, mid, worst.b);
            total_error += left.error + right.error - worst.error;
            heap.push(left);
            heap.push(right);
            if total_error <= self.abs_tol {
                // Re-sum exactly: the running total drifts under repeated updates.
                total_error = compensated_sum(heap.iter().map(|p| p.error));
            }
        }

        let mut panels = heap.into_vec();
        panels.sort_by(|p, q| p.a.total_cmp(&q.a));
        Ok(Estimate {
            value: compensated_sum(panels.iter().map(|p| p.value)),
            error: compensated_sum(panels.iter().map(|p| p.error)),
        })
    }

    /// Iterated integral of `f(x, y)` over `[ax, bx] × [ay, by]`.
    ///
    /// The inner integral over `x` runs at a tolerance scaled down by the
    /// outer interval length so the accumulated inner error stays inside
    /// `abs_tol`.
    pub fn integrate_2d<F: Fn(f64, f64) -> f64>(
        &self,
        f: F,
        (ax, bx): (f64, f64),
        (ay, by): (f64, f64),
    ) -> Result<Estimate> {
        let inner = Quadrature {
            abs_tol: 0.1 * self.abs_tol / (by - ay).abs().max(1.0),
            max_panels: self.max_panels,
        };
        let inner_error = RefCell::new(0.0f64);
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let outer = self.integrate(
            |y| match inner.integrate(|x| f(x, y), ax, bx) {
                Ok(est) => {
                    let mut e = inner_error.borrow_mut();
                    *e = e.max(est.error);
                    est.value
                }
                Err(err) => {
                    let mut slot = failure.borrow_mut();
                    let fallback = match &err {
                        Error::Numeric { estimate, .. } => *estimate,
                        _ => 0.0,
                    };
                    if slot.is_none() {
                        *slot = Some(err);
                    }
                    fallback
                }
            },
            ay,
            by,
        );
        if let Some(err) = failure.into_inner() {
            return Err(match (err, outer) {
                (Error::Numeric { message, .. }, Ok(est)) => Error::Numeric {
                    message: format!("inner integral: {message}"),
                    estimate: est.value,
                    error_bound: est.error + inner_error.into_inner() * (by - ay).abs(),
                },
                (err, _) => err,
            });
        }
        let est = outer?;
        Ok(Estimate {
            value: est.value,
            error: est.error + inner_error.into_inner() * (by - ay).abs(),
        })
    }
}
