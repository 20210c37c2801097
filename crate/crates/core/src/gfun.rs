//! The covariance functional
//!
//! ```text
//! G(u, v) = ∫_{-v}^{v} ∫_{-u}^{u} Δ(x, y) dx dy,   Δ(x, y) = C(F(x), F(y)) − F(x) F(y)
//! ```
//!
//! computed three ways: by direct double quadrature of Δ (marginal-agnostic),
//! by the product of one-dimensional integrals available for the GFM family,
//! and by the closed form in terms of Γ and ₂F₁ for the Pareto(2) marginal.

use crate::copulas::{validate_shape, Copula};
use crate::error::{Error, Result};
use crate::marginals::{Marginal, ParetoMarginal};
use crate::quad::{Estimate, Quadrature};
use crate::specfun::{gamma, gauss_2f1, HypergeometricArgs};

/// Tolerance used by [`g_factor`].
pub const G_FACTOR_TOL: f64 = 1e-11;

/// Pointwise dependence gap of a copula-coupled pair with common marginal.
#[derive(Debug, Clone)]
pub struct DeltaField<C, M> {
    pub copula: C,
    pub marginal: M,
}

impl<C: Copula, M: Marginal> DeltaField<C, M> {
    pub fn new(copula: C, marginal: M) -> Self {
        Self { copula, marginal }
    }

    /// Δ(x,y) = P{X ≤ x, Y ≤ y} − P{X ≤ x} P{Y ≤ y}.
    ///
    /// For copula-generated pairs this coincides with the survival form
    /// P{X > x, Y > y} − P{X > x} P{Y > y}.
    pub fn delta(&self, x: f64, y: f64) -> f64 {
        self.copula.dependence_gap(self.marginal.cdf(x), self.marginal.cdf(y))
    }

    /// G(u,v) by adaptive double quadrature of Δ over [−u,u] × [−v,v],
    /// clipped below at the support minimum.
    pub fn g_numeric(&self, u: f64, v: f64, quad: &Quadrature) -> Result<Estimate> {
        if !(u > 0.0 && v > 0.0) {
            return Err(Error::domain(format!("G requires u, v > 0, got ({u}, {v})")));
        }
        let lo = self.marginal.support_min();
        let (x0, y0) = ((-u).max(lo), (-v).max(lo));
        if x0 >= u || y0 >= v {
            return Ok(Estimate { value: 0.0, error: 0.0 });
        }
        quad.integrate_2d(|x, y| self.delta(x, y), (x0, u), (y0, v))
    }
}

/// g(u) = ∫₁ᵘ F(x)^s (1 − F(x))^r dx for the Pareto(alpha) marginal, so that
/// G(u,v) = θ g(u) g(v) for the GFM copula.
pub fn g_factor(r: f64, s: f64, marginal: &ParetoMarginal, u: f64) -> Result<f64> {
    validate_shape(r, s)?;
    if u <= 1.0 {
        return Ok(0.0);
    }
    let alpha = marginal.alpha();
    let quad = Quadrature::with_tolerance(G_FACTOR_TOL);
    let est = quad.integrate(
        |x| {
            let tail = x.powf(-alpha);
            (1.0 - tail).powf(s) * tail.powf(r)
        },
        1.0,
        u,
    )?;
    Ok(est.value)
}

/// lim_{u→∞} bracket(u) = s Γ(s) Γ(r + 1/2) / ((2r − 1) Γ(r + s + 1/2)).
pub fn bracket_limit(r: f64, s: f64) -> Result<f64> {
    validate_shape(r, s)?;
    Ok(s * gamma(s)? * gamma(r + 0.5)? / ((2.0 * r - 1.0) * gamma(r + s + 0.5)?))
}

/// Closed-form g(u) for the Pareto(2) marginal:
/// bracket_limit(r, s) − ₂F₁(−s, r − 1/2; r + 1/2; 1/u²) / ((2r − 1) u^(2r−1)).
///
/// Returns 0 for u ≤ 1, where the integration range is empty.
pub fn bracket(r: f64, s: f64, u: f64) -> Result<f64> {
    validate_shape(r, s)?;
    if u <= 1.0 {
        return Ok(0.0);
    }
    Ok(bracket_limit(r, s)? - bracket_correction(r, s, u)?)
}

/// ₂F₁(−s, r − 1/2; r + 1/2; 1/u²) / ((2r − 1) u^(2r−1)), the gap between
/// [`bracket_limit`] and [`bracket`] for u > 1.
pub fn bracket_correction(r: f64, s: f64, u: f64) -> Result<f64> {
    validate_shape(r, s)?;
    if u <= 1.0 {
        return Err(Error::domain(format!("bracket correction requires u > 1, got {u}")));
    }
    let z = 1.0 / (u * u);
    let h = gauss_2f1(&HypergeometricArgs::new(-s, r - 0.5, r + 0.5, z)?)?;
    Ok(h / ((2.0 * r - 1.0) * u.powf(2.0 * r - 1.0)))
}

/// G(u,v) = θ · bracket(u) · bracket(v) for the GFM copula with Pareto(2) marginals.
pub fn g_closed_form(theta: f64, r: f64, s: f64, u: f64, v: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::parameter(format!(
            "G closed form requires 0 <= theta <= 1, got {theta}"
        )));
    }
    if theta == 0.0 {
        validate_shape(r, s)?;
        return Ok(0.0);
    }
    Ok(theta * bracket(r, s, u)? * bracket(r, s, v)?)
}

/// Constant C with G(u,v) ≤ C θ for all u, v: the square of [`bracket_limit`].
pub fn g_bound_constant(r: f64, s: f64) -> Result<f64> {
    Ok(bracket_limit(r, s)?.powi(2))
}
