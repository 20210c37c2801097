//! Bivariate dependence structures built by perturbing the independence
//! copula, their positive-quadrant-dependence checks, and pair sampling.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::marginals::Marginal;

/// Slack allowed below zero when checking C(u,v) − uv ≥ 0 on a grid.
pub const PQD_GRID_SLACK: f64 = 1e-12;

/// Width of the final bracket when inverting a conditional CDF.
pub const CONDITIONAL_INVERSION_TOL: f64 = 1e-12;

/// A bivariate copula evaluated on the unit square.
pub trait Copula: Sync {
    fn cdf(&self, u: f64, v: f64) -> f64;

    /// C(u,v) − uv.
    fn dependence_gap(&self, u: f64, v: f64) -> f64 {
        self.cdf(u, v) - u * v
    }
}

/// The product copula C(u,v) = uv.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Independence;

impl Copula for Independence {
    fn cdf(&self, u: f64, v: f64) -> f64 {
        u * v
    }

    fn dependence_gap(&self, _u: f64, _v: f64) -> f64 {
        0.0
    }
}

/// Generalized Farlie–Gumbel–Morgenstern copula
/// C(u,v) = uv + θ u^s v^s (1−u)^r (1−v)^r with 0 ≤ θ ≤ 1 and r, s ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GfmCopula {
    theta: f64,
    r: f64,
    s: f64,
}

impl GfmCopula {
    pub fn new(theta: f64, r: f64, s: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::parameter(format!(
                "gfm copula requires 0 <= theta <= 1, got theta = {theta}"
            )));
        }
        validate_shape(r, s)?;
        Ok(Self { theta, r, s })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// w^s (1−w)^r, the one-dimensional factor of the perturbation.
    pub fn profile(&self, w: f64) -> f64 {
        gfm_profile(self.r, self.s, w)
    }

    /// ∂C/∂u (u, v): the conditional CDF of V given U = u.
    pub fn conditional(&self, u: f64, v: f64) -> f64 {
        let (r, s) = (self.r, self.s);
        let dprofile = s * u.powf(s - 1.0) * (1.0 - u).powf(r) - r * u.powf(s) * (1.0 - u).powf(r - 1.0);
        v + self.theta * v.powf(s) * (1.0 - v).powf(r) * dprofile
    }

    /// Solves conditional(u, v) = w for v by bisection.
    pub fn invert_conditional(&self, u: f64, w: f64) -> Result<f64> {
        if self.theta == 0.0 {
            return Ok(w);
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let (mut h_lo, mut h_hi) = (self.conditional(u, lo), self.conditional(u, hi));
        if !(h_lo <= w && w <= h_hi) {
            return Err(inadmissible(self, u));
        }
        while hi - lo > CONDITIONAL_INVERSION_TOL {
            let mid = 0.5 * (lo + hi);
            let h_mid = self.conditional(u, mid);
            if h_mid < h_lo || h_mid > h_hi {
                return Err(inadmissible(self, u));
            }
            if h_mid < w {
                lo = mid;
                h_lo = h_mid;
            } else {
                hi = mid;
                h_hi = h_mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Draws (U, V) from the copula by conditional inversion.
    pub fn sample_uniform_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(f64, f64)> {
        let u: f64 = rng.random();
        let w: f64 = rng.random();
        Ok((u, self.invert_conditional(u, w)?))
    }

    /// Draws (X, Y) with joint CDF C(F(x), F(y)).
    pub fn sample_pair<M, R>(&self, marginal: &M, rng: &mut R) -> Result<(f64, f64)>
    where
        M: Marginal + ?Sized,
        R: Rng + ?Sized,
    {
        let (u, v) = self.sample_uniform_pair(rng)?;
        // bisection may land exactly on 1 when w is within 1e-12 of it
        let v = v.min(1.0 - f64::EPSILON / 2.0);
        Ok((marginal.quantile(u)?, marginal.quantile(v)?))
    }
}

fn inadmissible(c: &GfmCopula, u: f64) -> Error {
    Error::parameter(format!(
        "conditional cdf of gfm(theta={}, r={}, s={}) is not monotone at u={u}",
        c.theta, c.r, c.s
    ))
}

pub(crate) fn validate_shape(r: f64, s: f64) -> Result<()> {
    if !(r >= 1.0 && r.is_finite()) {
        return Err(Error::parameter(format!("gfm shape requires r >= 1, got r = {r}")));
    }
    if !(s >= 1.0 && s.is_finite()) {
        return Err(Error::parameter(format!("gfm shape requires s >= 1, got s = {s}")));
    }
    Ok(())
}

pub(crate) fn gfm_profile(r: f64, s: f64, w: f64) -> f64 {
    w.powf(s) * (1.0 - w).powf(r)
}

impl Copula for GfmCopula {
    fn cdf(&self, u: f64, v: f64) -> f64 {
        u * v + self.dependence_gap(u, v)
    }

    fn dependence_gap(&self, u: f64, v: f64) -> f64 {
        self.theta * self.profile(u) * self.profile(v)
    }
}

/// A perturbation function on [0,1], vanishing at both ends, together with
/// the infimum and supremum of its derivative (supplied analytically).
#[derive(Clone)]
pub struct PerturbationFn {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    deriv_inf: f64,
    deriv_sup: f64,
}

impl fmt::Debug for PerturbationFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PerturbationFn")
            .field("deriv_inf", &self.deriv_inf)
            .field("deriv_sup", &self.deriv_sup)
            .finish_non_exhaustive()
    }
}

impl PerturbationFn {
    pub fn new<F>(f: F, deriv_inf: f64, deriv_sup: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if f(0.0).abs() > 1e-12 || f(1.0).abs() > 1e-12 {
            return Err(Error::parameter("perturbation function must vanish at 0 and 1"));
        }
        if (0..=1000).any(|i| f(i as f64 / 1000.0) < -1e-12) {
            return Err(Error::parameter("perturbation function must be nonnegative on [0, 1]"));
        }
        Ok(Self {
            f: Arc::new(f),
            deriv_inf,
            deriv_sup,
        })
    }

    /// c·t(1−t), whose derivative ranges over [−c, c].
    pub fn scaled_quadratic(c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::parameter(format!("quadratic scale must be positive, got {c}")));
        }
        Self::new(move |t| c * t * (1.0 - t), -c, c)
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn deriv_inf(&self) -> f64 {
        self.deriv_inf
    }

    pub fn deriv_sup(&self) -> f64 {
        self.deriv_sup
    }
}

/// Largest θ for which uv + θ φ(u) ψ(v) remains a copula:
/// −1 / min{inf φ′ · sup ψ′, sup φ′ · inf ψ′}.
pub fn theta_admissible_bound(phi: &PerturbationFn, psi: &PerturbationFn) -> Result<f64> {
    let (alpha, beta) = (phi.deriv_inf, phi.deriv_sup);
    let (gamma, delta) = (psi.deriv_inf, psi.deriv_sup);
    if !(alpha < 0.0 && beta > 0.0) {
        return Err(Error::domain(format!(
            "phi derivative range must straddle zero, got [{alpha}, {beta}]"
        )));
    }
    if !(gamma < 0.0 && delta > 0.0) {
        return Err(Error::domain(format!(
            "psi derivative range must straddle zero, got [{gamma}, {delta}]"
        )));
    }
    Ok(-1.0 / (alpha * delta).min(beta * gamma))
}

/// C(u,v) = uv + θ φ(u) ψ(v) with θ inside the admissibility bound.
#[derive(Debug, Clone)]
pub struct PerturbationCopula {
    theta: f64,
    phi: PerturbationFn,
    psi: PerturbationFn,
}

impl PerturbationCopula {
    pub fn new(theta: f64, phi: PerturbationFn, psi: PerturbationFn) -> Result<Self> {
        let bound = theta_admissible_bound(&phi, &psi)?;
        if !(0.0..=bound).contains(&theta) {
            return Err(Error::parameter(format!(
                "perturbation copula requires 0 <= theta <= {bound}, got {theta}"
            )));
        }
        Ok(Self { theta, phi, psi })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

impl Copula for PerturbationCopula {
    fn cdf(&self, u: f64, v: f64) -> f64 {
        u * v + self.dependence_gap(u, v)
    }

    fn dependence_gap(&self, u: f64, v: f64) -> f64 {
        self.theta * self.phi.eval(u) * self.psi.eval(v)
    }
}

/// Checks C(u,v) − uv ≥ −[`PQD_GRID_SLACK`] on the grid (i/m, j/m).
pub fn pqd_grid_check<F: Fn(f64, f64) -> f64>(cdf: F, m: usize) -> bool {
    assert!(m >= 2, "grid size must be at least 2");
    (0..=m).all(|i| {
        let u = i as f64 / m as f64;
        (0..=m).all(|j| {
            let v = j as f64 / m as f64;
            cdf(u, v) - u * v >= -PQD_GRID_SLACK
        })
    })
}

/// Pair strengths θ_{k,j} = k^mu · j^nu (k < j) inside the window
/// 1/p − 1 < mu < 2/p − 2 − nu.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaSchedule {
    mu: f64,
    nu: f64,
    p: f64,
}

impl ThetaSchedule {
    pub fn new(mu: f64, nu: f64, p: f64) -> Result<Self> {
        if !(1.0..2.0).contains(&p) {
            return Err(Error::parameter(format!("p must lie in [1, 2), got p = {p}")));
        }
        if !(mu.is_finite() && nu.is_finite()) {
            return Err(Error::parameter("schedule exponents must be finite"));
        }
        let lower = 1.0 / p - 1.0;
        if !(lower < mu) {
            return Err(Error::parameter(format!(
                "schedule window violated: 1/p - 1 < mu fails ({lower} < {mu} is false)"
            )));
        }
        let upper = 2.0 / p - 2.0 - nu;
        if !(mu < upper) {
            return Err(Error::parameter(format!(
                "schedule window violated: mu < 2/p - 2 - nu fails ({mu} < {upper} is false)"
            )));
        }
        // θ ≤ 1 for k < j: needs mu + nu ≤ 0 when mu ≥ 0, nu ≤ 0 otherwise.
        if (mu >= 0.0 && mu + nu > 0.0) || (mu < 0.0 && nu > 0.0) {
            return Err(Error::parameter(format!(
                "schedule k^mu j^nu exceeds 1 for some k < j (mu = {mu}, nu = {nu})"
            )));
        }
        Ok(Self { mu, nu, p })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// θ_{k,j} = k^mu j^nu for 1 ≤ k < j.
    pub fn theta(&self, k: u64, j: u64) -> f64 {
        debug_assert!(1 <= k && k < j, "schedule is defined for 1 <= k < j");
        (k as f64).powf(self.mu) * (j as f64).powf(self.nu)
    }
}

/// Pair-indexed dependence strengths with a product structure
/// θ_{k,j} = row(k) · col(j) for k < j.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    Constant { theta: f64 },
    Power(ThetaSchedule),
}

impl Schedule {
    pub fn constant(theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::parameter(format!(
                "constant schedule requires 0 <= theta <= 1, got {theta}"
            )));
        }
        Ok(Schedule::Constant { theta })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Schedule::Constant { theta } if *theta == 0.0)
    }

    /// θ for the unordered pair {k, j}, k ≠ j.
    pub fn theta(&self, k: u64, j: u64) -> f64 {
        let (lo, hi) = if k < j { (k, j) } else { (j, k) };
        match self {
            Schedule::Constant { theta } => *theta,
            Schedule::Power(s) => s.theta(lo, hi),
        }
    }

    /// Factor of θ_{k,j} depending on the smaller index.
    pub fn row_factor(&self, k: u64) -> f64 {
        match self {
            Schedule::Constant { theta } => *theta,
            Schedule::Power(s) => (k as f64).powf(s.mu),
        }
    }

    /// Factor of θ_{k,j} depending on the larger index.
    pub fn col_factor(&self, j: u64) -> f64 {
        match self {
            Schedule::Constant { .. } => 1.0,
            Schedule::Power(s) => (j as f64).powf(s.nu),
        }
    }
}
