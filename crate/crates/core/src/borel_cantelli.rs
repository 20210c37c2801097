//! Exact event probabilities for threshold crossings X_k > k^(1/p) (or
//! X_k ≤ −k^(1/p)) under a GFM pair structure, and the second-moment
//! quantities used to show such crossings happen infinitely often.
//!
//! Everything here is analytic: probabilities come from the copula and the
//! marginal, never from sampling.

use serde::Serialize;

use crate::copulas::{gfm_profile, validate_shape, Schedule};
use crate::error::{Error, Result};
use crate::marginals::{Marginal, ParetoMarginal};
use crate::par::map_range;
use crate::quad::Quadrature;
use crate::sum::{compensated_sum, CompensatedSum};

/// Absolute tolerance of the bracket double integral.
pub const BRACKET_QUAD_TOL: f64 = 1e-11;
/// Slack in the bracket comparison lhs ≥ rhs.
pub const BRACKET_SLACK: f64 = 1e-9;

/// Which tail the events watch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// A_k = {X_k > k^(1/p)}.
    Upper,
    /// B_k = {X_k ≤ −k^(1/p)}.
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Dependence {
    Independent,
    /// Pair (X_k, X_j) coupled by GFM(θ_{k,j}, r, s).
    Gfm {
        r: f64,
        s: f64,
        schedule: Schedule,
    },
}

impl Dependence {
    pub fn gfm(r: f64, s: f64, schedule: Schedule) -> Result<Self> {
        validate_shape(r, s)?;
        Ok(Dependence::Gfm { r, s, schedule })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventSystem {
    p: f64,
    marginal: ParetoMarginal,
    dependence: Dependence,
    side: Side,
}

/// Both sides of the bracket inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BracketCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// The ceiling-scaled ratio Σ P{εX > k^(1/p)} / Σ P{X > k^(1/p)} and its bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledTailRatio {
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
}

/// One point of the Rényi–Lamperti curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioPoint {
    pub n: u64,
    pub ratio: f64,
    /// Minimum of the ratio over the grid points up to `n`.
    pub running_min: f64,
}

impl EventSystem {
    pub fn new(p: f64, marginal: ParetoMarginal, dependence: Dependence, side: Side) -> Result<Self> {
        if !(1.0..2.0).contains(&p) {
            return Err(Error::parameter(format!("p must lie in [1, 2), got p = {p}")));
        }
        if let Dependence::Gfm { r, s, .. } = dependence {
            validate_shape(r, s)?;
        }
        Ok(Self {
            p,
            marginal,
            dependence,
            side,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn side(&self) -> Side {
        self.side
    }

    fn threshold(&self, k: u64) -> f64 {
        (k as f64).powf(1.0 / self.p)
    }

    /// Marginal probability of the event at level x > 0.
    fn marginal_prob(&self, x: f64) -> f64 {
        match self.side {
            Side::Upper => self.marginal.survival(x),
            Side::Lower => self.marginal.cdf(-x),
        }
    }

    /// profile(F(t)) at t = ±x; Δ(x, y) = θ h(x) h(y) for the GFM copula.
    fn dependence_factor(&self, x: f64) -> f64 {
        match self.dependence {
            Dependence::Independent => 0.0,
            Dependence::Gfm { r, s, .. } => {
                let t = match self.side {
                    Side::Upper => x,
                    Side::Lower => -x,
                };
                gfm_profile(r, s, self.marginal.cdf(t))
            }
        }
    }

    fn theta(&self, k: u64, j: u64) -> f64 {
        match self.dependence {
            Dependence::Independent => 0.0,
            Dependence::Gfm { schedule, .. } => schedule.theta(k, j),
        }
    }

    /// P(A_k) (or P(B_k) on the lower side).
    pub fn event_prob(&self, k: u64) -> Result<f64> {
        check_index(k)?;
        Ok(self.marginal_prob(self.threshold(k)))
    }

    /// P(A_k ∩ A_j) = P(A_k) P(A_j) + Δ(k^(1/p), j^(1/p)); P(A_k) on the diagonal.
    pub fn pair_event_prob(&self, k: u64, j: u64) -> Result<f64> {
        check_index(k)?;
        check_index(j)?;
        if k == j {
            return self.event_prob(k);
        }
        let (a, b) = (self.threshold(k), self.threshold(j));
        let product = self.marginal_prob(a) * self.marginal_prob(b);
        Ok(product + self.theta(k, j) * self.dependence_factor(a) * self.dependence_factor(b))
    }

    /// Σ_{k,j≤n} P(A_k ∩ A_j) / (Σ_{k≤n} P(A_k))².
    pub fn renyi_lamperti_ratio(&self, n: u64) -> Result<f64> {
        Ok(self.renyi_lamperti_curve(&[n])?[0].ratio)
    }

    /// The ratio at each `n` of an increasing grid, with its running minimum.
    ///
    /// With θ_{k,j} = row(k) col(j) the off-diagonal dependence sum is
    /// Σ_j col(j) h_j Σ_{k<j} row(k) h_k, so one pass over k ≤ max(grid)
    /// yields every grid point.
    pub fn renyi_lamperti_curve(&self, grid: &[u64]) -> Result<Vec<RatioPoint>> {
        if grid.is_empty() {
            return Ok(Vec::new());
        }
        check_index(grid[0])?;
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::parameter("n-grid must be strictly increasing"));
        }
        let n_max = *grid.last().expect("nonempty");
        let schedule = match self.dependence {
            Dependence::Gfm { schedule, .. } if !schedule.is_zero() => Some(schedule),
            _ => None,
        };
        // (P_k, row(k) h_k, col(k) h_k)
        let terms = map_range(1, n_max as usize + 1, |k| {
            let k = k as u64;
            let x = self.threshold(k);
            let prob = self.marginal_prob(x);
            match schedule {
                Some(sched) => {
                    let h = self.dependence_factor(x);
                    (prob, sched.row_factor(k) * h, sched.col_factor(k) * h)
                }
                None => (prob, 0.0, 0.0),
            }
        });

        let mut sum_p = CompensatedSum::new();
        let mut sum_p2 = CompensatedSum::new();
        let mut prefix_row = CompensatedSum::new();
        let mut cross = CompensatedSum::new();
        let mut out = Vec::with_capacity(grid.len());
        let mut next = grid.iter().copied().peekable();
        let mut running_min = f64::INFINITY;
        for (i, &(prob, row, col)) in terms.iter().enumerate() {
            let k = i as u64 + 1;
            sum_p.add(prob);
            sum_p2.add(prob * prob);
            if col != 0.0 {
                cross.add(col * prefix_row.value());
            }
            prefix_row.add(row);
            if next.peek() == Some(&k) {
                next.next();
                let s = sum_p.value();
                if s <= 0.0 {
                    return Err(Error::UndefinedRatio(format!(
                        "all event probabilities vanish up to n = {k}"
                    )));
                }
                // Σ_{k,j} = Σ P + (Σ P)² − Σ P² + 2 Σ_{k<j} Δ
                let excess = (s - sum_p2.value() + 2.0 * cross.value()) / (s * s);
                let ratio = 1.0 + excess;
                running_min = running_min.min(ratio);
                out.push(RatioPoint {
                    n: k,
                    ratio,
                    running_min,
                });
            }
        }
        Ok(out)
    }

    /// Checks ∫∫_R P{X_k > x, X_j > y} dx dy ≥ ((ε−1)/ε)² a b P(A_k ∩ A_j)
    /// on R = [a/ε, a] × [b/ε, b], a = k^(1/p), b = j^(1/p).
    ///
    /// On the lower side the rectangle is reflected and the joint CDF replaces
    /// the joint survival function.
    pub fn epsilon_bracket_check(&self, k: u64, j: u64, eps: f64) -> Result<BracketCheck> {
        check_index(k)?;
        check_index(j)?;
        if k == j {
            return Err(Error::parameter("bracket check needs k != j"));
        }
        if !(eps > 1.0 && eps.is_finite()) {
            return Err(Error::parameter(format!("eps must be > 1, got {eps}")));
        }
        let (a, b) = (self.threshold(k), self.threshold(j));
        let theta = self.theta(k, j);
        let joint = |x: f64, y: f64| {
            self.marginal_prob(x) * self.marginal_prob(y)
                + theta * self.dependence_factor(x) * self.dependence_factor(y)
        };
        let quad = Quadrature::with_tolerance(BRACKET_QUAD_TOL);
        let kink = match self.side {
            Side::Upper => self.marginal.support_min(),
            Side::Lower => -self.marginal.support_min(),
        };
        let mut lhs = CompensatedSum::new();
        for (x0, x1) in split_at(a / eps, a, kink) {
            for (y0, y1) in split_at(b / eps, b, kink) {
                lhs.add(quad.integrate_2d(joint, (x0, x1), (y0, y1))?.value);
            }
        }
        let lhs = lhs.value();
        let shrink = (eps - 1.0) / eps;
        let rhs = shrink * shrink * a * b * self.pair_event_prob(k, j)?;
        Ok(BracketCheck {
            lhs,
            rhs,
            holds: lhs >= rhs - BRACKET_SLACK,
        })
    }

    /// Σ_{k≤n} P{εX₁ > k^(1/p)} / Σ_{k≤n} P{X₁ > k^(1/p)} with the bounds
    /// 1 and ε^p + ε^p / Σ_{k≤n} P{X₁ > k^(1/p)}.
    pub fn scaled_tail_ratio(&self, eps: f64, n: u64) -> Result<ScaledTailRatio> {
        check_index(n)?;
        if !(eps > 1.0 && eps.is_finite()) {
            return Err(Error::parameter(format!("eps must be > 1, got {eps}")));
        }
        let pairs = map_range(1, n as usize + 1, |k| {
            let x = self.threshold(k as u64);
            // survival is capped at 1 below the support, giving min(1, ·)
            (self.marginal.survival(x / eps), self.marginal.survival(x))
        });
        let numerator = compensated_sum(pairs.iter().map(|q| q.0));
        let denominator = compensated_sum(pairs.iter().map(|q| q.1));
        let ratio = numerator / denominator;
        let scale = eps.powf(self.p);
        let upper = scale + scale / denominator;
        Ok(ScaledTailRatio {
            ratio,
            lower: 1.0,
            upper,
            holds: 1.0 <= ratio && ratio <= upper,
        })
    }
}

fn check_index(k: u64) -> Result<()> {
    if k == 0 {
        return Err(Error::parameter("event indices start at 1"));
    }
    Ok(())
}

/// [lo, hi] split at `at` when it lies strictly inside.
fn split_at(lo: f64, hi: f64, at: f64) -> Vec<(f64, f64)> {
    let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    if lo < at && at < hi {
        vec![(lo, at), (at, hi)]
    } else {
        vec![(lo, hi)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copulas::{GfmCopula, ThetaSchedule};
    use crate::gfun::DeltaField;
    use crate::quad::Quadrature;
    use proptest::prelude::*;

    fn pareto(alpha: f64) -> ParetoMarginal {
        ParetoMarginal::new(alpha).unwrap()
    }

    fn independent(alpha: f64, p: f64) -> EventSystem {
        EventSystem::new(p, pareto(alpha), Dependence::Independent, Side::Upper).unwrap()
    }

    fn gfm(theta: f64, r: f64, s: f64, alpha: f64, p: f64, side: Side) -> EventSystem {
        let dep = Dependence::gfm(r, s, Schedule::constant(theta).unwrap()).unwrap();
        EventSystem::new(p, pareto(alpha), dep, side).unwrap()
    }

    fn harmonic(n: u64, power: i32) -> f64 {
        compensated_sum((1..=n).map(|k| (k as f64).powi(-power)))
    }

    #[test]
    fn event_prob_examples() {
        assert!((independent(2.0, 1.0).event_prob(10).unwrap() - 0.01).abs() < 1e-17);
        assert!((independent(1.0, 1.0).event_prob(7).unwrap() - 1.0 / 7.0).abs() < 1e-17);
        let lower = gfm(1.0, 1.0, 1.0, 2.0, 1.3, Side::Lower);
        for k in 1..50 {
            assert_eq!(lower.event_prob(k).unwrap(), 0.0);
        }
        assert!(independent(2.0, 1.0).event_prob(0).is_err());
    }

    #[test]
    fn pair_prob_example() {
        let es = gfm(1.0, 1.0, 1.0, 2.0, 1.0, Side::Upper);
        let expected = 1.0 / 36.0 + (0.75 * 0.25) * (8.0 / 9.0 * 1.0 / 9.0);
        assert!((es.pair_event_prob(2, 3).unwrap() - expected).abs() < 1e-16);
        assert!((expected - 0.046_296).abs() < 1e-6);
        assert_eq!(es.pair_event_prob(3, 2).unwrap(), es.pair_event_prob(2, 3).unwrap());
        assert_eq!(es.pair_event_prob(4, 4).unwrap(), es.event_prob(4).unwrap());
    }

    #[test]
    fn pair_prob_linear_in_theta() {
        let base = independent(2.0, 1.0).pair_event_prob(2, 5).unwrap();
        let full = gfm(1.0, 2.0, 1.5, 2.0, 1.0, Side::Upper).pair_event_prob(2, 5).unwrap();
        let half = gfm(0.5, 2.0, 1.5, 2.0, 1.0, Side::Upper).pair_event_prob(2, 5).unwrap();
        assert!(((half - base) - 0.5 * (full - base)).abs() < 1e-17);
    }

    #[test]
    fn pair_prob_matches_copula_survival() {
        // survival form: 1 − F(a) − F(b) + C(F(a), F(b))
        let m = pareto(1.5);
        let c = GfmCopula::new(0.7, 2.0, 1.0).unwrap();
        let es = gfm(0.7, 2.0, 1.0, 1.5, 1.2, Side::Upper);
        for (k, j) in [(2u64, 3u64), (5, 17), (40, 41)] {
            let (a, b) = ((k as f64).powf(1.0 / 1.2), (j as f64).powf(1.0 / 1.2));
            let direct = 1.0 - m.cdf(a) - m.cdf(b) + crate::copulas::Copula::cdf(&c, m.cdf(a), m.cdf(b));
            assert!((es.pair_event_prob(k, j).unwrap() - direct).abs() < 1e-15);
            let field = DeltaField::new(c, m);
            let via_delta = m.survival(a) * m.survival(b) + field.delta(a, b);
            assert!((es.pair_event_prob(k, j).unwrap() - via_delta).abs() < 1e-16);
        }
    }

    /// O(n²) reference for the ratio.
    fn brute_ratio(es: &EventSystem, n: u64) -> f64 {
        let mut num = CompensatedSum::new();
        for k in 1..=n {
            for j in 1..=n {
                num.add(es.pair_event_prob(k, j).unwrap());
            }
        }
        let den = compensated_sum((1..=n).map(|k| es.event_prob(k).unwrap()));
        num.value() / (den * den)
    }

    #[test]
    fn ratio_matches_brute_force() {
        let sched = Schedule::Power(ThetaSchedule::new(0.2, -1.5, 1.0).unwrap());
        let systems = [
            independent(1.0, 1.0),
            gfm(0.6, 1.0, 1.0, 1.0, 1.0, Side::Upper),
            EventSystem::new(1.0, pareto(1.0), Dependence::gfm(1.5, 2.0, sched).unwrap(), Side::Upper).unwrap(),
            gfm(1.0, 3.0, 3.0, 2.0, 1.5, Side::Upper),
        ];
        for es in &systems {
            for n in [1u64, 2, 7, 60] {
                let fast = es.renyi_lamperti_ratio(n).unwrap();
                assert!((fast - brute_ratio(es, n)).abs() < 1e-13, "n={n}");
            }
        }
    }

    #[test]
    fn ratio_n1_is_reciprocal_probability() {
        assert_eq!(independent(2.0, 1.0).renyi_lamperti_ratio(1).unwrap(), 1.0);
    }

    #[test]
    fn divergent_independent_ratio_matches_harmonic_oracle() {
        let n = 10_000;
        let (h, h2) = (harmonic(n, 1), harmonic(n, 2));
        let ratio = independent(1.0, 1.0).renyi_lamperti_ratio(n).unwrap();
        assert!((ratio - (1.0 + (h - h2) / (h * h))).abs() < 1e-12);
        // 1 + (H_n − H_n⁽²⁾)/H_n² at n = 10⁴ to 30 digits: 1.0850000756939122481
        assert!((ratio - 1.085_000_075_693_912_2).abs() < 1e-12);
        assert!((ratio - 1.0).abs() < 0.2);
    }

    #[test]
    fn divergent_independent_ratio_at_one_million() {
        // ≈ 1 + 1/H_n: 0.0615 above 1 at n = 10⁶
        let ratio = independent(1.0, 1.0).renyi_lamperti_ratio(1_000_000).unwrap();
        let (h, h2) = (harmonic(1_000_000, 1), harmonic(1_000_000, 2));
        assert!((ratio - (1.0 + (h - h2) / (h * h))).abs() < 1e-12);
        assert!((ratio - 1.061_538_777_738_307_3).abs() < 1e-9);
    }

    #[test]
    fn convergent_independent_ratio_stays_away_from_one() {
        // limit 1 + (ζ(2) − ζ(4))/ζ(2)²
        let limit = 1.207_927_101_854_026_7;
        let curve = independent(2.0, 1.0)
            .renyi_lamperti_curve(&[1, 2, 10, 100, 10_000, 1_000_000])
            .unwrap();
        assert!(curve.windows(2).all(|w| w[1].ratio > w[0].ratio));
        assert!((curve.last().unwrap().ratio - limit).abs() < 1e-6);
        assert!(curve[3..].iter().all(|pt| pt.ratio > 1.2));
    }

    #[test]
    fn curve_tracks_running_min() {
        let es = gfm(1.0, 1.0, 1.0, 1.0, 1.0, Side::Upper);
        let curve = es.renyi_lamperti_curve(&[1, 3, 10, 100, 1000]).unwrap();
        let mut m = f64::INFINITY;
        for pt in &curve {
            m = m.min(pt.ratio);
            assert_eq!(pt.running_min, m);
            assert_eq!(pt.ratio, es.renyi_lamperti_ratio(pt.n).unwrap());
        }
        assert!(es.renyi_lamperti_curve(&[5, 5]).is_err());
        assert!(es.renyi_lamperti_curve(&[0, 5]).is_err());
    }

    #[test]
    fn lower_side_ratio_is_undefined() {
        let es = gfm(1.0, 1.0, 1.0, 2.0, 1.0, Side::Lower);
        assert!(matches!(es.renyi_lamperti_ratio(100), Err(Error::UndefinedRatio(_))));
        // Σ P(B_k) is exactly zero, hence finite
        let total = compensated_sum((1..=1000).map(|k| es.event_prob(k).unwrap()));
        assert_eq!(total, 0.0);
    }

    #[test]
    fn bracket_examples() {
        let ind = independent(2.0, 1.0).epsilon_bracket_check(2, 3, 2.0).unwrap();
        assert!(ind.holds && ind.lhs / ind.rhs >= 1.0);
        // separable oracle: ∫_1^2 x⁻² dx · ∫_{1.5}^3 y⁻² dy
        assert!((ind.lhs - 0.5 * (1.0 / 1.5 - 1.0 / 3.0)).abs() < 1e-10);

        let dep = gfm(1.0, 1.0, 1.0, 2.0, 1.0, Side::Upper)
            .epsilon_bracket_check(4, 9, 1.5)
            .unwrap();
        assert!(dep.holds);

        let near = gfm(1.0, 1.0, 1.0, 2.0, 1.0, Side::Upper)
            .epsilon_bracket_check(4, 9, 1.0 + 1e-9)
            .unwrap();
        assert!(near.holds && near.lhs.abs() < 1e-8 && near.rhs.abs() < 1e-8);
        assert!(independent(2.0, 1.0).epsilon_bracket_check(2, 2, 2.0).is_err());
        assert!(independent(2.0, 1.0).epsilon_bracket_check(2, 3, 1.0).is_err());
    }

    #[test]
    fn bracket_matches_separable_integrals() {
        // joint survival = S(x)S(y) + θ h(x)h(y); both parts factor
        let es = gfm(0.8, 2.0, 1.0, 2.0, 1.0, Side::Upper);
        let (k, j, eps) = (4u64, 8u64, 4.0);
        let q = Quadrature::with_tolerance(1e-13);
        let m = pareto(2.0);
        let one = |f: &dyn Fn(f64) -> f64, lo: f64, hi: f64| {
            split_at(lo, hi, 1.0)
                .into_iter()
                .map(|(a, b)| q.integrate(f, a, b).unwrap().value)
                .sum::<f64>()
        };
        let s = |x: f64| m.survival(x);
        let h = |x: f64| gfm_profile(2.0, 1.0, m.cdf(x));
        let (a, b) = (k as f64, j as f64);
        let expected = one(&s, a / eps, a) * one(&s, b / eps, b) + 0.8 * one(&h, a / eps, a) * one(&h, b / eps, b);
        let got = es.epsilon_bracket_check(k, j, eps).unwrap();
        assert!((got.lhs - expected).abs() < 1e-9);
    }

    #[test]
    fn bracket_holds_on_grid() {
        let systems = [
            independent(2.0, 1.0),
            gfm(1.0, 1.0, 1.0, 2.0, 1.0, Side::Upper),
            gfm(0.5, 3.0, 2.0, 1.5, 1.5, Side::Upper),
        ];
        for es in &systems {
            for k in [2u64, 4, 9, 16] {
                for j in [3u64, 8, 27] {
                    for eps in [1.25, 1.5, 2.0, 4.0] {
                        let c = es.epsilon_bracket_check(k, j, eps).unwrap();
                        assert!(c.holds, "k={k} j={j} eps={eps}: {c:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn lower_side_bracket_is_trivial_for_pareto() {
        let c = gfm(1.0, 1.0, 1.0, 2.0, 1.0, Side::Lower)
            .epsilon_bracket_check(2, 3, 2.0)
            .unwrap();
        assert_eq!((c.lhs, c.rhs, c.holds), (0.0, 0.0, true));
    }

    #[test]
    fn scaled_tail_ratio_examples() {
        let capped = independent(2.0, 1.0).scaled_tail_ratio(2.0, 1).unwrap();
        assert_eq!(capped.ratio, 1.0);
        assert!(capped.holds);

        let n = 10_000;
        let r = independent(1.0, 1.0).scaled_tail_ratio(2.0, n).unwrap();
        assert!(r.holds);
        assert!((r.upper - (2.0 + 2.0 / harmonic(n, 1))).abs() < 1e-12);
        // numerator = 2 + 2 (H_n − 1.5) for ε = 2, α = p = 1
        let h = harmonic(n, 1);
        assert!((r.ratio - (2.0 + 2.0 * (h - 1.5)) / h).abs() < 1e-12);
    }

    #[test]
    fn scaled_tail_ratio_grid() {
        for alpha in [1.0, 2.0] {
            for p in [1.0, 1.5] {
                for eps in [1.5, 2.0, 3.0] {
                    for n in [100u64, 10_000] {
                        let r = independent(alpha, p).scaled_tail_ratio(eps, n).unwrap();
                        assert!(r.holds, "alpha={alpha} p={p} eps={eps} n={n}: {r:?}");
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn pqd_lower_bound(theta in 0.0f64..=1.0, r in 1.0f64..4.0, s in 1.0f64..4.0,
                           alpha in 0.5f64..3.0, p in 1.0f64..1.99, k in 1u64..500, j in 1u64..500) {
            let es = gfm(theta, r, s, alpha, p, Side::Upper);
            let pk = es.event_prob(k).unwrap();
            let pj = es.event_prob(j).unwrap();
            let joint = es.pair_event_prob(k, j).unwrap();
            if k != j {
                prop_assert!(joint >= pk * pj);
            }
            prop_assert!(joint <= pk.min(pj) + 1e-15);
        }

        #[test]
        fn event_prob_in_unit_interval_and_nonincreasing(alpha in 0.3f64..5.0, p in 1.0f64..1.99, k in 1u64..1_000_000) {
            let es = independent(alpha, p);
            let a = es.event_prob(k).unwrap();
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert!(es.event_prob(k + 1).unwrap() <= a);
        }

        #[test]
        fn scaled_ratio_at_least_one(alpha in 0.5f64..3.0, p in 1.0f64..1.99, eps in 1.01f64..5.0, n in 1u64..2000) {
            let r = independent(alpha, p).scaled_tail_ratio(eps, n).unwrap();
            prop_assert!(r.ratio >= 1.0);
        }
    }
}
