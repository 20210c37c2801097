//! Seeded Monte Carlo for sequences whose pairs follow FGM laws, and the
//! normalized-sum and exceedance diagnostics computed along each path.
//!
//! The joint law is the multivariate FGM density
//! 1 + Σ_{k<j} θ_{kj} (1 − 2u_k)(1 − 2u_j) on the unit cube, admissible when
//! Σ θ_{kj} ≤ 1. Its bivariate margins are GFM(θ_{kj}, 1, 1), so the model is
//! pairwise PQD; association of the whole vector is not claimed.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::marginals::{Marginal, ParetoMarginal};
use crate::par::map_range;
use crate::rng::stream;
use crate::sum::CompensatedSum;

/// Largest dimension sampled with all pairs coupled.
pub const EXACT_DIMENSION_CAP: u64 = 1 << 12;
/// Pair distance kept when the dimension exceeds [`EXACT_DIMENSION_CAP`].
pub const WINDOW: u64 = 64;
/// First dyadic checkpoint.
pub const FIRST_CHECKPOINT: u64 = 1 << 7;

// Rounding allowance for the discriminant of the conditional-CDF quadratic.
const DISCRIMINANT_SLACK: f64 = 1e-12;

/// User-facing description of the pair strengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ThetaSpec {
    Zero,
    /// θ_{kj} = scale · k^mu · j^nu before admissibility scaling.
    Power {
        mu: f64,
        nu: f64,
        scale: f64,
    },
}

impl fmt::Display for ThetaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThetaSpec::Zero => f.write_str("zero"),
            ThetaSpec::Power { mu, nu, scale } => write!(f, "power:{mu},{nu},{scale}"),
        }
    }
}

impl FromStr for ThetaSpec {
    type Err = Error;

    /// Parses `zero` or `power:mu,nu,scale`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "zero" {
            return Ok(ThetaSpec::Zero);
        }
        let bad = || Error::parameter(format!("theta spec must be 'zero' or 'power:mu,nu,scale', got '{s}'"));
        let args = s.strip_prefix("power:").ok_or_else(bad)?;
        let parts: Vec<f64> = args
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        match parts[..] {
            [mu, nu, scale] if mu.is_finite() && nu.is_finite() && scale.is_finite() => {
                if scale < 0.0 {
                    return Err(Error::parameter(format!("theta scale must be >= 0, got {scale}")));
                }
                Ok(ThetaSpec::Power { mu, nu, scale })
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum PairStrengths {
    Zero,
    Power {
        scale: f64,
        mu: f64,
        nu: f64,
    },
    /// θ_{k,j} for 1 ≤ k < j stored column by column at (j−1)(j−2)/2 + k − 1.
    Explicit(Vec<f64>),
}

/// An admissible multivariate FGM law on `dimension` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateFgmModel {
    dimension: u64,
    strengths: PairStrengths,
    window: Option<u64>,
    theta_scale: f64,
    theta_sum: f64,
}

fn packed_index(k: u64, j: u64) -> usize {
    ((j - 1) * (j - 2) / 2 + k - 1) as usize
}

impl MultivariateFgmModel {
    /// Independent coordinates.
    pub fn independent(dimension: u64) -> Result<Self> {
        check_dimension(dimension)?;
        Ok(Self {
            dimension,
            strengths: PairStrengths::Zero,
            window: None,
            theta_scale: 1.0,
            theta_sum: 0.0,
        })
    }

    /// All pairs coupled with the given strengths; Σ θ ≤ 1 is required.
    pub fn explicit<F: Fn(u64, u64) -> f64>(dimension: u64, theta: F) -> Result<Self> {
        check_dimension(dimension)?;
        if dimension > EXACT_DIMENSION_CAP {
            return Err(Error::parameter(format!(
                "explicit pair strengths support dimension <= {EXACT_DIMENSION_CAP}, got {dimension}"
            )));
        }
        let mut packed = Vec::with_capacity(packed_index(1, dimension + 1));
        let mut total = CompensatedSum::new();
        for j in 2..=dimension {
            for k in 1..j {
                let t = theta(k, j);
                if !(t >= 0.0 && t.is_finite()) {
                    return Err(Error::parameter(format!(
                        "pair strength theta({k},{j}) must be a finite nonnegative number, got {t}"
                    )));
                }
                packed.push(t);
                total.add(t);
            }
        }
        let theta_sum = total.value();
        if theta_sum > 1.0 {
            return Err(Error::parameter(format!(
                "pair strengths are inadmissible: sum of theta is {theta_sum} > 1"
            )));
        }
        Ok(Self {
            dimension,
            strengths: PairStrengths::Explicit(packed),
            window: None,
            theta_scale: 1.0,
            theta_sum,
        })
    }

    /// Pair strengths from `spec`, rescaled by min(1, 1/Σθ) to be admissible.
    ///
    /// Above [`EXACT_DIMENSION_CAP`] coordinates only pairs with
    /// j − k ≤ [`WINDOW`] are coupled.
    pub fn from_spec(dimension: u64, spec: ThetaSpec) -> Result<Self> {
        check_dimension(dimension)?;
        let (mu, nu, scale) = match spec {
            ThetaSpec::Zero => return Self::independent(dimension),
            ThetaSpec::Power { mu, nu, scale } => (mu, nu, scale),
        };
        if !(mu.is_finite() && nu.is_finite() && scale >= 0.0 && scale.is_finite()) {
            return Err(Error::parameter(format!(
                "power theta spec needs finite mu, nu and scale >= 0, got ({mu}, {nu}, {scale})"
            )));
        }
        if scale == 0.0 {
            return Self::independent(dimension);
        }
        let window = (dimension > EXACT_DIMENSION_CAP).then_some(WINDOW);
        let rows: Vec<f64> = (1..=dimension).map(|k| (k as f64).powf(mu)).collect();
        let mut total = CompensatedSum::new();
        let mut prefix = CompensatedSum::new();
        for j in 2..=dimension {
            prefix.add(rows[j as usize - 2]);
            let inner = match window {
                None => prefix.value(),
                Some(w) => {
                    let lo = j.saturating_sub(w).max(1);
                    (lo..j).map(|k| rows[k as usize - 1]).sum()
                }
            };
            total.add((j as f64).powf(nu) * inner);
        }
        let raw_sum = scale * total.value();
        let theta_scale = if raw_sum > 1.0 { 1.0 / raw_sum } else { 1.0 };
        if theta_scale < 1.0 {
            log::warn!(
                "pair strengths sum to {raw_sum} over dimension {dimension}; scaling by {theta_scale} for admissibility"
            );
        }
        Ok(Self {
            dimension,
            strengths: PairStrengths::Power {
                scale: scale * theta_scale,
                mu,
                nu,
            },
            window,
            theta_scale,
            theta_sum: raw_sum * theta_scale,
        })
    }

    pub fn dimension(&self) -> u64 {
        self.dimension
    }

    /// Maximum coupled distance j − k, if truncated.
    pub fn window(&self) -> Option<u64> {
        self.window
    }

    /// Factor applied to the requested strengths (1 when already admissible).
    pub fn theta_scale(&self) -> f64 {
        self.theta_scale
    }

    /// Σ_{k<j} θ_{kj} of the model as sampled.
    pub fn theta_sum(&self) -> f64 {
        self.theta_sum
    }

    /// θ_{kj} of the model as sampled, for 1 ≤ k, j ≤ dimension, k ≠ j.
    pub fn theta(&self, k: u64, j: u64) -> f64 {
        let (k, j) = if k < j { (k, j) } else { (j, k) };
        debug_assert!(k >= 1 && k < j && j <= self.dimension);
        if self.window.is_some_and(|w| j - k > w) {
            return 0.0;
        }
        match &self.strengths {
            PairStrengths::Zero => 0.0,
            PairStrengths::Power { scale, mu, nu } => scale * (k as f64).powf(*mu) * (j as f64).powf(*nu),
            PairStrengths::Explicit(packed) => packed[packed_index(k, j)],
        }
    }

    /// A fresh sequential sampler positioned at coordinate 1.
    pub fn sampler(&self) -> FgmSampler<'_> {
        FgmSampler {
            model: self,
            drawn: 0,
            normalizer: 1.0,
            prefix: CompensatedSum::new(),
            recent: VecDeque::new(),
            etas: Vec::new(),
        }
    }
}

fn check_dimension(dimension: u64) -> Result<()> {
    if dimension == 0 {
        return Err(Error::parameter("model dimension must be >= 1"));
    }
    Ok(())
}

/// Draws U_1, U_2, … one coordinate at a time by inverting the conditional
/// CDF t(1 + β) − βt², β = L_m / D_{m−1}.
///
/// D_m = 1 + Σ_{k<j≤m} θ_{kj} η_k η_j with η = 1 − 2u is the density of the
/// first m coordinates and L_m = Σ_{k<m} θ_{km} η_k.
#[derive(Debug, Clone)]
pub struct FgmSampler<'m> {
    model: &'m MultivariateFgmModel,
    drawn: u64,
    normalizer: f64,
    /// Power, all pairs: Σ_{k<m} k^mu η_k.
    prefix: CompensatedSum,
    /// Power, windowed: k^mu η_k for the last `window` coordinates.
    recent: VecDeque<f64>,
    /// Explicit: every η_k so far.
    etas: Vec<f64>,
}

impl FgmSampler<'_> {
    /// Next uniform coordinate, in [0, 1).
    pub fn next_uniform<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<f64> {
        let m = self.drawn + 1;
        if m > self.model.dimension {
            return Err(Error::parameter(format!(
                "model dimension {} exhausted",
                self.model.dimension
            )));
        }
        let w: f64 = rng.random();
        let link = self.link(m);
        let beta = if self.normalizer > 0.0 {
            (link / self.normalizer).clamp(-1.0, 1.0)
        } else {
            0.0
        };
        let t = invert_linear_density_cdf(beta, w)?;
        let eta = 1.0 - 2.0 * t;
        self.normalizer += eta * link;
        self.record(m, eta);
        self.drawn = m;
        Ok(t)
    }

    fn link(&self, m: u64) -> f64 {
        match &self.model.strengths {
            PairStrengths::Zero => 0.0,
            PairStrengths::Power { scale, nu, .. } => {
                let inner = match self.model.window {
                    None => self.prefix.value(),
                    Some(_) => self.recent.iter().sum(),
                };
                scale * (m as f64).powf(*nu) * inner
            }
            PairStrengths::Explicit(packed) => {
                if m < 2 {
                    return 0.0;
                }
                let column = &packed[packed_index(1, m)..packed_index(1, m) + (m - 1) as usize];
                let mut acc = CompensatedSum::new();
                for (theta, eta) in column.iter().zip(&self.etas) {
                    acc.add(theta * eta);
                }
                acc.value()
            }
        }
    }

    fn record(&mut self, m: u64, eta: f64) {
        match &self.model.strengths {
            PairStrengths::Zero => {}
            PairStrengths::Power { mu, .. } => {
                let a = (m as f64).powf(*mu) * eta;
                match self.model.window {
                    None => self.prefix.add(a),
                    Some(w) => {
                        if self.recent.len() as u64 == w {
                            self.recent.pop_front();
                        }
                        self.recent.push_back(a);
                    }
                }
            }
            PairStrengths::Explicit(_) => self.etas.push(eta),
        }
    }
}

/// Solves t(1 + β) − βt² = w on [0, 1] for |β| ≤ 1.
fn invert_linear_density_cdf(beta: f64, w: f64) -> Result<f64> {
    let b = 1.0 + beta;
    let mut disc = b * b - 4.0 * beta * w;
    if disc < 0.0 {
        if disc < -DISCRIMINANT_SLACK {
            return Err(Error::Internal(format!(
                "conditional cdf inversion failed: discriminant {disc} at beta = {beta}, w = {w}"
            )));
        }
        disc = 0.0;
    }
    // rationalized root, stable as β → 0; the denominator vanishes only at β = −1, w = 0
    let denom = b + disc.sqrt();
    let t = if denom > 0.0 { 2.0 * w / denom } else { 0.0 };
    Ok(t.min(1.0 - f64::EPSILON / 2.0))
}

/// One draw of (X_1, …, X_n) = (Q(U_1), …, Q(U_n)) with U from `model`.
pub fn sample_sequence<M, R>(model: &MultivariateFgmModel, marginal: &M, rng: &mut R) -> Result<Vec<f64>>
where
    M: Marginal + ?Sized,
    R: Rng + ?Sized,
{
    let mut sampler = model.sampler();
    (0..model.dimension)
        .map(|_| marginal.quantile(sampler.next_uniform(rng)?))
        .collect()
}

/// Cumulative counts E_n = #{k ≤ n : X_k > k^(1/p)}.
pub fn count_exceedances(path: &[f64], p: f64) -> Vec<u64> {
    let mut count = 0;
    path.iter()
        .enumerate()
        .map(|(i, &x)| {
            if x > ((i + 1) as f64).powf(1.0 / p) {
                count += 1;
            }
            count
        })
        .collect()
}

/// How the partial sums are centered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Centering {
    /// c = E X₁, which requires alpha > 1.
    Mean,
    Value(f64),
}

/// One seeded batch of independent replicate paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SllnRun {
    pub p: f64,
    pub alpha: f64,
    pub theta: ThetaSpec,
    pub n_max: u64,
    pub replicates: u64,
    pub seed: u64,
    pub centering: Centering,
}

/// M_n and E_n at each checkpoint for one replicate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicatePath {
    pub replicate: u64,
    pub normalized_sums: Vec<f64>,
    pub exceedances: Vec<u64>,
}

/// Cross-replicate summary at one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckpointSummary {
    pub n: u64,
    pub median_abs_m: f64,
    pub max_abs_m: f64,
    pub mean_exceedances: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub centering: f64,
    pub window: Option<u64>,
    pub exact_dimension_cap: u64,
    pub theta_scale: f64,
    pub theta_sum: f64,
    /// Always "pairwise_pqd": association is not established for the model.
    pub dependence_class: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathReport {
    pub checkpoints: Vec<u64>,
    pub replicates: Vec<ReplicatePath>,
    pub summary: Vec<CheckpointSummary>,
    pub metadata: RunMetadata,
}

impl PathReport {
    /// max |M_n| over all replicates and the last `last` checkpoints.
    pub fn max_abs_tail(&self, last: usize) -> f64 {
        let from = self.checkpoints.len().saturating_sub(last);
        self.replicates
            .iter()
            .flat_map(|r| r.normalized_sums[from..].iter())
            .fold(0.0, |acc, m| acc.max(m.abs()))
    }
}

/// Dyadic checkpoints 2⁷, 2⁸, …, 2^⌊log₂ n_max⌋.
pub fn dyadic_checkpoints(n_max: u64) -> Vec<u64> {
    std::iter::successors(Some(FIRST_CHECKPOINT), |&n| n.checked_mul(2))
        .take_while(|&n| n <= n_max)
        .collect()
}

impl SllnRun {
    fn validate(&self) -> Result<(ParetoMarginal, f64)> {
        if !(1.0..2.0).contains(&self.p) {
            return Err(Error::parameter(format!("p must lie in [1, 2), got p = {}", self.p)));
        }
        if self.n_max < FIRST_CHECKPOINT {
            return Err(Error::parameter(format!(
                "n_max must be >= {FIRST_CHECKPOINT}, got {}",
                self.n_max
            )));
        }
        if self.replicates == 0 {
            return Err(Error::parameter("replicates must be >= 1"));
        }
        let marginal = ParetoMarginal::new(self.alpha)?;
        let c = match self.centering {
            Centering::Value(c) if c.is_finite() => c,
            Centering::Value(c) => return Err(Error::parameter(format!("centering constant must be finite, got {c}"))),
            Centering::Mean => marginal.mean().ok_or_else(|| {
                Error::parameter(format!(
                    "centering 'mean' needs a finite mean but alpha = {} <= 1; pass c explicitly",
                    self.alpha
                ))
            })?,
        };
        Ok((marginal, c))
    }
}

/// Samples every replicate and reports M_n = (S_n − n c)/n^(1/p) and E_n at
/// the dyadic checkpoints.
///
/// Replicate `i` draws from stream `i` of `seed`, so the report does not
/// depend on how replicates are scheduled.
pub fn run_slln(run: &SllnRun) -> Result<PathReport> {
    let (marginal, c) = run.validate()?;
    let model = MultivariateFgmModel::from_spec(run.n_max, run.theta)?;
    let checkpoints = dyadic_checkpoints(run.n_max);
    let n_last = *checkpoints.last().expect("n_max >= first checkpoint");
    let inv_p = 1.0 / run.p;

    let paths = map_range(0, run.replicates as usize, |i| -> Result<ReplicatePath> {
        let replicate = i as u64;
        let mut rng = stream(run.seed, replicate);
        let mut sampler = model.sampler();
        let mut sum = CompensatedSum::new();
        let mut exceed = 0u64;
        let mut next = 0usize;
        let mut normalized_sums = Vec::with_capacity(checkpoints.len());
        let mut exceedances = Vec::with_capacity(checkpoints.len());
        for k in 1..=n_last {
            let x = marginal.quantile(sampler.next_uniform(&mut rng)?)?;
            sum.add(x - c);
            if x > (k as f64).powf(inv_p) {
                exceed += 1;
            }
            if k == checkpoints[next] {
                normalized_sums.push(sum.value() / (k as f64).powf(inv_p));
                exceedances.push(exceed);
                next += 1;
            }
        }
        Ok(ReplicatePath {
            replicate,
            normalized_sums,
            exceedances,
        })
    });
    let replicates: Vec<ReplicatePath> = paths.into_iter().collect::<Result<_>>()?;

    let summary = checkpoints
        .iter()
        .enumerate()
        .map(|(idx, &n)| {
            let mut abs: Vec<f64> = replicates.iter().map(|r| r.normalized_sums[idx].abs()).collect();
            abs.sort_by(f64::total_cmp);
            let mean_exceedances =
                replicates.iter().map(|r| r.exceedances[idx] as f64).sum::<f64>() / replicates.len() as f64;
            CheckpointSummary {
                n,
                median_abs_m: median_sorted(&abs),
                max_abs_m: *abs.last().expect("replicates >= 1"),
                mean_exceedances,
            }
        })
        .collect();

    Ok(PathReport {
        checkpoints,
        replicates,
        summary,
        metadata: RunMetadata {
            centering: c,
            window: model.window(),
            exact_dimension_cap: EXACT_DIMENSION_CAP,
            theta_scale: model.theta_scale(),
            theta_sum: model.theta_sum(),
            dependence_class: "pairwise_pqd",
        },
    })
}

fn median_sorted(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}
