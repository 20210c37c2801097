//! Numerics for Marcinkiewicz–Zygmund normalized sums of identically
//! distributed, pairwise positively quadrant dependent (PQD) variables.
//!
//! The crate evaluates the covariance functional `G` and the series
//! conditions built from it, checks the inequalities used in the
//! Borel–Cantelli argument with exact probabilities, and simulates pairwise
//! PQD sequences to observe `(S_n − n c) / n^(1/p)` directly.
//!
//! Data-parallel loops (double sums, replicate simulation) run on rayon when
//! the default `parallel` feature is on and sequentially otherwise; results
//! are identical either way.

pub mod borel_cantelli;
pub mod conditions;
pub mod copulas;
pub mod error;
pub mod extended;
pub mod gfun;
pub mod marginals;
mod par;
pub mod quad;
pub mod rng;
pub mod simulate;
pub mod specfun;
pub mod sum;

pub use error::{Error, Result};
pub use extended::Extended;
pub use par::worker_count;
