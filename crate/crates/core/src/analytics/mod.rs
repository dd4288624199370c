//! Closed forms and numerical integrals for the rate of old-new inversions.
//!
//! A read `r` suffers an inversion when it overlaps a write `w`, some other
//! read `r'` finished inside `[w_st, r_st]` (a concurrency pattern), `r'`
//! returned `w` and `r` did not (a read-write pattern). By total probability
//! over the number `m` of such `r'`,
//!
//! ```text
//! P{ONI} = Σ_m P{CP | R' = m} · P{RWP | R' = m}
//! ```
//!
//! The first factor comes from the M/M/1-with-rejection queue model in
//! [`concurrency`]; the second from timed balls-into-bins models in
//! [`readwrite`], checked against direct simulation in [`montecarlo`].

pub mod concurrency;
pub mod montecarlo;
mod params;
mod quad;
pub mod readwrite;
mod special;
mod table;

use thiserror::Error;

pub use concurrency::{p_cp, p_cp_given_m, p_d, CpMode};
pub use montecarlo::{mc_balls_into_bins, mc_balls_into_bins_with, BallDelays, BallsRole, McEstimate};
pub use params::{read_gap, t_prime, LagPolicy, ModelParams};
pub use quad::{integrate, integrate_tail, Integral, QuadratureSpec};
pub use readwrite::{
    j1_integral, p_oni, p_r_neq_w, p_rprime_neq_w_given, p_rwp_aggregate, p_rwp_given_m, Conditional, RwpModel,
};
pub use special::{beta_fn, binomial};
pub use table::{theory_grid, theory_row, TheoryRow};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature did not converge: error estimate {achieved:e} above target {requested:e}")]
    NoConvergence { achieved: f64, requested: f64 },
    #[error("t' = {0} s is negative (service faster than twice the arrival rate); clamping to 0 must be requested explicitly")]
    NegativeLag(f64),
}
