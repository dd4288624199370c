use super::concurrency::{p_cp, p_cp_given_m, CpMode};
use super::params::ModelParams;
use super::quad::QuadratureSpec;
use super::readwrite::RwpModel;
use super::AnalyticsError;

/// Every analytic quantity for one `(N, n)` point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryRow {
    pub clients: usize,
    pub replicas: usize,
    pub quorum: usize,
    /// Upper summation limit used for the truncated sums.
    pub max_m: usize,
    pub t_prime: f64,
    pub p_r_neq_w: f64,
    pub p_rprime_neq_w_given: f64,
    /// `1 − P{r' ≠ R(w) | r ≠ R(w)}`.
    pub p_rprime_eq_w_given: f64,
    pub p_cp: f64,
    pub p_cp_closed: f64,
    pub p_rwp_given_cp: f64,
    pub p_oni: f64,
}

/// Evaluates a row, truncating the sums over `m` at `max_m` (by default
/// `N − 1`).
pub fn theory_row(
    params: &ModelParams,
    spec: &QuadratureSpec,
    max_m: Option<usize>,
) -> Result<TheoryRow, AnalyticsError> {
    params.validate()?;
    let max_m = max_m.unwrap_or(params.clients - 1);
    let model = RwpModel::new(params, spec)?;
    let p_oni = (1..=max_m).map(|m| p_cp_given_m(m, params) * model.given_m(m)).sum();
    Ok(TheoryRow {
        clients: params.clients,
        replicas: params.replicas,
        quorum: params.quorum(),
        max_m,
        t_prime: params.t_prime(),
        p_r_neq_w: model.p_r_neq_w,
        p_rprime_neq_w_given: model.p_rprime_neq_w_given.value,
        p_rprime_eq_w_given: 1.0 - model.p_rprime_neq_w_given.value,
        p_cp: p_cp(params, CpMode::Truncated(max_m)),
        p_cp_closed: p_cp(params, CpMode::Closed),
        p_rwp_given_cp: (1..=max_m).map(|m| model.given_m(m)).sum(),
        p_oni,
    })
}

/// Rows for `N = n = size` over `sizes`, other parameters from `base`.
pub fn theory_grid(
    base: &ModelParams,
    sizes: impl IntoIterator<Item = usize>,
    spec: &QuadratureSpec,
) -> Result<Vec<TheoryRow>, AnalyticsError> {
    sizes
        .into_iter()
        .map(|n| {
            let params = ModelParams {
                clients: n,
                replicas: n,
                ..*base
            };
            theory_row(&params, spec, None)
        })
        .collect()
}
