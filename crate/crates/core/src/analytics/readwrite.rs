//! Probability that a concurrency pattern is also a read-write pattern.
//!
//! Both read-from events are timed balls-into-bins experiments: each
//! operation sends one ball (message) per replica, and a read returns a
//! write's value iff that write's ball lands before the read's in at least
//! one bin of the read's quorum.

use super::params::ModelParams;
use super::quad::{integrate, integrate_tail, Integral, QuadratureSpec};
use super::special::{beta_fn, binomial};
use super::AnalyticsError;

/// `P{r ≠ R(w)}`: the read started `t = 1/λ` after the write and still
/// missed it at every replica of its quorum.
pub fn p_r_neq_w(params: &ModelParams) -> Result<f64, AnalyticsError> {
    params.validate()?;
    let n = params.replicas as f64;
    let q = params.quorum() as f64;
    let alpha = params.alpha();
    let decay = (-q * params.write_rate * params.t()).exp();
    Ok(decay * alpha.powf(q) * beta_fn(q, alpha * (n - q) + 1.0)? / beta_fn(q, n - q + 1.0)?)
}

/// `J1`, normalised by `B(q, n−q+1)` so that it is a probability, together
/// with the absolute error bound on that probability.
///
/// `spec.abs_tol` applies to the normalised value.
pub fn j1_integral(params: &ModelParams, spec: &QuadratureSpec) -> Result<Integral, AnalyticsError> {
    params.validate()?;
    spec.validate()?;
    let n = params.replicas as i64;
    if n <= 2 {
        return Err(AnalyticsError::Domain("J1 is defined for n > 2".into()));
    }
    let q = params.quorum() as i64;
    let tp = params.effective_t_prime()?;
    let (lr, lw) = (params.read_rate, params.write_rate);
    let sum_rate = lr + lw;
    let norm = beta_fn(q as f64, (n - q + 1) as f64)?;

    // λr·A(s): mass of r' balls landing in [0, s] at a bin that w reaches
    // after them; λr·Bf(s): mass landing in [0, s] at a bin w never races.
    let a = move |s: f64| {
        (1.0 - (-lr * tp).exp()) + lr * (lw * tp).exp() * ((-sum_rate * tp).exp() - (-sum_rate * s).exp()) / sum_rate
    };
    let bf = move |s: f64| 1.0 - (-lr * s).exp();
    let rest = (n - q) as f64;

    type Term = (f64, Box<dyn Fn(f64) -> f64>);
    let mut terms: Vec<Term> = Vec::new();
    for k in 0..=(n - q) {
        let w1 = binomial(q - 1, k - 1) * binomial(n - q, n - q - k) / binomial(n, n - q);
        if w1 > 0.0 {
            let ki = k as i32;
            terms.push((
                w1,
                Box::new(move |s: f64| {
                    lr * (lw * tp).exp()
                        * (-sum_rate * s).exp()
                        * a(s).powi(ki - 1)
                        * bf(s).powi(q as i32 - ki)
                        * (-lr * rest * s).exp()
                }),
            ));
        }
        let w2 = binomial(q - 1, k) * binomial(n - q, n - q - k) / binomial(n, n - q);
        if w2 > 0.0 {
            let ki = k as i32;
            terms.push((
                w2,
                Box::new(move |s: f64| {
                    lr * (-lr * s).exp() * a(s).powi(ki) * bf(s).powi(q as i32 - 1 - ki) * (-lr * rest * s).exp()
                }),
            ));
        }
    }

    let pieces = terms.len() + 1;
    let sub = QuadratureSpec {
        abs_tol: spec.abs_tol * norm / pieces as f64,
        ..*spec
    };
    let head = integrate(
        |s| lr * (-lr * (rest + 1.0) * s).exp() * (1.0 - (-lr * s).exp()).powi(q as i32 - 1),
        0.0,
        tp,
        &sub,
    )?;
    let mut value = head.value;
    let mut error = head.abs_error;
    for (weight, f) in &terms {
        let part = integrate_tail(f, tp, lr, &sub)?;
        value += weight * part.value;
        error += weight * part.abs_error;
    }
    Ok(Integral {
        value: value / norm,
        abs_error: error / norm,
    })
}

/// `P{r' ≠ R(w) | r ≠ R(w)}`, clamped into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conditional {
    pub value: f64,
    /// Value before clamping; differs from `value` only through quadrature
    /// noise.
    pub raw: f64,
    pub abs_error: f64,
}

impl Conditional {
    pub fn clamped(&self) -> bool {
        self.value != self.raw
    }
}

pub fn p_rprime_neq_w_given(params: &ModelParams, spec: &QuadratureSpec) -> Result<Conditional, AnalyticsError> {
    params.validate()?;
    if params.replicas == 2 {
        // w needs both replicas, so it reaches neither before r' returns.
        return Ok(Conditional {
            value: 1.0,
            raw: 1.0,
            abs_error: 0.0,
        });
    }
    let j = j1_integral(params, spec)?;
    Ok(Conditional {
        value: j.value.clamp(0.0, 1.0),
        raw: j.value,
        abs_error: j.abs_error,
    })
}

/// Read-write pattern probabilities for one parameter set; the two
/// balls-into-bins quantities are computed once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RwpModel {
    pub clients: usize,
    pub replicas: usize,
    pub p_r_neq_w: f64,
    pub p_rprime_neq_w_given: Conditional,
}

impl RwpModel {
    pub fn new(params: &ModelParams, spec: &QuadratureSpec) -> Result<Self, AnalyticsError> {
        Ok(RwpModel {
            clients: params.clients,
            replicas: params.replicas,
            p_r_neq_w: p_r_neq_w(params)?,
            p_rprime_neq_w_given: p_rprime_neq_w_given(params, spec)?,
        })
    }

    /// Upper bound on `P{RWP | R' = m}`.
    pub fn given_m(&self, m: usize) -> f64 {
        if m == 0 || self.replicas == 2 {
            return 0.0;
        }
        self.p_r_neq_w * (1.0 - self.p_rprime_neq_w_given.value.powi(m as i32))
    }

    /// `Σ_{m=1}^{N−1} P{RWP | R' = m}`.
    pub fn aggregate(&self) -> f64 {
        (1..self.clients).map(|m| self.given_m(m)).sum()
    }
}

pub fn p_rwp_given_m(params: &ModelParams, m: usize, spec: &QuadratureSpec) -> Result<f64, AnalyticsError> {
    if m == 0 || params.replicas == 2 {
        params.validate()?;
        return Ok(0.0);
    }
    Ok(RwpModel::new(params, spec)?.given_m(m))
}

pub fn p_rwp_aggregate(params: &ModelParams, spec: &QuadratureSpec) -> Result<f64, AnalyticsError> {
    Ok(RwpModel::new(params, spec)?.aggregate())
}

/// `Σ_{m=1}^{M} P{CP | R' = m} P{RWP | R' = m}`.
pub fn p_oni(params: &ModelParams, spec: &QuadratureSpec, max_m: usize) -> Result<f64, AnalyticsError> {
    let model = RwpModel::new(params, spec)?;
    Ok((1..=max_m)
        .map(|m| super::concurrency::p_cp_given_m(m, params) * model.given_m(m))
        .sum())
}
