//! Probability that a read forms a concurrency pattern.
//!
//! `D` counts the reads of one queue that finish between `w_st` and `r_st`;
//! `R'` is the total of `D` over the other `N − 1` queues.

use super::params::ModelParams;
use super::special::binomial;

/// `P{D = d}`: `p0` for `d = 0`, `r s^d` otherwise.
pub fn p_d(d: u32, params: &ModelParams) -> f64 {
    if d == 0 {
        params.p0()
    } else {
        params.r() * params.s().powi(d as i32)
    }
}

/// `P{CP | R' = m}`.
pub fn p_cp_given_m(m: usize, params: &ModelParams) -> f64 {
    let n = params.clients as i64;
    let (p0, r, s) = (params.p0(), params.r(), params.s());
    if m == 0 {
        return p0.powi(n as i32 - 1);
    }
    let m = m as i64;
    (0..=n - 2)
        .map(|k| {
            binomial(n - 1, k)
                * binomial(m - 1, n - k - 2)
                * p0.powi(k as i32)
                * r.powi((n - k - 1) as i32)
                * s.powi(m as i32)
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CpMode {
    /// `1 − p0^{N−1}`.
    Closed,
    /// `Σ_{m=1}^{M} P{CP | R' = m}`.
    Truncated(usize),
}

impl CpMode {
    /// Truncation at `M = N − 1`.
    pub fn default_for(params: &ModelParams) -> Self {
        CpMode::Truncated(params.clients - 1)
    }
}

pub fn p_cp(params: &ModelParams, mode: CpMode) -> f64 {
    match mode {
        CpMode::Closed => 1.0 - params.p0().powi(params.clients as i32 - 1),
        CpMode::Truncated(max_m) => (1..=max_m).map(|m| p_cp_given_m(m, params)).sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: usize) -> ModelParams {
        ModelParams::square(n)
    }

    #[test]
    fn p_d_values_and_normalization() {
        let params = p(3);
        assert_eq!(p_d(0, &params), 0.625);
        assert_eq!(p_d(1, &params), 0.28125);
        let total: f64 = (0..200).map(|d| p_d(d, &params)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let skewed = ModelParams {
            arrival_rate: 3.0,
            service_rate: 17.0,
            ..params
        };
        let total: f64 = (0..400).map(|d| p_d(d, &skewed)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conditional_values() {
        assert!((p_cp_given_m(1, &p(3)) - 0.3515625).abs() < 1e-15);
        assert!((p_cp_given_m(1, &p(2)) - 0.28125).abs() < 1e-15);
        assert!((p_cp_given_m(0, &p(2)) - 0.625).abs() < 1e-15);
    }

    #[test]
    fn closed_and_truncated() {
        assert!((p_cp(&p(3), CpMode::Truncated(2)) - 0.518555).abs() < 1e-6);
        assert!((p_cp(&p(3), CpMode::Closed) - 0.609375).abs() < 1e-15);
        assert!((p_cp(&p(5), CpMode::Truncated(4)) - 0.781222).abs() < 1e-6);
        assert_eq!(CpMode::default_for(&p(5)), CpMode::Truncated(4));
    }

    #[test]
    fn mass_over_m_sums_to_one() {
        for n in 2..=15 {
            let params = p(n);
            let total: f64 = (0..=200).map(|m| p_cp_given_m(m, &params)).sum();
            assert!((total - 1.0).abs() < 1e-9, "N={n}: {total}");
        }
    }

    #[test]
    fn truncation_gap_is_positive_and_shrinks() {
        for n in 2..=15 {
            let params = p(n);
            let closed = p_cp(&params, CpMode::Closed);
            let gaps: Vec<f64> = (1..40).map(|m| closed - p_cp(&params, CpMode::Truncated(m))).collect();
            assert!(gaps.iter().all(|&g| g > 0.0 || g.abs() < 1e-15), "N={n}");
            assert!(gaps.windows(2).all(|w| w[1] <= w[0]), "N={n}");
        }
    }
}
