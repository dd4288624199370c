//! Direct simulation of the timed balls-into-bins experiments, used as an
//! oracle for the closed forms.

use rand::seq::index::sample;
use rand_distr::{Distribution, Exp};

use super::params::ModelParams;
use super::AnalyticsError;
use crate::simnet::{Purpose, SeedTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallsRole {
    /// `r` (issued `t = 1/λ` after `w`) misses `w` in its whole quorum.
    RVsW,
    /// `r'` misses `w`, which is issued `t'` after `r'` and races it only on
    /// a random `n − q` of the bins.
    RPrimeVsW,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BallDelays {
    /// Exponential with the read and write rates of the parameters.
    Exponential,
    /// Every ball takes exactly this long.
    Deterministic { read: f64, write: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub p: f64,
    pub stderr: f64,
    pub samples: u64,
    pub hits: u64,
}

impl McEstimate {
    /// Whether `value` lies within `k` standard errors.
    pub fn agrees(&self, value: f64, k: f64) -> bool {
        (self.p - value).abs() <= k * self.stderr
    }
}

pub const MIN_SAMPLES: u64 = 10_000;

pub fn mc_balls_into_bins(
    params: &ModelParams,
    role: BallsRole,
    samples: u64,
    seed: u64,
) -> Result<McEstimate, AnalyticsError> {
    mc_balls_into_bins_with(params, role, BallDelays::Exponential, samples, seed)
}

pub fn mc_balls_into_bins_with(
    params: &ModelParams,
    role: BallsRole,
    delays: BallDelays,
    samples: u64,
    seed: u64,
) -> Result<McEstimate, AnalyticsError> {
    params.validate()?;
    if samples < MIN_SAMPLES {
        return Err(AnalyticsError::Domain(format!(
            "at least {MIN_SAMPLES} samples are needed, got {samples}"
        )));
    }
    let n = params.replicas;
    let q = params.quorum();
    let lag = match role {
        BallsRole::RVsW => params.t(),
        BallsRole::RPrimeVsW => params.effective_t_prime()?,
    };
    let read = Exp::new(params.read_rate).expect("validated rate");
    let write = Exp::new(params.write_rate).expect("validated rate");
    let draw = |exp: &Exp<f64>, fixed: f64, rng: &mut rand_chacha::ChaCha8Rng| match delays {
        BallDelays::Exponential => exp.sample(rng),
        BallDelays::Deterministic { .. } => fixed,
    };
    let (fixed_read, fixed_write) = match delays {
        BallDelays::Deterministic { read, write } => (read, write),
        BallDelays::Exponential => (0.0, 0.0),
    };

    let mut rng = SeedTree::new(seed).stream(Purpose::MonteCarlo, role as u64);
    let mut read_at = vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();
    let mut raced = vec![false; n];
    let mut hits = 0u64;
    for _ in 0..samples {
        for (i, slot) in read_at.iter_mut().enumerate() {
            *slot = draw(&read, fixed_read, &mut rng);
            order[i] = i;
        }
        order.sort_by(|&a, &b| read_at[a].total_cmp(&read_at[b]).then(a.cmp(&b)));
        let quorum = &order[..q];
        let missed = match role {
            BallsRole::RVsW => quorum
                .iter()
                .all(|&i| lag + read_at[i] < draw(&write, fixed_write, &mut rng)),
            BallsRole::RPrimeVsW => {
                raced.iter_mut().for_each(|r| *r = false);
                for i in sample(&mut rng, n, n - q) {
                    raced[i] = true;
                }
                quorum
                    .iter()
                    .filter(|&&i| raced[i])
                    .all(|&i| lag + draw(&write, fixed_write, &mut rng) > read_at[i])
            }
        };
        hits += u64::from(missed);
    }
    let p = hits as f64 / samples as f64;
    Ok(McEstimate {
        p,
        stderr: (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
        hits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{p_r_neq_w, p_rprime_neq_w_given, QuadratureSpec};

    #[test]
    fn deterministic_delays_give_certain_outcomes() {
        let p = ModelParams::square(5);
        for (read, write, expected) in [(0.01, 0.2, 1.0), (0.2, 0.01, 0.0)] {
            let d = BallDelays::Deterministic { read, write };
            let e = mc_balls_into_bins_with(&p, BallsRole::RVsW, d, MIN_SAMPLES, 1).unwrap();
            assert_eq!(e.p, expected);
            assert_eq!(e.stderr, 0.0);
        }
        let d = BallDelays::Deterministic {
            read: 0.01,
            write: 0.01,
        };
        let e = mc_balls_into_bins_with(&p, BallsRole::RPrimeVsW, d, MIN_SAMPLES, 1).unwrap();
        assert_eq!(e.p, 1.0);
    }

    #[test]
    fn small_sample_counts_are_refused() {
        assert!(mc_balls_into_bins(&ModelParams::square(3), BallsRole::RVsW, 10, 1).is_err());
    }

    #[test]
    fn oracles_agree_with_closed_forms_at_n_3() {
        let p = ModelParams::square(3);
        let e = mc_balls_into_bins(&p, BallsRole::RVsW, 400_000, 5).unwrap();
        assert!(e.agrees(p_r_neq_w(&p).unwrap(), 3.0), "{e:?}");
        let e = mc_balls_into_bins(&p, BallsRole::RPrimeVsW, 400_000, 5).unwrap();
        let closed = p_rprime_neq_w_given(&p, &QuadratureSpec::default()).unwrap().value;
        assert!(e.agrees(closed, 3.0), "{e:?} vs {closed}");
    }
}
