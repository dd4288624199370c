use rand::Rng;
use rand_distr::{Distribution, Exp};

use super::SimError;

/// Whether a message belongs to a read or a write operation. ABD write-back
/// messages belong to the read that issued them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Read,
    Write,
}

/// Request (client to replica) or reply (replica to client).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Leg {
    Request,
    Reply,
}

/// How a round-trip delay is spread over its two messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RttSplit {
    /// Every message draws its own delay. Exponential round-trip rates are
    /// doubled per leg so the round-trip mean stays `1/rate`.
    #[default]
    PerLeg,
    /// The request carries a whole round-trip sample and the reply is
    /// instantaneous. Replays the analytical model, which draws one delay
    /// per round-trip.
    WholeOnRequest,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DelayModel {
    /// Round-trip delays exponential with rate `read_rate` (reads) or
    /// `write_rate` (writes), per second.
    ExponentialRw { read_rate: f64, write_rate: f64 },
    /// One-way delay uniform over the integers `0..max_ms`, in milliseconds.
    UniformAsync { max_ms: u32 },
    /// Fixed one-way delay in seconds.
    Deterministic { secs: f64 },
    /// Sum of one sample from each part.
    Composite(Vec<DelayModel>),
}

impl DelayModel {
    pub fn validate(&self) -> Result<(), SimError> {
        match self {
            DelayModel::ExponentialRw { read_rate, write_rate } => {
                for (name, rate) in [("read", read_rate), ("write", write_rate)] {
                    if !(rate.is_finite() && *rate > 0.0) {
                        return Err(SimError::Config(format!(
                            "{name} delay rate must be positive, got {rate}"
                        )));
                    }
                }
                Ok(())
            }
            DelayModel::UniformAsync { max_ms } => {
                if *max_ms == 0 {
                    Err(SimError::Config("uniform async bound must be at least 1 ms".into()))
                } else {
                    Ok(())
                }
            }
            DelayModel::Deterministic { secs } => {
                if secs.is_finite() && *secs >= 0.0 {
                    Ok(())
                } else {
                    Err(SimError::Config(format!(
                        "deterministic delay must be finite and non-negative, got {secs}"
                    )))
                }
            }
            DelayModel::Composite(parts) => parts.iter().try_for_each(DelayModel::validate),
        }
    }

    /// One draw of the model's basic unit: a round-trip delay for
    /// [`DelayModel::ExponentialRw`], a one-way delay otherwise.
    pub fn sample<R: Rng + ?Sized>(&self, dir: Direction, rng: &mut R) -> Result<f64, SimError> {
        self.validate()?;
        Ok(self.draw(dir, 1.0, rng))
    }

    /// Delay for one message leg under the given split.
    pub fn sample_leg<R: Rng + ?Sized>(&self, dir: Direction, leg: Leg, split: RttSplit, rng: &mut R) -> f64 {
        match split {
            RttSplit::PerLeg => self.draw_leg(dir, rng),
            RttSplit::WholeOnRequest => match leg {
                Leg::Request => self.draw_round_trip(dir, rng),
                Leg::Reply => 0.0,
            },
        }
    }

    fn rate(&self, dir: Direction) -> Option<f64> {
        match self {
            DelayModel::ExponentialRw { read_rate, write_rate } => Some(match dir {
                Direction::Read => *read_rate,
                Direction::Write => *write_rate,
            }),
            _ => None,
        }
    }

    fn draw<R: Rng + ?Sized>(&self, dir: Direction, rate_scale: f64, rng: &mut R) -> f64 {
        match self {
            DelayModel::ExponentialRw { .. } => {
                let rate = self.rate(dir).expect("exponential model has rates") * rate_scale;
                Exp::new(rate).expect("validated rate").sample(rng)
            }
            DelayModel::UniformAsync { max_ms } => f64::from(rng.random_range(0..*max_ms)) / 1000.0,
            DelayModel::Deterministic { secs } => *secs,
            DelayModel::Composite(parts) => parts.iter().map(|p| p.draw(dir, rate_scale, rng)).sum(),
        }
    }

    fn draw_leg<R: Rng + ?Sized>(&self, dir: Direction, rng: &mut R) -> f64 {
        self.draw(dir, 2.0, rng)
    }

    fn draw_round_trip<R: Rng + ?Sized>(&self, dir: Direction, rng: &mut R) -> f64 {
        match self {
            DelayModel::ExponentialRw { .. } => self.draw(dir, 1.0, rng),
            DelayModel::UniformAsync { .. } | DelayModel::Deterministic { .. } => {
                self.draw(dir, 1.0, rng) + self.draw(dir, 1.0, rng)
            }
            DelayModel::Composite(parts) => parts.iter().map(|p| p.draw_round_trip(dir, rng)).sum(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    #[test]
    fn deterministic_is_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = DelayModel::Deterministic { secs: 0.05 };
        for _ in 0..100 {
            assert_eq!(m.sample(Direction::Read, &mut rng).unwrap(), 0.05);
            assert_eq!(
                m.sample_leg(Direction::Write, Leg::Reply, RttSplit::PerLeg, &mut rng),
                0.05
            );
        }
    }

    #[test]
    fn exponential_mean_within_three_sigma() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = DelayModel::ExponentialRw {
            read_rate: 20.0,
            write_rate: 20.0,
        };
        let n = 1_000_000;
        let sum: f64 = (0..n).map(|_| m.sample(Direction::Read, &mut rng).unwrap()).sum();
        let mean = sum / n as f64;
        // exponential(20): mean 0.05, sd 0.05
        let sigma = 0.05 / (n as f64).sqrt();
        assert!((mean - 0.05).abs() < 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn per_leg_split_preserves_round_trip_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let m = DelayModel::ExponentialRw {
            read_rate: 10.0,
            write_rate: 40.0,
        };
        let n = 200_000;
        let rtt: f64 = (0..n)
            .map(|_| {
                m.sample_leg(Direction::Write, Leg::Request, RttSplit::PerLeg, &mut rng)
                    + m.sample_leg(Direction::Write, Leg::Reply, RttSplit::PerLeg, &mut rng)
            })
            .sum::<f64>()
            / n as f64;
        assert!((rtt - 0.025).abs() < 0.0005, "rtt {rtt}");
        assert_eq!(
            m.sample_leg(Direction::Read, Leg::Reply, RttSplit::WholeOnRequest, &mut rng),
            0.0
        );
    }

    #[test]
    fn uniform_async_support_is_zero_to_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = DelayModel::UniformAsync { max_ms: 50 };
        let seen: BTreeSet<u32> = (0..100_000)
            .map(|_| (m.sample(Direction::Read, &mut rng).unwrap() * 1000.0).round() as u32)
            .collect();
        assert_eq!(seen, (0..50).collect());
    }

    #[test]
    fn composite_sums_parts() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = DelayModel::Composite(vec![
            DelayModel::Deterministic { secs: 0.01 },
            DelayModel::Deterministic { secs: 0.02 },
        ]);
        assert!((m.sample(Direction::Read, &mut rng).unwrap() - 0.03).abs() < 1e-15);
    }

    #[test]
    fn non_positive_rate_is_a_config_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = DelayModel::ExponentialRw {
            read_rate: 0.0,
            write_rate: 1.0,
        };
        assert!(matches!(m.sample(Direction::Read, &mut rng), Err(SimError::Config(_))));
        let nested = DelayModel::Composite(vec![DelayModel::UniformAsync { max_ms: 0 }]);
        assert!(nested.validate().is_err());
    }
}
