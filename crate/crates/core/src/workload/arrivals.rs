use rand::Rng;
use rand_distr::{Distribution, Exp};

use super::WorkloadError;
use crate::proto::ClientId;
use crate::simnet::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admission {
    Accepted,
    /// The client was busy; the arrival is logged and dropped.
    Rejected,
}

/// Admission state of one client: at most one operation in service.
#[derive(Debug, Clone)]
pub struct ClientQueue {
    client: ClientId,
    gaps: Exp<f64>,
    busy: bool,
    next_arrival: SimTime,
    accepted: u64,
    rejected: u64,
}

impl ClientQueue {
    pub fn new(client: ClientId, rate: f64) -> Result<Self, WorkloadError> {
        let gaps = Exp::new(rate)
            .ok()
            .filter(|_| rate > 0.0 && rate.is_finite())
            .ok_or_else(|| WorkloadError::Config(format!("arrival rate must be positive, got {rate}")))?;
        Ok(ClientQueue {
            client,
            gaps,
            busy: false,
            next_arrival: SimTime::ZERO,
            accepted: 0,
            rejected: 0,
        })
    }

    pub fn client(&self) -> ClientId {
        self.client
    }

    pub fn is_busy(&self) -> bool {
        self.busy
    }

    /// Time of the most recently drawn arrival.
    pub fn next_arrival(&self) -> SimTime {
        self.next_arrival
    }

    pub fn accepted(&self) -> u64 {
        self.accepted
    }

    pub fn rejected(&self) -> u64 {
        self.rejected
    }

    /// Draws the next arrival time, an exponential gap after the previous one.
    pub fn advance<R: Rng + ?Sized>(&mut self, rng: &mut R) -> SimTime {
        self.next_arrival = self.next_arrival + self.gaps.sample(rng);
        self.next_arrival
    }

    pub fn offer(&mut self) -> Admission {
        if self.busy {
            self.rejected += 1;
            Admission::Rejected
        } else {
            self.busy = true;
            self.accepted += 1;
            Admission::Accepted
        }
    }

    pub fn finish(&mut self) {
        self.busy = false;
    }
}

/// Endless Poisson arrival times for `queue`.
pub fn drive_client<'a, R: Rng + ?Sized>(
    queue: &'a mut ClientQueue,
    rng: &'a mut R,
) -> impl Iterator<Item = SimTime> + 'a {
    std::iter::from_fn(move || Some(queue.advance(rng)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simnet::{Purpose, SeedTree};

    #[test]
    fn poisson_count_over_horizon() {
        let mut rng = SeedTree::new(7).stream(Purpose::Arrivals, 0);
        let mut q = ClientQueue::new(ClientId(1), 50.0).unwrap();
        let n = drive_client(&mut q, &mut rng).take_while(|t| t.secs() < 100.0).count() as f64;
        assert!((n - 5000.0).abs() < 3.0 * 5000f64.sqrt(), "{n}");
    }

    #[test]
    fn busy_client_rejects() {
        let mut q = ClientQueue::new(ClientId(1), 1.0).unwrap();
        assert_eq!(q.offer(), Admission::Accepted);
        assert_eq!(q.offer(), Admission::Rejected);
        q.finish();
        assert_eq!(q.offer(), Admission::Accepted);
        assert_eq!((q.accepted(), q.rejected()), (2, 1));
    }

    #[test]
    fn non_positive_rate_is_rejected() {
        assert!(ClientQueue::new(ClientId(0), 0.0).is_err());
        assert!(ClientQueue::new(ClientId(0), f64::NAN).is_err());
    }
}
