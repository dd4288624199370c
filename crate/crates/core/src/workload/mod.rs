//! Client operation streams.
//!
//! Every client is an M/M/1 queue with rejection: operations arrive as a
//! Poisson process of rate λ, and an arrival while the previous operation is
//! still in service is dropped rather than buffered. Client 0 is normally
//! the single writer and issues only writes; every other client only reads.
//!
//! [`run_experiment`] drives the protocol through [`crate::simnet`], so
//! service time is whatever latency the network produces. [`AbstractReplay`]
//! instead draws service times from an exponential(μ), which is the model
//! behind the analytics.

mod arrivals;
mod experiment;
mod replay;

use thiserror::Error;

use crate::proto::{ClientId, Key, ProtoError};
use crate::simnet::{SimError, SimTime};

pub use arrivals::{drive_client, Admission, ClientQueue};
pub use experiment::{run_experiment, Experiment, ExperimentOutcome, DEFAULT_PROCESSING};
pub use replay::{AbstractReplay, ReplayStats};

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadConfig {
    /// Number of clients, the writer included.
    pub clients: usize,
    pub writer: ClientId,
    /// Poisson arrival rate per client, in operations per second.
    pub arrival_rate: f64,
    /// Exponential service rate, used only by [`AbstractReplay`].
    pub service_rate: Option<f64>,
    /// Accepted operations per client; `None` runs until the horizon.
    pub ops_per_client: Option<u64>,
    /// Each operation picks one of these uniformly.
    pub keys: Vec<Key>,
    /// No arrivals at or after this time; operations still pending here are
    /// dropped from the trace.
    pub horizon: Option<SimTime>,
}

impl Default for WorkloadConfig {
    fn default() -> Self {
        WorkloadConfig {
            clients: 5,
            writer: ClientId(0),
            arrival_rate: 50.0,
            service_rate: None,
            ops_per_client: Some(1000),
            keys: vec![Key(0)],
            horizon: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorkloadError {
    #[error("invalid workload: {0}")]
    Config(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Proto(#[from] ProtoError),
}

impl WorkloadConfig {
    pub fn validate(&self) -> Result<(), WorkloadError> {
        let bad = |msg: String| Err(WorkloadError::Config(msg));
        if self.clients < 2 {
            return bad(format!("need at least 2 clients, got {}", self.clients));
        }
        if self.writer.0 as usize >= self.clients {
            return bad(format!(
                "writer {:?} is not one of the {} clients",
                self.writer, self.clients
            ));
        }
        if !(self.arrival_rate.is_finite() && self.arrival_rate > 0.0) {
            return bad(format!("arrival rate must be positive, got {}", self.arrival_rate));
        }
        if let Some(mu) = self.service_rate {
            if !(mu.is_finite() && mu > 0.0) {
                return bad(format!("service rate must be positive, got {mu}"));
            }
        }
        if self.keys.is_empty() {
            return bad("key set is empty".into());
        }
        if self.ops_per_client.is_none() && self.horizon.is_none() {
            return bad("either an operation count or a horizon is required".into());
        }
        Ok(())
    }

    pub fn is_writer(&self, client: ClientId) -> bool {
        client == self.writer
    }

    pub(crate) fn admits_more(&self, accepted: u64) -> bool {
        self.ops_per_client.is_none_or(|cap| accepted < cap)
    }

    pub(crate) fn before_horizon(&self, t: SimTime) -> bool {
        self.horizon.is_none_or(|h| t < h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_inconsistent_configs() {
        let ok = WorkloadConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            WorkloadConfig {
                clients: 1,
                ..ok.clone()
            },
            WorkloadConfig {
                writer: ClientId(5),
                ..ok.clone()
            },
            WorkloadConfig {
                arrival_rate: 0.0,
                ..ok.clone()
            },
            WorkloadConfig {
                service_rate: Some(-1.0),
                ..ok.clone()
            },
            WorkloadConfig {
                keys: vec![],
                ..ok.clone()
            },
            WorkloadConfig {
                ops_per_client: None,
                horizon: None,
                ..ok.clone()
            },
        ] {
            assert!(matches!(bad.validate(), Err(WorkloadError::Config(_))), "{bad:?}");
        }
    }
}
