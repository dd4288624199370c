//! Deterministic discrete-event simulation: virtual clock, delay models,
//! message transport and replica crashes.
//!
//! A run is a pure function of its seed and configuration. Events are
//! totally ordered by `(time, posting sequence)`, so equal timestamps never
//! depend on float comparison, and every consumer of randomness draws from
//! its own [`SeedTree`] stream.

mod delay;
mod fault;
mod network;
mod queue;
mod rng;
mod time;

use thiserror::Error;

pub use delay::{DelayModel, Direction, Leg, RttSplit};
pub use fault::FaultPlan;
pub use network::Network;
pub use queue::{Event, EventId, EventQueue, RunLimit};
pub use rng::{Purpose, SeedTree};
pub use time::SimTime;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation configuration: {0}")]
    Config(String),
    #[error("event posted at {at} but the clock is already at {now}")]
    PastEvent { at: SimTime, now: SimTime },
    #[error("crashing {requested} replicas exceeds the minority bound of {allowed}")]
    MajorityCrash { requested: usize, allowed: usize },
}
