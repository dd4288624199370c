use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;

use super::delay::{DelayModel, Direction, Leg, RttSplit};
use super::rng::{Purpose, SeedTree};
use super::time::SimTime;
use super::SimError;
use crate::proto::{max_crashes, Message, NodeId, ReplicaId};

/// Point-to-point links between clients and replicas. Live links deliver
/// every message exactly once after a sampled delay; order is not preserved.
pub struct Network {
    model: DelayModel,
    split: RttSplit,
    replicas: usize,
    seeds: SeedTree,
    streams: BTreeMap<NodeId, ChaCha8Rng>,
    crashed: BTreeMap<ReplicaId, SimTime>,
    sent: u64,
    dropped: u64,
}

fn stream_index(node: NodeId) -> u64 {
    match node {
        NodeId::Client(c) => u64::from(c.0),
        NodeId::Replica(r) => (1 << 32) | u64::from(r.0),
    }
}

impl Network {
    pub fn new(model: DelayModel, split: RttSplit, replicas: usize, seeds: SeedTree) -> Result<Self, SimError> {
        model.validate()?;
        Ok(Network {
            model,
            split,
            replicas,
            seeds,
            streams: BTreeMap::new(),
            crashed: BTreeMap::new(),
            sent: 0,
            dropped: 0,
        })
    }

    /// Schedules a crash of `replica` at `at`. Rejected if the crash set
    /// would no longer be a minority.
    pub fn crash(&mut self, replica: ReplicaId, at: SimTime) -> Result<(), SimError> {
        if replica.0 as usize >= self.replicas {
            return Err(SimError::Config(format!(
                "crash target {replica:?} outside 0..{}",
                self.replicas
            )));
        }
        let allowed = max_crashes(self.replicas);
        let requested = self.crashed.len() + usize::from(!self.crashed.contains_key(&replica));
        if requested > allowed {
            return Err(SimError::MajorityCrash { requested, allowed });
        }
        let entry = self.crashed.entry(replica).or_insert(at);
        *entry = (*entry).min(at);
        Ok(())
    }

    pub fn is_crashed(&self, replica: ReplicaId, at: SimTime) -> bool {
        self.crashed.get(&replica).is_some_and(|&t| t <= at)
    }

    fn endpoint_down(&self, node: NodeId, at: SimTime) -> bool {
        match node {
            NodeId::Replica(r) => self.is_crashed(r, at),
            NodeId::Client(_) => false,
        }
    }

    /// Delivery time for `msg` sent at `now`, or `None` if the sender is
    /// already down.
    pub fn transmit(&mut self, msg: &Message, dir: Direction, now: SimTime) -> Option<SimTime> {
        if self.endpoint_down(msg.from, now) {
            self.dropped += 1;
            return None;
        }
        let leg = match msg.from {
            NodeId::Client(_) => Leg::Request,
            NodeId::Replica(_) => Leg::Reply,
        };
        let seeds = self.seeds;
        let rng = self
            .streams
            .entry(msg.from)
            .or_insert_with(|| seeds.stream(Purpose::Network, stream_index(msg.from)));
        let delay = self.model.sample_leg(dir, leg, self.split, rng);
        self.sent += 1;
        Some(now + delay)
    }

    /// Whether a message arriving at `at` is still delivered: messages to or
    /// from a replica that crashed by then are lost.
    pub fn deliverable(&mut self, msg: &Message, at: SimTime) -> bool {
        let ok = !self.endpoint_down(msg.from, at) && !self.endpoint_down(msg.to, at);
        if !ok {
            self.dropped += 1;
        }
        ok
    }

    pub fn sent(&self) -> u64 {
        self.sent
    }

    pub fn dropped(&self) -> u64 {
        self.dropped
    }
}
