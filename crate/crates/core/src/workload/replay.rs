use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use super::arrivals::{Admission, ClientQueue};
use super::{WorkloadConfig, WorkloadError};
use crate::checker::{OpRecord, Trace, TraceMeta};
use crate::proto::{ClientId, Key, OpId, OpKind, Version};
use crate::simnet::{Purpose, SeedTree, SimTime};

/// Queue-level replay of the workload with exponential(μ) service and no
/// protocol underneath.
///
/// Yields completed operations in invocation order (writes first on ties),
/// so it can feed a [`PatternCounter`](crate::checker::PatternCounter)
/// without holding the trace. Reads return the latest write completed before
/// their invocation, so only the timing of the result is of interest.
pub struct AbstractReplay {
    cfg: WorkloadConfig,
    clients: Vec<ReplayClient>,
    heads: BinaryHeap<Reverse<(SimTime, bool, usize)>>,
    last_write: BTreeMap<Key, (SimTime, Version)>,
    next_op: u64,
}

struct ReplayClient {
    queue: ClientQueue,
    service: Exp<f64>,
    arrivals: ChaCha8Rng,
    services: ChaCha8Rng,
    keys: ChaCha8Rng,
    busy_until: SimTime,
    busy_time: f64,
    head: Option<(SimTime, SimTime, Key)>,
}

/// Occupancy and admission counts of a replay so far.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayStats {
    pub accepted: u64,
    pub rejected: u64,
    /// Per client, the fraction of `[0, horizon]` spent serving an operation.
    pub busy_fraction: Vec<f64>,
}

impl ReplayClient {
    fn pull(&mut self, cfg: &WorkloadConfig) -> Option<(SimTime, SimTime, Key)> {
        loop {
            if !cfg.admits_more(self.queue.accepted()) {
                return None;
            }
            let t = self.queue.advance(&mut self.arrivals);
            if !cfg.before_horizon(t) {
                return None;
            }
            if self.busy_until <= t {
                self.queue.finish();
            }
            if self.queue.offer() == Admission::Rejected {
                continue;
            }
            let end = t + self.service.sample(&mut self.services);
            self.busy_until = end;
            let counted = cfg.horizon.map_or(end, |h| end.min(h));
            self.busy_time += counted - t;
            let key = cfg.keys[self.keys.random_range(0..cfg.keys.len())];
            return Some((t, end, key));
        }
    }
}

impl AbstractReplay {
    pub fn new(cfg: &WorkloadConfig, seed: u64) -> Result<Self, WorkloadError> {
        cfg.validate()?;
        let mu = cfg
            .service_rate
            .ok_or_else(|| WorkloadError::Config("abstract replay needs a service rate".into()))?;
        let seeds = SeedTree::new(seed);
        let mut clients = Vec::with_capacity(cfg.clients);
        for c in 0..cfg.clients {
            clients.push(ReplayClient {
                queue: ClientQueue::new(ClientId(c as u32), cfg.arrival_rate)?,
                service: Exp::new(mu).expect("validated service rate"),
                arrivals: seeds.stream(Purpose::Arrivals, c as u64),
                services: seeds.stream(Purpose::Service, c as u64),
                keys: seeds.stream(Purpose::KeyChoice, c as u64),
                busy_until: SimTime::ZERO,
                busy_time: 0.0,
                head: None,
            });
        }
        let mut replay = AbstractReplay {
            cfg: cfg.clone(),
            clients,
            heads: BinaryHeap::new(),
            last_write: BTreeMap::new(),
            next_op: 0,
        };
        for c in 0..cfg.clients {
            replay.refill(c);
        }
        Ok(replay)
    }

    fn refill(&mut self, c: usize) {
        let client = &mut self.clients[c];
        client.head = client.pull(&self.cfg);
        if let Some((t, _, _)) = client.head {
            let is_read = !self.cfg.is_writer(ClientId(c as u32));
            self.heads.push(Reverse((t, is_read, c)));
        }
    }

    pub fn stats(&self) -> ReplayStats {
        let span = |c: &ReplayClient| match self.cfg.horizon {
            Some(h) => h.secs(),
            None => c.busy_until.secs(),
        };
        ReplayStats {
            accepted: self.clients.iter().map(|c| c.queue.accepted()).sum(),
            rejected: self.clients.iter().map(|c| c.queue.rejected()).sum(),
            busy_fraction: self
                .clients
                .iter()
                .map(|c| if span(c) > 0.0 { c.busy_time / span(c) } else { 0.0 })
                .collect(),
        }
    }

    /// Drains the replay into an in-memory trace.
    pub fn into_trace(mut self) -> (Trace, ReplayStats) {
        let ops: Vec<OpRecord> = self.by_ref().collect();
        let meta = TraceMeta {
            protocol: None,
            replicas: None,
            clients: Some(self.cfg.clients),
        };
        (Trace::new(meta, ops), self.stats())
    }
}

impl Iterator for AbstractReplay {
    type Item = OpRecord;

    fn next(&mut self) -> Option<OpRecord> {
        loop {
            let Reverse((_, _, c)) = self.heads.pop()?;
            let (invoke, response, key) = self.clients[c].head.take().expect("queued head");
            self.refill(c);
            if self.cfg.horizon.is_some_and(|h| response > h) {
                continue;
            }
            let client = ClientId(c as u32);
            let prior = self.last_write.get(&key).copied();
            let (kind, version) = if self.cfg.is_writer(client) {
                let v = prior.map_or(Version::INITIAL, |p| p.1).next();
                self.last_write.insert(key, (response, v));
                (OpKind::Write, v)
            } else {
                let v = match prior {
                    None => Version::INITIAL,
                    Some((ft, v)) if ft < invoke => v,
                    Some((_, v)) => Version(v.0 - 1),
                };
                (OpKind::Read, v)
            };
            let op = OpId(self.next_op);
            self.next_op += 1;
            return Some(OpRecord {
                op,
                client,
                kind,
                key,
                version,
                invoke,
                response,
            });
        }
    }
}
