use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::arrivals::{Admission, ClientQueue};
use super::{WorkloadConfig, WorkloadError};
use crate::checker::{OpRecord, Trace, TraceMeta};
use crate::proto::{Client, ClientId, Message, NodeId, OpId, Protocol, Replica, ReplicaId, Role, Step, Value};
use crate::simnet::{DelayModel, Direction, EventQueue, FaultPlan, Network, Purpose, RttSplit, SeedTree, SimTime};

/// Everything that determines a protocol-driven run.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub workload: WorkloadConfig,
    pub replicas: usize,
    pub delays: DelayModel,
    pub protocol: Protocol,
    pub faults: FaultPlan,
    pub seed: u64,
    pub split: RttSplit,
    /// Seconds a replica spends on each message before replying. Keeps
    /// operations strictly longer than zero when message delays can be 0.
    pub processing: f64,
}

/// One microsecond.
pub const DEFAULT_PROCESSING: f64 = 1e-6;

impl Default for Experiment {
    /// Five clients on five replicas, exponential round trips at 20/s.
    fn default() -> Self {
        Experiment {
            workload: WorkloadConfig::default(),
            replicas: 5,
            delays: DelayModel::ExponentialRw {
                read_rate: 20.0,
                write_rate: 20.0,
            },
            protocol: Protocol::TwoAm,
            faults: FaultPlan::none(),
            seed: 0,
            split: RttSplit::PerLeg,
            processing: DEFAULT_PROCESSING,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    /// Completed operations, ordered by op id (that is, by invocation).
    pub trace: Trace,
    pub accepted: u64,
    pub rejected: u64,
    /// Accepted operations still in flight when the run stopped.
    pub unfinished: u64,
    pub messages_sent: u64,
    pub messages_dropped: u64,
}

enum Action {
    Arrival(usize),
    Deliver(Message, Direction),
}

struct Driver {
    client: Client,
    queue: ClientQueue,
    arrivals: ChaCha8Rng,
    keys: ChaCha8Rng,
    in_flight: Option<(OpId, SimTime)>,
}

struct Run<'e> {
    exp: &'e Experiment,
    events: EventQueue<Action>,
    net: Network,
    replicas: Vec<Replica>,
    drivers: Vec<Driver>,
    ops: Vec<OpRecord>,
    next_op: u64,
}

impl Run<'_> {
    fn send(&mut self, msgs: Vec<Message>, dir: Direction, from: SimTime) -> Result<(), WorkloadError> {
        for m in msgs {
            if let Some(at) = self.net.transmit(&m, dir, from) {
                self.events.post(at, Action::Deliver(m, dir))?;
            }
        }
        Ok(())
    }

    fn schedule_arrival(&mut self, c: usize) -> Result<(), WorkloadError> {
        let w = &self.exp.workload;
        let d = &mut self.drivers[c];
        if !w.admits_more(d.queue.accepted()) {
            return Ok(());
        }
        let at = d.queue.advance(&mut d.arrivals);
        if w.before_horizon(at) {
            self.events.post(at, Action::Arrival(c))?;
        }
        Ok(())
    }

    fn arrival(&mut self, c: usize) -> Result<(), WorkloadError> {
        let now = self.events.now();
        let keys = &self.exp.workload.keys;
        let d = &mut self.drivers[c];
        if d.queue.offer() == Admission::Accepted {
            let op = OpId(self.next_op);
            self.next_op += 1;
            let key = keys[d.keys.random_range(0..keys.len())];
            d.in_flight = Some((op, now));
            let (msgs, dir) = match d.client.role() {
                Role::Writer => (d.client.write(op, key, Value(op.0))?, Direction::Write),
                Role::Reader => (d.client.read(op, key)?, Direction::Read),
            };
            self.send(msgs, dir, now)?;
        }
        self.schedule_arrival(c)
    }

    fn deliver(&mut self, msg: Message, dir: Direction) -> Result<(), WorkloadError> {
        let now = self.events.now();
        if !self.net.deliverable(&msg, now) {
            return Ok(());
        }
        match msg.to {
            NodeId::Replica(r) => {
                if let Some(reply) = self.replicas[r.0 as usize].on_message(&msg) {
                    self.send(vec![reply], dir, now + self.exp.processing)?;
                }
            }
            NodeId::Client(c) => {
                let d = &mut self.drivers[c.0 as usize];
                match d.client.on_message(&msg) {
                    Step::Waiting => {}
                    Step::Send(msgs) => self.send(msgs, dir, now)?,
                    Step::Done(done) => {
                        let (op, invoke) = d.in_flight.take().expect("completion of an issued op");
                        debug_assert_eq!(op, done.op);
                        if now <= invoke {
                            return Err(WorkloadError::Config(format!(
                                "operation {} completed in zero time; use a positive processing time",
                                op.0
                            )));
                        }
                        d.queue.finish();
                        self.ops.push(OpRecord {
                            op,
                            client: c,
                            kind: done.kind,
                            key: done.key,
                            version: done.version,
                            invoke,
                            response: now,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Runs the protocol over the simulated network until every client has
/// issued its operations or the horizon is reached.
pub fn run_experiment(exp: &Experiment) -> Result<ExperimentOutcome, WorkloadError> {
    let w = &exp.workload;
    w.validate()?;
    if exp.replicas == 0 {
        return Err(WorkloadError::Config("need at least one replica".into()));
    }
    exp.faults.validate(exp.replicas)?;
    if !(exp.processing.is_finite() && exp.processing >= 0.0) {
        return Err(WorkloadError::Config(format!(
            "processing time must be non-negative, got {}",
            exp.processing
        )));
    }
    let seeds = SeedTree::new(exp.seed);
    let mut net = Network::new(exp.delays.clone(), exp.split, exp.replicas, seeds)?;
    for &(r, at) in &exp.faults.crashes {
        net.crash(r, at)?;
    }
    let replica_ids: Vec<ReplicaId> = (0..exp.replicas as u32).map(ReplicaId).collect();
    let mut drivers = Vec::with_capacity(w.clients);
    for c in 0..w.clients {
        let id = ClientId(c as u32);
        let role = if w.is_writer(id) { Role::Writer } else { Role::Reader };
        drivers.push(Driver {
            client: Client::new(id, role, exp.protocol, replica_ids.clone())?,
            queue: ClientQueue::new(id, w.arrival_rate)?,
            arrivals: seeds.stream(Purpose::Arrivals, c as u64),
            keys: seeds.stream(Purpose::KeyChoice, c as u64),
            in_flight: None,
        });
    }
    let mut run = Run {
        exp,
        events: EventQueue::new(),
        net,
        replicas: replica_ids.into_iter().map(Replica::new).collect(),
        drivers,
        ops: Vec::new(),
        next_op: 0,
    };
    for c in 0..w.clients {
        run.schedule_arrival(c)?;
    }
    let limit = w.horizon.unwrap_or(SimTime::from_secs(f64::MAX));
    while let Some(ev) = run.events.pop_due(limit) {
        match ev.action {
            Action::Arrival(c) => run.arrival(c)?,
            Action::Deliver(msg, dir) => run.deliver(msg, dir)?,
        }
    }
    let unfinished = run.drivers.iter().filter(|d| d.in_flight.is_some()).count() as u64;
    let mut ops = run.ops;
    ops.sort_by_key(|o| o.op);
    Ok(ExperimentOutcome {
        trace: Trace::new(
            TraceMeta {
                protocol: Some(exp.protocol),
                replicas: Some(exp.replicas),
                clients: Some(w.clients),
            },
            ops,
        ),
        accepted: run.drivers.iter().map(|d| d.queue.accepted()).sum(),
        rejected: run.drivers.iter().map(|d| d.queue.rejected()).sum(),
        unfinished,
        messages_sent: run.net.sent(),
        messages_dropped: run.net.dropped(),
    })
}
