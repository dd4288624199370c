use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::message::{Message, Payload};
use super::types::{
    majority, ClientId, Key, NodeId, OpId, OpKind, Protocol, ReplicaId, Value, Version, VersionedValue,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtoError {
    #[error("client {client:?} already has operation {pending:?} in flight")]
    Busy { client: ClientId, pending: OpId },
    #[error("client {0:?} is not the writer")]
    NotWriter(ClientId),
    #[error("a client needs at least one replica")]
    NoReplicas,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Writer,
    Reader,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Write: waiting for `Ack`s.
    Update,
    /// Read: waiting for `QueryReply`s.
    Query,
    /// ABD read only: waiting for `WriteBackAck`s.
    WriteBack,
}

impl Phase {
    /// 1 for the first round-trip, 2 for the ABD write-back.
    pub fn number(self) -> u8 {
        match self {
            Phase::Update | Phase::Query => 1,
            Phase::WriteBack => 2,
        }
    }
}

/// State of the single in-flight operation of a client.
#[derive(Debug, Clone)]
pub struct PendingOp {
    pub op: OpId,
    pub kind: OpKind,
    pub key: Key,
    pub phase: Phase,
    /// Distinct replicas that answered the current phase.
    pub responders: BTreeSet<ReplicaId>,
    /// Write: the pair being written. Read: the freshest pair seen so far.
    pub chosen: Option<VersionedValue>,
}

/// The client's view of a finished operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Completion {
    pub op: OpId,
    pub kind: OpKind,
    pub key: Key,
    /// Version written, or version of the value returned.
    pub version: Version,
    pub value: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    /// Nothing to do; the message was counted or discarded.
    Waiting,
    /// Start of a new phase (ABD write-back).
    Send(Vec<Message>),
    Done(Completion),
}

/// Client-side state machine for both the writer and the readers.
#[derive(Debug, Clone)]
pub struct Client {
    id: ClientId,
    role: Role,
    protocol: Protocol,
    replicas: Vec<ReplicaId>,
    quorum: usize,
    versions: BTreeMap<Key, Version>,
    pending: Option<PendingOp>,
}

impl Client {
    pub fn new(id: ClientId, role: Role, protocol: Protocol, replicas: Vec<ReplicaId>) -> Result<Self, ProtoError> {
        if replicas.is_empty() {
            return Err(ProtoError::NoReplicas);
        }
        let quorum = majority(replicas.len());
        Ok(Client {
            id,
            role,
            protocol,
            replicas,
            quorum,
            versions: BTreeMap::new(),
            pending: None,
        })
    }

    pub fn id(&self) -> ClientId {
        self.id
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn quorum(&self) -> usize {
        self.quorum
    }

    pub fn pending(&self) -> Option<&PendingOp> {
        self.pending.as_ref()
    }

    pub fn is_idle(&self) -> bool {
        self.pending.is_none()
    }

    fn ensure_idle(&self) -> Result<(), ProtoError> {
        match &self.pending {
            Some(p) => Err(ProtoError::Busy {
                client: self.id,
                pending: p.op,
            }),
            None => Ok(()),
        }
    }

    fn broadcast(&self, op: OpId, payload: Payload) -> Vec<Message> {
        self.replicas
            .iter()
            .map(|&r| Message {
                from: NodeId::Client(self.id),
                to: NodeId::Replica(r),
                op,
                payload: payload.clone(),
            })
            .collect()
    }

    /// Starts a write: bumps the key's version and sends one `Update` per
    /// replica. Completes once a majority has acknowledged.
    pub fn write(&mut self, op: OpId, key: Key, value: Value) -> Result<Vec<Message>, ProtoError> {
        if self.role != Role::Writer {
            return Err(ProtoError::NotWriter(self.id));
        }
        self.ensure_idle()?;
        let version = self.versions.entry(key).or_default();
        *version = version.next();
        let vv = VersionedValue {
            key,
            value: Some(value),
            version: *version,
        };
        self.pending = Some(PendingOp {
            op,
            kind: OpKind::Write,
            key,
            phase: Phase::Update,
            responders: BTreeSet::new(),
            chosen: Some(vv),
        });
        Ok(self.broadcast(op, Payload::Update(vv)))
    }

    /// Starts a read: one `Query` per replica. Under 2AM the read returns the
    /// freshest of the first majority of replies; under ABD it then writes
    /// that pair back to a majority before returning.
    pub fn read(&mut self, op: OpId, key: Key) -> Result<Vec<Message>, ProtoError> {
        self.ensure_idle()?;
        self.pending = Some(PendingOp {
            op,
            kind: OpKind::Read,
            key,
            phase: Phase::Query,
            responders: BTreeSet::new(),
            chosen: None,
        });
        Ok(self.broadcast(op, Payload::Query { key }))
    }

    /// Feeds a reply from a replica. Replies for other operations or phases,
    /// and duplicates from the same replica, are dropped.
    pub fn on_message(&mut self, msg: &Message) -> Step {
        let NodeId::Replica(from) = msg.from else {
            return Step::Waiting;
        };
        let Some(pending) = self.pending.as_mut() else {
            return Step::Waiting;
        };
        if pending.op != msg.op {
            return Step::Waiting;
        }
        match (&msg.payload, pending.phase) {
            (Payload::Ack { .. }, Phase::Update) | (Payload::WriteBackAck { .. }, Phase::WriteBack) => {}
            (Payload::QueryReply(vv), Phase::Query) => {
                if pending.responders.contains(&from) {
                    return Step::Waiting;
                }
                if pending.chosen.is_none_or(|c| c.version < vv.version) {
                    pending.chosen = Some(*vv);
                }
            }
            _ => return Step::Waiting,
        }
        if !pending.responders.insert(from) || pending.responders.len() < self.quorum {
            return Step::Waiting;
        }

        let chosen = pending.chosen.expect("a quorum of replies always yields a value");
        if pending.phase == Phase::Query && self.protocol == Protocol::Abd {
            pending.phase = Phase::WriteBack;
            pending.responders.clear();
            let op = pending.op;
            return Step::Send(self.broadcast(op, Payload::WriteBack(chosen)));
        }
        let done = self.pending.take().expect("pending checked above");
        Step::Done(Completion {
            op: done.op,
            kind: done.kind,
            key: done.key,
            version: chosen.version,
            value: chosen.value,
        })
    }
}
