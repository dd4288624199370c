use super::types::{Key, NodeId, OpId, Version, VersionedValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MessageKind {
    Query,
    QueryReply,
    Update,
    Ack,
    WriteBack,
    WriteBackAck,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    Query {
        key: Key,
    },
    QueryReply(VersionedValue),
    Update(VersionedValue),
    /// Sent for every `Update`, stale or not.
    Ack {
        key: Key,
        version: Version,
    },
    WriteBack(VersionedValue),
    WriteBackAck {
        key: Key,
        version: Version,
    },
}

impl Payload {
    pub fn kind(&self) -> MessageKind {
        match self {
            Payload::Query { .. } => MessageKind::Query,
            Payload::QueryReply(_) => MessageKind::QueryReply,
            Payload::Update(_) => MessageKind::Update,
            Payload::Ack { .. } => MessageKind::Ack,
            Payload::WriteBack(_) => MessageKind::WriteBack,
            Payload::WriteBackAck { .. } => MessageKind::WriteBackAck,
        }
    }

    pub fn key(&self) -> Key {
        match self {
            Payload::Query { key } | Payload::Ack { key, .. } | Payload::WriteBackAck { key, .. } => *key,
            Payload::QueryReply(vv) | Payload::Update(vv) | Payload::WriteBack(vv) => vv.key,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub from: NodeId,
    pub to: NodeId,
    /// The client operation this message belongs to.
    pub op: OpId,
    pub payload: Payload,
}

impl Message {
    pub fn kind(&self) -> MessageKind {
        self.payload.kind()
    }
}
