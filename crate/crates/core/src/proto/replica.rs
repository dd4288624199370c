use std::collections::BTreeMap;

use super::message::{Message, Payload};
use super::types::{Key, NodeId, ReplicaId, VersionedValue};

/// Server-side register state. The handler runs one message at a time to
/// completion.
#[derive(Debug, Clone)]
pub struct Replica {
    id: ReplicaId,
    store: BTreeMap<Key, VersionedValue>,
    crashed: bool,
}

impl Replica {
    pub fn new(id: ReplicaId) -> Self {
        Replica {
            id,
            store: BTreeMap::new(),
            crashed: false,
        }
    }

    pub fn id(&self) -> ReplicaId {
        self.id
    }

    pub fn is_crashed(&self) -> bool {
        self.crashed
    }

    /// Crash-stop. A crashed replica never replies again.
    pub fn crash(&mut self) {
        self.crashed = true;
    }

    /// Current value for `key`; keys never written hold the initial value.
    pub fn get(&self, key: Key) -> VersionedValue {
        self.store
            .get(&key)
            .copied()
            .unwrap_or_else(|| VersionedValue::initial(key))
    }

    /// Handles one incoming message and returns the reply, if any.
    ///
    /// `Update` and `WriteBack` overwrite the stored pair only when the
    /// incoming version is strictly larger, but are acknowledged either way.
    pub fn on_message(&mut self, msg: &Message) -> Option<Message> {
        if self.crashed {
            return None;
        }
        let payload = match &msg.payload {
            Payload::Query { key } => Payload::QueryReply(self.get(*key)),
            Payload::Update(vv) => {
                self.apply(*vv);
                Payload::Ack {
                    key: vv.key,
                    version: vv.version,
                }
            }
            Payload::WriteBack(vv) => {
                self.apply(*vv);
                Payload::WriteBackAck {
                    key: vv.key,
                    version: vv.version,
                }
            }
            // Replies are addressed to clients; a replica ignores them.
            Payload::QueryReply(_) | Payload::Ack { .. } | Payload::WriteBackAck { .. } => return None,
        };
        Some(Message {
            from: NodeId::Replica(self.id),
            to: msg.from,
            op: msg.op,
            payload,
        })
    }

    fn apply(&mut self, incoming: VersionedValue) {
        let current = self.get(incoming.key);
        if current.version < incoming.version {
            self.store.insert(incoming.key, incoming);
        }
    }
}
