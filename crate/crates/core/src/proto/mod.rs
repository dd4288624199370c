//! Protocol state machines: the 2AM single-writer register and the ABD
//! baseline.
//!
//! Both protocols share the replica handler and the write path. They differ
//! only in reads: a 2AM read returns the freshest value among the first
//! majority of `QueryReply`s, while an ABD read additionally writes that value
//! back to a majority before returning.
//!
//! Nothing here performs I/O or keeps time. A driver (see [`crate::simnet`]
//! and [`crate::workload`]) moves [`Message`]s between [`Client`]s and
//! [`Replica`]s.

mod client;
mod message;
mod replica;
mod types;

pub use client::{Client, Completion, PendingOp, Phase, ProtoError, Role, Step};
pub use message::{Message, MessageKind, Payload};
pub use replica::Replica;
pub use types::{
    majority, max_crashes, ClientId, Key, NodeId, OpId, OpKind, Protocol, ReplicaId, Value, Version, VersionedValue,
};
