use std::collections::BTreeMap;

use thiserror::Error;

use crate::proto::{ClientId, Key, OpId, OpKind, Protocol, Version};
use crate::simnet::SimTime;

/// One completed operation as observed by its client.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpRecord {
    pub op: OpId,
    pub client: ClientId,
    pub kind: OpKind,
    pub key: Key,
    /// Version written, or the version of the write the read returned.
    pub version: Version,
    pub invoke: SimTime,
    pub response: SimTime,
}

impl OpRecord {
    pub fn latency(&self) -> f64 {
        self.response - self.invoke
    }

    pub fn is_read(&self) -> bool {
        self.kind == OpKind::Read
    }
}

/// `o1 ≺ o2`: o1 responded strictly before o2 was invoked.
pub fn precedes(o1: &OpRecord, o2: &OpRecord) -> bool {
    o1.response < o2.invoke
}

/// Run parameters carried alongside a trace. All optional so externally
/// produced traces can be checked.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TraceMeta {
    pub protocol: Option<Protocol>,
    pub replicas: Option<usize>,
    pub clients: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub meta: TraceMeta,
    pub ops: Vec<OpRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("operation id {0:?} appears more than once")]
    DuplicateOp(OpId),
    #[error("operation {0:?} does not respond strictly after its invocation")]
    NonPositiveDuration(OpId),
    #[error("client {client:?} invoked {second:?} before {first:?} responded")]
    ClientOverlap {
        client: ClientId,
        first: OpId,
        second: OpId,
    },
    #[error("key {key:?} is written by both {first:?} and {second:?}")]
    MultipleWriters {
        key: Key,
        first: ClientId,
        second: ClientId,
    },
    #[error("key {key:?}: writes must carry versions 1,2,3,...; expected {expected:?}, found {found:?} on {op:?}")]
    VersionGap {
        key: Key,
        op: OpId,
        expected: Version,
        found: Version,
    },
    #[error("key {key:?}: write {later:?} does not start after write {earlier:?} responds")]
    WriteOrder { key: Key, earlier: OpId, later: OpId },
    #[error("read {read:?} on key {key:?} returns version {version:?}, which no write in the trace produced")]
    MissingWrite { read: OpId, key: Key, version: Version },
}

impl Trace {
    pub fn new(meta: TraceMeta, ops: Vec<OpRecord>) -> Self {
        Trace { meta, ops }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn reads(&self) -> impl Iterator<Item = &OpRecord> {
        self.ops.iter().filter(|o| o.is_read())
    }

    pub fn writes(&self) -> impl Iterator<Item = &OpRecord> {
        self.ops.iter().filter(|o| !o.is_read())
    }

    /// Checks well-formedness: per-client alternation, single writer per key,
    /// write versions `1..=k` in time order, and every read's version backed
    /// by a write (or the initial value).
    pub fn validate(&self) -> Result<(), TraceError> {
        self.key_views().map(|_| ())
    }

    pub(crate) fn key_views(&self) -> Result<BTreeMap<Key, KeyView<'_>>, TraceError> {
        let mut ids: Vec<OpId> = self.ops.iter().map(|o| o.op).collect();
        ids.sort_unstable();
        if let Some(dup) = ids.windows(2).find(|p| p[0] == p[1]) {
            return Err(TraceError::DuplicateOp(dup[0]));
        }
        drop(ids);
        let mut per_client: BTreeMap<ClientId, Vec<&OpRecord>> = BTreeMap::new();
        for op in &self.ops {
            if op.response <= op.invoke {
                return Err(TraceError::NonPositiveDuration(op.op));
            }
            per_client.entry(op.client).or_default().push(op);
        }
        for (client, ops) in &mut per_client {
            ops.sort_by_key(|o| (o.invoke, o.op));
            for pair in ops.windows(2) {
                if pair[1].invoke < pair[0].response {
                    return Err(TraceError::ClientOverlap {
                        client: *client,
                        first: pair[0].op,
                        second: pair[1].op,
                    });
                }
            }
        }

        let mut views: BTreeMap<Key, KeyView<'_>> = BTreeMap::new();
        for op in &self.ops {
            let view = views.entry(op.key).or_insert_with(|| KeyView::new(op.key));
            match op.kind {
                OpKind::Write => view.writes.push(op),
                OpKind::Read => view.reads.push(op),
            }
        }
        for view in views.values_mut() {
            view.finish()?;
        }
        Ok(views)
    }
}

/// All operations on one key, sorted for the checker's sweeps.
pub(crate) struct KeyView<'a> {
    pub key: Key,
    /// `writes[i]` carries version `i + 1`.
    pub writes: Vec<&'a OpRecord>,
    /// Sorted by invocation time.
    pub reads: Vec<&'a OpRecord>,
    /// Indices into `reads`, sorted by response time.
    pub by_finish: Vec<usize>,
}

impl<'a> KeyView<'a> {
    fn new(key: Key) -> Self {
        KeyView {
            key,
            writes: Vec::new(),
            reads: Vec::new(),
            by_finish: Vec::new(),
        }
    }

    fn finish(&mut self) -> Result<(), TraceError> {
        let key = self.key;
        self.writes.sort_by_key(|w| (w.version, w.invoke, w.op));
        if let Some(first) = self.writes.first() {
            if let Some(other) = self.writes.iter().find(|w| w.client != first.client) {
                return Err(TraceError::MultipleWriters {
                    key,
                    first: first.client,
                    second: other.client,
                });
            }
        }
        for (i, w) in self.writes.iter().enumerate() {
            let expected = Version(i as u64 + 1);
            if w.version != expected {
                return Err(TraceError::VersionGap {
                    key,
                    op: w.op,
                    expected,
                    found: w.version,
                });
            }
        }
        for pair in self.writes.windows(2) {
            if pair[1].invoke <= pair[0].response {
                return Err(TraceError::WriteOrder {
                    key,
                    earlier: pair[0].op,
                    later: pair[1].op,
                });
            }
        }
        let latest = Version(self.writes.len() as u64);
        if let Some(r) = self.reads.iter().find(|r| r.version > latest) {
            return Err(TraceError::MissingWrite {
                read: r.op,
                key,
                version: r.version,
            });
        }
        self.reads.sort_by_key(|r| (r.invoke, r.op));
        let mut by_finish: Vec<usize> = (0..self.reads.len()).collect();
        by_finish.sort_by_key(|&i| (self.reads[i].response, self.reads[i].op));
        self.by_finish = by_finish;
        Ok(())
    }

    /// Index into `writes` of the write whose interval contains `t`.
    pub fn write_covering(&self, t: SimTime) -> Option<usize> {
        let after = self.writes.partition_point(|w| w.invoke <= t);
        let idx = after.checked_sub(1)?;
        (t <= self.writes[idx].response).then_some(idx)
    }

    /// Version of the latest write that responded strictly before `t`.
    pub fn latest_completed_before(&self, t: SimTime) -> Version {
        // Write intervals are disjoint and ordered, so responses are sorted.
        Version(self.writes.partition_point(|w| w.response < t) as u64)
    }

    /// Range of `by_finish` positions whose read responded within `[lo, hi]`.
    pub fn finished_within(&self, lo: SimTime, hi: SimTime) -> std::ops::Range<usize> {
        let start = self.by_finish.partition_point(|&i| self.reads[i].response < lo);
        let end = self.by_finish.partition_point(|&i| self.reads[i].response <= hi);
        start..end.max(start)
    }
}
