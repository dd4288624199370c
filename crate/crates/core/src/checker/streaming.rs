use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use super::patterns::PatternReport;
use super::trace::OpRecord;
use crate::proto::{Key, OpId, Version};
use crate::simnet::SimTime;

/// Pattern counts for op streams too long to hold in memory.
///
/// Ops must arrive ordered by invocation time, writes before reads at equal
/// times. Memory stays proportional to the number of reads in flight. The
/// counts match [`pattern_stats`](super::pattern_stats) on the same ops.
#[derive(Debug, Default)]
pub struct PatternCounter {
    keys: BTreeMap<Key, KeyState>,
    last: Option<(SimTime, bool)>,
    reads: u64,
    cps: u64,
    rwps: u64,
    by_m: BTreeMap<usize, u64>,
}

#[derive(Debug, Default)]
struct KeyState {
    write: Option<(SimTime, SimTime, Version)>,
    /// Reads not yet past the sweep line, keyed by response.
    in_flight: BinaryHeap<Reverse<(SimTime, Version)>>,
    /// Reads that responded since the current write was invoked.
    witnesses: usize,
    new_witnesses: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutOfOrder(pub OpId);

impl KeyState {
    fn advance(&mut self, to: SimTime, inclusive: bool) {
        while let Some(&Reverse((ft, v))) = self.in_flight.peek() {
            if ft > to || (!inclusive && ft == to) {
                break;
            }
            self.in_flight.pop();
            self.witnesses += 1;
            if self.write.is_some_and(|w| w.2 == v) {
                self.new_witnesses += 1;
            }
        }
    }
}

impl PatternCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, op: &OpRecord) -> Result<(), OutOfOrder> {
        let rank = (op.invoke, op.is_read());
        if self.last.is_some_and(|last| rank < last) {
            return Err(OutOfOrder(op.op));
        }
        self.last = Some(rank);
        let key = self.keys.entry(op.key).or_default();
        if !op.is_read() {
            // A read responding exactly at the invocation still witnesses it.
            key.advance(op.invoke, false);
            key.write = Some((op.invoke, op.response, op.version));
            key.witnesses = 0;
            key.new_witnesses = 0;
            return Ok(());
        }
        self.reads += 1;
        key.advance(op.invoke, true);
        if let Some((_, ft, v)) = key.write {
            if op.invoke <= ft && key.witnesses > 0 {
                self.cps += 1;
                *self.by_m.entry(key.witnesses).or_default() += 1;
                if op.version.0 + 1 == v.0 && key.new_witnesses > 0 {
                    self.rwps += 1;
                }
            }
        }
        key.in_flight.push(Reverse((op.response, op.version)));
        Ok(())
    }

    pub fn report(&self) -> PatternReport {
        let mut r = PatternReport::from_counts(self.reads, self.cps, self.rwps);
        r.cps_by_witnesses = self.by_m.clone();
        r
    }
}
