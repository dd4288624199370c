//! The serialization `π` used to prove 2-atomicity, built per key.
//!
//! Writes are laid out in version order behind a virtual initial write.
//! Reads are then scheduled one by one in invocation order; each is placed
//! immediately after the latest of
//!
//! * the write it read from,
//! * the latest write that responded before it was invoked,
//! * the latest already-scheduled read that responded before it was invoked.
//!
//! For traces produced by a correct protocol the second anchor never moves a
//! read; it exists so that an overly stale read lands where the real-time
//! order requires and shows up as staleness instead of as a real-time
//! violation.

use std::collections::BTreeMap;

use super::trace::{KeyView, OpRecord, Trace, TraceError};
use crate::proto::{Key, OpId, Version};

/// Doubly linked list with integer labels that compare in list order.
/// Insertion splits the label gap; a crowded neighbourhood is spread out
/// over the smallest following window with enough room.
struct OrderList {
    label: Vec<u64>,
    next: Vec<usize>,
}

const NIL: usize = usize::MAX;

impl OrderList {
    fn with_head() -> Self {
        OrderList {
            label: vec![0],
            next: vec![NIL],
        }
    }

    fn insert_after(&mut self, at: usize) -> usize {
        let id = self.label.len();
        let lo = self.label[at];
        let hi = match self.next[at] {
            NIL => u64::MAX,
            n => self.label[n],
        };
        if hi - lo < 2 {
            self.spread_from(at);
        }
        let lo = self.label[at];
        let hi = match self.next[at] {
            NIL => u64::MAX,
            n => self.label[n],
        };
        self.label.push(lo + (hi - lo) / 2);
        self.next.push(self.next[at]);
        self.next[at] = id;
        id
    }

    /// Relabels the nodes following `at` so that the gap after `at` opens.
    fn spread_from(&mut self, at: usize) {
        let base = self.label[at];
        let mut count: u64 = 1;
        let mut cur = self.next[at];
        loop {
            let end = if cur == NIL { u64::MAX } else { self.label[cur] };
            let room = end - base;
            if room / (count + 1) >= count.saturating_mul(count).max(2) || cur == NIL {
                if room / (count + 1) < 2 {
                    self.relabel_all();
                    return;
                }
                let step = room / (count + 1);
                let mut node = self.next[at];
                let mut label = base;
                while node != cur {
                    label += step;
                    self.label[node] = label;
                    node = self.next[node];
                }
                return;
            }
            count += 1;
            cur = self.next[cur];
        }
    }

    fn relabel_all(&mut self) {
        let n = self.label.len() as u64;
        let step = u64::MAX / (n + 2);
        assert!(step >= 2, "order list exhausted its label space");
        let mut node = 0;
        let mut label = 0;
        while node != NIL {
            self.label[node] = label;
            label += step;
            node = self.next[node];
        }
    }

    fn order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.label.len());
        let mut node = 0;
        while node != NIL {
            out.push(node);
            node = self.next[node];
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    InitialWrite,
    Op(OpId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    pub key: Key,
    pub order: Vec<Slot>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// `conflicting` precedes the op in real time but comes after it in `π`.
    RealTime { conflicting: OpId },
    /// The read is more than one version behind the nearest preceding write.
    Staleness {
        read_version: Version,
        latest_version: Version,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub op: OpId,
    pub key: Key,
    pub kind: ViolationKind,
}

struct Built<'a> {
    /// `items[node - 1]` is the op behind list node `node`; node 0 is the
    /// initial write.
    items: Vec<&'a OpRecord>,
    list: OrderList,
}

fn build<'a>(view: &KeyView<'a>) -> Built<'a> {
    let mut list = OrderList::with_head();
    let mut items: Vec<&OpRecord> = Vec::with_capacity(view.writes.len() + view.reads.len());
    let mut write_node = vec![0usize];
    let mut last = 0;
    for w in &view.writes {
        last = list.insert_after(last);
        items.push(w);
        write_node.push(last);
    }
    let mut preceding_max: Option<usize> = None;
    let mut finished = 0;
    for read in &view.reads {
        while finished < view.by_finish.len() {
            let i = view.by_finish[finished];
            if view.reads[i].response >= read.invoke {
                break;
            }
            // Reads get nodes in invocation order, and anything that finished
            // before this invocation was also invoked before it.
            let node = view.writes.len() + 1 + i;
            if preceding_max.is_none_or(|m| list.label[node] > list.label[m]) {
                preceding_max = Some(node);
            }
            finished += 1;
        }
        let from = write_node[read.version.0 as usize];
        let completed = write_node[view.latest_completed_before(read.invoke).0 as usize];
        let mut anchor = if list.label[completed] > list.label[from] {
            completed
        } else {
            from
        };
        if let Some(m) = preceding_max {
            if list.label[m] > list.label[anchor] {
                anchor = m;
            }
        }
        list.insert_after(anchor);
        items.push(read);
    }
    Built { items, list }
}

/// `π` for one key of the trace.
pub fn build_permutation(trace: &Trace, key: Key) -> Result<Permutation, TraceError> {
    let views = trace.key_views()?;
    let Some(view) = views.get(&key) else {
        return Ok(Permutation {
            key,
            order: vec![Slot::InitialWrite],
        });
    };
    let built = build(view);
    let order = built
        .list
        .order()
        .into_iter()
        .map(|node| match node {
            0 => Slot::InitialWrite,
            n => Slot::Op(built.items[n - 1].op),
        })
        .collect();
    Ok(Permutation { key, order })
}

/// Staleness of every read: version of the nearest preceding write in `π`
/// minus the version the read returned.
fn staleness<'a>(built: &Built<'a>) -> Vec<(&'a OpRecord, u64)> {
    let mut out = Vec::new();
    let mut latest = Version::INITIAL;
    for node in built.list.order().into_iter().skip(1) {
        let op = built.items[node - 1];
        if op.is_read() {
            out.push((op, latest.0 - op.version.0.min(latest.0)));
        } else {
            latest = op.version;
        }
    }
    out
}

/// Real-time check: every op must carry a larger label than all ops that
/// responded before its invocation.
fn real_time_violations(built: &Built<'_>, key: Key, out: &mut Vec<Violation>) {
    let n = built.items.len();
    let label = |i: usize| built.list.label[i + 1];
    let mut by_invoke: Vec<usize> = (0..n).collect();
    by_invoke.sort_by_key(|&i| (built.items[i].invoke, built.items[i].op));
    let mut by_finish: Vec<usize> = (0..n).collect();
    by_finish.sort_by_key(|&i| (built.items[i].response, built.items[i].op));
    let mut best: Option<usize> = None;
    let mut f = 0;
    for &i in &by_invoke {
        let op = built.items[i];
        while f < n && built.items[by_finish[f]].response < op.invoke {
            let j = by_finish[f];
            if best.is_none_or(|b| label(j) > label(b)) {
                best = Some(j);
            }
            f += 1;
        }
        if let Some(b) = best {
            if label(b) > label(i) {
                out.push(Violation {
                    op: op.op,
                    key,
                    kind: ViolationKind::RealTime {
                        conflicting: built.items[b].op,
                    },
                });
            }
        }
    }
}

/// Checks every key's `π` for the real-time requirement and for reads more
/// than one version stale. Returns all offending operations.
pub fn verify_2atomicity(trace: &Trace) -> Result<Vec<Violation>, TraceError> {
    let views = trace.key_views()?;
    let mut out = Vec::new();
    for (key, view) in &views {
        let built = build(view);
        real_time_violations(&built, *key, &mut out);
        for (read, k) in staleness(&built) {
            if k > 1 {
                out.push(Violation {
                    op: read.op,
                    key: *key,
                    kind: ViolationKind::Staleness {
                        read_version: read.version,
                        latest_version: Version(read.version.0 + k),
                    },
                });
            }
        }
    }
    Ok(out)
}

/// Number of reads at each staleness `k`.
pub fn staleness_histogram(trace: &Trace) -> Result<BTreeMap<u64, u64>, TraceError> {
    let views = trace.key_views()?;
    let mut hist = BTreeMap::new();
    for view in views.values() {
        for (_, k) in staleness(&build(view)) {
            *hist.entry(k).or_default() += 1;
        }
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::precedes;
    use crate::checker::testutil::{inversion_trace, random_trace, read, trace, write};

    fn ops(p: &Permutation) -> Vec<u64> {
        p.order
            .iter()
            .filter_map(|s| match s {
                Slot::Op(id) => Some(id.0),
                Slot::InitialWrite => None,
            })
            .collect()
    }

    #[test]
    fn order_list_survives_crowded_inserts() {
        let mut l = OrderList::with_head();
        let first = l.insert_after(0);
        let mut nodes = vec![0, first];
        // always insert right after the head: worst case for gap splitting
        for _ in 0..5000 {
            nodes.insert(1, l.insert_after(0));
        }
        assert_eq!(l.order(), nodes);
        assert!(nodes.windows(2).all(|p| l.label[p[0]] < l.label[p[1]]));
    }

    #[test]
    fn sequential_trace_follows_real_time() {
        let t = trace(vec![
            write(1, 1, 0.0, 1.0),
            read(2, 1, 1, 1.5, 2.0),
            write(3, 2, 2.5, 3.0),
            read(4, 2, 2, 3.5, 4.0),
            read(5, 1, 2, 4.5, 5.0),
        ]);
        let p = build_permutation(&t, Key(0)).unwrap();
        assert_eq!(p.order[0], Slot::InitialWrite);
        assert_eq!(ops(&p), vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn inverted_reads_sit_between_w_and_its_successor() {
        let mut t = inversion_trace(2, 1);
        t.ops.push(write(3, 3, 2.5, 3.0));
        let p = build_permutation(&t, Key(0)).unwrap();
        let order = ops(&p);
        let pos = |id| order.iter().position(|&x| x == id).unwrap();
        assert!(pos(2) < pos(10) && pos(10) < pos(3));
        assert!(pos(2) < pos(11) && pos(11) < pos(3));
        assert!(pos(10) < pos(11));
        assert!(verify_2atomicity(&t).unwrap().is_empty());
        let hist = staleness_histogram(&t).unwrap();
        assert_eq!(hist.get(&1), Some(&1));
    }

    #[test]
    fn two_versions_behind_is_a_violation() {
        let t = trace(vec![
            write(1, 1, 0.0, 1.0),
            write(2, 2, 1.5, 2.0),
            write(3, 3, 2.5, 3.0),
            read(4, 1, 1, 3.5, 4.0),
        ]);
        let v = verify_2atomicity(&t).unwrap();
        assert_eq!(
            v,
            vec![Violation {
                op: OpId(4),
                key: Key(0),
                kind: ViolationKind::Staleness {
                    read_version: Version(1),
                    latest_version: Version(3)
                }
            }]
        );
        assert_eq!(staleness_histogram(&t).unwrap().get(&2), Some(&1));
    }

    #[test]
    fn future_read_breaks_real_time() {
        let t = trace(vec![write(1, 1, 2.0, 3.0), read(2, 1, 1, 0.0, 1.0)]);
        let v = verify_2atomicity(&t).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::RealTime { conflicting: OpId(2) });
    }

    #[test]
    fn missing_key_gives_initial_only() {
        let p = build_permutation(&trace(vec![]), Key(3)).unwrap();
        assert_eq!(p.order, vec![Slot::InitialWrite]);
    }

    #[test]
    fn random_regular_traces_respect_real_time_pairwise() {
        for seed in 0..60 {
            let t = random_trace(seed, 40, 4, true);
            let keys: std::collections::BTreeSet<Key> = t.ops.iter().map(|o| o.key).collect();
            for key in keys {
                let p = build_permutation(&t, key).unwrap();
                let order = ops(&p);
                let on_key: Vec<&OpRecord> = t.ops.iter().filter(|o| o.key == key).collect();
                assert_eq!(order.len(), on_key.len());
                let pos = |id: OpId| order.iter().position(|&x| x == id.0).unwrap();
                for a in &on_key {
                    for b in &on_key {
                        if precedes(a, b) {
                            assert!(pos(a.op) < pos(b.op), "seed {seed}: {:?} before {:?}", a.op, b.op);
                        }
                    }
                }
                let writes: Vec<usize> = on_key.iter().filter(|o| !o.is_read()).map(|o| pos(o.op)).collect();
                let mut by_version: Vec<&&OpRecord> = on_key.iter().filter(|o| !o.is_read()).collect();
                by_version.sort_by_key(|w| w.version);
                let sorted: Vec<usize> = by_version.iter().map(|w| pos(w.op)).collect();
                let mut expected = writes.clone();
                expected.sort_unstable();
                assert_eq!(sorted, expected);
            }
        }
    }
}
