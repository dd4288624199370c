//! Concurrency patterns, read-write patterns and old-new inversions.
//!
//! For a read `r` on some key, let `w` be the write whose interval contains
//! `r`'s invocation (unique, since one writer's writes never overlap) and `w'`
//! the write just before it. The read exhibits a concurrency pattern when
//! some other read `r'` on the key responded within `[w.invoke, r.invoke]`.
//! The pattern is a read-write pattern, i.e. an old-new inversion, when `r`
//! returned `w'` while one of those `r'` returned `w`.

use std::collections::BTreeMap;

use super::trace::{KeyView, OpRecord, Trace, TraceError};
use crate::proto::{Key, OpId, Version};

/// Reference to a write in a pattern. The initial value acts as a write
/// that precedes everything.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WriteRef {
    Initial,
    Op(OpId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternInstance {
    pub key: Key,
    pub read: OpId,
    /// The write concurrent with the read's invocation.
    pub write: OpId,
    /// The write immediately before `write`.
    pub prior_write: WriteRef,
    /// Every read that responded within `[write.invoke, read.invoke]`.
    pub witnesses: Vec<OpId>,
    pub is_rwp: bool,
}

/// Counts behind the empirical pattern proportions.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternReport {
    pub reads: u64,
    pub cps: u64,
    pub rwps: u64,
    pub p_cp: f64,
    pub p_rwp_given_cp: f64,
    pub p_oni: f64,
    /// Number of concurrency patterns by witness count `m`.
    pub cps_by_witnesses: BTreeMap<usize, u64>,
}

impl PatternReport {
    pub fn from_counts(reads: u64, cps: u64, rwps: u64) -> Self {
        let p_cp = if reads == 0 { 0.0 } else { cps as f64 / reads as f64 };
        let p_rwp_given_cp = if cps == 0 { 0.0 } else { rwps as f64 / cps as f64 };
        PatternReport {
            reads,
            cps,
            rwps,
            p_cp,
            p_rwp_given_cp,
            // Product form keeps P(ONI) = P(CP) * P(RWP|CP) exact in floating
            // point; it equals #RWP/#R up to rounding.
            p_oni: p_cp * p_rwp_given_cp,
            cps_by_witnesses: BTreeMap::new(),
        }
    }

    /// No reads: every proportion is undefined and reported as 0.
    pub fn is_empty(&self) -> bool {
        self.reads == 0
    }
}

struct Candidate<'v, 'a> {
    read: &'a OpRecord,
    write: &'a OpRecord,
    prior: WriteRef,
    witnesses: &'v [usize],
}

fn scan<'v, 'a>(view: &'v KeyView<'a>, mut visit: impl FnMut(Candidate<'v, 'a>)) {
    for read in &view.reads {
        let Some(wi) = view.write_covering(read.invoke) else {
            continue;
        };
        let write = view.writes[wi];
        let range = view.finished_within(write.invoke, read.invoke);
        if range.is_empty() {
            continue;
        }
        let prior = if wi == 0 {
            WriteRef::Initial
        } else {
            WriteRef::Op(view.writes[wi - 1].op)
        };
        visit(Candidate {
            read,
            write,
            prior,
            witnesses: &view.by_finish[range],
        });
    }
}

fn is_rwp(view: &KeyView<'_>, c: &Candidate<'_, '_>) -> bool {
    let new = c.write.version;
    let old = Version(new.0 - 1);
    c.read.version == old && c.witnesses.iter().any(|&i| view.reads[i].version == new)
}

/// Every concurrency pattern in the trace, at most one per read.
pub fn detect_cp(trace: &Trace) -> Result<Vec<PatternInstance>, TraceError> {
    let views = trace.key_views()?;
    let mut out = Vec::new();
    for view in views.values() {
        scan(view, |c| {
            out.push(PatternInstance {
                key: view.key,
                read: c.read.op,
                write: c.write.op,
                prior_write: c.prior,
                witnesses: c.witnesses.iter().map(|&i| view.reads[i].op).collect(),
                is_rwp: is_rwp(view, &c),
            })
        });
    }
    Ok(out)
}

/// The concurrency patterns that are also read-write patterns.
pub fn detect_rwp(trace: &Trace) -> Result<Vec<PatternInstance>, TraceError> {
    Ok(detect_cp(trace)?.into_iter().filter(|p| p.is_rwp).collect())
}

/// `#R`, `#CP`, `#RWP` and the proportions derived from them.
pub fn pattern_stats(trace: &Trace) -> Result<PatternReport, TraceError> {
    let views = trace.key_views()?;
    let mut reads = 0;
    let mut cps = 0;
    let mut rwps = 0;
    let mut by_m: BTreeMap<usize, u64> = BTreeMap::new();
    for view in views.values() {
        reads += view.reads.len() as u64;
        scan(view, |c| {
            cps += 1;
            *by_m.entry(c.witnesses.len()).or_default() += 1;
            if is_rwp(view, &c) {
                rwps += 1;
            }
        });
    }
    let mut report = PatternReport::from_counts(reads, cps, rwps);
    report.cps_by_witnesses = by_m;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::testutil::{inversion_trace, read, trace, write};

    #[test]
    fn sequential_trace_has_no_patterns() {
        let t = trace(vec![
            write(1, 1, 0.0, 1.0),
            read(2, 1, 1, 1.5, 2.0),
            write(3, 2, 2.5, 3.0),
            read(4, 2, 2, 3.5, 4.0),
        ]);
        assert!(detect_cp(&t).unwrap().is_empty());
    }

    #[test]
    fn inversion_trace_is_one_cp_and_one_rwp() {
        let t = inversion_trace(2, 1);
        let cps = detect_cp(&t).unwrap();
        assert_eq!(cps.len(), 1);
        let cp = &cps[0];
        assert_eq!(cp.read, OpId(11));
        assert_eq!(cp.write, OpId(2));
        assert_eq!(cp.prior_write, WriteRef::Op(OpId(1)));
        assert_eq!(cp.witnesses, vec![OpId(10)]);
        assert!(cp.is_rwp);
        assert_eq!(detect_rwp(&t).unwrap().len(), 1);
    }

    #[test]
    fn cp_without_inversion_when_read_returns_new_value() {
        let t = inversion_trace(2, 2);
        assert_eq!(detect_cp(&t).unwrap().len(), 1);
        assert!(detect_rwp(&t).unwrap().is_empty());
    }

    #[test]
    fn initial_value_serves_as_prior_write() {
        let t = trace(vec![
            write(1, 1, 0.0, 1.0),
            read(10, 1, 1, 0.1, 0.3),
            read(11, 2, 0, 0.5, 0.9),
        ]);
        let cps = detect_cp(&t).unwrap();
        assert_eq!(cps.len(), 1);
        assert_eq!(cps[0].prior_write, WriteRef::Initial);
        assert!(cps[0].is_rwp);
    }

    #[test]
    fn desk_scale_proportions() {
        let r = PatternReport::from_counts(800_000, 428_344, 44);
        assert!((r.p_cp - 0.53543).abs() < 5e-6);
        assert!((r.p_rwp_given_cp - 0.000102721).abs() < 5e-10);
        assert!((r.p_oni - 0.000055).abs() < 1e-12);
        assert_eq!(r.p_oni, r.p_cp * r.p_rwp_given_cp);
    }

    #[test]
    fn empty_trace_is_flagged() {
        let r = pattern_stats(&trace(vec![])).unwrap();
        assert!(r.is_empty());
        assert_eq!((r.p_cp, r.p_rwp_given_cp, r.p_oni), (0.0, 0.0, 0.0));
    }

    #[test]
    fn witness_histogram_counts_cps() {
        let mut ops = inversion_trace(2, 1).ops;
        // a second witness finishing inside [w.invoke, r.invoke]
        ops.push(read(12, 2, 1, 1.05, 1.25));
        let r = pattern_stats(&trace(ops)).unwrap();
        assert_eq!(r.cps, 1);
        assert_eq!(r.cps_by_witnesses.get(&2), Some(&1));
    }
}
