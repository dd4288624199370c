//! Offline trace analysis.
//!
//! Everything here is a pure function of a [`Trace`]: precedence, detection
//! of concurrency and read-write patterns, the 2-atomicity serialization and
//! its staleness, atomicity violation counts and latency summaries.
//! Operations left pending at the end of a run never enter a trace.

mod atomicity;
mod latency;
mod patterns;
mod permutation;
mod streaming;
mod trace;

#[cfg(test)]
mod testutil;

pub use atomicity::{verify_atomicity, AtomicityReport};
pub use latency::{latency_stats, summarize, LatencyStats, LatencySummary};
pub use patterns::{detect_cp, detect_rwp, pattern_stats, PatternInstance, PatternReport, WriteRef};
pub use permutation::{
    build_permutation, staleness_histogram, verify_2atomicity, Permutation, Slot, Violation, ViolationKind,
};
pub use streaming::{OutOfOrder, PatternCounter};
pub use trace::{precedes, OpRecord, Trace, TraceError, TraceMeta};

#[cfg(test)]
mod proptests {
    use std::collections::{BTreeMap, BTreeSet};

    use proptest::prelude::*;

    use super::testutil::random_trace;
    use super::*;
    use crate::proto::{OpId, Version};

    /// Exhaustive enumeration over (r, w, w', r') with the initial value as
    /// version 0. Returns read -> (witness set, is_rwp).
    fn brute_force(t: &Trace) -> BTreeMap<OpId, (BTreeSet<OpId>, bool)> {
        let mut out: BTreeMap<OpId, (BTreeSet<OpId>, bool)> = BTreeMap::new();
        for r in t.ops.iter().filter(|o| o.is_read()) {
            for w in t.ops.iter().filter(|o| !o.is_read() && o.key == r.key) {
                if !(w.invoke <= r.invoke && r.invoke <= w.response) {
                    continue;
                }
                let prior = Version(w.version.0 - 1);
                let prior_exists = prior.is_initial()
                    || t.ops
                        .iter()
                        .any(|o| !o.is_read() && o.key == r.key && o.version == prior);
                if !prior_exists {
                    continue;
                }
                for rp in t.ops.iter().filter(|o| o.is_read() && o.key == r.key && o.op != r.op) {
                    if w.invoke <= rp.response && rp.response <= r.invoke {
                        let e = out.entry(r.op).or_default();
                        e.0.insert(rp.op);
                        e.1 |= r.version == prior && rp.version == w.version;
                    }
                }
            }
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn detection_matches_brute_force(seed in any::<u64>(), readers in 2u32..6) {
            let t = random_trace(seed, 200, readers, false);
            let expected = brute_force(&t);
            let got: BTreeMap<OpId, (BTreeSet<OpId>, bool)> = detect_cp(&t)
                .unwrap()
                .into_iter()
                .map(|p| (p.read, (p.witnesses.into_iter().collect(), p.is_rwp)))
                .collect();
            prop_assert_eq!(&got, &expected);
            let stats = pattern_stats(&t).unwrap();
            prop_assert_eq!(stats.cps as usize, expected.len());
            prop_assert_eq!(stats.rwps as usize, expected.values().filter(|e| e.1).count());
            prop_assert_eq!(stats.p_oni, stats.p_cp * stats.p_rwp_given_cp);
            prop_assert!((0.0..=1.0).contains(&stats.p_cp));
        }

        #[test]
        fn permutation_holds_every_op_once(seed in any::<u64>()) {
            let t = random_trace(seed, 80, 3, true);
            let keys: BTreeSet<_> = t.ops.iter().map(|o| o.key).collect();
            let mut seen = BTreeSet::new();
            for key in keys {
                let p = build_permutation(&t, key).unwrap();
                prop_assert_eq!(p.order[0], Slot::InitialWrite);
                for s in &p.order[1..] {
                    let Slot::Op(id) = s else { panic!("initial write repeated") };
                    prop_assert!(seen.insert(*id));
                }
            }
            prop_assert_eq!(seen.len(), t.ops.len());
        }

        #[test]
        fn regular_traces_have_no_real_time_violations(seed in any::<u64>()) {
            let t = random_trace(seed, 120, 4, false);
            let v = verify_2atomicity(&t).unwrap();
            let real_time = v.iter().filter(|v| matches!(v.kind, ViolationKind::RealTime { .. })).count();
            prop_assert_eq!(real_time, 0);
        }
    }
}
