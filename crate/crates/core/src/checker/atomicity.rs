use super::trace::{Trace, TraceError};

/// Atomicity violations, counted per read. A read may fall in more than one
/// category; `reads` counts it once.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AtomicityReport {
    /// Reads that returned an older version than some read that responded
    /// before they were invoked.
    pub inversions: u64,
    /// Reads older than the latest write completed before their invocation.
    pub stale_reads: u64,
    /// Reads of a version whose write started after they responded.
    pub future_reads: u64,
    pub reads: u64,
}

impl AtomicityReport {
    pub fn is_atomic(&self) -> bool {
        self.reads == 0
    }
}

/// Counts reads that break atomicity. Each read is compared against
/// everything that finished before its invocation, so the sweep does not
/// consult the pattern detector.
pub fn verify_atomicity(trace: &Trace) -> Result<AtomicityReport, TraceError> {
    let views = trace.key_views()?;
    let mut report = AtomicityReport::default();
    for view in views.values() {
        let mut newest_seen = None;
        let mut f = 0;
        for read in &view.reads {
            while f < view.by_finish.len() && view.reads[view.by_finish[f]].response < read.invoke {
                let v = view.reads[view.by_finish[f]].version;
                newest_seen = newest_seen.max(Some(v));
                f += 1;
            }
            let inverted = newest_seen.is_some_and(|v| v > read.version);
            let stale = view.latest_completed_before(read.invoke) > read.version;
            let future = !read.version.is_initial() && view.writes[read.version.0 as usize - 1].invoke > read.response;
            report.inversions += u64::from(inverted);
            report.stale_reads += u64::from(stale);
            report.future_reads += u64::from(future);
            report.reads += u64::from(inverted || stale || future);
        }
    }
    Ok(report)
}
