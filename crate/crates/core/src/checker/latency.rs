use super::trace::Trace;
use crate::proto::OpKind;

/// Box-plot summary of operation latencies in seconds. Whiskers follow
/// Tukey: the most extreme samples within 1.5 IQR of the box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencySummary {
    pub count: usize,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyStats {
    /// `None` when the trace has no op of that kind.
    pub read: Option<LatencySummary>,
    pub write: Option<LatencySummary>,
}

/// Linearly interpolated percentile of sorted data, `q` in `[0, 1]`.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(mut samples: Vec<f64>) -> Option<LatencySummary> {
    if samples.is_empty() {
        return None;
    }
    samples.sort_by(f64::total_cmp);
    let p25 = percentile(&samples, 0.25);
    let p75 = percentile(&samples, 0.75);
    let fence = 1.5 * (p75 - p25);
    let whisker_low = *samples.iter().find(|&&x| x >= p25 - fence).unwrap_or(&samples[0]);
    let whisker_high = *samples
        .iter()
        .rev()
        .find(|&&x| x <= p75 + fence)
        .unwrap_or(&samples[samples.len() - 1]);
    Some(LatencySummary {
        count: samples.len(),
        p25,
        p50: percentile(&samples, 0.5),
        p75,
        whisker_low,
        whisker_high,
        mean: samples.iter().sum::<f64>() / samples.len() as f64,
    })
}

pub fn latency_stats(trace: &Trace) -> LatencyStats {
    let of = |kind| {
        summarize(
            trace
                .ops
                .iter()
                .filter(|o| o.kind == kind)
                .map(|o| o.latency())
                .collect(),
        )
    };
    LatencyStats {
        read: of(OpKind::Read),
        write: of(OpKind::Write),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::testutil::{read, trace, write};

    #[test]
    fn single_op_collapses_every_percentile() {
        let s = latency_stats(&trace(vec![write(1, 1, 1.0, 1.25)]));
        let w = s.write.unwrap();
        assert_eq!(
            (w.p25, w.p50, w.p75, w.whisker_low, w.whisker_high),
            (0.25, 0.25, 0.25, 0.25, 0.25)
        );
        assert!(s.read.is_none());
    }

    #[test]
    fn quartiles_interpolate_and_whiskers_clip_outliers() {
        let mut ops: Vec<_> = (0..5).map(|i| read(i, i as u32 + 1, 0, 0.0, 1.0 + i as f64)).collect();
        ops.push(read(9, 9, 0, 0.0, 100.0));
        let r = latency_stats(&trace(ops)).read.unwrap();
        assert_eq!(r.p50, 3.5);
        assert_eq!(r.p25, 2.25);
        assert_eq!(r.p75, 4.75);
        assert_eq!(r.whisker_high, 5.0);
        assert_eq!(r.whisker_low, 1.0);
    }
}
