use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use twoam::analytics::{theory_row, AnalyticsError, LagPolicy, ModelParams, QuadratureSpec};
use twoam::checker::{
    latency_stats, pattern_stats, staleness_histogram, verify_2atomicity, verify_atomicity, LatencySummary, Trace,
    ViolationKind,
};
use twoam::csvio::{self, Provenance, Report};
use twoam::proto::{Key, Protocol, ReplicaId};
use twoam::simnet::{DelayModel, FaultPlan, RttSplit, SimTime};
use twoam::workload::{run_experiment, Experiment, WorkloadConfig, DEFAULT_PROCESSING};

use crate::settings::{digest, parse_sizes, Settings};
use crate::{UsageError, Verdict};

fn experiment(s: &Settings, protocol: Protocol) -> Result<Experiment, UsageError> {
    let fixed_ms: Option<f64> = s.opt("fixed-ms")?;
    let async_ms: Option<u32> = s.opt("async-ms")?;
    let read_rate: Option<f64> = s.opt("delay-rate-read")?;
    let write_rate: Option<f64> = s.opt("delay-rate-write")?;
    let exponential = read_rate.is_some() || write_rate.is_some();
    let chosen = [fixed_ms.is_some(), async_ms.is_some(), exponential];
    if chosen.iter().filter(|&&c| c).count() > 1 {
        return Err(UsageError(
            "choose one delay model: --fixed-ms, --async-ms or --delay-rate-read/--delay-rate-write".into(),
        ));
    }
    let delays = if let Some(ms) = fixed_ms {
        DelayModel::Deterministic { secs: ms / 1000.0 }
    } else if exponential {
        DelayModel::ExponentialRw {
            read_rate: s.get("delay-rate-read", 20.0)?,
            write_rate: s.get("delay-rate-write", 20.0)?,
        }
    } else {
        DelayModel::UniformAsync {
            max_ms: s.get("async-ms", 50)?,
        }
    };
    let keys: u32 = s.get("keys", 1)?;
    if keys == 0 {
        return Err(UsageError("keys must be at least 1".into()));
    }
    let mut faults = FaultPlan::none();
    if let Some(list) = s.raw("crash") {
        for item in list.split(',').map(str::trim).filter(|i| !i.is_empty()) {
            let parsed = item
                .split_once('@')
                .and_then(|(r, t)| Some((r.trim().parse::<u32>().ok()?, t.trim().parse::<f64>().ok()?)))
                .filter(|&(_, t)| t.is_finite() && t >= 0.0);
            let (replica, at) =
                parsed.ok_or_else(|| UsageError(format!("invalid crash `{item}`, expected REPLICA@SECS")))?;
            faults = faults.crash(ReplicaId(replica), SimTime::from_secs(at));
        }
    }
    Ok(Experiment {
        workload: WorkloadConfig {
            clients: s.get("clients", 5)?,
            arrival_rate: s.get("rate", 50.0)?,
            ops_per_client: Some(s.get("ops", 1000)?),
            keys: (0..keys).map(Key).collect(),
            ..WorkloadConfig::default()
        },
        replicas: s.get("replicas", 5)?,
        delays,
        protocol,
        faults,
        seed: s.get("seed", 0)?,
        split: RttSplit::PerLeg,
        processing: s.get("processing-us", DEFAULT_PROCESSING * 1e6)? / 1e6,
    })
}

fn run(exp: &Experiment) -> anyhow::Result<twoam::workload::ExperimentOutcome> {
    // Every failure here stems from the configuration.
    run_experiment(exp).map_err(|e| UsageError(e.to_string()).into())
}

fn push_latency(report: &mut Report, prefix: &str, summary: Option<LatencySummary>) {
    let Some(l) = summary else {
        report.push(format!("{prefix}_count"), 0.0);
        return;
    };
    report.push(format!("{prefix}_count"), l.count as f64);
    for (name, v) in [
        ("p25", l.p25),
        ("p50", l.p50),
        ("p75", l.p75),
        ("whisker_low", l.whisker_low),
        ("whisker_high", l.whisker_high),
        ("mean", l.mean),
    ] {
        report.push(format!("{prefix}_{name}"), v);
    }
}

/// Runs every checker, adds the results to `report` and returns whether the
/// trace meets its protocol's guarantee. Without a protocol only
/// 2-atomicity is required.
fn analyse(trace: &Trace, report: &mut Report) -> anyhow::Result<Verdict> {
    trace
        .validate()
        .map_err(|e| UsageError(format!("malformed trace: {e}")))?;
    let clients = trace.meta.clients.unwrap_or_else(|| {
        trace
            .ops
            .iter()
            .map(|o| o.client)
            .collect::<std::collections::BTreeSet<_>>()
            .len()
    });
    report.push("clients", clients as f64);
    if let Some(n) = trace.meta.replicas {
        report.push("replicas", n as f64);
    }
    let stats = pattern_stats(trace)?;
    let writes = trace.ops.len() as u64 - stats.reads;
    report.push("reads", stats.reads as f64);
    report.push("writes", writes as f64);
    report.push("empty", f64::from(u8::from(stats.reads == 0)));
    report.push("cps", stats.cps as f64);
    report.push("rwps", stats.rwps as f64);
    report.push("p_cp", stats.p_cp);
    report.push("p_rwp_given_cp", stats.p_rwp_given_cp);
    report.push("p_oni", stats.p_oni);
    for (m, count) in &stats.cps_by_witnesses {
        report.push(format!("cps_m{m}"), *count as f64);
    }
    let violations = verify_2atomicity(trace)?;
    let atomicity = verify_atomicity(trace)?;
    report.push("violations_2atomicity", violations.len() as f64);
    report.push("atomicity_violations", atomicity.reads as f64);
    report.push("inversions", atomicity.inversions as f64);
    report.push("stale_reads", atomicity.stale_reads as f64);
    report.push("future_reads", atomicity.future_reads as f64);
    for (k, count) in staleness_histogram(trace)? {
        report.push(format!("staleness_{k}"), count as f64);
    }
    let latency = latency_stats(trace);
    push_latency(report, "read_latency", latency.read);
    push_latency(report, "write_latency", latency.write);

    for v in &violations {
        match v.kind {
            ViolationKind::RealTime { conflicting } => {
                eprintln!(
                    "violation: op {} on key {} is ordered before op {} which precedes it",
                    v.op.0, v.key.0, conflicting.0
                )
            }
            ViolationKind::Staleness {
                read_version,
                latest_version,
            } => eprintln!(
                "violation: op {} on key {} read version {} but the latest write is version {}",
                v.op.0, v.key.0, read_version.0, latest_version.0
            ),
        }
    }
    let mut ok = violations.is_empty();
    if trace.meta.protocol == Some(Protocol::Abd) && !atomicity.is_atomic() {
        eprintln!("violation: {} reads break atomicity", atomicity.reads);
        ok = false;
    }
    if stats.reads == 0 {
        eprintln!("note: trace holds no reads; pattern proportions are reported as 0");
    }
    Ok(Verdict::from_ok(ok))
}

fn write_to(
    out: Option<&Path>,
    write: impl FnOnce(&mut dyn Write) -> Result<(), csvio::CsvError>,
) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            let mut buf = Vec::new();
            write(&mut buf)?;
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            fs::write(path, buf).with_context(|| format!("writing {}", path.display()))?;
        }
        None => write(&mut std::io::stdout().lock())?,
    }
    Ok(())
}

fn read_file(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())).into())
}

pub fn simulate(s: &Settings) -> anyhow::Result<Verdict> {
    let protocol = s.get("protocol", Protocol::TwoAm)?;
    let exp = experiment(s, protocol)?;
    let outcome = run(&exp)?;
    let provenance = Provenance::new("trace", &s.hash("simulate"), Some(exp.seed));
    let dir = PathBuf::from(s.raw("out").unwrap_or_else(|| ".".into()));

    let mut report = Report::new(
        Provenance {
            kind: "report".into(),
            ..provenance.clone()
        }
        .with("protocol", protocol),
    );
    let verdict = analyse(&outcome.trace, &mut report)?;
    report.push("accepted", outcome.accepted as f64);
    report.push("rejected", outcome.rejected as f64);
    report.push("unfinished", outcome.unfinished as f64);
    report.push("messages_sent", outcome.messages_sent as f64);
    report.push("messages_dropped", outcome.messages_dropped as f64);

    let trace_path = dir.join("trace.csv");
    let report_path = dir.join("report.csv");
    write_to(Some(&trace_path), |w| {
        csvio::write_trace(w, &provenance, &outcome.trace)
    })?;
    write_to(Some(&report_path), |w| csvio::write_report(w, &report))?;
    println!(
        "{protocol}: {} ops, P(CP) = {}, P(RWP|CP) = {}, P(ONI) = {}, {} 2-atomicity violations",
        outcome.trace.len(),
        report.get("p_cp").unwrap_or(0.0),
        report.get("p_rwp_given_cp").unwrap_or(0.0),
        report.get("p_oni").unwrap_or(0.0),
        report.get("violations_2atomicity").unwrap_or(0.0)
    );
    println!("wrote {} and {}", trace_path.display(), report_path.display());
    Ok(verdict)
}

pub fn theory(s: &Settings, force: bool) -> anyhow::Result<Verdict> {
    let clients: Option<usize> = s.opt("clients")?;
    let replicas: Option<usize> = s.opt("replicas")?;
    let points: Vec<(usize, usize)> = match (s.raw("sizes"), clients, replicas) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
            return Err(UsageError("--sizes cannot be combined with --clients or --replicas".into()).into())
        }
        (Some(list), None, None) => parse_sizes(&list)?.into_iter().map(|n| (n, n)).collect(),
        (None, None, None) => {
            s.note("sizes", "2-15");
            (2..=15).map(|n| (n, n)).collect()
        }
        (None, c, r) => vec![(c.or(r).unwrap_or(5), r.or(c).unwrap_or(5))],
    };
    let base = ModelParams {
        arrival_rate: s.get("rate", 10.0)?,
        service_rate: s.get("service-rate", 10.0)?,
        read_rate: s.get("delay-rate-read", 20.0)?,
        write_rate: s.get("delay-rate-write", 20.0)?,
        lag_policy: if force { LagPolicy::Clamp } else { LagPolicy::Refuse },
        ..ModelParams::default()
    };
    s.note("force", force);
    let spec = QuadratureSpec::with_tol(s.get("tol", 1e-9)?);
    let max_m: Option<usize> = s.opt("max-m")?;
    let mut rows = Vec::new();
    for (clients, replicas) in points {
        let params = ModelParams {
            clients,
            replicas,
            ..base
        };
        match theory_row(&params, &spec, max_m) {
            Ok(row) => rows.push(row),
            Err(e @ AnalyticsError::NoConvergence { .. }) => {
                eprintln!("N={clients} n={replicas}: {e}");
                return Ok(Verdict::Fail);
            }
            Err(e) => return Err(UsageError(format!("N={clients} n={replicas}: {e}")).into()),
        }
    }
    if base.t_prime() < 0.0 {
        eprintln!("note: t' = {} s is negative and was clamped to 0", base.t_prime());
    }
    let provenance = Provenance::new("theory", &s.hash("theory"), None);
    let out = s.raw("out").map(PathBuf::from);
    write_to(out.as_deref(), |w| csvio::write_theory(w, &provenance, &rows))?;
    Ok(Verdict::Pass)
}

pub fn check(s: &Settings, path: &Path) -> anyhow::Result<Verdict> {
    let text = read_file(path)?;
    let (source, trace) = csvio::read_trace(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    s.note("trace", digest(text.as_bytes()));
    let mut p = Provenance::new("report", &s.hash("check"), source.and_then(|p| p.seed));
    if let Some(protocol) = trace.meta.protocol {
        p = p.with("protocol", protocol);
    }
    let mut report = Report::new(p);
    let verdict = analyse(&trace, &mut report)?;
    let out = s.raw("out").map(PathBuf::from);
    write_to(out.as_deref(), |w| csvio::write_report(w, &report))?;
    if verdict == Verdict::Pass {
        eprintln!("{}: ok", path.display());
    }
    Ok(verdict)
}

pub fn compare(s: &Settings, theory: &Path, reports: &[PathBuf]) -> anyhow::Result<Verdict> {
    let text = read_file(theory)?;
    s.note("theory", digest(text.as_bytes()));
    let (_, rows) = csvio::read_theory(&text).map_err(|e| UsageError(format!("{}: {e}", theory.display())))?;
    let mut parsed = Vec::new();
    for (i, path) in reports.iter().enumerate() {
        let text = read_file(path)?;
        s.note(&format!("report{i}"), digest(text.as_bytes()));
        parsed.push(csvio::read_report(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))?);
    }
    let table = csvio::compare(&rows, &parsed).map_err(|e| UsageError(e.to_string()))?;
    let tol: Option<f64> = s.opt("tol")?;
    let provenance = Provenance::new("comparison", &s.hash("compare"), None);
    let out = s.raw("out").map(PathBuf::from);
    write_to(out.as_deref(), |w| csvio::write_comparison(w, &provenance, &table))?;
    let Some(tol) = tol else {
        return Ok(Verdict::Pass);
    };
    let mut ok = true;
    for row in table.iter().filter(|r| !r.within(tol)) {
        eprintln!(
            "N={} n={} {}: |{} - {}| exceeds {tol}",
            row.clients, row.replicas, row.metric, row.empirical, row.theory
        );
        ok = false;
    }
    Ok(Verdict::from_ok(ok))
}

pub fn latency(s: &Settings, traces: &[PathBuf]) -> anyhow::Result<Verdict> {
    let mut sources: Vec<(String, Trace)> = Vec::new();
    let compare_runs = traces.is_empty();
    if compare_runs {
        for protocol in [Protocol::TwoAm, Protocol::Abd] {
            sources.push((protocol.to_string(), run(&experiment(s, protocol)?)?.trace));
        }
    } else {
        for (i, path) in traces.iter().enumerate() {
            let text = read_file(path)?;
            s.note(&format!("trace{i}"), digest(text.as_bytes()));
            let (_, trace) = csvio::read_trace(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
            sources.push((path.display().to_string(), trace));
        }
    }
    let seed = if compare_runs { Some(s.get("seed", 0)?) } else { None };
    let provenance = Provenance::new("latency", &s.hash("latency"), seed);
    let stats: Vec<_> = sources.iter().map(|(name, t)| (name, latency_stats(t))).collect();
    let out = s.raw("out").map(PathBuf::from);
    write_to(out.as_deref(), |w| {
        writeln!(w, "{provenance}")?;
        writeln!(w, "source,kind,count,p25,p50,p75,whisker_low,whisker_high,mean")?;
        for (name, st) in &stats {
            for (kind, l) in [("R", st.read), ("W", st.write)] {
                if let Some(l) = l {
                    writeln!(
                        w,
                        "{name},{kind},{},{},{},{},{},{},{}",
                        l.count, l.p25, l.p50, l.p75, l.whisker_low, l.whisker_high, l.mean
                    )?;
                }
            }
        }
        Ok(())
    })?;
    if !compare_runs {
        return Ok(Verdict::Pass);
    }
    let (Some(fast), Some(slow)) = (stats[0].1.read, stats[1].1.read) else {
        eprintln!("note: no reads completed, nothing to compare");
        return Ok(Verdict::Pass);
    };
    let ok = fast.p50 < slow.p50;
    if !ok {
        eprintln!("2am median read latency {} is not below abd's {}", fast.p50, slow.p50);
    }
    Ok(Verdict::from_ok(ok))
}
