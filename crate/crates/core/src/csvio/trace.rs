use std::io::Write;

use super::{check_header, split_header, CsvError, Provenance};
use crate::checker::{OpRecord, Trace, TraceMeta};
use crate::proto::{ClientId, Key, OpId, OpKind, Version};
use crate::simnet::SimTime;

pub const TRACE_COLUMNS: [&str; 7] = [
    "op_id",
    "client_id",
    "kind",
    "key",
    "version",
    "invoke_time_s",
    "response_time_s",
];

/// Writes `trace` with twelve fractional digits per timestamp. Protocol,
/// replica and client counts from the trace metadata are appended to the
/// provenance line.
pub fn write_trace<W: Write>(mut out: W, provenance: &Provenance, trace: &Trace) -> Result<(), CsvError> {
    let mut p = provenance.clone();
    if let Some(protocol) = trace.meta.protocol {
        p = p.with("protocol", protocol);
    }
    if let Some(n) = trace.meta.replicas {
        p = p.with("replicas", n);
    }
    if let Some(c) = trace.meta.clients {
        p = p.with("clients", c);
    }
    writeln!(out, "{p}")?;
    writeln!(out, "{}", TRACE_COLUMNS.join(","))?;
    for o in &trace.ops {
        writeln!(
            out,
            "{},{},{},{},{},{:.12},{:.12}",
            o.op.0,
            o.client.0,
            o.kind.as_char(),
            o.key.0,
            o.version.0,
            o.invoke.secs(),
            o.response.secs()
        )?;
    }
    Ok(())
}

fn parse_time(field: &str, line: u64, column: &str) -> Result<SimTime, CsvError> {
    let secs: f64 = field
        .trim()
        .parse()
        .map_err(|_| CsvError::row(line, format!("{column}: `{field}` is not a number")))?;
    if !(secs.is_finite() && secs >= 0.0) {
        return Err(CsvError::row(
            line,
            format!("{column}: `{field}` is not a non-negative time"),
        ));
    }
    Ok(SimTime::from_secs(secs))
}

fn parse_int<T: std::str::FromStr>(field: &str, line: u64, column: &str) -> Result<T, CsvError> {
    field
        .trim()
        .parse()
        .map_err(|_| CsvError::row(line, format!("{column}: `{field}` is not a non-negative integer")))
}

/// Parses a trace file. Errors name the offending line.
pub fn read_trace(text: &str) -> Result<(Option<Provenance>, Trace), CsvError> {
    let (provenance, skipped, body) = split_header(text);
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
    check_header(&mut reader, &TRACE_COLUMNS)?;
    let mut ops = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line()) + skipped;
            CsvError::row(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line()) + skipped;
        let kind = match record[2].trim() {
            "R" => OpKind::Read,
            "W" => OpKind::Write,
            other => return Err(CsvError::row(line, format!("kind: `{other}` is neither R nor W"))),
        };
        let invoke = parse_time(&record[5], line, "invoke_time_s")?;
        let response = parse_time(&record[6], line, "response_time_s")?;
        ops.push(OpRecord {
            op: OpId(parse_int(&record[0], line, "op_id")?),
            client: ClientId(parse_int(&record[1], line, "client_id")?),
            kind,
            key: Key(parse_int(&record[3], line, "key")?),
            version: Version(parse_int(&record[4], line, "version")?),
            invoke,
            response,
        });
    }
    let meta = TraceMeta {
        protocol: provenance.as_ref().and_then(|p| p.get("protocol")?.parse().ok()),
        replicas: provenance.as_ref().and_then(|p| p.get("replicas")?.parse().ok()),
        clients: provenance.as_ref().and_then(|p| p.get("clients")?.parse().ok()),
    };
    Ok((provenance, Trace::new(meta, ops)))
}
