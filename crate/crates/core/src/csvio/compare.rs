use std::io::Write;

use super::{CsvError, Provenance, Report};
use crate::analytics::TheoryRow;

/// Metrics present in both a simulation report and a theory row.
pub const COMPARED_METRICS: [&str; 3] = ["p_cp", "p_rwp_given_cp", "p_oni"];

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub clients: usize,
    pub replicas: usize,
    pub metric: &'static str,
    pub theory: f64,
    pub empirical: f64,
}

impl ComparisonRow {
    pub fn abs_delta(&self) -> f64 {
        (self.empirical - self.theory).abs()
    }

    /// Relative to the theory value; infinite when theory is zero and the
    /// empirical value is not.
    pub fn rel_delta(&self) -> f64 {
        if self.theory == 0.0 {
            if self.empirical == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.abs_delta() / self.theory.abs()
        }
    }

    pub fn within(&self, tol: f64) -> bool {
        self.abs_delta() <= tol
    }
}

fn theory_value(row: &TheoryRow, metric: &str) -> f64 {
    match metric {
        "p_cp" => row.p_cp,
        "p_rwp_given_cp" => row.p_rwp_given_cp,
        "p_oni" => row.p_oni,
        _ => unreachable!("not a compared metric"),
    }
}

/// Pairs each report with the theory row of the same `(clients, replicas)`.
/// Reports must carry `clients` and `replicas` metrics.
pub fn compare(theory: &[TheoryRow], reports: &[Report]) -> Result<Vec<ComparisonRow>, CsvError> {
    let mut out = Vec::new();
    for (i, report) in reports.iter().enumerate() {
        let need = |name: &str| {
            report
                .get(name)
                .ok_or_else(|| CsvError::Mismatch(format!("report {} has no `{name}` metric", i + 1)))
        };
        let clients = need("clients")? as usize;
        let replicas = need("replicas")? as usize;
        let row = theory
            .iter()
            .find(|r| r.clients == clients && r.replicas == replicas)
            .ok_or_else(|| {
                CsvError::Mismatch(format!(
                    "report {} is for clients={clients} replicas={replicas}, which the theory file does not cover",
                    i + 1
                ))
            })?;
        for metric in COMPARED_METRICS {
            out.push(ComparisonRow {
                clients,
                replicas,
                metric,
                theory: theory_value(row, metric),
                empirical: need(metric)?,
            });
        }
    }
    Ok(out)
}

pub fn write_comparison<W: Write>(mut out: W, provenance: &Provenance, rows: &[ComparisonRow]) -> Result<(), CsvError> {
    writeln!(out, "{provenance}")?;
    writeln!(out, "clients,replicas,metric,theory,empirical,abs_delta,rel_delta")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.clients,
            r.replicas,
            r.metric,
            r.theory,
            r.empirical,
            r.abs_delta(),
            r.rel_delta()
        )?;
    }
    Ok(())
}
