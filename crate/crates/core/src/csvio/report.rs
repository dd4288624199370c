use std::io::Write;

use super::{check_header, split_header, CsvError, Provenance};

/// Named scalar metrics, one CSV row each, in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub provenance: Provenance,
    pub metrics: Vec<(String, f64)>,
}

impl Report {
    pub fn new(provenance: Provenance) -> Self {
        Report {
            provenance,
            metrics: Vec::new(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.push((name.into(), value));
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }
}

pub fn write_report<W: Write>(mut out: W, report: &Report) -> Result<(), CsvError> {
    writeln!(out, "{}", report.provenance)?;
    writeln!(out, "metric,value")?;
    for (name, value) in &report.metrics {
        writeln!(out, "{name},{value}")?;
    }
    Ok(())
}

pub fn read_report(text: &str) -> Result<Report, CsvError> {
    let (provenance, skipped, body) = split_header(text);
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    check_header(&mut reader, &["metric", "value"])?;
    let mut report = Report::new(provenance.unwrap_or_default());
    for record in reader.records() {
        let record =
            record.map_err(|e| CsvError::row(e.position().map_or(0, |p| p.line()) + skipped, e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line()) + skipped;
        let value = record[1]
            .trim()
            .parse()
            .map_err(|_| CsvError::row(line, format!("value `{}` is not a number", &record[1])))?;
        report.push(record[0].trim(), value);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let mut r = Report::new(Provenance::new("report", "h", Some(3)));
        r.push("reads", 800000.0);
        r.push("p_oni", 0.1 + 0.2);
        let mut buf = Vec::new();
        write_report(&mut buf, &r).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("\nreads,800000\n"));
        assert_eq!(read_report(&text).unwrap(), r);
    }

    #[test]
    fn non_numeric_value_is_located() {
        let text = "# twoam report config=h seed=1\nmetric,value\nreads,3\np_cp,x\n";
        assert!(matches!(read_report(text), Err(CsvError::Row { line: 4, .. })));
    }
}
