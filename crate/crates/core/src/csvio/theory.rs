use std::io::Write;

use super::{check_header, split_header, CsvError, Provenance};
use crate::analytics::TheoryRow;

pub const THEORY_COLUMNS: [&str; 12] = [
    "clients",
    "replicas",
    "quorum",
    "max_m",
    "t_prime",
    "p_r_neq_w",
    "p_rprime_neq_w_given",
    "p_rprime_eq_w_given",
    "p_cp",
    "p_cp_closed",
    "p_rwp_given_cp",
    "p_oni",
];

pub fn write_theory<W: Write>(mut out: W, provenance: &Provenance, rows: &[TheoryRow]) -> Result<(), CsvError> {
    writeln!(out, "{provenance}")?;
    writeln!(out, "{}", THEORY_COLUMNS.join(","))?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.clients,
            r.replicas,
            r.quorum,
            r.max_m,
            r.t_prime,
            r.p_r_neq_w,
            r.p_rprime_neq_w_given,
            r.p_rprime_eq_w_given,
            r.p_cp,
            r.p_cp_closed,
            r.p_rwp_given_cp,
            r.p_oni
        )?;
    }
    Ok(())
}

pub fn read_theory(text: &str) -> Result<(Option<Provenance>, Vec<TheoryRow>), CsvError> {
    let (provenance, skipped, body) = split_header(text);
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    check_header(&mut reader, &THEORY_COLUMNS)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record =
            record.map_err(|e| CsvError::row(e.position().map_or(0, |p| p.line()) + skipped, e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line()) + skipped;
        let int = |i: usize| -> Result<usize, CsvError> {
            record[i].trim().parse().map_err(|_| {
                CsvError::row(
                    line,
                    format!("{}: `{}` is not an integer", THEORY_COLUMNS[i], &record[i]),
                )
            })
        };
        let real = |i: usize| -> Result<f64, CsvError> {
            record[i]
                .trim()
                .parse()
                .map_err(|_| CsvError::row(line, format!("{}: `{}` is not a number", THEORY_COLUMNS[i], &record[i])))
        };
        rows.push(TheoryRow {
            clients: int(0)?,
            replicas: int(1)?,
            quorum: int(2)?,
            max_m: int(3)?,
            t_prime: real(4)?,
            p_r_neq_w: real(5)?,
            p_rprime_neq_w_given: real(6)?,
            p_rprime_eq_w_given: real(7)?,
            p_cp: real(8)?,
            p_cp_closed: real(9)?,
            p_rwp_given_cp: real(10)?,
            p_oni: real(11)?,
        });
    }
    Ok((provenance, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{theory_grid, ModelParams, QuadratureSpec};

    #[test]
    fn round_trip_is_exact() {
        let rows = theory_grid(&ModelParams::default(), [3, 5], &QuadratureSpec::default()).unwrap();
        let mut buf = Vec::new();
        write_theory(&mut buf, &Provenance::new("theory", "h", None), &rows).unwrap();
        let (p, back) = read_theory(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(p.unwrap().seed, None);
        assert_eq!(back, rows);
    }
}
