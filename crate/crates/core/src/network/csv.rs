//! Impedance CSV: `freq_hz,re(Z11),re(Z12),...,im(Z11),im(Z12),...`.
//!
//! Port pairs are listed row-major. Networks with more than nine ports use
//! `re(Z_i_j)` so that indices stay unambiguous.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{ImpedanceTable, TableSource};
use crate::error::{Error, Result};
use crate::units::{to_angular, to_cyclic};

/// Reference impedance recorded for CSV tables, which carry none.
pub const CSV_REFERENCE_IMPEDANCE: f64 = 50.0;

fn pair_name(ports: usize, i: usize, j: usize) -> String {
    if ports > 9 {
        format!("Z_{}_{}", i + 1, j + 1)
    } else {
        format!("Z{}{}", i + 1, j + 1)
    }
}

/// Expected header for a `ports`-port table.
pub fn header(ports: usize) -> Vec<String> {
    let mut cols = vec!["freq_hz".to_string()];
    for part in ["re", "im"] {
        for i in 0..ports {
            for j in 0..ports {
                cols.push(format!("{part}({})", pair_name(ports, i, j)));
            }
        }
    }
    cols
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_csv(text: &str) -> Result<ImpedanceTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(text.as_bytes());
    let names: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .iter()
        .map(|s| s.replace(' ', ""))
        .collect();
    let data_cols = names.len().saturating_sub(1);
    let ports = ((data_cols / 2) as f64).sqrt().round() as usize;
    if ports == 0 || 2 * ports * ports != data_cols {
        return Err(parse_err(
            1,
            format!("{} columns do not describe a square port matrix", names.len()),
        ));
    }
    let expected = header(ports);
    if let Some((k, _)) = names
        .iter()
        .zip(&expected)
        .enumerate()
        .find(|(_, (a, b))| !a.eq_ignore_ascii_case(b))
    {
        return Err(parse_err(
            1,
            format!("column {} is '{}', expected '{}'", k + 1, names[k], expected[k]),
        ));
    }

    let mut freqs = Vec::new();
    let mut zs = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != names.len() {
            return Err(parse_err(
                line,
                format!("expected {} columns, found {}", names.len(), record.len()),
            ));
        }
        let values = record
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| parse_err(line, format!("invalid number '{s}'")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let w = to_angular(values[0]);
        if let Some(&prev) = freqs.last() {
            if !(w > prev) {
                return Err(parse_err(line, "frequencies are not strictly increasing"));
            }
        }
        let n = ports * ports;
        let z = DMatrix::from_fn(ports, ports, |i, j| {
            let k = i * ports + j;
            Complex64::new(values[1 + k], values[1 + n + k])
        });
        freqs.push(w);
        zs.push(z);
    }
    if freqs.is_empty() {
        return Err(parse_err(1, "no data rows"));
    }
    ImpedanceTable::new(freqs, zs, CSV_REFERENCE_IMPEDANCE, TableSource::Csv)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<ImpedanceTable> {
    parse_csv(&std::fs::read_to_string(path)?)
}

pub fn write_csv(table: &ImpedanceTable) -> String {
    let p = table.port_count();
    let mut writer = csv::Writer::from_writer(Vec::new());
    // Writing to a Vec cannot fail.
    writer.write_record(header(p)).expect("in-memory csv");
    for (w, z) in table.frequencies().iter().zip(table.matrices()) {
        let mut row = vec![format!("{:e}", to_cyclic(*w))];
        row.extend(z.transpose().iter().map(|c| format!("{:e}", c.re)));
        row.extend(z.transpose().iter().map(|c| format!("{:e}", c.im)));
        writer.write_record(&row).expect("in-memory csv");
    }
    String::from_utf8(writer.into_inner().expect("in-memory csv")).expect("ascii output")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_names() {
        assert_eq!(
            header(2),
            ["freq_hz", "re(Z11)", "re(Z12)", "re(Z21)", "re(Z22)", "im(Z11)", "im(Z12)", "im(Z21)", "im(Z22)"]
        );
        assert_eq!(header(10)[2], "re(Z_1_2)");
    }

    #[test]
    fn round_trip() {
        let text = "freq_hz,re(Z11),re(Z12),re(Z21),re(Z22),im(Z11),im(Z12),im(Z21),im(Z22)\n\
                    1e9,0,0,0,0,-100,-1,-1,-90\n\
                    2e9,0.5,0,0,0,-50,-0.5,-0.5,-45\n";
        let t = parse_csv(text).unwrap();
        assert_eq!(t.port_count(), 2);
        assert_eq!(t.matrices()[1][(0, 0)], Complex64::new(0.5, -50.0));
        assert_eq!(t.matrices()[0][(1, 1)], Complex64::new(0.0, -90.0));
        let back = parse_csv(&write_csv(&t)).unwrap();
        assert_eq!(back.matrices(), t.matrices());
        for (a, b) in back.frequencies().iter().zip(t.frequencies()) {
            assert!((a - b).abs() <= 1e-15 * b);
        }
    }

    #[test]
    fn errors_name_the_line() {
        let bad_row = "freq_hz,re(Z11),im(Z11)\n1e9,0,-1\n2e9,0\n";
        assert!(matches!(parse_csv(bad_row), Err(Error::Parse { line: 3, .. })));
        let bad_num = "freq_hz,re(Z11),im(Z11)\n1e9,0,x\n";
        assert!(matches!(parse_csv(bad_num), Err(Error::Parse { line: 2, .. })));
        let bad_header = "freq,re(Z11),im(Z11)\n1e9,0,-1\n";
        assert!(matches!(parse_csv(bad_header), Err(Error::Parse { line: 1, .. })));
        let order = "freq_hz,re(Z11),im(Z11)\n2e9,0,-1\n1e9,0,-1\n";
        assert!(matches!(parse_csv(order), Err(Error::Parse { line: 3, .. })));
    }
}
