//! Touchstone v1 (`.sNp`) reader and writer.
//!
//! Option line: `# <unit> <S|Y|Z> <RI|MA|DB> R <Z0>`, case-insensitive,
//! missing fields take the v1 defaults (GHz, S, MA, 50 Ω). Two-port records
//! are ordered `S11 S21 S12 S22`; larger networks are written row-major with
//! each matrix row starting on a new line and wrapped after four pairs.
//! `Y` and `Z` data are normalised to `Z0` on disk.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::convert::{s_to_z, y_to_z, z_to_s};
use super::{ImpedanceTable, TableSource};
use crate::error::{Error, Result};
use crate::units::{to_angular, to_cyclic};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParameterKind {
    S,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    RealImag,
    MagnitudeAngle,
    DbAngle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrequencyUnit {
    Hz,
    KHz,
    MHz,
    GHz,
}

impl FrequencyUnit {
    pub fn multiplier(self) -> f64 {
        match self {
            FrequencyUnit::Hz => 1.0,
            FrequencyUnit::KHz => 1e3,
            FrequencyUnit::MHz => 1e6,
            FrequencyUnit::GHz => 1e9,
        }
    }

    fn keyword(self) -> &'static str {
        match self {
            FrequencyUnit::Hz => "HZ",
            FrequencyUnit::KHz => "KHZ",
            FrequencyUnit::MHz => "MHZ",
            FrequencyUnit::GHz => "GHZ",
        }
    }
}

impl ParameterKind {
    fn keyword(self) -> &'static str {
        match self {
            ParameterKind::S => "S",
            ParameterKind::Y => "Y",
            ParameterKind::Z => "Z",
        }
    }
}

impl DataFormat {
    fn keyword(self) -> &'static str {
        match self {
            DataFormat::RealImag => "RI",
            DataFormat::MagnitudeAngle => "MA",
            DataFormat::DbAngle => "DB",
        }
    }

    fn decode(self, a: f64, b: f64) -> Complex64 {
        match self {
            DataFormat::RealImag => Complex64::new(a, b),
            DataFormat::MagnitudeAngle => Complex64::from_polar(a, b.to_radians()),
            DataFormat::DbAngle => Complex64::from_polar(10f64.powf(a / 20.0), b.to_radians()),
        }
    }

    fn encode(self, z: Complex64) -> (f64, f64) {
        match self {
            DataFormat::RealImag => (z.re, z.im),
            DataFormat::MagnitudeAngle => (z.norm(), z.arg() * 180.0 / PI),
            DataFormat::DbAngle => (20.0 * z.norm().log10(), z.arg() * 180.0 / PI),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkPoint {
    /// Frequency in Hz.
    pub frequency: f64,
    /// Raw parameter matrix as stored in the file (normalised for Y/Z).
    pub data: DMatrix<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkFile {
    pub kind: ParameterKind,
    pub format: DataFormat,
    pub unit: FrequencyUnit,
    pub reference_impedance: f64,
    pub port_count: usize,
    pub points: Vec<NetworkPoint>,
}

struct OptionLine {
    kind: ParameterKind,
    format: DataFormat,
    unit: FrequencyUnit,
    z0: f64,
}

fn parse_option_line(line: &str, lineno: usize) -> Result<OptionLine> {
    let mut opt = OptionLine {
        kind: ParameterKind::S,
        format: DataFormat::MagnitudeAngle,
        unit: FrequencyUnit::GHz,
        z0: 50.0,
    };
    let mut tokens = line.trim_start_matches('#').split_whitespace();
    while let Some(tok) = tokens.next() {
        match tok.to_ascii_uppercase().as_str() {
            "HZ" => opt.unit = FrequencyUnit::Hz,
            "KHZ" => opt.unit = FrequencyUnit::KHz,
            "MHZ" => opt.unit = FrequencyUnit::MHz,
            "GHZ" => opt.unit = FrequencyUnit::GHz,
            "S" => opt.kind = ParameterKind::S,
            "Y" => opt.kind = ParameterKind::Y,
            "Z" => opt.kind = ParameterKind::Z,
            "G" | "H" => {
                return Err(Error::Unsupported(format!(
                    "hybrid parameter type {tok} (line {lineno})"
                )))
            }
            "RI" => opt.format = DataFormat::RealImag,
            "MA" => opt.format = DataFormat::MagnitudeAngle,
            "DB" => opt.format = DataFormat::DbAngle,
            "R" => {
                let v = tokens.next().ok_or_else(|| Error::Parse {
                    line: lineno,
                    message: "reference impedance missing after R".into(),
                })?;
                opt.z0 = v.parse().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("invalid reference impedance '{v}'"),
                })?;
                if !(opt.z0 > 0.0) {
                    return Err(Error::Parse {
                        line: lineno,
                        message: "reference impedance must be positive".into(),
                    });
                }
            }
            other => {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("unknown option '{other}'"),
                })
            }
        }
    }
    Ok(opt)
}

/// Parses Touchstone v1 text. The port count is inferred from the record
/// layout: a record starts on a line with an odd number of fields
/// (frequency plus pairs) and holds `1 + 2P²` numbers.
pub fn parse_touchstone(text: &str) -> Result<NetworkFile> {
    let mut option: Option<OptionLine> = None;
    // (line number, numbers) per data line
    let mut lines: Vec<(usize, Vec<f64>)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let content = raw.split('!').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            return Err(Error::Unsupported(format!(
                "Touchstone v2 keyword '{content}' at line {lineno}; only v1 files are supported"
            )));
        }
        if content.starts_with('#') {
            if option.is_none() {
                option = Some(parse_option_line(content, lineno)?);
            }
            continue;
        }
        if option.is_none() {
            return Err(Error::Parse {
                line: lineno,
                message: "data before the option line (missing '# ...' line)".into(),
            });
        }
        let nums = content
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("invalid number '{t}'"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        lines.push((lineno, nums));
    }
    let option = option.ok_or(Error::Parse {
        line: 0,
        message: "missing option line".into(),
    })?;
    if lines.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "no network data".into(),
        });
    }

    // Group lines into records.
    let mut records: Vec<(usize, Vec<f64>)> = Vec::new();
    for (lineno, nums) in lines {
        if nums.len() % 2 == 1 {
            records.push((lineno, nums));
        } else {
            match records.last_mut() {
                Some((_, rec)) => rec.extend(nums),
                None => {
                    return Err(Error::Parse {
                        line: lineno,
                        message: "continuation line without a frequency record".into(),
                    })
                }
            }
        }
    }
    let count = records[0].1.len();
    let pairs = (count - 1) / 2;
    let port_count = (pairs as f64).sqrt().round() as usize;
    if port_count == 0 || port_count * port_count != pairs {
        return Err(Error::Parse {
            line: records[0].0,
            message: format!("record of {count} values does not match any port count"),
        });
    }

    let scale = option.unit.multiplier();
    let mut points = Vec::with_capacity(records.len());
    for (lineno, rec) in &records {
        if rec.len() != count {
            return Err(Error::Parse {
                line: *lineno,
                message: format!(
                    "inconsistent column count: expected {count} values for a {port_count}-port record, found {}",
                    rec.len()
                ),
            });
        }
        let frequency = rec[0] * scale;
        if let Some(prev) = points.last() {
            let prev: &NetworkPoint = prev;
            if !(frequency > prev.frequency) {
                return Err(Error::Parse {
                    line: *lineno,
                    message: "frequencies are not strictly increasing".into(),
                });
            }
        }
        let mut data = DMatrix::zeros(port_count, port_count);
        for k in 0..pairs {
            let value = option.format.decode(rec[1 + 2 * k], rec[2 + 2 * k]);
            let (i, j) = entry_position(port_count, k);
            data[(i, j)] = value;
        }
        points.push(NetworkPoint { frequency, data });
    }
    Ok(NetworkFile {
        kind: option.kind,
        format: option.format,
        unit: option.unit,
        reference_impedance: option.z0,
        port_count,
        points,
    })
}

// Position of the k-th pair in a record.
fn entry_position(ports: usize, k: usize) -> (usize, usize) {
    if ports == 2 {
        // S11 S21 S12 S22
        [(0, 0), (1, 0), (0, 1), (1, 1)][k]
    } else {
        (k / ports, k % ports)
    }
}

pub fn read_touchstone(path: impl AsRef<Path>) -> Result<NetworkFile> {
    let text = std::fs::read_to_string(path)?;
    parse_touchstone(&text)
}

fn fmt_num(out: &mut String, v: f64) {
    // Shortest representation that parses back to the same f64.
    let _ = write!(out, "{v:e}");
}

/// Serialises with full round-trip precision.
pub fn write_touchstone(file: &NetworkFile) -> String {
    let mut out = String::new();
    out.push_str("! Touchstone v1 network data\n");
    let _ = writeln!(
        out,
        "# {} {} {} R {}",
        file.unit.keyword(),
        file.kind.keyword(),
        file.format.keyword(),
        file.reference_impedance
    );
    let p = file.port_count;
    let scale = file.unit.multiplier();
    for point in &file.points {
        fmt_num(&mut out, point.frequency / scale);
        let pairs = p * p;
        for k in 0..pairs {
            let (i, j) = entry_position(p, k);
            if p > 2 && k > 0 && (j == 0 || j % 4 == 0) {
                out.push('\n');
            } else {
                out.push(' ');
            }
            let (a, b) = file.format.encode(point.data[(i, j)]);
            fmt_num(&mut out, a);
            out.push(' ');
            fmt_num(&mut out, b);
        }
        out.push('\n');
    }
    out
}

impl NetworkFile {
    /// Converts to port impedances in ohms on an angular-frequency grid.
    pub fn to_impedance_table(&self) -> Result<ImpedanceTable> {
        let z0 = self.reference_impedance;
        let mut freqs = Vec::with_capacity(self.points.len());
        let mut zs = Vec::with_capacity(self.points.len());
        for point in &self.points {
            let z = match self.kind {
                ParameterKind::S => s_to_z(&point.data, z0)?,
                ParameterKind::Z => &point.data * Complex64::new(z0, 0.0),
                ParameterKind::Y => y_to_z(&(&point.data / Complex64::new(z0, 0.0)))?,
            };
            freqs.push(to_angular(point.frequency));
            zs.push(z);
        }
        ImpedanceTable::new(freqs, zs, z0, TableSource::Touchstone)
    }

    /// Builds a file holding `table` as `kind` parameters.
    pub fn from_impedance_table(
        table: &ImpedanceTable,
        kind: ParameterKind,
        format: DataFormat,
        unit: FrequencyUnit,
    ) -> Result<Self> {
        let z0 = table.reference_impedance();
        let points = table
            .frequencies()
            .iter()
            .zip(table.matrices())
            .map(|(w, z)| {
                let data = match kind {
                    ParameterKind::S => z_to_s(z, z0)?,
                    ParameterKind::Z => z / Complex64::new(z0, 0.0),
                    ParameterKind::Y => y_to_z(z)? * Complex64::new(z0, 0.0),
                };
                Ok(NetworkPoint {
                    frequency: to_cyclic(*w),
                    data,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(NetworkFile {
            kind,
            format,
            unit,
            reference_impedance: z0,
            port_count: table.port_count(),
            points,
        })
    }
}
