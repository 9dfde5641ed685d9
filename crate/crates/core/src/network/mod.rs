//! Multi-port network data: impedance tables, Touchstone v1 and CSV I/O,
//! S↔Z conversion, interpolation and capacitance extraction.

mod capacitance;
mod convert;
pub mod csv;
pub mod touchstone;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::interp::MonotoneCubic;

pub use capacitance::{extract_capacitance, CapacitanceFit};
pub use convert::{s_to_z, y_to_z, z_to_s, SINGULARITY_THRESHOLD};
pub use touchstone::{
    parse_touchstone, read_touchstone, write_touchstone, DataFormat, FrequencyUnit, NetworkFile,
    NetworkPoint, ParameterKind,
};

/// Relative change of `Im Z` between neighbouring samples above which an
/// interpolated value is flagged as close to a pole.
pub const POLE_STEP_THRESHOLD: f64 = 0.5;
/// `|Im Z|` in ohms above which an interpolated value is flagged.
pub const POLE_MAGNITUDE_THRESHOLD: f64 = 1e4;
/// Reciprocity tolerance relative to `max |Z|`.
pub const RECIPROCITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableSource {
    Touchstone,
    Csv,
    Netlist,
}

/// Frequency-gridded port impedance matrices.
#[derive(Debug, Clone)]
pub struct ImpedanceTable {
    port_count: usize,
    frequencies: Vec<f64>,
    z: Vec<DMatrix<Complex64>>,
    reference_impedance: f64,
    source: TableSource,
}

impl ImpedanceTable {
    /// `frequencies` in rad/s (strictly increasing, positive); one `P×P`
    /// matrix in ohms per frequency.
    pub fn new(
        frequencies: Vec<f64>,
        z: Vec<DMatrix<Complex64>>,
        reference_impedance: f64,
        source: TableSource,
    ) -> Result<Self> {
        if frequencies.is_empty() {
            return Err(invalid("impedance table has no frequency points"));
        }
        if frequencies.len() != z.len() {
            return Err(invalid("one impedance matrix per frequency is required"));
        }
        if frequencies.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(invalid("table frequencies must be positive and finite"));
        }
        if frequencies.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("table frequencies must be strictly increasing"));
        }
        let port_count = z[0].nrows();
        if port_count == 0 || z.iter().any(|m| m.nrows() != port_count || m.ncols() != port_count)
        {
            return Err(invalid("impedance matrices must be square with a common size"));
        }
        if !(reference_impedance > 0.0) {
            return Err(invalid("reference impedance must be positive"));
        }
        let table = ImpedanceTable {
            port_count,
            frequencies,
            z,
            reference_impedance,
            source,
        };
        let rec = table.reciprocity_error();
        if rec > RECIPROCITY_TOLERANCE {
            log::warn!("impedance table is not reciprocal: max |Zij - Zji| / max |Z| = {rec:.3e}");
        }
        Ok(table)
    }

    pub fn port_count(&self) -> usize {
        self.port_count
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn matrices(&self) -> &[DMatrix<Complex64>] {
        &self.z
    }

    pub fn reference_impedance(&self) -> f64 {
        self.reference_impedance
    }

    pub fn source(&self) -> TableSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.frequencies[0], self.frequencies[self.len() - 1])
    }

    fn check_port(&self, i: usize) -> Result<()> {
        if i >= self.port_count {
            return Err(invalid(format!(
                "port index {i} out of range for a {}-port table",
                self.port_count
            )));
        }
        Ok(())
    }

    /// `Z_ij` at every grid frequency.
    pub fn element(&self, i: usize, j: usize) -> Result<Vec<Complex64>> {
        self.check_port(i)?;
        self.check_port(j)?;
        Ok(self.z.iter().map(|m| m[(i, j)]).collect())
    }

    /// `max |Z_ij − Z_ji| / max |Z|` over the whole table.
    pub fn reciprocity_error(&self) -> f64 {
        let mut scale: f64 = 0.0;
        let mut worst: f64 = 0.0;
        for m in &self.z {
            for i in 0..self.port_count {
                for j in 0..self.port_count {
                    scale = scale.max(m[(i, j)].norm());
                    if j > i {
                        worst = worst.max((m[(i, j)] - m[(j, i)]).norm());
                    }
                }
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    /// `max |Re Z| / |Z|` over all entries and frequencies: the loss that a
    /// lossless evaluation throws away.
    pub fn discarded_loss(&self) -> f64 {
        self.z
            .iter()
            .flat_map(|m| m.iter())
            .filter(|z| z.norm() > 0.0)
            .map(|z| z.re.abs() / z.norm())
            .fold(0.0, f64::max)
    }

    /// Shape-preserving interpolant of `Z_ij`.
    pub fn interpolant(&self, i: usize, j: usize) -> Result<ElementInterpolant> {
        let values = self.element(i, j)?;
        ElementInterpolant::new(&self.frequencies, &values)
    }

    /// `Z_ij(ω)` by monotone cubic interpolation of real and imaginary parts.
    pub fn interpolate_z(&self, i: usize, j: usize, omega: f64) -> Result<Interpolated> {
        self.interpolant(i, j)?.eval(omega)
    }

    /// Index of the grid interval containing `omega`.
    pub fn interval_of(&self, omega: f64) -> Option<usize> {
        let (lo, hi) = self.range();
        if !(omega >= lo && omega <= hi) || self.len() < 2 {
            return None;
        }
        let k = self.frequencies.partition_point(|&w| w <= omega);
        Some(k.saturating_sub(1).min(self.len() - 2))
    }

    /// Keeps only the rows whose frequency lies in `[lo, hi]`.
    pub fn restricted(&self, lo: f64, hi: f64) -> Result<Self> {
        let (f, z): (Vec<f64>, Vec<DMatrix<Complex64>>) = self
            .frequencies
            .iter()
            .zip(&self.z)
            .filter(|(w, _)| **w >= lo && **w <= hi)
            .map(|(w, m)| (*w, m.clone()))
            .unzip();
        ImpedanceTable::new(f, z, self.reference_impedance, self.source)
    }
}

/// Interpolated impedance value with a pole-proximity flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interpolated {
    pub value: Complex64,
    pub pole_warning: bool,
}

#[derive(Debug, Clone)]
pub struct ElementInterpolant {
    re: MonotoneCubic,
    im: MonotoneCubic,
}

impl ElementInterpolant {
    pub fn new(frequencies: &[f64], values: &[Complex64]) -> Result<Self> {
        let re: Vec<f64> = values.iter().map(|z| z.re).collect();
        let im: Vec<f64> = values.iter().map(|z| z.im).collect();
        Ok(ElementInterpolant {
            re: MonotoneCubic::new(frequencies, &re)?,
            im: MonotoneCubic::new(frequencies, &im)?,
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        self.re.domain()
    }

    pub fn eval(&self, omega: f64) -> Result<Interpolated> {
        let (lo, hi) = self.domain();
        let k = self.re.interval(omega).ok_or(Error::OutOfRange(omega, lo, hi))?;
        let value = Complex64::new(self.re.eval_in(k, omega), self.im.eval_in(k, omega));
        let ims = self.im.values();
        let (a, b) = (ims[k], ims[k + 1]);
        let scale = a.abs().max(b.abs());
        let steep = scale > 0.0 && (b - a).abs() / scale > POLE_STEP_THRESHOLD;
        Ok(Interpolated {
            value,
            pole_warning: steep || value.im.abs() > POLE_MAGNITUDE_THRESHOLD,
        })
    }

    /// Real part only, without range check beyond the interval lookup.
    pub fn eval_re(&self, omega: f64) -> Result<f64> {
        self.re.eval(omega)
    }

    pub(crate) fn real_part(&self) -> &MonotoneCubic {
        &self.re
    }
}
