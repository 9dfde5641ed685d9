use super::ImpedanceTable;
use crate::error::{invalid, Error, Result};

/// Result of fitting `Im Z_ii(ω) = −1/(ωC)` over a band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacitanceFit {
    /// Farads.
    pub capacitance: f64,
    /// RMS relative deviation of the per-sample estimates from the fit.
    pub residual: f64,
    pub samples: usize,
}

/// Extracts the capacitance seen at `port` from grid samples inside
/// `[lo, hi]` (rad/s). Each sample gives `C_k = −1/(ω_k Im Z_ii)`; the fit is
/// their mean.
pub fn extract_capacitance(
    table: &ImpedanceTable,
    port: usize,
    lo: f64,
    hi: f64,
) -> Result<CapacitanceFit> {
    if !(lo < hi) {
        return Err(invalid("capacitance band must satisfy lo < hi"));
    }
    let (min, max) = table.range();
    if lo < min || hi > max {
        let bad = if lo < min { lo } else { hi };
        return Err(Error::OutOfRange(bad, min, max));
    }
    let z = table.element(port, port)?;
    let samples: Vec<(f64, f64)> = table
        .frequencies()
        .iter()
        .zip(&z)
        .filter(|(w, _)| **w >= lo && **w <= hi)
        .map(|(w, z)| (*w, z.im))
        .collect();
    if samples.is_empty() {
        return Err(invalid("no grid samples inside the capacitance band"));
    }
    let negative = samples.iter().filter(|(_, im)| *im < 0.0).count();
    if negative == 0 {
        return Err(Error::NotCapacitive(format!(
            "Im Z{0}{0} >= 0 throughout the band",
            port + 1
        )));
    }
    if negative < samples.len() {
        return Err(Error::NotCapacitive(format!(
            "Im Z{0}{0} changes sign inside the band (resonance)",
            port + 1
        )));
    }
    let estimates: Vec<f64> = samples.iter().map(|(w, im)| -1.0 / (w * im)).collect();
    let n = estimates.len() as f64;
    let c = estimates.iter().sum::<f64>() / n;
    let residual = (estimates.iter().map(|e| ((e - c) / c).powi(2)).sum::<f64>() / n).sqrt();
    Ok(CapacitanceFit {
        capacitance: c,
        residual,
        samples: estimates.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::TableSource;
    use crate::units::{to_angular, FEMTOFARAD, GHZ};
    use nalgebra::DMatrix;
    use num_complex::Complex64;

    fn one_port(z: impl Fn(f64) -> Complex64, lo: f64, hi: f64, n: usize) -> ImpedanceTable {
        let freqs: Vec<f64> = (0..n)
            .map(|k| to_angular(lo + (hi - lo) * k as f64 / (n - 1) as f64))
            .collect();
        let zs = freqs.iter().map(|&w| DMatrix::from_element(1, 1, z(w))).collect();
        ImpedanceTable::new(freqs, zs, 50.0, TableSource::Netlist).unwrap()
    }

    #[test]
    fn pure_capacitor() {
        let c = 57.24 * FEMTOFARAD;
        let t = one_port(|w| Complex64::new(0.0, -1.0 / (w * c)), 1.0 * GHZ, 10.0 * GHZ, 91);
        let fit = extract_capacitance(&t, 0, to_angular(2.0 * GHZ), to_angular(6.0 * GHZ)).unwrap();
        assert!((fit.capacitance / c - 1.0).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn resonance_in_band_is_rejected() {
        let (c, l) = (80.0 * FEMTOFARAD, 1e-9);
        let t = one_port(|w| Complex64::new(0.0, w * l - 1.0 / (w * c)), 1.0 * GHZ, 30.0 * GHZ, 300);
        let err = extract_capacitance(&t, 0, to_angular(1.0 * GHZ), to_angular(30.0 * GHZ));
        assert!(matches!(err, Err(Error::NotCapacitive(_))));
        let inductive = one_port(|w| Complex64::new(0.0, w * 1e-9), 1.0 * GHZ, 2.0 * GHZ, 3);
        assert!(matches!(
            extract_capacitance(&inductive, 0, to_angular(1.0 * GHZ), to_angular(2.0 * GHZ)),
            Err(Error::NotCapacitive(_))
        ));
        assert!(matches!(
            extract_capacitance(&inductive, 0, to_angular(0.5 * GHZ), to_angular(2.0 * GHZ)),
            Err(Error::OutOfRange(..))
        ));
    }
}
