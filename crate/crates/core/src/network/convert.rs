use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Smallest singular value of `(I − S)` (or of a matrix being inverted)
/// below which the conversion is refused.
pub const SINGULARITY_THRESHOLD: f64 = 1e-12;

fn checked_inverse(m: &DMatrix<Complex64>, what: &str) -> Result<DMatrix<Complex64>> {
    let sv = m.clone().singular_values();
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(smin >= SINGULARITY_THRESHOLD) {
        return Err(Error::Singular(format!(
            "{what} has smallest singular value {smin:.3e}"
        )));
    }
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular(format!("{what} is not invertible")))
}

/// `Z = Z₀ (I + S)(I − S)⁻¹` for a uniform real reference impedance.
pub fn s_to_z(s: &DMatrix<Complex64>, z0: f64) -> Result<DMatrix<Complex64>> {
    let n = s.nrows();
    let eye = DMatrix::<Complex64>::identity(n, n);
    let inv = checked_inverse(&(&eye - s), "I - S")?;
    Ok((&eye + s) * inv * Complex64::new(z0, 0.0))
}

/// `S = (Z − Z₀I)(Z + Z₀I)⁻¹`.
pub fn z_to_s(z: &DMatrix<Complex64>, z0: f64) -> Result<DMatrix<Complex64>> {
    let n = z.nrows();
    let z0i = DMatrix::<Complex64>::identity(n, n) * Complex64::new(z0, 0.0);
    let inv = checked_inverse(&(z + &z0i), "Z + Z0 I")?;
    Ok((z - &z0i) * inv)
}

/// `Z = Y⁻¹`.
pub fn y_to_z(y: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    checked_inverse(y, "Y")
}
