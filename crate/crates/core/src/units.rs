//! SI constants and unit conversions.
//!
//! Frequencies travel between modules as angular frequencies (rad/s) and
//! energies as joules. Only user-facing reports use cyclic GHz/MHz.

use std::f64::consts::PI;

/// Elementary charge, C (exact).
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054571817e-34;
/// Planck constant derived as 2π·ħ so that `h = 2πħ` holds exactly in f64.
pub const PLANCK: f64 = 2.0 * PI * HBAR;
/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.8541878128e-12;
/// Vacuum permeability, H/m.
pub const VACUUM_PERMEABILITY: f64 = 1.25663706212e-6;
/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub const GHZ: f64 = 1e9;
pub const MHZ: f64 = 1e6;
pub const KHZ: f64 = 1e3;
pub const FEMTOFARAD: f64 = 1e-15;

/// Cyclic frequency (Hz) to angular frequency (rad/s).
#[inline]
pub fn to_angular(hz: f64) -> f64 {
    2.0 * PI * hz
}

/// Angular frequency (rad/s) to cyclic frequency (Hz).
#[inline]
pub fn to_cyclic(rad_per_s: f64) -> f64 {
    rad_per_s / (2.0 * PI)
}

/// Energy in joules to the cyclic frequency `E/h`.
#[inline]
pub fn energy_to_cyclic(joules: f64) -> f64 {
    joules / PLANCK
}

#[inline]
pub fn cyclic_to_energy(hz: f64) -> f64 {
    hz * PLANCK
}

/// Energy in joules to the angular frequency `E/ħ`.
#[inline]
pub fn energy_to_angular(joules: f64) -> f64 {
    joules / HBAR
}

#[inline]
pub fn angular_to_energy(rad_per_s: f64) -> f64 {
    rad_per_s * HBAR
}

/// Energy in joules expressed as `E/h` in MHz.
#[inline]
pub fn energy_to_mhz(joules: f64) -> f64 {
    joules / (PLANCK * MHZ)
}

/// A frequency stored as angular rad/s with cyclic accessors.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Frequency(f64);

impl Frequency {
    pub fn from_angular(rad_per_s: f64) -> Self {
        Frequency(rad_per_s)
    }

    pub fn from_hz(hz: f64) -> Self {
        Frequency(to_angular(hz))
    }

    pub fn from_ghz(ghz: f64) -> Self {
        Self::from_hz(ghz * GHZ)
    }

    pub fn from_mhz(mhz: f64) -> Self {
        Self::from_hz(mhz * MHZ)
    }

    pub fn angular(self) -> f64 {
        self.0
    }

    pub fn hz(self) -> f64 {
        to_cyclic(self.0)
    }

    pub fn ghz(self) -> f64 {
        self.hz() / GHZ
    }

    pub fn mhz(self) -> f64 {
        self.hz() / MHZ
    }

    /// `ħω` in joules.
    pub fn energy(self) -> f64 {
        angular_to_energy(self.0)
    }
}
