//! Explicit electromagnetic mode sets `{ω_k, g_k^(l)}`.

use num_complex::Complex64;

use crate::error::{invalid, Result};

/// One mode: angular frequency and the ground-transition coupling `g_{0,k}`
/// (rad/s) to each qubit. Couplings of higher transitions are obtained by
/// scaling with the qubit's charge-element ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub frequency: f64,
    pub couplings: Vec<Complex64>,
}

impl Mode {
    pub fn new(frequency: f64, couplings: Vec<Complex64>) -> Self {
        Mode {
            frequency,
            couplings,
        }
    }

    /// Mode with real couplings.
    pub fn real(frequency: f64, couplings: &[f64]) -> Self {
        Mode {
            frequency,
            couplings: couplings.iter().map(|&g| Complex64::new(g, 0.0)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModeSet {
    modes: Vec<Mode>,
    qubits: usize,
}

impl ModeSet {
    /// Validates `ω_k > 0`, strictly increasing, and a consistent number of
    /// couplings per mode. An empty set is allowed.
    pub fn new(modes: Vec<Mode>) -> Result<Self> {
        let qubits = modes.first().map_or(0, |m| m.couplings.len());
        for (k, m) in modes.iter().enumerate() {
            if !(m.frequency > 0.0 && m.frequency.is_finite()) {
                return Err(invalid(format!("mode {k}: frequency must be positive")));
            }
            if m.couplings.len() != qubits {
                return Err(invalid(format!(
                    "mode {k}: expected {qubits} couplings, found {}",
                    m.couplings.len()
                )));
            }
            if m.couplings.iter().any(|g| !(g.re.is_finite() && g.im.is_finite())) {
                return Err(invalid(format!("mode {k}: couplings must be finite")));
            }
        }
        if modes.windows(2).any(|w| !(w[1].frequency > w[0].frequency)) {
            return Err(invalid("mode frequencies must be strictly increasing"));
        }
        Ok(ModeSet { modes, qubits })
    }

    pub fn empty() -> Self {
        ModeSet::default()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Number of qubits each mode couples to (0 for an empty set).
    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    /// Largest `|g|` over all modes and qubits.
    pub fn max_coupling(&self) -> f64 {
        self.modes
            .iter()
            .flat_map(|m| m.couplings.iter().map(|g| g.norm()))
            .fold(0.0, f64::max)
    }

    /// Same modes with every coupling multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        ModeSet {
            modes: self
                .modes
                .iter()
                .map(|m| Mode::new(m.frequency, m.couplings.iter().map(|g| g * factor).collect()))
                .collect(),
            qubits: self.qubits,
        }
    }
}
