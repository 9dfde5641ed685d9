//! Exchange coupling rates between transmon qubits computed from the
//! microwave impedance response of the structure that links them.
//!
//! The crate is organised bottom-up:
//!
//! * [`units`] holds SI constants and frequency/energy conversions.
//! * [`transmon`] diagonalises the charge-basis transmon Hamiltonian.
//! * [`network`] reads Touchstone/CSV network data and interpolates `Z(ω)`.
//! * [`netlist`] evaluates exact `Z(ω)` of small lumped/transmission-line
//!   circuits, used as ground truth.
//! * [`exchange`] computes `J` from impedance, from explicit mode sums and
//!   from the capacitive closed form, and checks the principal-value identity.
//! * [`dispersive`] builds the multilevel qubit–mode Hamiltonian, its first
//!   order Schrieffer–Wolff generator and the dispersive effective model.
//! * [`zz`] diagonalises the three-body Duffing model for ZZ crosstalk.
//!
//! Internally every frequency is angular (rad/s) and every energy is in
//! joules. Reports convert to GHz/MHz cyclic at the edge.

pub mod dispersive;
pub mod error;
pub mod exchange;
pub mod fixtures;
pub mod interp;
mod linalg;
pub mod modes;
pub mod netlist;
pub mod network;
pub mod par;
pub mod selftest;
pub mod transmon;
pub mod units;
pub mod zz;

pub use error::{Error, Result};
pub use modes::{Mode, ModeSet};
pub use network::ImpedanceTable;
pub use par::Execution;
