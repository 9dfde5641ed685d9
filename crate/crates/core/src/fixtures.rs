//! Reference circuits with closed-form behaviour, and frequency grids.
//!
//! Used by the self-test, the acceptance suite and the benches.

use crate::error::Result;
use crate::netlist::Netlist;
use crate::network::ImpedanceTable;
use crate::par::Execution;
use crate::units::{to_angular, FEMTOFARAD, GHZ, HBAR, MHZ, PLANCK};
use crate::zz::{DuffingSystem, JCurve};

/// Qubit capacitances to ground and bridge capacitor.
pub fn pi_capacitive(c1: f64, c2: f64, cc: f64) -> Netlist {
    let mut n = Netlist::new();
    n.capacitor("q1", "0", c1).capacitor("q2", "0", c2);
    if cc > 0.0 {
        n.capacitor("q1", "q2", cc);
    }
    n.port("q1", "0").port("q2", "0");
    n
}

/// π network with 80 fF qubit capacitors and a 0.2 fF bridge.
pub fn default_pi() -> Netlist {
    pi_capacitive(80.0 * FEMTOFARAD, 80.0 * FEMTOFARAD, 0.2 * FEMTOFARAD)
}

/// `q·Im Z12(q)` of [`pi_capacitive`], which is frequency independent.
pub fn pi_transfer(c1: f64, c2: f64, cc: f64) -> f64 {
    -cc / ((c1 + cc) * (c2 + cc) - cc * cc)
}

/// Inductance that places the loop resonance of [`series_lc_coupler`] at
/// `omega`: the loop C1–(Cs, L)–C2 resonates at `1/√(L C_eff)` with
/// `1/C_eff = 1/C1 + 1/C2 + 1/Cs`.
pub fn series_lc_inductance(c1: f64, c2: f64, cs: f64, omega: f64) -> f64 {
    let c_eff = 1.0 / (1.0 / c1 + 1.0 / c2 + 1.0 / cs);
    1.0 / (omega * omega * c_eff)
}

/// Two qubit capacitors bridged by a series LC whose loop resonance is at
/// `omega` (rad/s).
pub fn series_lc_coupler(c1: f64, c2: f64, cs: f64, omega: f64) -> Netlist {
    let l = series_lc_inductance(c1, c2, cs, omega);
    let mut n = Netlist::new();
    n.capacitor("q1", "0", c1)
        .capacitor("q2", "0", c2)
        .capacitor("q1", "m", cs)
        .inductor("m", "q2", l)
        .port("q1", "0")
        .port("q2", "0");
    n
}

/// Two parallel LC tanks in series from port 1 to ground; port 2 hangs off
/// port 1 through `cx`, so `Z12 = Z_A + Z_B` shows both tank poles.
pub fn two_resonator(l_a: f64, c_a: f64, l_b: f64, c_b: f64, cx: f64) -> Netlist {
    let mut n = Netlist::new();
    n.inductor("p1", "m", l_a)
        .capacitor("p1", "m", c_a)
        .inductor("m", "0", l_b)
        .capacitor("m", "0", c_b)
        .capacitor("p1", "p2", cx)
        .port("p1", "0")
        .port("p2", "0");
    n
}

/// Qubit capacitors joined by a series inductor. `Z12` has a single pole
/// at [`series_l_resonance`].
pub fn series_l_two_port(c1: f64, c2: f64, l: f64) -> Netlist {
    let mut n = Netlist::new();
    n.capacitor("q1", "0", c1)
        .capacitor("q2", "0", c2)
        .inductor("q1", "q2", l)
        .port("q1", "0")
        .port("q2", "0");
    n
}

pub fn series_l_resonance(c1: f64, c2: f64, l: f64) -> f64 {
    ((c1 + c2) / (l * c1 * c2)).sqrt()
}

/// Two qubit pads coupled through `c_couple` to the open ends of a
/// transmission-line resonator of impedance `z0` whose bare half-wave
/// frequency is `f_half` (Hz). Gives an infinite ladder of poles.
pub fn line_resonator(c_qubit: f64, c_couple: f64, z0: f64, f_half: f64) -> Netlist {
    let tau = 1.0 / (2.0 * f_half);
    let mut n = Netlist::new();
    n.capacitor("q1", "0", c_qubit)
        .capacitor("q2", "0", c_qubit)
        .capacitor("q1", "r1", c_couple)
        .capacitor("q2", "r2", c_couple)
        .line("r1", "r2", z0, tau)
        .port("q1", "0")
        .port("q2", "0");
    n
}

/// Fixed-frequency qubits at 4.9729 and 5.1629 GHz with a direct coupling
/// of −8.82 MHz, anharmonicities 0.33, 0.33 and 0.37 GHz, and the coupler
/// parked at 4 GHz with no coupling.
pub fn tunable_coupler_template() -> DuffingSystem {
    DuffingSystem::new(
        [to_angular(4.9729 * GHZ), to_angular(5.1629 * GHZ), to_angular(4.0 * GHZ)],
        [to_angular(0.33 * GHZ), to_angular(0.33 * GHZ), to_angular(0.37 * GHZ)],
        -8.82 * MHZ * PLANCK,
        0.0,
        0.0,
    )
    .expect("valid template")
}

/// Capacitive-style coupler couplings `J_ic = k·ħ√(q_i q_c)/2` sampled on
/// `grid`; both grow monotonically with `q_c`.
pub fn capacitive_coupler_curve(template: &DuffingSystem, grid: &[f64], k: f64) -> Result<JCurve> {
    let (q1, q2) = (template.frequencies[0], template.frequencies[1]);
    JCurve::from_fn(
        grid,
        |qc| 0.5 * k * HBAR * (q1 * qc).sqrt(),
        |qc| 0.5 * k * HBAR * (q2 * qc).sqrt(),
    )
}

/// Qubits at 5.0 and 5.2 GHz (anharmonicity 0.3 GHz each, so the qubit
/// detuning lies inside the anharmonicity) with a direct coupling of
/// −10 MHz; coupler anharmonicity 0.3 GHz.
pub fn cancellation_template() -> DuffingSystem {
    DuffingSystem::new(
        [to_angular(5.0 * GHZ), to_angular(5.2 * GHZ), to_angular(4.0 * GHZ)],
        [to_angular(0.3 * GHZ); 3],
        -10.0 * MHZ * PLANCK,
        0.0,
        0.0,
    )
    .expect("valid template")
}

/// Couplings `J_ic = ħ a/(q_i − q_c)` with `a` chosen so that the
/// coupler-mediated exchange `J_1c J_2c (1/Δ1 + 1/Δ2)/2ħ` cancels `J12` at
/// `qc_star`, where `Δi = q_i − q_c`. The exchange-driven part of ζ then
/// vanishes quadratically at `qc_star` and the coupler-driven part pulls ζ
/// through zero on either side of it.
pub fn cancellation_curve(template: &DuffingSystem, grid: &[f64], qc_star: f64) -> Result<JCurve> {
    let (q1, q2) = (template.frequencies[0], template.frequencies[1]);
    let (d1, d2) = (q1 - qc_star, q2 - qc_star);
    let j12 = template.j12 / HBAR;
    let a = (-2.0 * j12 * d1 * d2 / (1.0 / d1 + 1.0 / d2)).sqrt();
    JCurve::from_fn(grid, |qc| HBAR * a / (q1 - qc), |qc| HBAR * a / (q2 - qc))
}

/// Resonance of the lossy oracle used for dispersion-integral checks:
/// 80 fF pads joined by 10 nH, `ω0 = 5·10¹⁰ rad/s`.
pub const PV_ORACLE_RESONANCE: f64 = 5e10;

/// [`series_l_two_port`] with 80 fF pads and 10 nH, given series loss for
/// quality factor `q_factor`, tabulated over `[0.5 ω0, 1.5 ω0]` on a grid
/// clustered around the resonance. Returns the table and the probe
/// frequency `0.8 ω0`.
pub fn pv_oracle(q_factor: f64, exec: Execution) -> Result<(ImpedanceTable, f64)> {
    let c = 80.0 * FEMTOFARAD;
    let net = series_l_two_port(c, c, 10e-9).add_series_loss(q_factor)?;
    let w0 = PV_ORACLE_RESONANCE;
    let gamma = w0 / (2.0 * q_factor);
    let grid = clustered_grid(0.5 * w0, 1.5 * w0, w0, 0.05 * gamma, 4000, 2001);
    let table = net.evaluate_z(&grid, exec)?.table;
    Ok((table, 0.8 * w0))
}

/// `n` points evenly spaced over `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// `n` points evenly spaced in `ln ω`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linear_grid(lo.ln(), hi.ln(), n)
        .into_iter()
        .map(f64::exp)
        .collect()
}

/// Uniform grid merged with points clustered around `center` as
/// `center + width·sinh(t)`, so that a peak of half-width `width` is
/// resolved from its core out to the band edges.
pub fn clustered_grid(
    lo: f64,
    hi: f64,
    center: f64,
    width: f64,
    clustered: usize,
    uniform: usize,
) -> Vec<f64> {
    let mut pts = linear_grid(lo, hi, uniform);
    let t_lo = ((lo - center) / width).asinh();
    let t_hi = ((hi - center) / width).asinh();
    pts.extend(
        linear_grid(t_lo, t_hi, clustered)
            .into_iter()
            .map(|t| center + width * t.sinh()),
    );
    pts.retain(|w| *w >= lo && *w <= hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    pts
}
