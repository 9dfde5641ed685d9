//! Cross-validation of the exchange routes against the circuit oracles.
//!
//! Each check compares two independent computations and reports the
//! measured discrepancy against a fixed tolerance.

use std::fmt;
use std::str::FromStr;

use crate::dispersive::{extract_j_from_splitting, FullSystem, QubitLevels};
use crate::error::{invalid, Error, Result};
use crate::exchange::{j_capacitive, j_impedance, j_mode_sum, pv_integral_check, ImpedanceOptions};
use crate::fixtures;
use crate::modes::{Mode, ModeSet};
use crate::netlist::{foster_check_with_poles, Netlist};
use crate::network::touchstone::{
    parse_touchstone, write_touchstone, DataFormat, FrequencyUnit, NetworkFile, ParameterKind,
};
use crate::par::Execution;
use crate::transmon::{solve_spectrum, spec_from_capacitance};
use crate::units::{to_angular, ELEMENTARY_CHARGE, FEMTOFARAD, GHZ, MHZ};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Group {
    CapacitiveEquivalence,
    PvIdentity,
    SplittingVsModeSum,
    FosterMonotonicity,
}

impl Group {
    pub const ALL: [Group; 4] = [
        Group::CapacitiveEquivalence,
        Group::PvIdentity,
        Group::SplittingVsModeSum,
        Group::FosterMonotonicity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Group::CapacitiveEquivalence => "capacitive-equivalence",
            Group::PvIdentity => "pv-identity",
            Group::SplittingVsModeSum => "splitting-vs-modesum",
            Group::FosterMonotonicity => "foster-monotonicity",
        }
    }
}

/// Which groups to run: `all`, a full group name, or its first word
/// (`capacitive`, `pv`, `splitting`, `foster`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selector(Vec<Group>);

impl Selector {
    pub fn all() -> Self {
        Selector(Group::ALL.to_vec())
    }

    pub fn groups(&self) -> &[Group] {
        &self.0
    }
}

impl FromStr for Selector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "all" {
            return Ok(Selector::all());
        }
        Group::ALL
            .iter()
            .find(|g| g.name() == s || g.name().split('-').next() == Some(s.as_str()))
            .map(|&g| Selector(vec![g]))
            .ok_or_else(|| {
                invalid(format!(
                    "unknown check '{s}' (expected all, {})",
                    Group::ALL.map(Group::name).join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub group: Group,
    pub name: String,
    pub passed: bool,
    /// Measured discrepancy, in the check's own units.
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}/{}: {:.3e} (tol {:.1e}) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.group.name(),
            self.name,
            self.value,
            self.tolerance,
            self.detail
        )
    }
}

fn outcome(group: Group, name: &str, value: f64, tolerance: f64, detail: String) -> CheckOutcome {
    CheckOutcome {
        group,
        name: name.to_string(),
        passed: value <= tolerance,
        value,
        tolerance,
        detail,
    }
}

fn failed(group: Group, name: &str, err: Error) -> CheckOutcome {
    CheckOutcome {
        group,
        name: name.to_string(),
        passed: false,
        value: f64::NAN,
        tolerance: 0.0,
        detail: format!("error: {err}"),
    }
}

pub fn run(selector: &Selector, exec: Execution) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    for &g in selector.groups() {
        match g {
            Group::CapacitiveEquivalence => out.extend(capacitive_equivalence(exec)),
            Group::PvIdentity => out.extend(pv_identity(exec)),
            Group::SplittingVsModeSum => out.extend(splitting_vs_modesum()),
            Group::FosterMonotonicity => out.extend(foster_monotonicity(exec)),
        }
    }
    out
}

/// Impedance-route and closed-form exchange rates on the capacitive π
/// network after a Touchstone write/read cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacitiveComparison {
    pub impedance: f64,
    pub capacitive: f64,
    pub closed_form: f64,
    pub ej_over_ec: [f64; 2],
}

/// Qubits at `q1`, `q2` (rad/s) on [`fixtures::pi_capacitive`]; the
/// network is sampled on 4–6.5 GHz, written as Touchstone S parameters and
/// read back before J is evaluated.
pub fn capacitive_comparison(
    c1: f64,
    c2: f64,
    cc: f64,
    q1: f64,
    q2: f64,
    exec: Execution,
) -> Result<CapacitiveComparison> {
    let net = fixtures::pi_capacitive(c1, c2, cc);
    let grid = fixtures::linear_grid(to_angular(4.0 * GHZ), to_angular(6.5 * GHZ), 251);
    let table = net.evaluate_z(&grid, exec)?.table;
    let file = NetworkFile::from_impedance_table(
        &table,
        ParameterKind::S,
        DataFormat::RealImag,
        FrequencyUnit::GHz,
    )?;
    let table = parse_touchstone(&write_touchstone(&file))?.to_impedance_table()?;

    // Loaded pad capacitance 1/(C⁻¹)_ii.
    let det = (c1 + cc) * (c2 + cc) - cc * cc;
    let t1 = spec_from_capacitance(det / (c2 + cc), q1, 0.0)?;
    let t2 = spec_from_capacitance(det / (c1 + cc), q2, 0.0)?;
    let (s1, s2) = (solve_spectrum(&t1, 3)?, solve_spectrum(&t2, 3)?);
    let imp = j_impedance(&s1, &s2, &table, ImpedanceOptions::default())?;
    let cap = j_capacitive(c1, c2, cc, s1.q01(), s2.q01())?;
    let e2 = ELEMENTARY_CHARGE * ELEMENTARY_CHARGE;
    let closed = -4.0 * e2 * s1.charge_element(0, 1) * s2.charge_element(0, 1) * cc / det;
    Ok(CapacitiveComparison {
        impedance: imp.energy,
        capacitive: cap.energy,
        closed_form: closed,
        ej_over_ec: [t1.ej_over_ec(), t2.ej_over_ec()],
    })
}

fn capacitive_equivalence(exec: Execution) -> Vec<CheckOutcome> {
    let g = Group::CapacitiveEquivalence;
    let c = 80.0 * FEMTOFARAD;
    let cc = 0.2 * FEMTOFARAD;
    let cases = [("equal-5.0GHz", 5.0, 5.0), ("detuned-4.8-5.3GHz", 4.8, 5.3)];
    let mut out = Vec::new();
    for (name, f1, f2) in cases {
        match capacitive_comparison(c, c, cc, to_angular(f1 * GHZ), to_angular(f2 * GHZ), exec) {
            Ok(r) => {
                let detail = format!(
                    "J_Z/h = {:.5} MHz, E_J/E_C = {:.1}, {:.1}",
                    crate::units::energy_to_mhz(r.impedance),
                    r.ej_over_ec[0],
                    r.ej_over_ec[1]
                );
                let exact = (r.impedance - r.closed_form).abs() / r.closed_form.abs();
                out.push(outcome(g, &format!("{name}/closed-form"), exact, 1e-4, detail.clone()));
                let approx = (r.impedance.abs() - r.capacitive.abs()).abs() / r.capacitive.abs();
                out.push(outcome(g, &format!("{name}/capacitive"), approx, 0.05, detail));
            }
            Err(e) => out.push(failed(g, name, e)),
        }
    }
    out
}

/// PV gap at quality factors 1e4 and 1e5, and whether the gap shrinks by
/// a factor within `[5, 20]` between them.
fn pv_identity(exec: Execution) -> Vec<CheckOutcome> {
    let g = Group::PvIdentity;
    let mut out = Vec::new();
    let mut gaps = Vec::new();
    for q_factor in [1e4, 1e5] {
        let name = format!("Q={q_factor:.0e}");
        let res = fixtures::pv_oracle(q_factor, exec)
            .and_then(|(table, probe)| pv_integral_check(&table, 0, 1, probe));
        match res {
            Ok(pv) => {
                gaps.push(pv.relative_gap);
                out.push(outcome(
                    g,
                    &name,
                    pv.relative_gap,
                    1e-2,
                    format!("pv = {:.6e}, q Im Z = {:.6e}", pv.pv_value, pv.reference),
                ));
            }
            Err(e) => out.push(failed(g, &name, e)),
        }
    }
    if let [a, b] = gaps[..] {
        let ratio = a / b;
        // Expressed as a distance from [5, 20] so that 0 means inside.
        let off = (5.0 - ratio).max(ratio - 20.0).max(0.0);
        out.push(outcome(g, "Q-scaling", off, 0.0, format!("gap ratio {ratio:.2}")));
    }
    out
}

/// Degenerate qubits at 5 GHz coupled to modes at `ω_k` with equal
/// couplings `g = ratio·|q − ω_k|`.
pub fn splitting_fixture(ratio: f64, mode_ghz: &[f64]) -> Result<FullSystem> {
    let q = to_angular(5.0 * GHZ);
    let alpha = to_angular(-250.0 * MHZ);
    let modes = mode_ghz
        .iter()
        .map(|&f| {
            let w = to_angular(f * GHZ);
            let g = ratio * (q - w).abs();
            Mode::real(w, &[g, g])
        })
        .collect();
    let levels = QubitLevels::duffing(q, alpha, 3)?;
    FullSystem::new(vec![levels.clone(), levels], ModeSet::new(modes)?, 2)
}

/// `|J_split − J_modesum| / |J_modesum|` for [`splitting_fixture`].
pub fn splitting_gap(sys: &FullSystem) -> Result<f64> {
    let split = extract_j_from_splitting(sys)?;
    let q = sys.qubits();
    let n1 = &q[0].charge_ratios;
    let n2 = &q[1].charge_ratios;
    let sum = j_mode_sum(n1, n2, q[0].transitions[0], q[1].transitions[0], sys.modes(), 0, 0)?;
    Ok((split - sum.energy).abs() / sum.energy.abs())
}

fn splitting_vs_modesum() -> Vec<CheckOutcome> {
    let g = Group::SplittingVsModeSum;
    let mut out = Vec::new();
    for (label, modes) in [("one-mode", &[6.0][..]), ("two-mode", &[6.0, 7.5][..])] {
        for ratio in [0.01, 0.02, 0.04] {
            let name = format!("{label}/g-over-delta={ratio}");
            match splitting_fixture(ratio, modes).and_then(|s| splitting_gap(&s)) {
                Ok(gap) => out.push(outcome(
                    g,
                    &name,
                    gap,
                    4.0 * ratio * ratio + 1e-6,
                    String::new(),
                )),
                Err(e) => out.push(failed(g, &name, e)),
            }
        }
    }
    out
}

fn foster_monotonicity(exec: Execution) -> Vec<CheckOutcome> {
    let g = Group::FosterMonotonicity;
    let w = to_angular(7.55 * GHZ);
    let c = 80.0 * FEMTOFARAD;
    let cases: [(&str, Netlist); 3] = [
        ("pi-capacitive", fixtures::default_pi()),
        ("series-lc", fixtures::series_lc_coupler(c, c, 5.0 * FEMTOFARAD, w)),
        ("line-resonator", fixtures::line_resonator(c, 5.0 * FEMTOFARAD, 50.0, 7.55e9)),
    ];
    let grid = fixtures::linear_grid(to_angular(1.0 * GHZ), to_angular(20.0 * GHZ), 2001);
    let mut out = Vec::new();
    for (name, net) in cases {
        let (lo, hi) = (grid[0], grid[grid.len() - 1]);
        let res = net.evaluate_z(&grid, exec).and_then(|ev| {
            (0..net.port_count())
                .map(|p| {
                    let poles = net.find_poles(p, p, lo, hi, 4001)?;
                    foster_check_with_poles(&ev.table, p, &poles)
                })
                .collect::<Result<Vec<_>>>()
        });
        match res {
            Ok(checks) => {
                let violations: usize = checks.iter().map(|c| c.violations).sum();
                let poles: usize = checks.iter().map(|c| c.poles).sum();
                out.push(outcome(
                    g,
                    name,
                    violations as f64,
                    0.0,
                    format!("{poles} poles over {} ports", checks.len()),
                ));
            }
            Err(e) => out.push(failed(g, name, e)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selectors() {
        assert_eq!(Selector::from_str("pv").unwrap().groups(), &[Group::PvIdentity]);
        assert_eq!(
            Selector::from_str("foster-monotonicity").unwrap().groups(),
            &[Group::FosterMonotonicity]
        );
        assert_eq!(Selector::from_str("ALL").unwrap().groups().len(), 4);
        assert!(Selector::from_str("bogus").is_err());
    }

    #[test]
    fn quick_groups_pass() {
        for sel in ["capacitive", "splitting", "foster"] {
            for o in run(&sel.parse().unwrap(), Execution::default()) {
                assert!(o.passed, "{o}");
            }
        }
    }
}
