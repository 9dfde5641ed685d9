//! Qubit–qubit exchange rate `J` by three routes: from the transfer
//! impedance, from an explicit sum over modes, and from the closed form for
//! a weak coupling capacitor. Also hosts the principal-value check that
//! links the lossy impedance to the lossless formula.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::modes::ModeSet;
use crate::netlist::find_poles_in_table;
use crate::network::ImpedanceTable;
use crate::transmon::TransmonSpectrum;
use crate::units::{ELEMENTARY_CHARGE, HBAR, MHZ, PLANCK};

/// `|g/Δ|` above which the dispersive approximation is flagged.
pub const DISPERSIVE_LIMIT: f64 = 0.1;
/// A pole of `Z_12` this many grid intervals or closer to an evaluation
/// frequency marks the result unreliable.
pub const POLE_GUARD_INTERVALS: usize = 3;
/// Largest tolerated share of `|Re Z|` mass estimated to lie outside the
/// table in [`pv_integral_check`].
pub const BAND_COVERAGE_LIMIT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Impedance,
    ModeSum,
    Capacitive,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::Impedance => "impedance",
            Route::ModeSum => "mode_sum",
            Route::Capacitive => "capacitive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeResult {
    /// Joules.
    pub energy: f64,
    pub route: Route,
    /// Contributions evaluated at qubit 1's and qubit 2's transition
    /// frequency, when the route has them.
    pub terms: Option<[f64; 2]>,
    pub warnings: Vec<String>,
    pub reliable: bool,
    /// `max |Re Z| / |Z|` of the table (impedance route only).
    pub discarded_loss: Option<f64>,
}

impl ExchangeResult {
    fn new(energy: f64, route: Route) -> Self {
        ExchangeResult {
            energy,
            route,
            terms: None,
            warnings: Vec::new(),
            reliable: true,
            discarded_loss: None,
        }
    }

    /// `J/h` in MHz.
    pub fn over_h_mhz(&self) -> f64 {
        self.energy / (PLANCK * MHZ)
    }
}

/// Which ports and transitions enter [`j_impedance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImpedanceOptions {
    pub port1: usize,
    pub port2: usize,
    /// Transition `i → i+1` of qubit 1.
    pub level1: usize,
    /// Transition `j → j+1` of qubit 2.
    pub level2: usize,
}

impl Default for ImpedanceOptions {
    fn default() -> Self {
        ImpedanceOptions {
            port1: 0,
            port2: 1,
            level1: 0,
            level2: 0,
        }
    }
}

/// `J_ij = 2e² [n¹_{i+1,i} n²_{j,j+1} q¹ Im Z12(q¹) + n²_{j+1,j} n¹_{i,i+1} q² Im Z21(q²)]`
/// with `q¹ = q¹_{i,i+1}`, `q² = q²_{j,j+1}`. The real part of the table is
/// ignored; its size is reported as `discarded_loss`.
pub fn j_impedance(
    qubit1: &TransmonSpectrum,
    qubit2: &TransmonSpectrum,
    table: &ImpedanceTable,
    opts: ImpedanceOptions,
) -> Result<ExchangeResult> {
    let ImpedanceOptions {
        port1,
        port2,
        level1: i,
        level2: j,
    } = opts;
    if port1 == port2 {
        return Err(invalid("the two qubits must sit on different ports"));
    }
    if i + 1 >= qubit1.levels() || j + 1 >= qubit2.levels() {
        return Err(invalid("requested transition exceeds the retained levels"));
    }
    let q1 = qubit1.transition(i);
    let q2 = qubit2.transition(j);
    let n1 = qubit1.charge_element(i, i + 1);
    let n2 = qubit2.charge_element(j, j + 1);
    let z12 = table.interpolate_z(port1, port2, q1)?;
    let z21 = table.interpolate_z(port2, port1, q2)?;

    let e2 = ELEMENTARY_CHARGE * ELEMENTARY_CHARGE;
    let term1 = 2.0 * e2 * n1 * n2 * q1 * z12.value.im;
    let term2 = 2.0 * e2 * n2 * n1 * q2 * z21.value.im;

    let mut result = ExchangeResult::new(term1 + term2, Route::Impedance);
    result.terms = Some([term1, term2]);
    let loss = table.discarded_loss();
    result.discarded_loss = Some(loss);
    if loss > 0.0 {
        result
            .warnings
            .push(format!("discarded Re Z: max |Re Z|/|Z| = {loss:.3e}"));
    }
    if z12.pole_warning || z21.pole_warning {
        result
            .warnings
            .push("interpolated Im Z is steep or large: close to a pole".into());
    }

    let (lo, hi) = table.range();
    let mut poles = find_poles_in_table(table, port1, port2, lo, hi)?;
    poles.extend(find_poles_in_table(table, port2, port1, lo, hi)?);
    for q in [q1, q2] {
        let kq = table.interval_of(q).unwrap_or(0);
        for &p in &poles {
            let kp = table.interval_of(p).unwrap_or(0);
            if kq.abs_diff(kp) <= POLE_GUARD_INTERVALS {
                result.reliable = false;
                result.warnings.push(format!(
                    "pole of Z12 near {:.6} GHz within {POLE_GUARD_INTERVALS} grid intervals of {:.6} GHz",
                    p / (2.0 * std::f64::consts::PI * 1e9),
                    q / (2.0 * std::f64::consts::PI * 1e9)
                ));
            }
        }
    }
    for w in &result.warnings {
        log::warn!("{w}");
    }
    Ok(result)
}

/// Mode-sum exchange rate
/// `J_ij = Σ_k (ħ/2)[g¹*g²/(q¹ − ω_k) + g¹g²*/(q² − ω_k)]`.
///
/// `n1[k]`, `n2[k]` are the charge elements `n_{k,k+1}` of each qubit, used
/// to scale the supplied ground-transition couplings to transition `i`
/// (`j`); `q1`, `q2` are the frequencies of those transitions. Mode
/// couplings for qubit 1 and 2 are entries 0 and 1 of each mode.
pub fn j_mode_sum(
    n1: &[f64],
    n2: &[f64],
    q1: f64,
    q2: f64,
    modes: &ModeSet,
    i: usize,
    j: usize,
) -> Result<ExchangeResult> {
    if modes.is_empty() {
        let mut r = ExchangeResult::new(0.0, Route::ModeSum);
        r.terms = Some([0.0, 0.0]);
        return Ok(r);
    }
    if modes.qubit_count() < 2 {
        return Err(invalid("mode couplings must be given for two qubits"));
    }
    let scale = |n: &[f64], level: usize| -> Result<f64> {
        match (n.first(), n.get(level)) {
            (Some(&n0), Some(&nl)) if n0 != 0.0 => Ok(nl / n0),
            _ => Err(invalid("charge elements missing for the requested transition")),
        }
    };
    let (s1, s2) = (scale(n1, i)?, scale(n2, j)?);
    let mut t1 = Complex64::new(0.0, 0.0);
    let mut t2 = Complex64::new(0.0, 0.0);
    let mut result = ExchangeResult::new(0.0, Route::ModeSum);
    for (k, mode) in modes.modes().iter().enumerate() {
        let w = mode.frequency;
        if q1 == w || q2 == w {
            return Err(Error::Resonance(w));
        }
        let g1 = mode.couplings[0] * s1;
        let g2 = mode.couplings[1] * s2;
        let (d1, d2) = (q1 - w, q2 - w);
        let worst = (g1.norm() / d1.abs()).max(g2.norm() / d2.abs());
        if worst > DISPERSIVE_LIMIT {
            result.warnings.push(format!(
                "mode {k}: |g/Δ| = {worst:.3} exceeds {DISPERSIVE_LIMIT}"
            ));
        }
        t1 += g1.conj() * g2 / d1;
        t2 += g1 * g2.conj() / d2;
    }
    let total = (t1 + t2) * (0.5 * HBAR);
    if total.im.abs() > 1e-9 * total.norm() {
        result.warnings.push(format!(
            "complex couplings leave an imaginary residue {:.3e} J (dropped)",
            total.im
        ));
    }
    result.energy = total.re;
    result.terms = Some([0.5 * HBAR * t1.re, 0.5 * HBAR * t2.re]);
    for w in &result.warnings {
        log::warn!("{w}");
    }
    Ok(result)
}

/// Weak-coupling capacitor estimate `J = ħ (1/2) (C_c/√(C1 C2)) √(q1 q2)`.
pub fn j_capacitive(c1: f64, c2: f64, cc: f64, q1: f64, q2: f64) -> Result<ExchangeResult> {
    if !(c1 > 0.0 && c2 > 0.0) {
        return Err(invalid("qubit capacitances must be positive"));
    }
    if !(cc >= 0.0) {
        return Err(invalid("coupling capacitance must be non-negative"));
    }
    if !(q1 > 0.0 && q2 > 0.0) {
        return Err(invalid("qubit frequencies must be positive"));
    }
    let j = HBAR * 0.5 * cc / (c1 * c2).sqrt() * (q1 * q2).sqrt();
    Ok(ExchangeResult::new(j, Route::Capacitive))
}

/// Coupling capacitance that reproduces `j_target` through [`j_capacitive`].
pub fn fit_cc(j_target: f64, c1: f64, c2: f64, q1: f64, q2: f64) -> Result<f64> {
    if !(j_target >= 0.0) {
        return Err(invalid("target coupling must be non-negative"));
    }
    if !(c1 > 0.0 && c2 > 0.0 && q1 > 0.0 && q2 > 0.0) {
        return Err(invalid("capacitances and frequencies must be positive"));
    }
    Ok(2.0 * (j_target / HBAR) * (c1 * c2).sqrt() / (q1 * q2).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvCheck {
    /// Dispersion-integral side.
    pub pv_value: f64,
    /// `q · Im Z_ij(q)` from the table.
    pub reference: f64,
    /// `|pv − reference| / |reference|`, 1 for a lossless table.
    pub relative_gap: f64,
    /// Estimated share of `|Re Z|` mass outside the table.
    pub tail_fraction: f64,
    /// Exclusion half-width used for the coarse Richardson stage (rad/s).
    pub delta: f64,
    pub lossless: bool,
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    (fm, (b - a) / 6.0 * (f(a) + 4.0 * fm + f(b)))
}

fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Integrates `f` over `[a, b]`, running adaptive Simpson on each piece
/// between consecutive `knots` so that interpolant kinks sit on panel edges.
fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, knots: &[f64], rel_tol: f64) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let mut edges = vec![a];
    let start = knots.partition_point(|&k| k <= a);
    edges.extend(knots[start..].iter().take_while(|&&k| k < b));
    edges.push(b);
    let mut total = 0.0;
    for e in edges.windows(2) {
        let (x0, x1) = (e[0], e[1]);
        let (fa, fb) = (f(x0), f(x1));
        let (fm, whole) = simpson(f, x0, x1);
        let tol = rel_tol * whole.abs().max(1e-300);
        total += adaptive_simpson(f, x0, x1, fa, fm, fb, whole, tol, 40);
    }
    total
}

/// Numerical check that the lossy transfer impedance satisfies
/// `q Im Z(q) = −(1/π) PV ∫_{−∞}^{∞} ω Re Z(ω) / (q − ω) dω`
/// (e^{jωt} convention). `Re Z` is even, so the integral is folded onto the
/// tabulated positive band:
/// `PV ∫ ω Re Z/(q − ω) dω − ∫ ω Re Z/(q + ω) dω`.
///
/// The principal value excludes `|ω − q| < δ` and is extrapolated from
/// exclusion widths δ and δ/2, which cancels the `2δ f'(q)` window bias.
pub fn pv_integral_check(table: &ImpedanceTable, i: usize, j: usize, q: f64) -> Result<PvCheck> {
    let interp = table.interpolant(i, j)?;
    let (lo, hi) = table.range();
    let at_q = interp.eval(q)?;
    if at_q.pole_warning {
        log::warn!("PV check frequency sits next to a pole of Z");
    }
    let reference = q * at_q.value.im;
    let re = interp.real_part();
    let knots = re.knots();
    let values = re.values();

    let peak = values.iter().cloned().fold(0.0, |m: f64, v| m.max(v.abs()));
    if peak == 0.0 {
        log::warn!("lossless input: PV check not applicable");
        return Ok(PvCheck {
            pv_value: 0.0,
            reference,
            relative_gap: 1.0,
            tail_fraction: 0.0,
            delta: 0.0,
            lossless: true,
        });
    }

    // Mass outside the band, assuming Lorentzian decay from the peak.
    let abs_re = |w: f64| re.eval(w).map(f64::abs).unwrap_or(0.0);
    let kp = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(k, _)| k)
        .unwrap_or(0);
    let wp = knots[kp];
    let (r_lo, r_hi) = (values[0].abs(), values[values.len() - 1].abs());
    let (d_lo, d_hi) = (wp - lo, hi - wp);
    let tail_lo = if d_lo > 0.0 { r_lo * d_lo * d_lo * (1.0 / d_lo - 1.0 / wp) } else { 0.0 };
    let tail_hi = r_hi * d_hi;
    let inside = integrate(&abs_re, lo, hi, knots, 1e-8);
    let tail_fraction = (tail_lo + tail_hi) / (inside + tail_lo + tail_hi);
    if tail_fraction > BAND_COVERAGE_LIMIT {
        return Err(Error::BandCoverage(format!(
            "an estimated {:.2}% of the Re Z mass lies outside [{lo:.4e}, {hi:.4e}] rad/s",
            100.0 * tail_fraction
        )));
    }

    let rez = |w: f64| re.eval(w).unwrap_or(0.0);
    let singular = |w: f64| w * rez(w) / (q - w);
    let mirrored = |w: f64| w * rez(w) / (q + w);
    let tol = 1e-10;
    let excluded = |delta: f64| {
        integrate(&singular, lo, q - delta, knots, tol)
            + integrate(&singular, q + delta, hi, knots, tol)
    };
    let gap_to_edge = (q - lo).min(hi - q);
    let delta = (1e-3 * q).min(0.25 * gap_to_edge);
    let pv = 2.0 * excluded(0.5 * delta) - excluded(delta);
    let regular = integrate(&mirrored, lo, hi, knots, tol);
    let pv_value = -(pv - regular) / std::f64::consts::PI;
    let relative_gap = if reference == 0.0 {
        f64::INFINITY
    } else {
        (pv_value - reference).abs() / reference.abs()
    };
    Ok(PvCheck {
        pv_value,
        reference,
        relative_gap,
        tail_fraction,
        delta,
        lossless: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::Mode;
    use crate::units::{to_angular, FEMTOFARAD, GHZ};

    #[test]
    fn capacitive_closed_form() {
        let q = to_angular(4.52 * GHZ);
        let r = j_capacitive(81.94 * FEMTOFARAD, 81.93 * FEMTOFARAD, 0.216 * FEMTOFARAD, q, q)
            .unwrap();
        assert!((r.over_h_mhz() - 5.96).abs() < 0.01, "{}", r.over_h_mhz());
        assert_eq!(r.over_h_mhz(), r.energy / (PLANCK * 1e6));
        let doubled =
            j_capacitive(81.94e-15, 81.93e-15, 0.432e-15, q, q).unwrap().energy / r.energy;
        assert_eq!(doubled, 2.0);
        assert_eq!(j_capacitive(1e-13, 1e-13, 0.0, q, q).unwrap().energy, 0.0);
        assert!(j_capacitive(0.0, 1e-13, 1e-16, q, q).is_err());
    }

    #[test]
    fn fit_inverts_capacitive() {
        let q = to_angular(4.52 * GHZ);
        let (c1, c2) = (81.94e-15, 81.93e-15);
        let j = j_capacitive(c1, c2, 0.209e-15, q, q).unwrap();
        let cc = fit_cc(j.energy, c1, c2, q, q).unwrap();
        assert!((cc / 0.209e-15 - 1.0).abs() < 1e-12);
        let j577 = 5.77 * PLANCK * 1e6;
        let cc = fit_cc(j577, c1, c2, q, q).unwrap();
        assert!((cc / FEMTOFARAD - 0.209).abs() < 0.001, "{cc}");
        assert_eq!(fit_cc(0.0, c1, c2, q, q).unwrap(), 0.0);
    }

    #[test]
    fn single_mode_sum() {
        let g = to_angular(100e6);
        let q = to_angular(5.0 * GHZ);
        let modes = ModeSet::new(vec![Mode::real(to_angular(6.0 * GHZ), &[g, g])]).unwrap();
        let r = j_mode_sum(&[1.0], &[1.0], q, q, &modes, 0, 0).unwrap();
        assert!((r.over_h_mhz() + 10.0).abs() < 1e-9);
        let strong = ModeSet::new(vec![Mode::real(to_angular(6.0 * GHZ), &[2.0 * g, g])]).unwrap();
        let r = j_mode_sum(&[1.0], &[1.0], q, q, &strong, 0, 0).unwrap();
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn mode_sum_cancellation_and_guards() {
        let g = to_angular(50e6);
        let q = to_angular(5.0 * GHZ);
        let modes = ModeSet::new(vec![
            Mode::real(to_angular(4.0 * GHZ), &[g, g]),
            Mode::real(to_angular(6.0 * GHZ), &[g, g]),
        ])
        .unwrap();
        let r = j_mode_sum(&[1.0], &[1.0], q, q, &modes, 0, 0).unwrap();
        let one = 0.5 * HBAR * 2.0 * g * g / to_angular(1.0 * GHZ);
        assert!(r.energy.abs() < 1e-12 * one);
        let empty = j_mode_sum(&[1.0], &[1.0], q, q, &ModeSet::empty(), 0, 0).unwrap();
        assert_eq!(empty.energy, 0.0);
        let resonant = ModeSet::new(vec![Mode::real(q, &[g, g])]).unwrap();
        assert!(matches!(
            j_mode_sum(&[1.0], &[1.0], q, q, &resonant, 0, 0),
            Err(Error::Resonance(_))
        ));
    }

    #[test]
    fn mode_sum_level_scaling() {
        let g = to_angular(30e6);
        let q = to_angular(5.0 * GHZ);
        let modes = ModeSet::new(vec![Mode::real(to_angular(7.0 * GHZ), &[g, g])]).unwrap();
        let n = [1.0, 1.4];
        let base = j_mode_sum(&n, &n, q, q, &modes, 0, 0).unwrap().energy;
        let up = j_mode_sum(&n, &n, q, q, &modes, 1, 0).unwrap().energy;
        assert!((up / base - 1.4).abs() < 1e-12);
    }
}
