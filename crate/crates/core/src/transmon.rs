//! Charge-basis transmon spectra.
//!
//! `H = Σₙ 4E_C (n − n_g)² |n⟩⟨n| − (E_J/2) Σₙ (|n⟩⟨n+1| + |n+1⟩⟨n|)` on the
//! Cooper-pair basis `n = −N..N`. The solver doubles `N` until the qubit
//! frequency is stable, then returns level energies (rad/s, ground at zero)
//! and the charge matrix `n_ij = ⟨i|n̂|j⟩` with the phase convention
//! `n_{i,i+1} ≥ 0`.

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::linalg::eigh;
use crate::units::{ELEMENTARY_CHARGE, HBAR};

pub const DEFAULT_CUTOFF: usize = 30;
pub const MIN_CUTOFF: usize = 5;
pub const MAX_CUTOFF: usize = 200;
const CONVERGENCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct TransmonSpec {
    /// `E_C` in joules.
    pub charging_energy: f64,
    /// `E_J` in joules.
    pub josephson_energy: f64,
    /// Offset charge `n_g` in units of 2e.
    pub offset_charge: f64,
    /// Basis spans `n = −N..=N`.
    pub charge_cutoff: usize,
}

impl TransmonSpec {
    pub fn new(charging_energy: f64, josephson_energy: f64) -> Result<Self> {
        let spec = TransmonSpec {
            charging_energy,
            josephson_energy,
            offset_charge: 0.0,
            charge_cutoff: DEFAULT_CUTOFF,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_offset_charge(mut self, ng: f64) -> Self {
        self.offset_charge = ng;
        self
    }

    pub fn with_cutoff(mut self, n: usize) -> Self {
        self.charge_cutoff = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.charging_energy > 0.0 && self.charging_energy.is_finite()) {
            return Err(invalid("charging energy must be positive"));
        }
        if !(self.josephson_energy >= 0.0 && self.josephson_energy.is_finite()) {
            return Err(invalid("Josephson energy must be non-negative"));
        }
        if !self.offset_charge.is_finite() {
            return Err(invalid("offset charge must be finite"));
        }
        if self.charge_cutoff < MIN_CUTOFF {
            return Err(Error::CutoffTooSmall(self.charge_cutoff));
        }
        Ok(())
    }

    pub fn ej_over_ec(&self) -> f64 {
        self.josephson_energy / self.charging_energy
    }

    /// `E_J/E_C ≥ 20`; below that charge dispersion is no longer negligible.
    pub fn is_transmon_regime(&self) -> bool {
        self.ej_over_ec() >= 20.0
    }
}

/// `E_C = e²/(2C)` in joules.
pub fn charging_energy_from_capacitance(c_total: f64) -> f64 {
    ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (2.0 * c_total)
}

#[derive(Debug, Clone)]
pub struct TransmonSpectrum {
    /// `q_j` in rad/s with `q_0 = 0`.
    pub level_energies: Vec<f64>,
    /// `n_ij`, dimensionless, `levels × levels`.
    pub charge_matrix: DMatrix<f64>,
    pub converged: bool,
    /// Cutoff at which the returned data were computed.
    pub cutoff: usize,
}

impl TransmonSpectrum {
    pub fn levels(&self) -> usize {
        self.level_energies.len()
    }

    /// `q_{i,i+1}` in rad/s.
    pub fn transition(&self, i: usize) -> f64 {
        self.level_energies[i + 1] - self.level_energies[i]
    }

    pub fn q01(&self) -> f64 {
        self.transition(0)
    }

    /// `q_{12} − q_{01}` in rad/s; negative for a transmon.
    pub fn anharmonicity(&self) -> f64 {
        self.transition(1) - self.transition(0)
    }

    pub fn charge_element(&self, i: usize, j: usize) -> f64 {
        self.charge_matrix[(i, j)]
    }

    /// Ratios `n_{i,i+1}/n_{0,1}` for `i = 0..levels-1`.
    pub fn charge_ratios(&self) -> Vec<f64> {
        let n01 = self.charge_element(0, 1);
        (0..self.levels() - 1)
            .map(|i| self.charge_element(i, i + 1) / n01)
            .collect()
    }
}

/// Tridiagonal charge Hamiltonian in joules, size `2N+1`, row `k` ↔ `n = k − N`.
pub fn build_charge_hamiltonian(spec: &TransmonSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    Ok(charge_hamiltonian(spec, spec.charge_cutoff, 1.0))
}

fn charge_hamiltonian(spec: &TransmonSpec, cutoff: usize, scale: f64) -> DMatrix<f64> {
    let dim = 2 * cutoff + 1;
    let ec = spec.charging_energy * scale;
    let half_ej = 0.5 * spec.josephson_energy * scale;
    let mut h = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        let n = k as f64 - cutoff as f64 - spec.offset_charge;
        h[(k, k)] = 4.0 * ec * n * n;
        if k + 1 < dim {
            h[(k, k + 1)] = -half_ej;
            h[(k + 1, k)] = -half_ej;
        }
    }
    h
}

fn spectrum_at(spec: &TransmonSpec, cutoff: usize, levels: usize) -> TransmonSpectrum {
    // Diagonalise in units of E_C for conditioning.
    let h = charge_hamiltonian(spec, cutoff, 1.0 / spec.charging_energy);
    let (values, vectors) = eigh(&h);
    let to_angular = spec.charging_energy / HBAR;
    let level_energies: Vec<f64> = values[..levels]
        .iter()
        .map(|e| (e - values[0]) * to_angular)
        .collect();

    let dim = h.nrows();
    let charge: Vec<f64> = (0..dim).map(|k| k as f64 - cutoff as f64).collect();
    let mut vecs: Vec<Vec<f64>> = (0..levels)
        .map(|c| vectors.column(c).iter().copied().collect())
        .collect();

    // Ground state: largest-magnitude component positive.
    let (imax, _) = vecs[0]
        .iter()
        .enumerate()
        .fold((0, 0.0), |acc, (k, v)| if v.abs() > acc.1 { (k, v.abs()) } else { acc });
    if vecs[0][imax] < 0.0 {
        vecs[0].iter_mut().for_each(|v| *v = -*v);
    }
    let element = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).zip(&charge).map(|((x, y), n)| x * n * y).sum()
    };
    for i in 1..levels {
        if element(&vecs[i - 1], &vecs[i]) < 0.0 {
            vecs[i].iter_mut().for_each(|v| *v = -*v);
        }
    }
    let mut charge_matrix = DMatrix::zeros(levels, levels);
    for i in 0..levels {
        for j in i..levels {
            let v = element(&vecs[i], &vecs[j]);
            charge_matrix[(i, j)] = v;
            charge_matrix[(j, i)] = v;
        }
    }
    TransmonSpectrum {
        level_energies,
        charge_matrix,
        converged: false,
        cutoff,
    }
}

/// Diagonalises the transmon and keeps the lowest `levels_kept` levels.
///
/// The cutoff starts at `spec.charge_cutoff` and is doubled until `q_{01}`
/// changes by less than 1e-9 relative; past [`MAX_CUTOFF`] this fails.
pub fn solve_spectrum(spec: &TransmonSpec, levels_kept: usize) -> Result<TransmonSpectrum> {
    spec.validate()?;
    if levels_kept < 2 {
        return Err(invalid("at least two levels must be kept"));
    }
    if levels_kept > 2 * spec.charge_cutoff - 3 {
        return Err(invalid(format!(
            "levels_kept {levels_kept} exceeds 2N-3 = {} for cutoff N = {}",
            2 * spec.charge_cutoff - 3,
            spec.charge_cutoff
        )));
    }
    if !spec.is_transmon_regime() {
        log::warn!(
            "E_J/E_C = {:.2} is below the transmon regime (20)",
            spec.ej_over_ec()
        );
    }
    let mut cutoff = spec.charge_cutoff;
    let mut current = spectrum_at(spec, cutoff, levels_kept);
    loop {
        let doubled = 2 * cutoff;
        if doubled > 2 * MAX_CUTOFF {
            return Err(Error::NotConverged(cutoff));
        }
        let next = spectrum_at(spec, doubled, levels_kept);
        let change = ((next.q01() - current.q01()) / current.q01()).abs();
        if change < CONVERGENCE_TOL {
            current.converged = true;
            return Ok(current);
        }
        if doubled > MAX_CUTOFF {
            return Err(Error::NotConverged(doubled));
        }
        cutoff = doubled;
        current = next;
    }
}

// Eigenvalues only, at the default cutoff; the calibrated result is
// re-solved with the convergence check.
fn q01_for(ec: f64, ej: f64, ng: f64) -> Result<f64> {
    let spec = TransmonSpec::new(ec, ej)?.with_offset_charge(ng);
    let h = charge_hamiltonian(&spec, spec.charge_cutoff, 1.0 / ec);
    let mut e: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    Ok((e[1] - e[0]) * ec / HBAR)
}

/// Finds `E_J` such that the transmon with charging energy `ec` has
/// `q_{01} = target_q01` (rad/s) to 1e-6 relative.
pub fn calibrate_ej(target_q01: f64, ec: f64, ng: f64) -> Result<f64> {
    if !(target_q01 > 0.0 && target_q01.is_finite()) {
        return Err(invalid("target transition frequency must be positive"));
    }
    if !(ec > 0.0) {
        return Err(invalid("charging energy must be positive"));
    }
    let lo_ej = ec;
    let f_lo = q01_for(ec, lo_ej, ng)? - target_q01;
    if f_lo > 0.0 {
        return Err(Error::Unreachable(format!(
            "q01 = {:.6e} rad/s already at E_J/E_C = 1, above target {:.6e} rad/s",
            f_lo + target_q01,
            target_q01
        )));
    }
    // Transmon asymptote ħq ≈ √(8E_J E_C) − E_C inverted for an initial bracket.
    let guess = {
        let x = HBAR * target_q01 + ec;
        x * x / (8.0 * ec)
    };
    let mut hi_ej = (2.0 * guess).max(2.0 * lo_ej);
    while q01_for(ec, hi_ej, ng)? < target_q01 {
        hi_ej *= 2.0;
        if hi_ej / ec > 1e7 {
            return Err(Error::Unreachable("no upper bracket for E_J".into()));
        }
    }
    let mut lo = lo_ej;
    let mut hi = hi_ej;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if q01_for(ec, mid, ng)? < target_q01 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) / hi < 1e-13 {
            break;
        }
    }
    let ej = 0.5 * (lo + hi);
    solve_spectrum(&TransmonSpec::new(ec, ej)?.with_offset_charge(ng), 3)?;
    Ok(ej)
}

/// Transmon with `E_C = e²/2C` and `E_J` calibrated to `target_q01` (rad/s).
pub fn spec_from_capacitance(c_total: f64, target_q01: f64, ng: f64) -> Result<TransmonSpec> {
    if !(c_total > 0.0 && c_total.is_finite()) {
        return Err(invalid("total capacitance must be positive"));
    }
    let ec = charging_energy_from_capacitance(c_total);
    let ej = calibrate_ej(target_q01, ec, ng)?;
    Ok(TransmonSpec::new(ec, ej)?.with_offset_charge(ng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{cyclic_to_energy, energy_to_cyclic, to_angular, to_cyclic, GHZ, MHZ};

    fn reference_spec() -> TransmonSpec {
        TransmonSpec::new(cyclic_to_energy(250.0 * MHZ), cyclic_to_energy(12.5 * GHZ)).unwrap()
    }

    #[test]
    fn decoupled_charge_states() {
        let ec = cyclic_to_energy(250.0 * MHZ);
        let spec = TransmonSpec::new(ec, 0.0).unwrap().with_cutoff(6);
        let h = build_charge_hamiltonian(&spec).unwrap();
        for k in 0..13 {
            let n = k as f64 - 6.0;
            assert_eq!(h[(k, k)], 4.0 * ec * n * n);
            for l in 0..13 {
                if l != k {
                    assert_eq!(h[(k, l)], 0.0);
                }
            }
        }
    }

    #[test]
    fn hopping_entry() {
        let spec = reference_spec().with_cutoff(10);
        let h = build_charge_hamiltonian(&spec).unwrap();
        // row n = 0 is index 10, column n = 1 is index 11
        let expected = -cyclic_to_energy(6.25 * GHZ);
        assert!((h[(10, 11)] - expected).abs() <= 1e-15 * expected.abs());
        assert_eq!(h[(10, 11)], h[(11, 10)]);
    }

    #[test]
    fn charge_degeneracy_point() {
        let ec = cyclic_to_energy(250.0 * MHZ);
        let spec = TransmonSpec::new(ec, 0.0).unwrap().with_offset_charge(0.5);
        let h = build_charge_hamiltonian(&spec).unwrap();
        let n0 = spec.charge_cutoff;
        assert_eq!(h[(n0, n0)], h[(n0 + 1, n0 + 1)]);
        assert!((h[(n0, n0)] - ec).abs() < 1e-30);
    }

    #[test]
    fn cutoff_guard() {
        let spec = reference_spec().with_cutoff(4);
        assert!(matches!(
            build_charge_hamiltonian(&spec),
            Err(Error::CutoffTooSmall(4))
        ));
        assert!(TransmonSpec::new(0.0, 1.0).is_err());
        assert!(TransmonSpec::new(1.0, -1.0).is_err());
    }

    #[test]
    fn levels_kept_guard() {
        let spec = reference_spec().with_cutoff(5);
        assert!(solve_spectrum(&spec, 8).is_err());
        assert!(solve_spectrum(&spec, 7).is_ok());
    }

    #[test]
    fn koch_asymptotics() {
        let s = solve_spectrum(&reference_spec(), 5).unwrap();
        assert!(s.converged);
        let q01_ghz = to_cyclic(s.q01()) / GHZ;
        assert!((q01_ghz - 4.75).abs() / 4.75 < 0.02, "q01 = {q01_ghz}");
        let alpha_mhz = to_cyclic(s.anharmonicity()) / MHZ;
        assert!((alpha_mhz + 250.0).abs() / 250.0 < 0.15, "alpha = {alpha_mhz}");
        let n01_asym = (50.0f64 / 8.0).powf(0.25) / 2f64.sqrt();
        assert!((s.charge_element(0, 1) - n01_asym).abs() / n01_asym < 0.03);
        assert!(s.charge_element(0, 2).abs() < 1e-10);
        assert_eq!(s.level_energies[0], 0.0);
    }

    #[test]
    fn spectrum_invariants() {
        let s = solve_spectrum(&reference_spec().with_offset_charge(0.17), 6).unwrap();
        assert!(s.level_energies.windows(2).all(|w| w[1] > w[0]));
        for i in 0..6 {
            for j in 0..6 {
                assert!((s.charge_matrix[(i, j)] - s.charge_matrix[(j, i)]).abs() < 1e-10);
            }
            if i + 1 < 6 {
                assert!(s.charge_element(i, i + 1) >= 0.0);
            }
        }
    }

    #[test]
    fn parity_selection_rule() {
        let s = solve_spectrum(&reference_spec(), 6).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                if (i + j) % 2 == 0 {
                    assert!(s.charge_element(i, j).abs() < 1e-10, "n[{i},{j}]");
                }
            }
        }
    }

    #[test]
    fn integer_offset_translation() {
        let a = solve_spectrum(&reference_spec().with_offset_charge(0.3), 5).unwrap();
        let b = solve_spectrum(&reference_spec().with_offset_charge(1.3), 5).unwrap();
        for (x, y) in a.level_energies.iter().zip(&b.level_energies).skip(1) {
            assert!((x - y).abs() / x < 1e-9);
        }
    }

    #[test]
    fn charge_dispersion_is_suppressed() {
        let ec = cyclic_to_energy(250.0 * MHZ);
        let spec = TransmonSpec::new(ec, 50.0 * ec).unwrap();
        let q: Vec<f64> = (0..=10)
            .map(|k| {
                let s = solve_spectrum(&spec.clone().with_offset_charge(k as f64 * 0.05), 3)
                    .unwrap();
                s.q01()
            })
            .collect();
        let max = q.iter().cloned().fold(f64::MIN, f64::max);
        let min = q.iter().cloned().fold(f64::MAX, f64::min);
        assert!((max - min) / min < 1e-3);
    }

    #[test]
    fn nearest_neighbour_dominance() {
        let ec = cyclic_to_energy(250.0 * MHZ);
        let spec = TransmonSpec::new(ec, 50.0 * ec).unwrap().with_offset_charge(0.2);
        let s = solve_spectrum(&spec, 6).unwrap();
        for i in 0..=2 {
            let ratio = s.charge_element(i, i + 2).abs() / s.charge_element(i, i + 1).abs();
            assert!(ratio < 0.1, "i = {i}: {ratio}");
        }
    }

    #[test]
    fn cutoff_doubling_is_stable() {
        let spec = reference_spec();
        let a = solve_spectrum(&spec, 5).unwrap();
        let b = solve_spectrum(&spec.clone().with_cutoff(60), 5).unwrap();
        for i in 1..5 {
            let (x, y) = (a.level_energies[i], b.level_energies[i]);
            assert!((x - y).abs() / x < 1e-9);
        }
        for i in 0..4 {
            let (x, y) = (a.charge_element(i, i + 1), b.charge_element(i, i + 1));
            assert!((x - y).abs() / x < 1e-9);
        }
    }

    #[test]
    fn calibrate_round_trip() {
        let ec = cyclic_to_energy(250.0 * MHZ);
        for ej_ratio in [30.0, 50.0, 80.0] {
            let ej = ej_ratio * ec;
            let target = q01_for(ec, ej, 0.0).unwrap();
            let found = calibrate_ej(target, ec, 0.0).unwrap();
            assert!((found - ej).abs() / ej < 1e-6);
        }
    }

    #[test]
    fn calibrate_inverts_asymptote() {
        let ec = cyclic_to_energy(250.0 * MHZ);
        let ej = calibrate_ej(to_angular(4.75 * GHZ), ec, 0.0).unwrap();
        let ej_ghz = energy_to_cyclic(ej) / GHZ;
        assert!((ej_ghz - 12.5).abs() / 12.5 < 0.05, "E_J/h = {ej_ghz} GHz");
        let q = q01_for(ec, ej, 0.0).unwrap();
        assert!((q - to_angular(4.75 * GHZ)).abs() / q < 1e-6);
    }

    #[test]
    fn calibrate_rejects_unreachable_target() {
        let ec = cyclic_to_energy(250.0 * MHZ);
        assert!(matches!(
            calibrate_ej(to_angular(100.0 * MHZ), ec, 0.0),
            Err(Error::Unreachable(_))
        ));
    }

    #[test]
    fn charging_energy_from_reference_capacitances() {
        let ec1 = energy_to_cyclic(charging_energy_from_capacitance(57.24e-15)) / MHZ;
        // e²/(2Ch) evaluates to 338.40 MHz; the quoted 338.6 is a rounded figure.
        assert!((ec1 / 338.6 - 1.0).abs() < 1e-3, "{ec1}");
        let ec2 = energy_to_cyclic(charging_energy_from_capacitance(81.94e-15)) / MHZ;
        assert!((ec2 / 236.5 - 1.0).abs() < 1e-3, "{ec2}");
        assert!(spec_from_capacitance(0.0, 1e10, 0.0).is_err());
        let spec = spec_from_capacitance(57.24e-15, to_angular(5.0 * GHZ), 0.0).unwrap();
        let s = solve_spectrum(&spec, 3).unwrap();
        assert!((s.q01() - to_angular(5.0 * GHZ)).abs() / s.q01() < 1e-6);
    }
}
