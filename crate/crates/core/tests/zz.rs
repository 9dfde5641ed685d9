use nalgebra::DMatrix;
use proptest::prelude::*;

use zcoupling::fixtures::{
    cancellation_curve, cancellation_template, capacitive_coupler_curve, linear_grid,
    tunable_coupler_template,
};
use zcoupling::par::Execution;
use zcoupling::units::{to_angular, GHZ, HBAR, MHZ, PLANCK};
use zcoupling::zz::*;

fn ghz(x: f64) -> f64 {
    to_angular(x * GHZ)
}

fn spectral_scale(sys: &DuffingSystem) -> f64 {
    build_duffing_hamiltonian(sys)
        .unwrap()
        .iter()
        .fold(0.0, |m: f64, v| m.max(v.abs()))
}

/// Fine-grid root of ζ(q_c): the sign change on a 1e−6 GHz grid, linearly
/// interpolated. Independent of the sweep's bisection.
fn fine_root(template: &DuffingSystem, curve: &JCurve, lo_ghz: f64, hi_ghz: f64) -> f64 {
    let grid = linear_grid(ghz(lo_ghz), ghz(hi_ghz), 2001);
    let z: Vec<f64> = grid
        .iter()
        .map(|&qc| {
            let (j1, j2) = curve.eval(qc).unwrap();
            zz_at_truncation(&template.with_coupler(qc, j1, j2)).unwrap().zeta
        })
        .collect();
    let k = (0..z.len() - 1)
        .find(|&k| z[k].signum() != z[k + 1].signum())
        .expect("sign change on the fine grid");
    grid[k] + (grid[k + 1] - grid[k]) * z[k] / (z[k] - z[k + 1])
}

#[test]
fn perturbative_labels_are_clean() {
    let sys = DuffingSystem::new(
        [ghz(5.0), ghz(5.5), ghz(7.0)],
        [ghz(0.3); 3],
        1.0 * MHZ * PLANCK,
        20.0 * MHZ * PLANCK,
        20.0 * MHZ * PLANCK,
    )
    .unwrap();
    let p = zz_at_truncation(&sys).unwrap();
    assert!(p.labelling.quality() > 0.99, "{:?}", p.labelling);
}

#[test]
fn regression_point() {
    // q1 = 5.0, q2 = 5.5 GHz, α = 0.3 GHz, J12/h = 10 MHz, coupler decoupled.
    let sys = DuffingSystem::new(
        [ghz(5.0), ghz(5.5), ghz(7.0)],
        [ghz(0.3); 3],
        10.0 * MHZ * PLANCK,
        0.0,
        0.0,
    )
    .unwrap();
    let z4 = zz_at_truncation(&sys.with_truncation(4)).unwrap().zeta;
    let z8 = zz_at_truncation(&sys.with_truncation(8)).unwrap().zeta;
    assert!((z4 - z8).abs() < ZETA_TOLERANCE);
    // Two-level-plus-leakage estimate 2J²(α1+α2)/((Δ+α1)(Δ−α2)) with
    // Δ = q1 − q2 (cyclic units, α > 0 here entering as −α).
    let (j, d, a) = (0.010, -0.5, -0.3);
    let approx = 2.0 * j * j * (a + a) / ((d + a) * (d - a));
    let z_mhz = z4 / to_angular(MHZ);
    assert!((z_mhz / (approx * 1e3) - 1.0).abs() < 0.1, "{z_mhz} vs {}", approx * 1e3);
    // Pinned after first computation.
    assert!((z_mhz - -0.746_050).abs() < 1e-5, "{z_mhz}");
}

#[test]
fn truncation_changes_shrink() {
    let sys = tunable_coupler_template().with_coupler(ghz(4.2), 60.0 * MHZ * PLANCK, 60.0 * MHZ * PLANCK);
    let z: Vec<f64> = (3..=9)
        .map(|d| zz_at_truncation(&sys.with_truncation(d)).unwrap().zeta)
        .collect();
    let changes: Vec<f64> = z.windows(3).map(|w| (w[2] - w[0]).abs()).collect();
    // Excitation number is conserved, so the ≤ 2-excitation states are
    // exact from d = 3 on; the changes sit at the round-off floor.
    let floor = 1e-12 * spectral_scale(&sys.with_truncation(9));
    assert!(changes.iter().all(|&c| c <= floor), "{changes:?} floor {floor}");
}

#[test]
fn positive_curve_has_no_crossings() {
    let t = DuffingSystem::new(
        [ghz(5.0), ghz(5.5), ghz(7.0)],
        [ghz(0.3); 3],
        5.0 * MHZ * PLANCK,
        0.0,
        0.0,
    )
    .unwrap();
    let grid = linear_grid(ghz(6.5), ghz(8.0), 16);
    let curve = JCurve::from_fn(&grid, |_| 0.0, |_| 0.0).unwrap();
    let c = sweep_coupler(&t, &grid, &curve, Execution::default()).unwrap();
    let first = c.zeta[0].unwrap();
    assert!(c.zeta.iter().all(|z| z.unwrap().signum() == first.signum()));
    assert!(c.crossings.is_empty());
}

#[test]
fn cancellation_crossings_recovered() {
    let t = cancellation_template();
    let grid = linear_grid(ghz(3.0), ghz(4.6), 33);
    let curve = cancellation_curve(&t, &grid, ghz(4.0)).unwrap();
    let sweep = sweep_coupler(&t, &grid, &curve, Execution::default()).unwrap();
    assert_eq!(sweep.flagged(), 0);
    assert_eq!(sweep.crossings.len(), 2, "{:?}", sweep.crossings);
    for &root in &sweep.crossings {
        let found = root / to_angular(GHZ);
        assert!((found - 4.0).abs() < 0.15, "{found}");
        let reference = fine_root(&t, &curve, found - 0.001, found + 0.001) / to_angular(GHZ);
        assert!((found - reference).abs() < 1e-4, "{found} vs {reference}");
        let (j1, j2) = curve.eval(root).unwrap();
        let at_root = zz_at_truncation(&t.with_coupler(root, j1, j2)).unwrap();
        assert!(at_root.zeta.abs() < ZETA_TOLERANCE);
    }
}

#[test]
fn fixed_qubit_point_has_two_crossings() {
    let t = tunable_coupler_template();
    let grid = linear_grid(ghz(2.5), ghz(4.9), 121);
    let curve = capacitive_coupler_curve(&t, &grid, 0.04).unwrap();
    assert!(curve.j1c.windows(2).all(|w| w[1] > w[0]));
    let sweep = sweep_coupler(&t, &grid, &curve, Execution::default()).unwrap();
    let good: Vec<f64> = sweep.zeta.iter().flatten().cloned().collect();
    let changes = good.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
    assert_eq!(changes, 2);
    assert_eq!(sweep.crossings.len(), 2);
}

#[test]
fn sequential_and_parallel_sweeps_agree() {
    let t = cancellation_template();
    let grid = linear_grid(ghz(3.5), ghz(4.5), 11);
    let curve = cancellation_curve(&t, &grid, ghz(4.0)).unwrap();
    let a = sweep_coupler(&t, &grid, &curve, Execution::Sequential).unwrap();
    let b = sweep_coupler(&t, &grid, &curve, Execution::Parallel).unwrap();
    assert_eq!(a.zeta, b.zeta);
    assert_eq!(a.crossings, b.crossings);
    assert_eq!(a.to_csv(), b.to_csv());
    assert!(a.to_csv().starts_with("q_c_GHz,zz_kHz,label_quality\n"));
}

#[test]
fn dimension_guard() {
    let t = cancellation_template();
    assert!(t.with_truncation(17).validate().is_err());
    assert!(t.with_truncation(16).validate().is_ok());
    assert!(t.with_truncation(2).validate().is_err());
}

fn system() -> impl Strategy<Value = DuffingSystem> {
    (
        4.0..6.0f64,
        4.0..6.0f64,
        6.5..8.0f64,
        0.1..0.4f64,
        0.1..0.4f64,
        -20.0..20.0f64,
        0.0..60.0f64,
        0.0..60.0f64,
    )
        .prop_filter("qubits detuned", |(a, b, ..)| (a - b).abs() > 0.2)
        .prop_map(|(f1, f2, fc, a1, a2, j12, j1c, j2c)| {
            DuffingSystem::new(
                [ghz(f1), ghz(f2), ghz(fc)],
                [ghz(a1), ghz(a2), ghz(0.3)],
                j12 * MHZ * PLANCK,
                j1c * MHZ * PLANCK,
                j2c * MHZ * PLANCK,
            )
            .unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hamiltonian_is_symmetric(sys in system()) {
        let h = build_duffing_hamiltonian(&sys).unwrap();
        let scale = spectral_scale(&sys);
        let defect = (&h - h.transpose()).iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        prop_assert!(defect <= 1e-14 * scale);
    }

    // Invariance tolerances are relative to the spectral scale max|H|:
    // eigenvalues carry round-off of that size.
    #[test]
    fn qubit_swap_invariance(sys in system()) {
        let a = zz_at_truncation(&sys);
        let b = zz_at_truncation(&sys.swapped_qubits());
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert!((a.zeta - b.zeta).abs() <= 1e-12 * spectral_scale(&sys));
        }
    }

    #[test]
    fn energy_shift_invariance(sys in system(), shift in -1e11..1e11f64) {
        let h = build_duffing_hamiltonian(&sys).unwrap();
        let shifted = &h + DMatrix::<f64>::identity(h.nrows(), h.ncols()) * shift;
        if let (Ok(a), Ok(b)) = (zz_from_hamiltonian(&sys, &h), zz_from_hamiltonian(&sys, &shifted)) {
            prop_assert!((a.zeta - b.zeta).abs() <= 1e-12 * (spectral_scale(&sys) + shift.abs()));
        }
    }

    #[test]
    fn zero_coupling_gives_zero(sys in system()) {
        let free = DuffingSystem { j12: 0.0, j1c: 0.0, j2c: 0.0, ..sys };
        prop_assert_eq!(zz_rate(&free).unwrap(), 0.0);
    }

    #[test]
    fn quadratic_in_direct_coupling(f1 in 4.5..5.0f64, df in 0.4..0.8f64, j in 1.0..5.0f64) {
        let base = DuffingSystem::new(
            [ghz(f1), ghz(f1 + df), ghz(7.5)],
            [ghz(0.3); 3],
            j * MHZ * PLANCK,
            0.0,
            0.0,
        )
        .unwrap();
        let full = zz_rate(&base).unwrap();
        let quarter = zz_rate(&DuffingSystem { j12: base.j12 / 4.0, ..base.clone() }).unwrap();
        prop_assert!(((full / quarter) / 16.0 - 1.0).abs() < 0.1);
    }
}

#[test]
fn hbar_units_consistent() {
    // J given in joules; a 2J normal-mode splitting in rad/s.
    let j = 15.0 * MHZ * PLANCK;
    assert!((j / HBAR / to_angular(15.0 * MHZ) - 1.0).abs() < 1e-12);
}
