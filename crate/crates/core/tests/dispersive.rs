use proptest::prelude::*;

use zcoupling::dispersive::*;
use zcoupling::exchange::j_mode_sum;
use zcoupling::modes::{Mode, ModeSet};
use zcoupling::selftest::{splitting_fixture, splitting_gap};
use zcoupling::transmon::{solve_spectrum, TransmonSpec};
use zcoupling::units::{cyclic_to_energy, to_angular, GHZ, MHZ};

fn ghz(x: f64) -> f64 {
    to_angular(x * GHZ)
}

// Mode 0.5 GHz above a 5 GHz qubit with α = −250 MHz. The off-block
// residual is a·(g/Δ) + b·(g/Δ)² with a ∝ |α/Δ|; at this detuning the first
// term dominates across g/Δ ≤ 0.04 (at Δ = 1 GHz the cross-over is near 0.027).
fn single_qubit(ratio: f64) -> FullSystem {
    let q = ghz(5.0);
    let w = ghz(5.5);
    let levels = QubitLevels::duffing(q, to_angular(-250.0 * MHZ), 3).unwrap();
    let g = ratio * (w - q);
    FullSystem::new(vec![levels], ModeSet::new(vec![Mode::real(w, &[g])]).unwrap(), 3).unwrap()
}

#[test]
fn sw_residual_is_first_order_in_g() {
    let ratios = [0.01, 0.02, 0.04];
    let rho: Vec<f64> = ratios
        .iter()
        .map(|&r| sw_block_residual(&single_qubit(r)).unwrap())
        .collect();
    // Least-squares slope of log ρ against log(g/Δ).
    let xs: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = rho.iter().map(|r| r.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((slope - 1.0).abs() < 0.15, "slope {slope}, ρ = {rho:?}");
    assert!(rho[1] <= 2.0 * ratios[1], "ρ(0.02) = {}", rho[1]);
    assert_eq!(sw_block_residual(&single_qubit(0.0)).unwrap(), 0.0);
}

#[test]
fn off_block_norm_is_second_order() {
    let a = sw_block_norm(&single_qubit(0.04)).unwrap();
    let b = sw_block_norm(&single_qubit(0.02)).unwrap();
    assert!(((a / b) / 4.0 - 1.0).abs() < 0.1, "{}", a / b);
}

#[test]
fn heff_error_shrinks_with_g() {
    for modes in [&[6.0][..], &[6.0, 7.5][..]] {
        let errors: Vec<f64> = [0.04, 0.02, 0.01]
            .iter()
            .map(|&r| heff_eigen_error(&splitting_fixture(r, modes).unwrap(), 2).unwrap())
            .collect();
        for w in errors.windows(2) {
            assert!(w[0] / w[1] >= 6.0, "{modes:?}: {errors:?}");
        }
    }
}

#[test]
fn splitting_converges_in_photons() {
    let sys = splitting_fixture(0.03, &[6.0]).unwrap();
    let (base, doubled) = splitting_photon_convergence(&sys).unwrap();
    assert!((base - doubled).abs() <= 1e-9 * base.abs());
}

#[test]
fn cancelling_modes_leave_only_higher_order() {
    // Modes placed symmetrically about the degenerate qubits.
    let q = ghz(5.0);
    let g = to_angular(40.0 * MHZ);
    let d = ghz(1.0);
    let modes = ModeSet::new(vec![Mode::real(q - d, &[g, g]), Mode::real(q + d, &[g, g])]).unwrap();
    let levels = QubitLevels::duffing(q, to_angular(-250.0 * MHZ), 3).unwrap();
    let sys = FullSystem::new(vec![levels.clone(), levels], modes.clone(), 2).unwrap();
    let split = extract_j_from_splitting(&sys).unwrap();
    let sum = j_mode_sum(&[1.0], &[1.0], q, q, &modes, 0, 0).unwrap();
    let scale = zcoupling::units::HBAR * g * g / d;
    assert!(sum.energy.abs() < 1e-12 * scale);
    let floor = scale * (g / d).powi(2);
    assert!(split.abs() <= floor, "{split:e} vs {floor:e}");
}

#[test]
fn transmon_ladder_feeds_the_full_model() {
    let spec = TransmonSpec::new(cyclic_to_energy(250.0 * MHZ), cyclic_to_energy(12.5 * GHZ)).unwrap();
    let spectrum = solve_spectrum(&spec, 4).unwrap();
    let levels = QubitLevels::from_spectrum(&spectrum, 3).unwrap();
    assert_eq!(levels.levels(), 3);
    assert!((levels.charge_ratios[1] / levels.charge_ratios[0] - 2f64.sqrt()).abs() < 0.05);
    let w = levels.transitions[0] + ghz(1.0);
    let g = 0.02 * ghz(1.0);
    let sys = FullSystem::new(
        vec![levels.clone(), levels],
        ModeSet::new(vec![Mode::real(w, &[g, g])]).unwrap(),
        2,
    )
    .unwrap();
    let model = build_heff(&sys).unwrap();
    let j = extract_j_from_splitting(&sys).unwrap();
    assert!((j / model.exchange[0][0] - 1.0).abs() < 4.0 * 0.02f64.powi(2) + 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn splitting_within_second_order_bound(ratio in 0.002..0.05f64, w in 5.5..8.0f64) {
        let sys = splitting_fixture(ratio, &[w]).unwrap();
        let gap = splitting_gap(&sys).unwrap();
        prop_assert!(gap <= 4.0 * ratio * ratio + 1e-6, "gap {gap}");
    }

    #[test]
    fn heff_is_hermitian(ratio in 0.0..0.05f64) {
        let m = build_heff(&splitting_fixture(ratio, &[6.0, 7.0]).unwrap()).unwrap().matrix;
        let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let defect = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(defect <= 1e-14 * scale);
    }
}
