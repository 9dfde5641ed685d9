use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use zcoupling::exchange::{j_impedance, ImpedanceOptions};
use zcoupling::fixtures::{self, cancellation_curve, cancellation_template, linear_grid};
use zcoupling::par::{self, Execution};
use zcoupling::transmon::{solve_spectrum, spec_from_capacitance};
use zcoupling::units::{to_angular, FEMTOFARAD, GHZ};
use zcoupling::zz::sweep_coupler;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn ghz(x: f64) -> f64 {
    to_angular(x * GHZ)
}

fn zz_sweep(c: &mut Criterion) {
    let t = cancellation_template();
    let grid = linear_grid(ghz(3.0), ghz(4.6), 65);
    let curve = cancellation_curve(&t, &grid, ghz(4.0)).unwrap();
    let mut g = c.benchmark_group("zz_sweep");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| sweep_coupler(black_box(&t), &grid, &curve, exec).unwrap())
        });
    }
    g.finish();
}

fn netlist_evaluation(c: &mut Criterion) {
    let net = fixtures::line_resonator(80.0 * FEMTOFARAD, 5.0 * FEMTOFARAD, 50.0, 7.55e9);
    let grid = linear_grid(ghz(1.0), ghz(20.0), 20_001);
    let mut g = c.benchmark_group("netlist_z");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| net.evaluate_z(black_box(&grid), exec).unwrap())
        });
    }
    g.finish();
}

fn j_sweep(c: &mut Criterion) {
    let cap = 80.0 * FEMTOFARAD;
    let net = fixtures::series_lc_coupler(cap, cap, 5.0 * FEMTOFARAD, ghz(7.55));
    let table = net
        .evaluate_z(&linear_grid(ghz(4.0), ghz(10.0), 2001), Execution::Sequential)
        .unwrap()
        .table;
    let fixed = solve_spectrum(&spec_from_capacitance(cap, ghz(5.82), 0.0).unwrap(), 3).unwrap();
    let points = linear_grid(ghz(4.5), ghz(9.5), 64);
    let mut g = c.benchmark_group("j_fixed_vs_swept");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                par::map(exec, &points, |&w| {
                    let swept = solve_spectrum(&spec_from_capacitance(cap, w, 0.0).unwrap(), 3).unwrap();
                    j_impedance(&fixed, &swept, &table, ImpedanceOptions::default())
                        .unwrap()
                        .energy
                })
            })
        });
    }
    g.finish();
}

criterion_group!(benches, zz_sweep, netlist_evaluation, j_sweep);
criterion_main!(benches);
