//! Compares the rayon data-parallel inner loops against the sequential
//! fallback: per-point diagonalization of the adiabatic curves and the
//! Monte-Carlo thermal averages.
//!
//! Run with: cargo bench -p hedimer

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use hedimer::basis::{block, Parity, Reflection};
use hedimer::constants::PhysicalConstants;
use hedimer::exec::ExecMode;
use hedimer::lineshift::thermal_average_mc;
use hedimer::potentials::{adiabatic_curves, uniform_r_grid, BlockHamiltonian, HamiltonianFlags};

fn modes() -> [(&'static str, ExecMode); 2] {
    [
        ("sequential", ExecMode::Sequential),
        ("parallel", ExecMode::Parallel),
    ]
}

fn bench_adiabatic_curves(c: &mut Criterion) {
    let constants = PhysicalConstants::default();
    let bh = BlockHamiltonian::new(
        block(Parity::Ungerade, 0, Some(Reflection::Plus)).unwrap(),
        &constants,
    );
    let grid = uniform_r_grid(100.0, 5000.0, 9_801);
    let flags = HamiltonianFlags::default();

    let mut group = c.benchmark_group("adiabatic_curves_0u+_J1");
    group.sample_size(10);
    for (name, mode) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| {
                let curves = adiabatic_curves(&bh, 1, black_box(&grid), flags, mode).unwrap();
                black_box(curves.len())
            })
        });
    }
    group.finish();
}

fn bench_thermal_mc(c: &mut Criterion) {
    let mut group = c.benchmark_group("thermal_average_mc_1e6");
    group.sample_size(20);
    for (name, mode) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| {
                let avg = thermal_average_mc(black_box(10.0), 1_000_000, 42, mode).unwrap();
                black_box(avg.trap_mhz)
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_adiabatic_curves, bench_thermal_mc);
criterion_main!(benches);
