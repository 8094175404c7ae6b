use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use cqed_bench::{cat_state, purcell_fixture, purcell_system};
use cqed_core::codes::{amplitude_damping_kraus, binomial_code, recovery_kraus};
use cqed_core::coupling::{rabi_hamiltonian, RabiSystem};
use cqed_core::devices::{transmon_levels, TransmonParams};
use cqed_core::dynamics::{evolve_with, transmission_sweep, EvolveOptions, TransmissionMethod};
use cqed_core::numeric::linspace;
use cqed_core::phasespace::{wigner, PhaseSpaceGrid};
use cqed_core::readout::{pointer_evolution, snr, Weights};
use cqed_core::units::{ghz, mhz};

fn spectra(c: &mut Criterion) {
    let mut g = c.benchmark_group("spectra");
    let ec = mhz(250.0);
    for ncut in [10, 20, 40] {
        g.bench_with_input(BenchmarkId::new("transmon_levels", ncut), &ncut, |b, &n| {
            b.iter(|| transmon_levels(&TransmonParams::new(50.0 * ec, ec), n, 3, 1e-9).unwrap())
        });
    }
    for dim in [10, 30] {
        let sys = RabiSystem { transmon_dim: 4, resonator_dim: dim, omega_r: ghz(7.0), omega_q: ghz(6.0), ec: mhz(300.0), g: mhz(100.0), rwa: false };
        g.bench_with_input(BenchmarkId::new("rabi_eigenvalues", dim), &sys, |b, s| {
            b.iter(|| rabi_hamiltonian(s).unwrap().eigenvalues().unwrap())
        });
    }
    g.finish();
}

fn dynamics(c: &mut Criterion) {
    let mut g = c.benchmark_group("dynamics");
    g.sample_size(20);
    let (model, rho0, pe) = purcell_fixture(3);
    let times = linspace(0.0, 2e-4, 201);
    let opts = EvolveOptions::observing(vec![pe]);
    g.bench_function("purcell_evolve", |b| b.iter(|| evolve_with(&model, &rho0, &times, &opts).unwrap()));
    let sys = purcell_system();
    let w = linspace(-sys.omega_q, 2.0 * sys.omega_q, 101);
    g.bench_function("transmission_linear_response", |b| {
        b.iter(|| transmission_sweep(&sys, &w, 1e-3 * sys.kappa, TransmissionMethod::LinearResponse { resonator_dim: 4 }).unwrap())
    });
    g.finish();
}

fn readout(c: &mut Criterion) {
    let kappa = mhz(1.0);
    let times = linspace(0.0, 200.0 / kappa, 2001);
    c.bench_function("pointer_snr", |b| {
        b.iter(|| {
            let t = pointer_evolution(|_| kappa, 0.0, kappa / 2.0, kappa, black_box(&times)).unwrap();
            snr(&t, 1.0, 200.0 / kappa, &Weights::Separation).unwrap()
        })
    });
}

fn phasespace(c: &mut Criterion) {
    let mut g = c.benchmark_group("phasespace");
    g.sample_size(10);
    let cat = cat_state(3.0, 50);
    let grid = PhaseSpaceGrid::square(6.0, 61);
    g.bench_function("wigner_cat", |b| b.iter(|| wigner(&cat, &grid).unwrap()));
    g.finish();
}

fn codes(c: &mut Criterion) {
    let code = binomial_code(8).unwrap();
    c.bench_function("binomial_recovery", |b| b.iter(|| recovery_kraus(black_box(&code)).unwrap()));
    c.bench_function("loss_channel", |b| b.iter(|| amplitude_damping_kraus(black_box(0.01), 30).unwrap()));
}

criterion_group!(benches, spectra, dynamics, readout, phasespace, codes);
criterion_main!(benches);
