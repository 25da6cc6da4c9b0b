use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use msgate_bench::{heating_model, ideal_model, oracle_problem};
use msgate_core::lindblad::{evolve, evolve_exact_oracle};
use msgate_core::analysis::SpinPopulations;
use msgate_core::readout::{fit_populations, synthesize_unpulsed, DetectionModel};

fn ideal_gate(c: &mut Criterion) {
    let mut g = c.benchmark_group("ideal_gate");
    g.sample_size(10);
    for n in [10, 25] {
        let model = ideal_model(n).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &model, |b, m| b.iter(|| m.run_shot(1, 0).unwrap()));
    }
    g.finish();
}

fn heating_gate(c: &mut Criterion) {
    let mut g = c.benchmark_group("heating_gate");
    g.sample_size(10);
    let model = heating_model(10).unwrap();
    g.bench_function("fock_10", |b| b.iter(|| model.run_shot(1, 0).unwrap()));
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let problem = oracle_problem().unwrap();
    let mut g = c.benchmark_group("two_qubits_fock_4");
    g.sample_size(10);
    g.bench_function("oracle", |b| b.iter(|| evolve_exact_oracle(&problem).unwrap()));
    g.bench_function("integrator", |b| b.iter(|| evolve(&problem).unwrap()));
    g.finish();
}

fn readout_fit(c: &mut Criterion) {
    let model = DetectionModel::default();
    let pops = SpinPopulations { p_uu: 0.45, p_mixed: 0.1, p_dd: 0.45 };
    let hist = synthesize_unpulsed(&model, &pops, 200, 3).unwrap();
    c.bench_function("fit_populations_200_shots", |b| b.iter(|| fit_populations(&hist, &model).unwrap()));
}

criterion_group!(benches, ideal_gate, heating_gate, oracle, readout_fit);
criterion_main!(benches);
