use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinhom::bulk_density::{all_spin_vectors, PhiTable};
use spinhom::connectivity::classify;
use spinhom::examples::run_examples;
use spinhom::exec::Execution;
use spinhom::fixtures;
use spinhom::ground_state::{minimize_cut, minimize_enum, GroundStateInstance, SolveOptions};
use spinhom::rational::ratio;
use spinhom::surface_tension::SurfaceTable;
use spinhom::LatticeModel;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn ring(n: usize) -> GroundStateInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut g = GroundStateInstance::new(n);
    for v in 0..n {
        g.add_unary(v, ratio(rng.random_range(-4..=4), 4), ratio(rng.random_range(-4..=4), 4));
        g.add_pair(v, (v + 1) % n, ratio(rng.random_range(0..=4), 8));
        g.add_pair(v, (v + 3) % n, ratio(rng.random_range(0..=4), 8));
    }
    g
}

fn enumeration(c: &mut Criterion) {
    let g = ring(18);
    let mut group = c.benchmark_group("enumeration-18");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_function(name, |b| b.iter(|| minimize_enum(&g, 24, mode).unwrap()));
    }
    group.bench_function("min-cut", |b| b.iter(|| minimize_cut(&g).unwrap()));
    group.finish();
}

fn phi_table(c: &mut Criterion) {
    let mut group = c.benchmark_group("phi-table");
    group.sample_size(10);
    for (fixture, text, m_list) in [("m2", fixtures::M2, vec![8, 16, 32]), ("fig8", fixtures::FIG8, vec![8, 16, 32])] {
        let m = LatticeModel::from_json(text).unwrap();
        let s = classify(&m);
        let zs = all_spin_vectors(m.num_phases());
        for (name, mode) in MODES {
            let o = SolveOptions { execution: mode, ..SolveOptions::default() };
            group.bench_with_input(BenchmarkId::new(name, fixture), &m_list, |b, ms| b.iter(|| PhiTable::compute(&m, &s, &zs, ms, &o).unwrap()));
        }
    }
    group.finish();
}

fn surface_table(c: &mut Criterion) {
    let m = LatticeModel::from_json(fixtures::FIG9).unwrap();
    let s = classify(&m);
    let normals = vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![1, -1], vec![2, 1]];
    let mut group = c.benchmark_group("surface-table-fig9");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_function(name, |b| b.iter(|| SurfaceTable::compute(&m, &s, &[1], &normals, &[8, 16, 32], mode).unwrap()));
    }
    group.finish();
}

fn examples(c: &mut Criterion) {
    let mut group = c.benchmark_group("examples");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_function(name, |b| b.iter(|| run_examples(mode).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, enumeration, phi_table, surface_table, examples);
criterion_main!(benches);
