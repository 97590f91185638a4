//! Kernel benchmarks: GF(2) elimination, tableau canonicalization, and the
//! statevector paths that dominate chain runtime.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use z2metts::f2linalg::{rank, symmetric_decompose, BinMatrix};
use z2metts::ite::{apply_ite, trotter_sequence};
use z2metts::model::{build_model, default_initial_bits, observables, LatticeConfig};
use z2metts::mupb::build_1p1d;
use z2metts::statevec::{measure_in_basis, sample_pauli_group};
use z2metts::tableau::{canonical_form, random_tableau};
use z2metts::PauliSum;

fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> BinMatrix {
    let mut a = BinMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = rng.gen::<bool>();
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
    a
}

fn bench_f2(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut m = BinMatrix::zeros(64, 128);
    for i in 0..64 {
        for j in 0..128 {
            m.set(i, j, rng.gen());
        }
    }
    c.bench_function("f2_rank_64x128", |b| b.iter(|| rank(black_box(&m))));

    let a = random_symmetric(64, &mut rng);
    c.bench_function("f2_symmetric_decompose_64", |b| {
        b.iter(|| symmetric_decompose(black_box(&a)).unwrap())
    });
}

fn bench_tableau(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let t = random_tableau(24, 12, &mut rng);
    c.bench_function("canonical_form_n24_s12", |b| {
        b.iter(|| canonical_form(black_box(&t)))
    });
}

fn bench_statevec(c: &mut Criterion) {
    let lattice = LatticeConfig::new(4, 0.25, 0.01, 0.0).unwrap();
    let terms = build_model(&lattice);
    let plan = trotter_sequence(&terms, 0.01);
    let (z, x) = build_1p1d(&lattice).unwrap();
    let start = z.basis_state(default_initial_bits(&lattice));

    c.bench_function("trotter_step_l4", |b| {
        let compiled = plan.compile(0.01);
        let mut s = start.clone();
        b.iter(|| {
            compiled.apply(&mut s);
            s.normalize();
        })
    });

    c.bench_function("ite_beta1_l4", |b| {
        b.iter(|| apply_ite(black_box(&start), &plan, 1.0))
    });

    let phi = apply_ite(&start, &plan, 1.0);
    let obs = observables(&lattice);
    let energy_group: Vec<Vec<(f64, z2metts::PauliString)>> =
        obs.energy_density.groups().to_vec();
    let energy = PauliSum::new(7, energy_group, obs.energy_density.constant());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    c.bench_function("sample_energy_groups_l4", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for group in energy.groups() {
                let gsum = PauliSum::new(7, vec![group.clone()], 0.0);
                acc += sample_pauli_group(&phi, &gsum, &mut rng).unwrap();
            }
            acc
        })
    });

    c.bench_function("measure_in_x_basis_l4", |b| {
        b.iter(|| measure_in_basis(black_box(&phi), &x.circuit, &mut rng))
    });
}

criterion_group!(benches, bench_f2, bench_tableau, bench_statevec);
criterion_main!(benches);
