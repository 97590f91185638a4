//! Cross-module consistency checks that tie the tableau engine, the basis
//! builders, the chain driver, and the statistics together.

use z2metts::ite::trotter_sequence;
use z2metts::model::{build_model, default_initial_bits, observables, LatticeConfig};
use z2metts::mupb::{build_1p1d, MeasurementBasis};
use z2metts::pauli::{conjugate_by_circuit_inverse, PauliString, PauliSum};
use z2metts::qmetts::{run_chain, BasisSchedule, ChainConfig, EstimatorMode};
use z2metts::stats::fixed_budget_comparison;
use z2metts::tableau::{state_overlap_magnitude, StabilizerTableau};

fn lattice(l_ks: usize) -> LatticeConfig {
    LatticeConfig::new(l_ks, 0.25, 0.01, 0.0).unwrap()
}

/// Full stabilizer tableau (S = N) of the basis state `U†|b>`: the rotated
/// single-qubit Z's pulled back through the circuit with the outcome signs.
fn basis_state_tableau(basis: &MeasurementBasis, bits: u64) -> StabilizerTableau {
    let n = basis.n_qubits();
    let gens: Vec<PauliString> = (0..n)
        .map(|q| {
            let negative = (bits >> (n - 1 - q)) & 1 == 1;
            let z = PauliString::from_supports(n, &[], &[q], negative);
            conjugate_by_circuit_inverse(&z, &basis.circuit)
        })
        .collect();
    StabilizerTableau::from_generators(&gens).unwrap()
}

#[test]
fn mupb_cross_overlap_via_overlap_theorem() {
    // The inner-product theorem applied to the basis-state stabilizer
    // groups reproduces the mutual-unbiasedness magnitude 2^(-L_KS/2),
    // entirely on the tableau side (no statevectors).
    for l_ks in [2, 3, 4] {
        let cfg = lattice(l_ks);
        let (z, x) = build_1p1d(&cfg).unwrap();
        let expect = 0.5f64.powf(l_ks as f64 / 2.0);
        let z_phys = z.physical_bit_patterns();
        let x_phys = x.physical_bit_patterns();
        for &zb in z_phys.iter().take(3) {
            let zt = basis_state_tableau(&z, zb);
            for &xb in x_phys.iter().take(3) {
                let xt = basis_state_tableau(&x, xb);
                let overlap = state_overlap_magnitude(&zt, &xt).unwrap();
                assert!(
                    (overlap - expect).abs() < 1e-12,
                    "L_KS={l_ks}: tableau overlap {overlap} vs 2^(-L/2) = {expect}"
                );
            }
        }
        // Distinct states of the same basis are orthogonal.
        let a = basis_state_tableau(&z, z_phys[0]);
        let b = basis_state_tableau(&z, z_phys[1]);
        assert_eq!(state_overlap_magnitude(&a, &b).unwrap(), 0.0);
    }
}

#[test]
fn multi_shot_one_equals_single_shot() {
    // With one shot per step the two estimator modes are the same
    // algorithm; identical seeds give bit-identical records.
    let cfg = lattice(2);
    let (z, x) = build_1p1d(&cfg).unwrap();
    let plan = trotter_sequence(&build_model(&cfg), 0.02);
    let obs: Vec<(String, PauliSum)> = observables(&cfg)
        .named()
        .iter()
        .map(|(n, o)| (n.to_string(), (*o).clone()))
        .collect();
    let mk = |mode| ChainConfig {
        n_chain: 60,
        n_burn: 0,
        mode,
        schedule: BasisSchedule::Alternate,
        seed: 31,
        initial_bits: default_initial_bits(&cfg),
    };
    let a = run_chain(
        &cfg.layout(),
        &z,
        &x,
        &plan,
        1.0,
        &obs,
        &mk(EstimatorMode::SingleShot),
    )
    .unwrap();
    let b = run_chain(
        &cfg.layout(),
        &z,
        &x,
        &plan,
        1.0,
        &obs,
        &mk(EstimatorMode::MultiShot(1)),
    )
    .unwrap();
    for (sa, sb) in a.steps.iter().zip(&b.steps) {
        assert_eq!(sa.bits, sb.bits);
        assert_eq!(sa.samples, sb.samples);
    }
}

#[test]
fn constant_observable_has_zero_budget_variance() {
    // A constant (identity) observable is deterministic under any
    // estimator, so both fixed-budget arms report zero variance.
    let cfg = lattice(2);
    let (z, x) = build_1p1d(&cfg).unwrap();
    let plan = trotter_sequence(&build_model(&cfg), 0.05);
    let constant = vec![(
        "constant".to_string(),
        PauliSum::new(3, vec![], 2.5),
    )];
    let report = fixed_budget_comparison(
        &cfg.layout(),
        &z,
        &x,
        &plan,
        0.0,
        &constant,
        default_initial_bits(&cfg),
        200,
        10,
        8,
        5,
    )
    .unwrap();
    assert_eq!(report.rows[0].var_single, 0.0);
    assert_eq!(report.rows[0].var_multi, 0.0);
    assert!(report.single_shot_wins(0, 2.0));
}
