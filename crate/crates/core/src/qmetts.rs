//! The Markov-chain driver: alternating-basis projective collapse,
//! imaginary-time evolution, and per-step observable estimation in exact,
//! single-shot, or multi-shot mode.
//!
//! Step k builds the METTS from the current collapse state, estimates the
//! observables on it, then measures it in the other basis (even steps in
//! X_phys, odd in Z_phys, counting from zero with a Z_phys start); the
//! collapse seeds step k+1. Collapse and estimation draw from independent
//! RNG streams of the master seed, so the shot noise is independent of the
//! chain trajectory, which the single-shot variance theory assumes.
//!
//! Exact per-step expectations μ_k are recorded in every mode; they cost a
//! few dense passes classically and the variance analytics need the paired
//! series O_k = μ_k + ε_k.

use crate::ite::{apply_ite, apply_ite_tracked, TrotterPlan};
use crate::model::QubitLayout;
use crate::mupb::{BasisTag, MeasurementBasis};
use crate::pauli::PauliSum;
use crate::statevec::{expectation, measure_in_basis, sample_pauli_group, StateVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("initial state {0:?} is not in the +1 gauge sector")]
    UnphysicalInitial(String),
    #[error("collapse at step {0} left the physical sector (internal invariant violation)")]
    UnphysicalCollapse(usize),
    #[error("bases must expose exact sector structure (Z-type rotated constraints)")]
    NonStructuralBasis,
    #[error("estimation failed: {0}")]
    Estimation(#[from] crate::statevec::StateVecError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorMode {
    Exact,
    SingleShot,
    MultiShot(usize),
}

impl std::fmt::Display for EstimatorMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EstimatorMode::Exact => write!(f, "exact"),
            EstimatorMode::SingleShot => write!(f, "single_shot"),
            EstimatorMode::MultiShot(n) => write!(f, "multi_shot:{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisSchedule {
    Alternate,
    ZOnly,
}

#[derive(Debug, Clone)]
pub struct ChainConfig {
    pub n_chain: usize,
    pub n_burn: usize,
    pub mode: EstimatorMode,
    pub schedule: BasisSchedule,
    pub seed: u64,
    /// Resolved Z_phys-basis bit pattern of the initial state.
    pub initial_bits: u64,
}

#[derive(Debug, Clone)]
pub struct StepRecord {
    pub step: usize,
    pub basis: BasisTag,
    pub bits: u64,
    pub label: String,
    pub physical: bool,
    /// Mode-dependent estimates O_k, one per tracked observable.
    pub samples: Vec<f64>,
    /// Exact per-step expectations μ_k, one per tracked observable.
    pub mu: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ChainRecord {
    pub observable_names: Vec<String>,
    pub mode: EstimatorMode,
    pub steps: Vec<StepRecord>,
}

impl ChainRecord {
    pub fn samples_of(&self, obs_idx: usize) -> Vec<f64> {
        self.steps.iter().map(|s| s.samples[obs_idx]).collect()
    }

    pub fn mu_of(&self, obs_idx: usize) -> Vec<f64> {
        self.steps.iter().map(|s| s.mu[obs_idx]).collect()
    }

    /// Histogram of Z_phys-basis collapse labels (the stationary
    /// distribution lives on these).
    pub fn z_label_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for s in &self.steps {
            if s.basis == BasisTag::ZPhys {
                *counts.entry(s.label.clone()).or_insert(0) += 1;
            }
        }
        counts
    }

    pub fn z_sample_count(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| s.basis == BasisTag::ZPhys)
            .count()
    }

    pub fn unphysical_count(&self) -> usize {
        self.steps.iter().filter(|s| !s.physical).count()
    }

    /// Per-step CSV: step,basis,bitstring,label,o_*,[mu_* in exact mode].
    pub fn to_csv(&self) -> String {
        let mut head = String::from("step,basis,bitstring,label");
        for name in &self.observable_names {
            head.push_str(&format!(",o_{name}"));
        }
        if self.mode == EstimatorMode::Exact {
            for name in &self.observable_names {
                head.push_str(&format!(",mu_{name}"));
            }
        }
        let mut out = head;
        out.push('\n');
        let width = self
            .steps
            .first()
            .map(|s| s.label.chars().count())
            .unwrap_or(0);
        for s in &self.steps {
            out.push_str(&format!(
                "{},{},{:0width$b},{}",
                s.step, s.basis, s.bits, s.label
            ));
            for v in &s.samples {
                out.push_str(&format!(",{v:.12e}"));
            }
            if self.mode == EstimatorMode::Exact {
                for v in &s.mu {
                    out.push_str(&format!(",{v:.12e}"));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// One estimator draw of a grouped observable: one joint-eigenvalue sample
/// per commuting group, on a fresh copy of the METTS, summed with the
/// constant.
fn single_draw<R: rand::Rng>(
    phi: &StateVector,
    obs: &PauliSum,
    rng: &mut R,
) -> Result<f64, crate::statevec::StateVecError> {
    let mut value = obs.constant();
    for group in obs.groups() {
        if group.is_empty() {
            continue;
        }
        let gsum = PauliSum::new(obs.n_qubits(), vec![group.clone()], 0.0);
        value += sample_pauli_group(phi, &gsum, rng)?;
    }
    Ok(value)
}

/// Observable estimates on one METTS per the estimator mode.
pub fn estimate_step<R: rand::Rng>(
    phi: &StateVector,
    observables: &[(String, PauliSum)],
    mode: EstimatorMode,
    rng: &mut R,
) -> Result<Vec<f64>, crate::statevec::StateVecError> {
    observables
        .iter()
        .map(|(_, obs)| match mode {
            EstimatorMode::Exact => expectation(phi, obs),
            EstimatorMode::SingleShot => single_draw(phi, obs, rng),
            EstimatorMode::MultiShot(n) => {
                let mut acc = 0.0;
                for _ in 0..n.max(1) {
                    acc += single_draw(phi, obs, rng)?;
                }
                Ok(acc / n.max(1) as f64)
            }
        })
        .collect()
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs one QMETTS chain.
///
/// The collapse that ends step k uses the X_phys basis on even k and Z_phys
/// on odd k (the initial state is a Z_phys basis state, so the first
/// measurement is always "the other" basis), or always Z_phys under the
/// `ZOnly` ablation. Identical seed and config give a bit-identical record.
pub fn run_chain(
    layout: &QubitLayout,
    z_basis: &MeasurementBasis,
    x_basis: &MeasurementBasis,
    plan: &TrotterPlan,
    beta: f64,
    observables: &[(String, PauliSum)],
    cfg: &ChainConfig,
) -> Result<ChainRecord, ChainError> {
    if !z_basis.has_exact_sector_structure() || !x_basis.has_exact_sector_structure() {
        return Err(ChainError::NonStructuralBasis);
    }
    if !z_basis.is_physical(cfg.initial_bits) {
        return Err(ChainError::UnphysicalInitial(
            layout.label_of(cfg.initial_bits),
        ));
    }

    let mut collapse_rng = stream_rng(cfg.seed, 0);
    let mut estim_rng = stream_rng(cfg.seed, 1);

    let mut state = z_basis.basis_state(cfg.initial_bits);
    let mut steps = Vec::with_capacity(cfg.n_chain);
    let total = cfg.n_burn + cfg.n_chain;
    for k in 0..total {
        let phi = apply_ite(&state, plan, beta);
        let recorded = k >= cfg.n_burn;
        let (samples, mu) = if recorded {
            let mu: Vec<f64> = observables
                .iter()
                .map(|(_, obs)| expectation(&phi, obs))
                .collect::<Result<_, _>>()?;
            let samples = match cfg.mode {
                EstimatorMode::Exact => mu.clone(),
                mode => estimate_step(&phi, observables, mode, &mut estim_rng)?,
            };
            (samples, mu)
        } else {
            (Vec::new(), Vec::new())
        };

        let basis = match cfg.schedule {
            BasisSchedule::ZOnly => z_basis,
            BasisSchedule::Alternate => {
                if k % 2 == 0 {
                    x_basis
                } else {
                    z_basis
                }
            }
        };
        let (bits, collapsed) = measure_in_basis(&phi, &basis.circuit, &mut collapse_rng);
        let physical = basis.is_physical(bits);
        if !physical {
            return Err(ChainError::UnphysicalCollapse(k));
        }
        if recorded {
            steps.push(StepRecord {
                step: k - cfg.n_burn,
                basis: basis.tag,
                bits,
                label: layout.label_of(bits),
                physical,
                samples,
                mu,
            });
        }
        state = collapsed;
    }

    Ok(ChainRecord {
        observable_names: observables.iter().map(|(n, _)| n.clone()).collect(),
        mode: cfg.mode,
        steps,
    })
}

/// Detailed-balance report over all physical basis pairs.
#[derive(Debug, Clone)]
pub struct DetailedBalanceReport {
    /// max |ln(T_{i→j} w_i) − ln(T_{j→i} w_j)| over checked pairs;
    /// equals the max relative violation for small values.
    pub max_violation: f64,
    pub pairs_checked: usize,
}

/// Enumerates `T_{i→j} = |<j|φ_i>|²` for all physical pairs (both the
/// cross-basis kernel the chain uses and the same-basis Z kernel) and checks
/// `T_{i→j}/T_{j→i} = Prob_j/Prob_i` with the Trotterized propagator used
/// consistently on both sides. Everything is kept in log space so large β
/// cannot underflow.
pub fn detailed_balance_check(
    z_basis: &MeasurementBasis,
    x_basis: &MeasurementBasis,
    plan: &TrotterPlan,
    beta: f64,
) -> DetailedBalanceReport {
    let z_bits = z_basis.physical_bit_patterns();
    let x_bits = x_basis.physical_bit_patterns();

    struct Evolved {
        phi: StateVector,
        log_norm: f64,
    }
    let evolve = |basis: &MeasurementBasis, bits: &[u64]| -> Vec<Evolved> {
        bits.iter()
            .map(|&b| {
                let s = basis.basis_state(b);
                let (phi, log_norm) = apply_ite_tracked(&s, plan, beta);
                Evolved { phi, log_norm }
            })
            .collect()
    };
    let z_ev = evolve(z_basis, &z_bits);
    let x_ev = evolve(x_basis, &x_bits);
    let z_states: Vec<StateVector> = z_bits.iter().map(|&b| z_basis.basis_state(b)).collect();
    let x_states: Vec<StateVector> = x_bits.iter().map(|&b| x_basis.basis_state(b)).collect();

    let mut max_violation = 0.0f64;
    let mut pairs = 0usize;
    // Forbidden transitions (e.g. z->z across charge sectors) are exact
    // zeros up to float dust; both directions vanish together, so detailed
    // balance holds trivially and the pair is skipped. The cutoff is
    // relative to the largest transition probability in the table.
    let mut check_kernel = |from_ev: &[Evolved],
                            from_states: &[StateVector],
                            to_ev: &[Evolved],
                            to_states: &[StateVector]| {
        let nf = from_ev.len();
        let nt = to_ev.len();
        let mut fwd = vec![0.0f64; nf * nt];
        let mut bwd = vec![0.0f64; nf * nt];
        let mut t_max = 0.0f64;
        for i in 0..nf {
            for j in 0..nt {
                let t_ij = to_states[j].inner(&from_ev[i].phi).norm_sqr();
                let t_ji = from_states[i].inner(&to_ev[j].phi).norm_sqr();
                fwd[i * nt + j] = t_ij;
                bwd[i * nt + j] = t_ji;
                t_max = t_max.max(t_ij).max(t_ji);
            }
        }
        let cutoff = t_max * 1e-20;
        for i in 0..nf {
            for j in 0..nt {
                let (t_ij, t_ji) = (fwd[i * nt + j], bwd[i * nt + j]);
                if t_ij <= cutoff || t_ji <= cutoff {
                    continue;
                }
                let v = (t_ij.ln() + 2.0 * from_ev[i].log_norm)
                    - (t_ji.ln() + 2.0 * to_ev[j].log_norm);
                max_violation = max_violation.max(v.abs());
                pairs += 1;
            }
        }
    };
    // The kernel the chain uses (z -> x) and the z_only ablation's kernel.
    check_kernel(&z_ev, &z_states, &x_ev, &x_states);
    check_kernel(&z_ev, &z_states, &z_ev, &z_states);

    DetailedBalanceReport {
        max_violation,
        pairs_checked: pairs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactref::ExactSolution;
    use crate::ite::trotter_sequence;
    use crate::model::{build_model, default_initial_bits, observables, LatticeConfig};
    use crate::mupb::build_1p1d;

    fn cfg(l_ks: usize, mu: f64) -> LatticeConfig {
        LatticeConfig::new(l_ks, 0.25, 0.01, mu).unwrap()
    }

    fn named_observables(c: &LatticeConfig) -> Vec<(String, PauliSum)> {
        let obs = observables(c);
        obs.named()
            .iter()
            .map(|(n, o)| (n.to_string(), (*o).clone()))
            .collect()
    }

    fn chain_cfg(c: &LatticeConfig, n: usize, seed: u64, mode: EstimatorMode) -> ChainConfig {
        ChainConfig {
            n_chain: n,
            n_burn: 0,
            mode,
            schedule: BasisSchedule::Alternate,
            seed,
            initial_bits: default_initial_bits(c),
        }
    }

    #[test]
    fn beta_zero_collapses_uniformly() {
        // Identity ITE: the alternating MUPB chain visits the 4 physical
        // z-labels uniformly. Chi-square on 1000 z-samples, 3 dof.
        let c = cfg(2, 0.0);
        let (z, x) = build_1p1d(&c).unwrap();
        let plan = trotter_sequence(&build_model(&c), 0.01);
        let obs = named_observables(&c);
        let cc = chain_cfg(&c, 2000, 11, EstimatorMode::Exact);
        let rec = run_chain(&c.layout(), &z, &x, &plan, 0.0, &obs, &cc).unwrap();
        assert_eq!(rec.unphysical_count(), 0);
        let counts = rec.z_label_counts();
        let total: usize = counts.values().sum();
        assert_eq!(total, 1000);
        assert_eq!(counts.len(), 4);
        let expected = total as f64 / 4.0;
        let chi2: f64 = counts
            .values()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 16.27, "chi2 = {chi2}"); // 0.1% critical value, 3 dof
    }

    #[test]
    fn chain_is_reproducible() {
        let c = cfg(2, 0.5);
        let (z, x) = build_1p1d(&c).unwrap();
        let plan = trotter_sequence(&build_model(&c), 0.02);
        let obs = named_observables(&c);
        let cc = chain_cfg(&c, 50, 7, EstimatorMode::SingleShot);
        let a = run_chain(&c.layout(), &z, &x, &plan, 1.0, &obs, &cc).unwrap();
        let b = run_chain(&c.layout(), &z, &x, &plan, 1.0, &obs, &cc).unwrap();
        for (sa, sb) in a.steps.iter().zip(&b.steps) {
            assert_eq!(sa.bits, sb.bits);
            assert_eq!(sa.samples, sb.samples);
            assert_eq!(sa.mu, sb.mu);
        }
    }

    #[test]
    fn rejects_unphysical_initial_state() {
        let c = cfg(2, 0.0);
        let (z, x) = build_1p1d(&c).unwrap();
        let plan = trotter_sequence(&build_model(&c), 0.01);
        let obs = named_observables(&c);
        let mut cc = chain_cfg(&c, 10, 1, EstimatorMode::Exact);
        cc.initial_bits = c.layout().bits_of_label("0+0").unwrap();
        let err = run_chain(&c.layout(), &z, &x, &plan, 1.0, &obs, &cc);
        assert!(matches!(err, Err(ChainError::UnphysicalInitial(_))));
    }

    #[test]
    fn ergodic_at_moderate_beta() {
        // All d_phys z-labels visited well within 100*d_phys steps.
        let c = cfg(2, 0.0);
        let (z, x) = build_1p1d(&c).unwrap();
        let plan = trotter_sequence(&build_model(&c), 0.01);
        let obs = named_observables(&c);
        let cc = chain_cfg(&c, 400, 3, EstimatorMode::Exact);
        let rec = run_chain(&c.layout(), &z, &x, &plan, 1.0, &obs, &cc).unwrap();
        assert_eq!(rec.z_label_counts().len(), 4);
    }

    #[test]
    fn exact_mode_mean_matches_thermal_expectation() {
        let c = cfg(2, 0.0);
        let sol = ExactSolution::build(&c, 16).unwrap();
        let (z, x) = build_1p1d(&c).unwrap();
        let plan = trotter_sequence(&build_model(&c), 0.01);
        let obs = named_observables(&c);
        let cc = chain_cfg(&c, 1200, 5, EstimatorMode::Exact);
        let rec = run_chain(&c.layout(), &z, &x, &plan, 1.0, &obs, &cc).unwrap();
        let series = rec.mu_of(0);
        let mean: f64 = series.iter().sum::<f64>() / series.len() as f64;
        let exact = sol
            .thermal_expectation(1.0, &obs[0].1)
            .unwrap();
        // 3 estimated standard errors with a generous tau bound of 3.
        let var = series
            .iter()
            .map(|v| (v - mean).powi(2))
            .sum::<f64>()
            / series.len() as f64;
        let stderr = (2.0 * 3.0 * var / series.len() as f64).sqrt();
        assert!(
            (mean - exact).abs() < 3.0 * stderr.max(1e-4),
            "mean {mean} vs exact {exact} (stderr {stderr})"
        );
    }

    #[test]
    fn single_shot_is_unbiased_against_exact_mode() {
        // Multi-shot mean at large shot count converges to the exact
        // expectation on a fixed METTS (law of large numbers, 4 sigma).
        let c = cfg(2, 0.3);
        let (_, x) = build_1p1d(&c).unwrap();
        let plan = trotter_sequence(&build_model(&c), 0.01);
        // Start from an X_phys basis state so the METTS spreads across
        // charge sectors and the draws genuinely fluctuate.
        let s = x.basis_state(x.physical_bit_patterns()[0]);
        let phi = apply_ite(&s, &plan, 0.8);
        let obs = named_observables(&c);
        let mut rng = stream_rng(41, 9);
        let n = 100_000usize;
        let mut draws = Vec::with_capacity(n);
        for _ in 0..n {
            draws.push(single_draw(&phi, &obs[0].1, &mut rng).unwrap());
        }
        let mean: f64 = draws.iter().sum::<f64>() / n as f64;
        let exact = expectation(&phi, &obs[0].1).unwrap();
        let sd = (draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        assert!(sd > 0.01, "test state must produce fluctuating draws");
        assert!(
            (mean - exact).abs() < 4.0 * sd / (n as f64).sqrt(),
            "mean {mean} vs exact {exact}"
        );
    }

    #[test]
    fn diagonal_observable_deterministic_on_basis_state() {
        let c = cfg(4, 0.0);
        let (z, _) = build_1p1d(&c).unwrap();
        let bits = c.layout().bits_of_label("0-0-0+0").unwrap();
        let phi = z.basis_state(bits);
        let obs = named_observables(&c);
        let mut rng = stream_rng(2, 0);
        for _ in 0..20 {
            let v = single_draw(&phi, &obs[2].1, &mut rng).unwrap();
            assert!((v - 1.0).abs() < 1e-12, "number density draw {v}");
        }
    }

    #[test]
    fn detailed_balance_holds_at_moderate_beta() {
        let c = cfg(2, 0.0);
        let (z, x) = build_1p1d(&c).unwrap();
        let plan = trotter_sequence(&build_model(&c), 0.01);
        let report = detailed_balance_check(&z, &x, &plan, 1.0);
        // All 16 cross pairs are checked; z->z pairs across different charge
        // sectors have T = 0 both ways and are skipped (6 remain).
        assert_eq!(report.pairs_checked, 22);
        assert!(
            report.max_violation < 1e-8,
            "violation {}",
            report.max_violation
        );
    }

    #[test]
    fn detailed_balance_trivial_at_beta_zero() {
        let c = cfg(2, 0.0);
        let (z, x) = build_1p1d(&c).unwrap();
        let plan = trotter_sequence(&build_model(&c), 0.01);
        let report = detailed_balance_check(&z, &x, &plan, 0.0);
        assert_eq!(report.max_violation, 0.0);
    }

    #[test]
    fn csv_has_expected_columns() {
        let c = cfg(2, 0.0);
        let (z, x) = build_1p1d(&c).unwrap();
        let plan = trotter_sequence(&build_model(&c), 0.01);
        let obs = named_observables(&c);
        let cc = chain_cfg(&c, 4, 1, EstimatorMode::Exact);
        let rec = run_chain(&c.layout(), &z, &x, &plan, 0.5, &obs, &cc).unwrap();
        let csv = rec.to_csv();
        let head = csv.lines().next().unwrap();
        assert_eq!(
            head,
            "step,basis,bitstring,label,o_energy,o_chiral,o_number,mu_energy,mu_chiral,mu_number"
        );
        assert_eq!(csv.lines().count(), 5);

        let cc = chain_cfg(&c, 4, 1, EstimatorMode::SingleShot);
        let rec = run_chain(&c.layout(), &z, &x, &plan, 0.5, &obs, &cc).unwrap();
        let head = rec.to_csv().lines().next().unwrap().to_string();
        assert_eq!(head, "step,basis,bitstring,label,o_energy,o_chiral,o_number");
    }

    #[test]
    fn burn_in_discards_prefix() {
        let c = cfg(2, 0.0);
        let (z, x) = build_1p1d(&c).unwrap();
        let plan = trotter_sequence(&build_model(&c), 0.01);
        let obs = named_observables(&c);
        let mut cc = chain_cfg(&c, 30, 13, EstimatorMode::Exact);
        cc.n_burn = 5;
        let rec = run_chain(&c.layout(), &z, &x, &plan, 0.7, &obs, &cc).unwrap();
        assert_eq!(rec.steps.len(), 30);
        assert_eq!(rec.steps[0].step, 0);
    }
}
