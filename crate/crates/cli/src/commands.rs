//! Command implementations: experiment orchestration and CSV emission.
//!
//! Grid points are dispatched to the rayon worker pool (size from
//! `Z2METTS_WORKERS`) and results are written in grid order regardless of
//! completion order; every row carries the full parameter tuple and the
//! master seed, so re-running a config file is bit-identical.

use crate::config::RunConfig;
use rayon::prelude::*;
use z2metts::derive_seed;
use z2metts::exactref::ExactSolution;
use z2metts::ite::{trotter_sequence, TrotterPlan};
use z2metts::model::{
    build_model, default_initial_bits, gauss_operators, observables, LatticeConfig,
};
use z2metts::mupb::{build_1p1d, build_general, verify_mupb, MeasurementBasis, DEFAULT_VERIFY_TOL};
use z2metts::pauli::PauliSum;
use z2metts::qmetts::{run_chain, ChainConfig, ChainRecord};
use z2metts::stats::{fixed_budget_comparison, variance_decomposition, SeriesSummary};
use z2metts::tableau::{canonical_form, StabilizerTableau};

/// Failure category mapped to the process exit code.
pub enum CmdError {
    /// Exit 3: bad configuration or inputs.
    Config(String),
    /// Exit 2: a verification or variance check failed.
    Validation(String),
    /// Exit 1: runtime failure (I/O, internal).
    Run(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Config(_) => 3,
            CmdError::Validation(_) => 2,
            CmdError::Run(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CmdError::Config(m) | CmdError::Validation(m) | CmdError::Run(m) => m,
        }
    }
}

fn run_err<E: std::fmt::Display>(e: E) -> CmdError {
    CmdError::Run(e.to_string())
}

struct Experiment {
    cfg: RunConfig,
    lattice_at: Box<dyn Fn(f64) -> LatticeConfig + Sync>,
}

impl Experiment {
    fn new(cfg: &RunConfig) -> Result<Self, CmdError> {
        cfg.validate().map_err(|e| CmdError::Config(e.to_string()))?;
        let (l_ks, a_g, m) = (cfg.l_ks, cfg.a_g, cfg.m_over_g);
        LatticeConfig::new(l_ks, a_g, m, 0.0).map_err(|e| CmdError::Config(e.to_string()))?;
        let nq = 2 * l_ks - 1;
        if nq > cfg.dense_max_qubits {
            return Err(CmdError::Config(format!(
                "model needs {nq} qubits, above limits.dense_max_qubits = {}",
                cfg.dense_max_qubits
            )));
        }
        let cfg = cfg.clone();
        Ok(Experiment {
            cfg: cfg.clone(),
            lattice_at: Box::new(move |mu| LatticeConfig::new(l_ks, a_g, m, mu).unwrap()),
        })
    }

    fn lattice(&self, mu: f64) -> LatticeConfig {
        (self.lattice_at)(mu)
    }

    fn named_observables(&self, mu: f64) -> Vec<(String, PauliSum)> {
        observables(&self.lattice(mu)).into_named()
    }

    fn bases(&self, mu: f64) -> Result<(MeasurementBasis, MeasurementBasis), CmdError> {
        build_1p1d(&self.lattice(mu)).map_err(run_err)
    }

    fn plan(&self, mu: f64) -> TrotterPlan {
        trotter_sequence(&build_model(&self.lattice(mu)), self.cfg.delta_beta)
    }

    fn initial_bits(&self, mu: f64) -> Result<u64, CmdError> {
        let lattice = self.lattice(mu);
        if self.cfg.initial_state == "auto" {
            Ok(default_initial_bits(&lattice))
        } else {
            lattice
                .layout()
                .bits_of_label(&self.cfg.initial_state)
                .map_err(|e| CmdError::Config(e.to_string()))
        }
    }

    fn provenance(&self) -> String {
        format!(
            "{},{:.6},{:.6}",
            self.cfg.l_ks, self.cfg.a_g, self.cfg.m_over_g
        )
    }
}

const SUMMARY_HEADER: &str =
    "beta_g,mu_over_g,observable,mean,stderr,tau,n_eff,window,l_ks,a_g,m_over_g,estimator,n_chain,seed";

/// Exact-diagonalization reference over the (β, μ) grid.
pub fn cmd_exact(cfg: &RunConfig) -> Result<String, CmdError> {
    let exp = Experiment::new(cfg)?;
    let rows: Result<Vec<String>, CmdError> = cfg
        .mu_over_g
        .par_iter()
        .map(|&mu| {
            let lattice = exp.lattice(mu);
            let sol = ExactSolution::build(&lattice, cfg.dense_max_qubits).map_err(run_err)?;
            let obs = exp.named_observables(mu);
            let mut out = String::new();
            for &beta in &cfg.beta_g {
                for (name, op) in &obs {
                    let mean = sol.thermal_expectation(beta, op).map_err(run_err)?;
                    out.push_str(&format!(
                        "{beta:.6},{mu:.6},{name},{mean:.12e},0,n/a,n/a,n/a,{},exact_diag,n/a,n/a\n",
                        exp.provenance()
                    ));
                }
            }
            Ok(out)
        })
        .collect();
    let mut csv = String::from(SUMMARY_HEADER);
    csv.push('\n');
    for r in rows? {
        csv.push_str(&r);
    }
    Ok(csv)
}

pub struct ChainOutput {
    pub summary_csv: String,
    pub steps_csv: String,
    /// (beta, mu, observable, |mean - exact|, 3*stderr) for the self test.
    pub self_test_rows: Vec<(f64, f64, String, f64, f64)>,
}

/// QMETTS chains over the (β, μ) grid with stats post-processing.
pub fn cmd_chain(cfg: &RunConfig, self_test: bool) -> Result<ChainOutput, CmdError> {
    let exp = Experiment::new(cfg)?;
    let mode = cfg.estimator_mode().map_err(|e| CmdError::Config(e.to_string()))?;
    let grid: Vec<(usize, f64, f64)> = cfg
        .mu_over_g
        .iter()
        .flat_map(|&mu| cfg.beta_g.iter().map(move |&b| (b, mu)))
        .enumerate()
        .map(|(k, (b, mu))| (k, b, mu))
        .collect();

    struct PointResult {
        beta: f64,
        mu: f64,
        record: ChainRecord,
        exact: Option<Vec<f64>>,
    }

    let points: Result<Vec<PointResult>, CmdError> = grid
        .par_iter()
        .map(|&(k, beta, mu)| {
            let lattice = exp.lattice(mu);
            let (z, x) = exp.bases(mu)?;
            let plan = exp.plan(mu);
            let obs = exp.named_observables(mu);
            let chain_cfg = ChainConfig {
                n_chain: cfg.n_chain,
                n_burn: cfg.n_burn,
                mode,
                schedule: cfg.schedule(),
                seed: derive_seed(cfg.seed, k as u64),
                initial_bits: exp.initial_bits(mu)?,
            };
            let record = run_chain(&lattice.layout(), &z, &x, &plan, beta, &obs, &chain_cfg)
                .map_err(|e| CmdError::Config(e.to_string()))?;
            let exact = if self_test {
                let sol = ExactSolution::build(&lattice, cfg.dense_max_qubits).map_err(run_err)?;
                Some(
                    obs.iter()
                        .map(|(_, op)| sol.thermal_expectation(beta, op).unwrap())
                        .collect(),
                )
            } else {
                None
            };
            Ok(PointResult {
                beta,
                mu,
                record,
                exact,
            })
        })
        .collect();
    let points = points?;

    let mut summary = String::from(SUMMARY_HEADER);
    summary.push('\n');
    let mut steps = String::new();
    let mut self_test_rows = Vec::new();
    for p in &points {
        let names = p.record.observable_names.clone();
        for (i, name) in names.iter().enumerate() {
            let series = p.record.samples_of(i);
            let s = SeriesSummary::from_series(&series, cfg.window).map_err(run_err)?;
            summary.push_str(&format!(
                "{:.6},{:.6},{name},{:.12e},{:.12e},{:.6},{:.3},{},{},{},{},{}\n",
                p.beta,
                p.mu,
                s.mean,
                s.stderr,
                s.tau,
                s.n_eff,
                cfg.window,
                exp.provenance(),
                cfg.estimator,
                cfg.n_chain,
                cfg.seed
            ));
            if let Some(exact) = &p.exact {
                self_test_rows.push((
                    p.beta,
                    p.mu,
                    name.clone(),
                    (s.mean - exact[i]).abs(),
                    3.0 * s.stderr,
                ));
            }
        }
        // Per-step CSV with the parameter tuple prepended to the record's
        // own columns.
        let rec_csv = p.record.to_csv();
        let mut lines = rec_csv.lines();
        if steps.is_empty() {
            steps.push_str(&format!(
                "l_ks,a_g,m_over_g,beta_g,mu_over_g,estimator,seed,{}\n",
                lines.next().unwrap_or_default()
            ));
        } else {
            lines.next();
        }
        for line in lines {
            steps.push_str(&format!(
                "{},{:.6},{:.6},{},{},{line}\n",
                exp.provenance(),
                p.beta,
                p.mu,
                cfg.estimator,
                cfg.seed
            ));
        }
    }

    if self_test {
        for (beta, mu, name, diff, band) in &self_test_rows {
            // An exactly deterministic estimator has zero stderr; allow
            // float dust there.
            if *diff > band + 1e-9 {
                return Err(CmdError::Validation(format!(
                    "self-test: {name} at beta_g={beta}, mu/g={mu} deviates {diff:.3e} > 3 stderr = {band:.3e}"
                )));
            }
        }
    }

    Ok(ChainOutput {
        summary_csv: summary,
        steps_csv: steps,
        self_test_rows,
    })
}

/// Phase-diagram sweep over (μ/g, T/g): chain mean ± stderr plus the exact
/// reference for the chiral condensate and number density per cell.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<String, CmdError> {
    let exp = Experiment::new(cfg)?;
    let mode = cfg.estimator_mode().map_err(|e| CmdError::Config(e.to_string()))?;
    let grid: Vec<(usize, f64, f64)> = cfg
        .mu_over_g
        .iter()
        .flat_map(|&mu| cfg.beta_g.iter().map(move |&b| (b, mu)))
        .enumerate()
        .map(|(k, (b, mu))| (k, b, mu))
        .collect();

    let rows: Result<Vec<String>, CmdError> = grid
        .par_iter()
        .map(|&(k, beta, mu)| {
            let lattice = exp.lattice(mu);
            let (z, x) = exp.bases(mu)?;
            let plan = exp.plan(mu);
            let obs = exp.named_observables(mu);
            let chain_cfg = ChainConfig {
                n_chain: cfg.n_chain,
                n_burn: cfg.n_burn,
                mode,
                schedule: cfg.schedule(),
                seed: derive_seed(cfg.seed, k as u64),
                initial_bits: exp.initial_bits(mu)?,
            };
            let record = run_chain(&lattice.layout(), &z, &x, &plan, beta, &obs, &chain_cfg)
                .map_err(|e| CmdError::Config(e.to_string()))?;
            let sol = ExactSolution::build(&lattice, cfg.dense_max_qubits).map_err(run_err)?;
            // Observables: 1 = chiral, 2 = number.
            let chi = SeriesSummary::from_series(&record.samples_of(1), cfg.window)
                .map_err(run_err)?;
            let num = SeriesSummary::from_series(&record.samples_of(2), cfg.window)
                .map_err(run_err)?;
            let chi_exact = sol.thermal_expectation(beta, &obs[1].1).map_err(run_err)?;
            let num_exact = sol.thermal_expectation(beta, &obs[2].1).map_err(run_err)?;
            Ok(format!(
                "{:.6},{beta:.6},{mu:.6},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{},{},{},{}\n",
                1.0 / beta,
                chi.mean,
                chi.stderr,
                chi_exact,
                num.mean,
                num.stderr,
                num_exact,
                exp.provenance(),
                cfg.estimator,
                cfg.n_chain,
                cfg.seed
            ))
        })
        .collect();

    let mut csv = String::from(
        "t_g,beta_g,mu_over_g,chiral_mean,chiral_stderr,chiral_exact,number_mean,number_stderr,number_exact,l_ks,a_g,m_over_g,estimator,n_chain,seed",
    );
    csv.push('\n');
    for r in rows? {
        csv.push_str(&r);
    }
    Ok(csv)
}

/// MUPB verification: built-in 1+1D bases, or the general builder on a
/// user-supplied constraint file; plus canonical-form round-trip checks.
pub fn cmd_verify(
    cfg: &RunConfig,
    stabilizer_text: Option<&str>,
    file_qubits: Option<usize>,
) -> Result<String, CmdError> {
    let mut out = String::new();
    let report = match stabilizer_text {
        None => {
            let exp = Experiment::new(cfg)?;
            let lattice = exp.lattice(0.0);
            let gauss = gauss_operators(&lattice);
            let (z, x) = exp.bases(0.0)?;
            out.push_str(&format!(
                "built-in 1+1D bases for L_KS = {} ({} qubits)\n",
                cfg.l_ks,
                lattice.layout().n_qubits()
            ));
            let t = StabilizerTableau::from_generators(&gauss)
                .map_err(|e| CmdError::Validation(e.to_string()))?;
            out.push_str(&canon_roundtrip_report(&t)?);
            verify_mupb(&z, &x, &gauss, DEFAULT_VERIFY_TOL)
        }
        Some(text) => {
            let gens = StabilizerTableau::parse_group_file(text)
                .map_err(|e| CmdError::Config(e.to_string()))?;
            let tableau = if gens.is_empty() {
                let n = file_qubits.ok_or_else(|| {
                    CmdError::Config(
                        "empty stabilizer file: pass --qubits to set the register size".into(),
                    )
                })?;
                StabilizerTableau::empty(n)
            } else {
                StabilizerTableau::from_generators(&gens)
                    .map_err(|e| CmdError::Validation(e.to_string()))?
            };
            out.push_str(&format!(
                "general builder on {} constraints, {} qubits\n",
                tableau.num_generators(),
                tableau.n_qubits()
            ));
            out.push_str(&canon_roundtrip_report(&tableau)?);
            let (z, x) = build_general(&tableau).map_err(run_err)?;
            verify_mupb(&z, &x, tableau.generators(), DEFAULT_VERIFY_TOL)
        }
    };
    out.push_str(&format!("{report}\n"));
    if report.passed() {
        Ok(out)
    } else {
        out.push_str("verification FAILED\n");
        Err(CmdError::Validation(out))
    }
}

fn canon_roundtrip_report(t: &StabilizerTableau) -> Result<String, CmdError> {
    let canon = canonical_form(t);
    for (i, g) in t.generators().iter().enumerate() {
        let mapped = canon.conjugate(g);
        let ok = mapped.is_diagonal()
            && !mapped.is_negative()
            && (0..t.n_qubits()).all(|q| mapped.z(q) == (q == i));
        if !ok {
            return Err(CmdError::Validation(format!(
                "canonical-form round trip failed: generator {i} maps to {mapped}"
            )));
        }
    }
    Ok(format!(
        "canonical form: {} gates (+{} sign fixes), depth {}, round trip ok\n",
        canon.circuit.len(),
        canon.sign_fixes.len(),
        canon.circuit.depth()
    ))
}

/// Canonicalization circuit of a stabilizer file as a gate list, one gate
/// per line, sign-fix X gates appended.
pub fn cmd_canon(stabilizer_text: &str) -> Result<String, CmdError> {
    let gens = StabilizerTableau::parse_group_file(stabilizer_text)
        .map_err(|e| CmdError::Config(e.to_string()))?;
    let tableau = StabilizerTableau::from_generators(&gens)
        .map_err(|e| CmdError::Validation(e.to_string()))?;
    let canon = canonical_form(&tableau);
    let mut out = String::new();
    for g in canon.full_circuit().gates() {
        out.push_str(&format!("{g}\n"));
    }
    Ok(out)
}

/// Single-shot sampling theory study: τ_μ/τ_O decomposition against the
/// exact Gibbs variance, plus the fixed-budget comparison.
pub fn cmd_variance_study(cfg: &RunConfig) -> Result<String, CmdError> {
    let exp = Experiment::new(cfg)?;
    let mut csv = String::from(
        "beta_g,mu_over_g,observable,tau_mu,tau_o,tau_o_predicted,relation_rel_error,alpha,sigma_mu_sq,sigma_shot_sq,gibbs_variance,gibbs_gap,var_single,var_multi,se_diff,l_ks,a_g,m_over_g,seed",
    );
    csv.push('\n');
    let mut failures = Vec::new();

    for (k, &mu) in cfg.mu_over_g.iter().enumerate() {
        let lattice = exp.lattice(mu);
        let (z, x) = exp.bases(mu)?;
        let plan = exp.plan(mu);
        let obs = exp.named_observables(mu);
        let sol = ExactSolution::build(&lattice, cfg.dense_max_qubits).map_err(run_err)?;
        let initial = exp.initial_bits(mu)?;
        for (j, &beta) in cfg.beta_g.iter().enumerate() {
            let seed = derive_seed(cfg.seed, (k * cfg.beta_g.len() + j) as u64);
            let chain_cfg = ChainConfig {
                n_chain: cfg.n_tau_steps,
                n_burn: cfg.n_burn,
                mode: z2metts::qmetts::EstimatorMode::SingleShot,
                schedule: cfg.schedule(),
                seed,
                initial_bits: initial,
            };
            let record = run_chain(&lattice.layout(), &z, &x, &plan, beta, &obs, &chain_cfg)
                .map_err(|e| CmdError::Config(e.to_string()))?;
            let budget = fixed_budget_comparison(
                &lattice.layout(),
                &z,
                &x,
                &plan,
                beta,
                &obs,
                initial,
                cfg.n_est,
                cfg.n_shot,
                cfg.repetitions,
                derive_seed(cfg.seed, 0xB0D6E7 ^ seed),
            )
            .map_err(run_err)?;

            for (i, (name, op)) in obs.iter().enumerate() {
                let gibbs = sol.gibbs_variance(beta, op).map_err(run_err)?;
                let mu_series = record.mu_of(i);
                let o_series = record.samples_of(i);
                if z2metts::stats::variance(&o_series) == 0.0 {
                    // Deterministic estimator (saturated phases): the
                    // decomposition is trivial, skip the row's tau fields.
                    csv.push_str(&format!(
                        "{beta:.6},{mu:.6},{name},0.5,0.5,0.5,0,1,0,0,{gibbs:.6e},{gibbs:.6e},{:.6e},{:.6e},{:.6e},{},{seed}\n",
                        budget.rows[i].var_single,
                        budget.rows[i].var_multi,
                        budget.rows[i].se_diff,
                        exp.provenance()
                    ));
                    continue;
                }
                let d = variance_decomposition(&mu_series, &o_series, gibbs, cfg.window)
                    .map_err(run_err)?;
                csv.push_str(&format!(
                    "{beta:.6},{mu:.6},{name},{:.6},{:.6},{:.6},{:.4},{:.6},{:.6e},{:.6e},{:.6e},{:.3e},{:.6e},{:.6e},{:.6e},{},{seed}\n",
                    d.tau_mu,
                    d.tau_o_measured,
                    d.tau_o_predicted,
                    d.relation_rel_error,
                    d.alpha,
                    d.sigma_mu_sq,
                    d.sigma_shot_sq,
                    gibbs,
                    d.gibbs_gap,
                    budget.rows[i].var_single,
                    budget.rows[i].var_multi,
                    budget.rows[i].se_diff,
                    exp.provenance()
                ));
                // Gates: the relation check where shot noise is present,
                // and the fixed-budget inequality at 2 sigma.
                if d.sigma_shot_sq > 0.05 * d.sigma_mu_sq && d.relation_rel_error > 0.15 {
                    failures.push(format!(
                        "{name} at beta_g={beta}, mu/g={mu}: tau relation off by {:.1}%",
                        100.0 * d.relation_rel_error
                    ));
                }
                if !budget.single_shot_wins(i, 2.0) {
                    failures.push(format!(
                        "{name} at beta_g={beta}, mu/g={mu}: Var_single {:.3e} > Var_multi {:.3e} + 2 SE",
                        budget.rows[i].var_single, budget.rows[i].var_multi
                    ));
                }
            }
        }
    }

    if failures.is_empty() {
        Ok(csv)
    } else {
        Err(CmdError::Validation(format!(
            "{csv}\nvariance checks failed:\n  {}",
            failures.join("\n  ")
        )))
    }
}
