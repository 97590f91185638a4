//! `z2metts`: QMETTS experiments on the (1+1)-dimensional Z2 lattice gauge
//! model with gauge-invariant measurement bases.
//!
//! Exit codes: 0 success, 2 validation failure (verify or variance checks),
//! 3 configuration error. Set `Z2METTS_WORKERS` to bound the worker pool.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use commands::CmdError;
use config::RunConfig;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "z2metts",
    about = "QMETTS sampling for Z2 lattice gauge theory with mutually unbiased physical bases",
    version
)]
struct Cli {
    /// Plain-text config file ([section] + key = value lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override one config entry, e.g. --set model.l_ks=2 (repeatable).
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact-diagonalization reference over the (beta_g, mu_over_g) grid.
    Exact {
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// QMETTS chains over the grid: summary CSV plus per-step CSV.
    Chain {
        #[arg(long)]
        out_summary: Option<PathBuf>,
        #[arg(long)]
        out_steps: Option<PathBuf>,
        /// Compare chain means against exact diagonalization at 3 stderr;
        /// exit 2 on violation.
        #[arg(long)]
        self_test: bool,
    },
    /// Phase-diagram sweep over (mu_over_g, T/g) for the chiral condensate
    /// and number density.
    Sweep {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify the MUPB conditions (built-in bases, or a stabilizer file via
    /// the general builder) and the canonical-form round trip.
    Verify {
        /// Stabilizer-group file: one Pauli string per line, '#' comments.
        #[arg(long)]
        stabilizer_file: Option<PathBuf>,
        /// Qubit count, required only for an empty stabilizer file.
        #[arg(long)]
        qubits: Option<usize>,
    },
    /// Single-shot sampling theory: tau decomposition and the fixed-budget
    /// single-shot vs multi-shot comparison.
    VarianceStudy {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Canonicalize a stabilizer file and emit the Clifford gate list.
    Canon {
        stabilizer_file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig, CmdError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CmdError::Config(format!("cannot read {}: {e}", path.display())))?;
        cfg.parse_file(&text)
            .map_err(|e| CmdError::Config(e.to_string()))?;
    }
    for o in &cli.overrides {
        cfg.apply_override(o)
            .map_err(|e| CmdError::Config(e.to_string()))?;
    }
    cfg.validate().map_err(|e| CmdError::Config(e.to_string()))?;
    Ok(cfg)
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CmdError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CmdError::Run(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn init_worker_pool() {
    if let Ok(v) = std::env::var("Z2METTS_WORKERS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
}

fn run(cli: &Cli) -> Result<(), CmdError> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Exact { out } => {
            let csv = commands::cmd_exact(&cfg)?;
            emit(&csv, out.as_ref())
        }
        Command::Chain {
            out_summary,
            out_steps,
            self_test,
        } => {
            let result = commands::cmd_chain(&cfg, *self_test)?;
            if *self_test {
                let worst = result
                    .self_test_rows
                    .iter()
                    .max_by(|a, b| a.3.partial_cmp(&b.3).unwrap());
                if let Some((beta, mu, name, diff, band)) = worst {
                    eprintln!(
                        "self-test ok: worst deviation {diff:.3e} (3 stderr = {band:.3e}) \
                         for {name} at beta_g={beta}, mu/g={mu}"
                    );
                }
            }
            emit(&result.summary_csv, out_summary.as_ref())?;
            if let Some(path) = out_steps {
                emit(&result.steps_csv, Some(path))?;
            }
            Ok(())
        }
        Command::Sweep { out } => {
            let csv = commands::cmd_sweep(&cfg)?;
            emit(&csv, out.as_ref())
        }
        Command::Verify {
            stabilizer_file,
            qubits,
        } => {
            let text = match stabilizer_file {
                Some(path) => Some(std::fs::read_to_string(path).map_err(|e| {
                    CmdError::Config(format!("cannot read {}: {e}", path.display()))
                })?),
                None => None,
            };
            let report = commands::cmd_verify(&cfg, text.as_deref(), *qubits)?;
            print!("{report}");
            Ok(())
        }
        Command::VarianceStudy { out } => {
            let csv = commands::cmd_variance_study(&cfg)?;
            emit(&csv, out.as_ref())
        }
        Command::Canon {
            stabilizer_file,
            out,
        } => {
            let text = std::fs::read_to_string(stabilizer_file).map_err(|e| {
                CmdError::Config(format!("cannot read {}: {e}", stabilizer_file.display()))
            })?;
            let gates = commands::cmd_canon(&text)?;
            emit(&gates, out.as_ref())
        }
    }
}

fn main() {
    init_worker_pool();
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error: {}", e.message());
        std::process::exit(e.exit_code());
    }
}
