//! `pinner`: command-line experiments with p-inner functions.
//!
//! Exit status: 0 on success, 1 when a verification suite fails, 2 for unreadable input or
//! invalid parameters, 3 when a solver fails (a diagnostics file is written).

mod args;
mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use pinner::algebra::Parameters;
use pinner::projection::SolverOptions;
use serde_json::json;

use args::{Cli, Command, GlobalArgs};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] pinner::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{0}")]
    Usage(String),

    #[error("could not write output: {0}")]
    Output(String),

    #[error("prefix {prefix} failed: {message}")]
    PrefixFailure { prefix: usize, message: String },

    #[error("verification failed")]
    VerificationFailed(serde_json::Value),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use pinner::Error as E;
        match self {
            CliError::VerificationFailed(_) => 1,
            CliError::Io { .. } | CliError::Usage(_) => 2,
            CliError::Core(E::Parse(_) | E::InvalidParameter(_) | E::Precondition(_)) => 2,
            CliError::Core(_) | CliError::Output(_) | CliError::PrefixFailure { .. } => 3,
        }
    }

    fn diagnostics(&self) -> serde_json::Value {
        match self {
            CliError::Core(pinner::Error::NonConvergence {
                iterations,
                grad_norm,
                last_iterate,
            }) => json!({
                "error": self.to_string(),
                "kind": "non_convergence",
                "iterations": iterations,
                "grad_norm": grad_norm,
                "last_iterate": last_iterate,
            }),
            CliError::PrefixFailure { prefix, message } => json!({
                "error": self.to_string(),
                "kind": "prefix_failure",
                "prefix": prefix,
                "message": message,
            }),
            CliError::VerificationFailed(failures) => json!({
                "error": self.to_string(),
                "kind": "verification",
                "failures": failures,
            }),
            other => json!({ "error": other.to_string(), "kind": "solver" }),
        }
    }
}

/// Settings shared by every command.
pub struct RunConfig {
    pub params: Parameters,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub solver: SolverOptions,
    pub diagnostics: PathBuf,
}

impl RunConfig {
    fn from_args(g: &GlobalArgs) -> Result<Self, CliError> {
        let params = Parameters::new(g.p)?;
        let solver = SolverOptions {
            truncation_degree: g.degree,
            grad_tol: g.grad_tol,
            max_iters: g.max_iters,
            ..SolverOptions::default()
        };
        solver.validate()?;
        let diagnostics = g.diagnostics.clone().unwrap_or_else(|| match &g.out {
            Some(out) => {
                let mut name = out.clone().into_os_string();
                name.push(".diagnostics.json");
                PathBuf::from(name)
            }
            None => PathBuf::from("pinner-diagnostics.json"),
        });
        Ok(Self {
            params,
            out: g.out.clone(),
            seed: g.seed,
            solver,
            diagnostics,
        })
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {threads} threads: {e}")))?;
    }
    let config = RunConfig::from_args(&cli.global)?;
    let result = match &cli.command {
        Command::Inner(a) => commands::inner(&config, a),
        Command::Project(a) => commands::project(&config, a),
        Command::Zeroset(a) => commands::zeroset(&config, a),
        Command::Construct(a) => commands::construct(&config, a),
        Command::Verify(a) => commands::verify(&config, a),
    };
    if let Err(e) = &result {
        if e.exit_code() != 2 {
            let written = output::write_json(&e.diagnostics(), Some(&config.diagnostics));
            if written.is_ok() {
                eprintln!("diagnostics written to {}", config.diagnostics.display());
            }
        }
    }
    result
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
