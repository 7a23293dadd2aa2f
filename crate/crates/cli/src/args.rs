use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "pinner",
    version,
    about = "p-inner functions, projections and zero-set certificates in l^p_A"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Exponent of the space, p > 1.
    #[arg(long, global = true, default_value_t = 2.0)]
    pub p: f64,

    /// Where to write the JSON result; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Seed for the randomized suites.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    /// Worker threads for parallel work.
    #[arg(long, global = true, env = "PINNER_THREADS")]
    pub threads: Option<usize>,

    /// Truncation degree of the solvers; chosen automatically when omitted.
    #[arg(long, global = true)]
    pub degree: Option<usize>,

    #[arg(long, global = true, default_value_t = 1e-10)]
    pub grad_tol: f64,

    #[arg(long, global = true, default_value_t = 2000)]
    pub max_iters: usize,

    /// Where solver diagnostics go on failure; defaults to `<out>.diagnostics.json`.
    #[arg(long, global = true)]
    pub diagnostics: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// p-inner function with the zeros in a zero-set file.
    Inner(InnerArgs),
    /// Co-projection of a polynomial onto the closed span of its shifts.
    Project(ProjectArgs),
    /// Norm certificates for the prefixes of a zero set.
    Zeroset(ZerosetArgs),
    /// One of the explicit zero-set families.
    Construct(ConstructArgs),
    /// Randomized invariant suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Closed form for a single simple zero.
    Closed,
    Newton,
    /// Co-projection of the zero polynomial.
    Project,
}

#[derive(Debug, Args)]
pub struct InnerArgs {
    /// JSON file `{"zeros": [{"re": .., "im": .., "mult": ..}, ..]}`.
    #[arg(long)]
    pub zeros: PathBuf,

    #[arg(long, value_enum, default_value_t = Method::Newton)]
    pub method: Method,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    /// JSON file holding the coefficients as `[[re, im], ..]`.
    #[arg(long)]
    pub coeffs: PathBuf,

    /// Order of the zero at the origin.
    #[arg(long, default_value_t = 0)]
    pub origin_multiplicity: usize,
}

#[derive(Debug, Args)]
#[command(args_conflicts_with_subcommands = true, subcommand_negates_reqs = true)]
pub struct ZerosetArgs {
    #[command(subcommand)]
    pub diag: Option<ZerosetCommand>,

    #[arg(long, required = true)]
    pub zeros: Option<PathBuf>,

    /// Longest prefix to certify; all distinct zeros when omitted.
    #[arg(long)]
    pub n_max: Option<usize>,

    /// CSV table with columns n, j_norm, phi_norm, bound.
    #[arg(long)]
    pub csv: Option<PathBuf>,

    /// Solve the prefixes independently in parallel instead of warm-starting them in order.
    #[arg(long)]
    pub parallel: bool,
}

#[derive(Debug, Subcommand)]
pub enum ZerosetCommand {
    /// Classical diagnostics of the moduli.
    Diag(DiagArgs),
}

#[derive(Debug, Args)]
pub struct DiagArgs {
    #[arg(long)]
    pub zeros: PathBuf,

    /// Partial sums of `1 - |w_k|`.
    #[arg(long)]
    pub blaschke: bool,

    /// Successive ratios of `1 - |w_k|`.
    #[arg(long)]
    pub newman: bool,

    /// Partial sums of `(1 - |w_k|)^(1 + eps)`.
    #[arg(long)]
    pub vinogradov_eps: Option<f64>,

    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Geometric,
    Slow,
    Nonblaschke,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[arg(long, value_enum)]
    pub family: Family,

    /// Exponent gap of the factorial family, in (0, p - 2).
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,

    /// Number of levels of the slow and factorial families.
    #[arg(long, default_value_t = 4)]
    pub k_max: usize,

    /// Logarithmic exponent of the slow family, above 1.
    #[arg(long, default_value_t = 2.0)]
    pub a: f64,

    /// Modulus of the first slow-family level.
    #[arg(long, default_value_t = 0.5)]
    pub r1: f64,

    /// Number of geometric factors.
    #[arg(long, default_value_t = 5)]
    pub n: usize,

    /// Geometric moduli `1 - rate^-k`.
    #[arg(long, default_value_t = 3.0)]
    pub rate: f64,

    /// Compose the k-th geometric factor with `z^k`.
    #[arg(long)]
    pub rotate: bool,

    /// Reserve kept from the budget `1/p'` of the geometric exponents; `1/(2p')` when omitted.
    #[arg(long)]
    pub epsilon: Option<f64>,

    /// CSV of targeted roots with columns level, modulus, count, spacing.
    #[arg(long)]
    pub emit_roots: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Pythagorean,
    Involution,
    DiffQuotient,
    CrossMethod,
    All,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    pub suite: SuiteArg,

    /// Cases per run for the randomized suites; each suite's default when omitted.
    #[arg(long)]
    pub cases: Option<usize>,
}
