//! `lp-ldp`: rate curves, Monte-Carlo experiments, variational solves and the self-test battery.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exit status classes.
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Solver(String),
    Acceptance(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Solver(_) => 2,
            Failure::Acceptance(_) => 3,
        }
    }
}

impl From<lp_ldp::Error> for Failure {
    fn from(e: lp_ldp::Error) -> Self {
        if e.is_solver() {
            Failure::Solver(e.to_string())
        } else {
            Failure::Validation(e.to_string())
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Validation(m) => write!(f, "invalid input: {m}"),
            Failure::Solver(m) => write!(f, "solver failure: {m}"),
            Failure::Acceptance(m) => write!(f, "acceptance failure: {m}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "lp-ldp", version, about = "Large deviations of one-dimensional projections of l^p balls")]
pub struct Cli {
    /// Worker threads (default: LP_LDP_THREADS, else all logical cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Key-value config file; command-line flags override its entries.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate rate functions on a w grid (CSV or JSON).
    Rate(RateArgs),
    /// Monte-Carlo tail estimates, Glivenko-Cantelli reports and max-coordinate scaling (JSON lines).
    Mc(McArgs),
    /// Solve the variational formula for the annealed rate on a grid (JSON).
    Variational(VariationalArgs),
    /// Run the acceptance battery; exits 3 if any check fails.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug)]
pub struct RateArgs {
    /// Exponent p in [1, ∞] ("inf" for the cube).
    #[arg(long)]
    pub p: String,
    /// Rate kind; repeat for several curves.
    #[arg(long, value_enum, required = true)]
    pub kind: Vec<KindArg>,
    /// Grid `start:stop:step` or a comma list.
    #[arg(long, default_value = "0:0.95:0.05", allow_hyphen_values = true)]
    pub w: String,
    /// Limiting empirical measure ν for quenched rates: mu2, mu:<p>, uniform, uniform:<a>,<b>,
    /// dirac:<x>, or a JSON measure.
    #[arg(long, default_value = "mu2")]
    pub nu: String,
    /// Constant c of the p = 1 quenched rate.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file (default: standard output).
    #[arg(long)]
    pub output: Option<String>,
    /// Allow curves with different speeds in one output.
    #[arg(long)]
    pub allow_mixed_speed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum KindArg {
    Annealed,
    Quenched,
    Cramer,
    J2,
    QuenchedP1,
    E1Projection,
    AnnealedSub2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct McArgs {
    /// Exponent p in [1, ∞].
    #[arg(long, default_value = "2")]
    pub p: String,
    #[arg(long, value_enum, default_value = "typical")]
    pub dir: DirArg,
    /// Dimensions, comma separated; scientific notation accepted.
    #[arg(long)]
    pub n: String,
    /// Tail level.
    #[arg(long, default_value_t = 0.3, allow_hyphen_values = true)]
    pub w: f64,
    #[arg(long, default_value = "1e5", value_parser = config::parse_count)]
    pub reps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Seed of the direction sequence (default: --seed).
    #[arg(long)]
    pub dir_seed: Option<u64>,
    #[arg(long, value_enum, default_value = "direct")]
    pub method: MethodArg,
    /// Speed normalizing the slope: n, n_over_sqrt_log_n or power:<r>. Default follows p and dir.
    #[arg(long)]
    pub speed: Option<String>,
    /// Drop the U^{1/n} radial factor.
    #[arg(long)]
    pub no_radial: bool,
    /// Report Wasserstein-r distances of the empirical coordinate measures to μ_2 instead.
    #[arg(long, conflicts_with = "check")]
    pub gc: bool,
    /// Order r of the Wasserstein distance for --gc.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Run a diagnostic instead of tail estimation.
    #[arg(long, value_enum)]
    pub check: Option<CheckArg>,
    #[arg(long)]
    pub output: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum DirArg {
    Typical,
    ColumnCoupled,
    Iota,
    E1,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Direct,
    Tilted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CheckArg {
    MaxScaling,
}

#[derive(Args, Debug)]
pub struct VariationalArgs {
    /// Exponent p in (1, ∞]; ignored with --gamma.
    #[arg(long, default_value = "2")]
    pub p: String,
    /// Product family of a measure γ instead of an l^p ball: uniform (= μ_∞), mu2, mu:<p>, ...
    #[arg(long)]
    pub gamma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub w: f64,
    /// Support grid `start:stop:count` (default -6:6:241).
    #[arg(long, default_value = "-6:6:241", allow_hyphen_values = true)]
    pub grid: String,
    #[arg(long)]
    pub output: Option<String>,
}

#[derive(Args, Debug)]
pub struct SelftestArgs {
    /// Run only these checks (repeat or comma separate).
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
    /// List the checks and exit.
    #[arg(long)]
    pub list: bool,
    /// Print one JSON object per check instead of the table.
    #[arg(long)]
    pub json: bool,
    /// Fault injection: scale the Gaussian quadrature weights by this factor.
    #[arg(long, hide = true)]
    pub corrupt_quadrature: Option<f64>,
}

const SUBCOMMANDS: [&str; 4] = ["rate", "mc", "variational", "selftest"];

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, Failure> {
    if let Some(n) = flag {
        return if n == 0 { Err(Failure::Validation("--threads must be positive".into())) } else { Ok(Some(n)) };
    }
    match std::env::var("LP_LDP_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::Validation(format!("LP_LDP_THREADS must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

fn run(args: Vec<String>) -> Result<(), Failure> {
    let args = config::merge_args(args, &SUBCOMMANDS)?;
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return Ok(());
        }
        Err(e) => {
            let msg = e.render().to_string();
            return Err(Failure::Validation(msg.trim_start_matches("error: ").trim_end().to_string()));
        }
    };
    let pool = match thread_count(cli.threads)? {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    }
    .map_err(|e| Failure::Validation(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Rate(a) => commands::rate(a),
        Command::Mc(a) => commands::mc(a),
        Command::Variational(a) => commands::variational(a),
        Command::Selftest(a) => commands::selftest(a),
    })
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("lp-ldp: {f}");
            ExitCode::from(f.code())
        }
    }
}
