use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

mod commands;

#[derive(Debug, Parser, Serialize)]
#[command(name = "kernelscope", version, about = "Kernel growth, linear representations, Dirichlet series and zeta zeros")]
#[command(arg_required_else_help = true)]
pub struct Cli {
    /// Cap on worker threads (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file (default: stdout)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// A function table.
#[derive(Debug, Args, Serialize)]
pub struct SeqArgs {
    /// Function id, e.g. lambda, tau_k:3, q_m:2
    #[arg(long = "fn")]
    pub function: String,
    /// Table length
    #[arg(long = "N")]
    pub n: usize,
    /// Reduce values to least non-negative residues mod this
    #[arg(long = "mod")]
    pub modulus: Option<i64>,
}

#[derive(Debug, Args, Serialize)]
pub struct KernelArgs {
    #[arg(long, default_value_t = 2)]
    pub k: u64,
    /// Maximum kernel depth
    #[arg(long = "L")]
    pub depth: u32,
    /// Prefix length compared per kernel element
    #[arg(long = "M")]
    pub m: usize,
}

/// A linear representation, read from a file or built from a function table.
#[derive(Debug, Args, Serialize)]
pub struct RepArgs {
    /// Representation JSON written by build-rep
    #[arg(long, conflicts_with = "function")]
    pub rep: Option<PathBuf>,
    #[arg(long = "fn")]
    pub function: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub k: u64,
    #[arg(long = "L", default_value_t = 6)]
    pub depth: u32,
    #[arg(long = "M", default_value_t = 64)]
    pub m: usize,
    /// Table length (default: enough for the kernel window, at least 65536)
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long = "mod")]
    pub modulus: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMethod {
    Direct,
    Recursion,
    Quotient,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Tabulate f(1..=N)
    Generate {
        #[command(flatten)]
        seq: SeqArgs,
        /// Sieve bound for nth_prime (default: from the prime number theorem)
        #[arg(long)]
        sieve: Option<usize>,
    },
    /// Distinct k-kernel elements per depth
    KernelProfile {
        #[command(flatten)]
        seq: SeqArgs,
        #[command(flatten)]
        kernel: KernelArgs,
    },
    /// Exact rank of the k-kernel per depth
    RankProfile {
        #[command(flatten)]
        seq: SeqArgs,
        #[command(flatten)]
        kernel: KernelArgs,
    },
    /// Empirical density of one value over prefixes
    Density {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long, allow_hyphen_values = true)]
        value: i64,
        /// Comma-separated prefix lengths
        #[arg(long, value_delimiter = ',', required = true)]
        lengths: Vec<usize>,
    },
    /// Linear representation from a saturated kernel
    BuildRep {
        #[command(flatten)]
        seq: SeqArgs,
        #[command(flatten)]
        kernel: KernelArgs,
    },
    /// Evaluate a representation at n
    EvalRep {
        #[command(flatten)]
        rep: RepArgs,
        /// Comma-separated indices
        #[arg(long = "n", value_delimiter = ',', required = true)]
        indices: Vec<u64>,
    },
    /// Candidate poles log(alpha)/log k + 1 + 2 pi i m/log k - l
    PoleLattice {
        #[command(flatten)]
        rep: RepArgs,
        #[arg(long = "m-max", default_value_t = 3)]
        m_max: i64,
        #[arg(long = "l-max", default_value_t = 2)]
        l_max: u64,
    },
    /// Dirichlet series value at s
    DirichletEval {
        #[command(flatten)]
        rep: RepArgs,
        #[arg(long, value_enum, default_value_t = EvalMethod::Direct)]
        method: EvalMethod,
        /// Point, e.g. 2, 0.5+14.1i or 0.5,14.1
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        /// Terms for the direct sum (default: N)
        #[arg(long)]
        terms: Option<usize>,
        /// Identity for the zeta-quotient method
        #[arg(long)]
        id: Option<String>,
        #[arg(long, default_value_t = 8)]
        levels: u32,
        #[arg(long = "m-max", default_value_t = 200)]
        m_max: usize,
    },
    /// Compare a direct sum with its zeta-quotient closed form
    VerifyIdentity {
        #[arg(long)]
        id: String,
        /// Sample points (repeatable; default: the identity's standard samples)
        #[arg(long, allow_hyphen_values = true)]
        s: Vec<String>,
        #[arg(long = "N", default_value_t = 1_000_000)]
        n: usize,
    },
    /// Grid scan of a continued series for poles in R(a, b; T)
    PoleScan {
        #[command(flatten)]
        rep: RepArgs,
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        #[arg(long = "T")]
        t: f64,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        #[arg(long, default_value_t = 8)]
        levels: u32,
        #[arg(long = "m-max", default_value_t = 200)]
        m_max: usize,
    },
    /// Real singular points 1/n (n square-free) of the prime zeta function
    Singularities {
        #[arg(long = "n-max")]
        n_max: u64,
    },
    /// Riemann zeta by Euler-Maclaurin
    Zeta {
        #[arg(long, allow_hyphen_values = true, required = true)]
        s: Vec<String>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Critical-line zeros up to height T
    Zeros {
        #[arg(long = "T")]
        t: f64,
    },
    /// N(T) by the argument principle
    ZeroCount {
        #[arg(long = "T")]
        t: f64,
    },
    /// N(T)/(T log T) and N(T)/T over heights
    Tlogt {
        #[arg(long = "T", value_delimiter = ',', default_values_t = [50.0, 100.0, 200.0, 400.0])]
        t: Vec<f64>,
    },
    /// Cartier-section orbit of sum f(n) X^n over F_p
    ChristolOrbit {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 50)]
        budget: usize,
    },
}

#[derive(Debug)]
pub enum CliError {
    Core(kernelscope::Error),
    Usage(String),
    Io(std::io::Error),
}

impl From<kernelscope::Error> for CliError {
    fn from(e: kernelscope::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(e) => write!(f, "io: {e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_capacity_like() => 2,
            CliError::Core(_) | CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

/// Result of one command: JSON always, CSV where the command has a tabular form.
pub struct Report {
    pub json: Value,
    pub csv: Option<String>,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    if cli.format == Format::Csv && matches!(cli.command, Command::BuildRep { .. }) {
        return Err(CliError::Usage("build-rep has no CSV form; use --format json".into()));
    }
    let start = Instant::now();
    let report = commands::dispatch(&cli.command)?;
    let wall = start.elapsed().as_secs_f64();
    let config = serde_json::to_value(cli).expect("config serializes");
    let text = match cli.format {
        Format::Json => {
            let doc = json!({
                "meta": {
                    "tool": "kernelscope",
                    "version": env!("CARGO_PKG_VERSION"),
                    "config": config,
                    "wall_time_s": wall,
                },
                "result": report.json,
            });
            serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"
        }
        Format::Csv => {
            let body = report.csv.ok_or_else(|| CliError::Usage("this command has no CSV form".into()))?;
            format!(
                "# tool: kernelscope {}\n# config: {}\n# wall_time_s: {wall:.6}\n{body}",
                env!("CARGO_PKG_VERSION"),
                config
            )
        }
    };
    match &cli.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
