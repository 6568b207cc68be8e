//! The `nucbound` command line.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0  | success (for `certify`: certified) |
//! | 1  | `certify`: not certified |
//! | 2  | input file parse error (line and column reported) |
//! | 3  | input violates a tensor invariant (non-finite entry) |
//! | 4  | `--mode` out of range |
//! | 5  | `certify` on a tensor whose order is not 3 |
//! | 6  | `oracle` refused: input above the size limit |
//! | 7  | input file could not be read |
//! | 8  | `oracle` did not reach its residual tolerance (document still printed) |
//! | 64 | invalid command line or flag value |

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::bounds::{self, DEFAULT_CERT_TOL};
use crate::error::Error;
use crate::io::{self, ParseError};
use crate::oracle::{self, OracleConfig, DEFAULT_RESIDUAL_TOL, DEFAULT_RESTARTS, DEFAULT_SEED};
use crate::tensor::DenseTensor;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_CERTIFIED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;
pub const EXIT_MODE: i32 = 4;
pub const EXIT_ORDER: i32 = 5;
pub const EXIT_TOO_LARGE: i32 = 6;
pub const EXIT_IO: i32 = 7;
pub const EXIT_NOT_CONVERGED: i32 = 8;
pub const EXIT_USAGE: i32 = 64;

/// Inputs above this many entries get a warning from `oracle`.
pub const ORACLE_WARN_ENTRIES: usize = 10_000;
/// Inputs above this many entries are refused by `oracle`.
pub const ORACLE_MAX_ENTRIES: usize = 100_000;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "NUCBOUND_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "nucbound",
    version,
    about = "Certified bounds on the nuclear norm of a dense tensor"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lower/upper bounds from every matrix flattening.
    Bounds {
        input: PathBuf,
        /// Certification tolerance on |‖Z_i‖_* − 1|.
        #[arg(long, default_value_t = DEFAULT_CERT_TOL)]
        tol: f64,
        /// Human-readable summary instead of JSON.
        #[arg(long)]
        pretty: bool,
    },
    /// Print the mode-m flattening as a matrix file.
    Flatten {
        input: PathBuf,
        #[arg(long)]
        mode: usize,
    },
    /// Check whether a 3-tensor's nuclear norm equals a flattening norm.
    Certify {
        input: PathBuf,
        /// Mode to test; every mode is tried in order when omitted.
        #[arg(long)]
        mode: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_CERT_TOL)]
        tol: f64,
        #[arg(long)]
        pretty: bool,
    },
    /// Independent small-scale estimates of the true nuclear norm.
    Oracle {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Largest number of rank-one terms (default: product of the two
        /// smallest dimensions).
        #[arg(long)]
        max_terms: Option<usize>,
        #[arg(long)]
        pretty: bool,
    },
}

/// What a command printed and how it exits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: i32, message: impl std::fmt::Display) -> Self {
        Self {
            code,
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
        }
    }
}

/// Applies `NUCBOUND_THREADS` to the global worker pool. Returns a warning
/// when the variable is set but unusable.
pub fn configure_threads() -> Option<String> {
    let value = std::env::var(THREADS_ENV).ok()?;
    match value.trim().parse::<usize>() {
        Ok(n) if n > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .err()
            .map(|e| format!("warning: {THREADS_ENV}: {e}\n")),
        _ => Some(format!(
            "warning: ignoring {THREADS_ENV}={value:?}, expected a positive integer\n"
        )),
    }
}

fn load(path: &PathBuf) -> Result<DenseTensor, Outcome> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Outcome::fail(EXIT_IO, format!("{}: {e}", path.display())))?;
    io::parse_tensor(&text).map_err(|e| {
        let code = match e {
            ParseError::Syntax { .. } => EXIT_PARSE,
            ParseError::NonFinite { .. } => EXIT_INVARIANT,
        };
        Outcome::fail(code, format!("{}: {e}", path.display()))
    })
}

fn check_tol(tol: f64) -> Result<(), Outcome> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Outcome::fail(
            EXIT_USAGE,
            format!("--tol must be positive and finite, got {tol}"),
        ))
    }
}

fn error_outcome(e: Error) -> Outcome {
    let code = match e {
        Error::ModeOutOfRange { .. } => EXIT_MODE,
        Error::UnsupportedOrder(_) => EXIT_ORDER,
        Error::NonFiniteEntry { .. } => EXIT_INVARIANT,
        _ => EXIT_USAGE,
    };
    Outcome::fail(code, e)
}

fn bounds_cmd(input: &PathBuf, tol: f64, pretty: bool) -> Result<Outcome, Outcome> {
    check_tol(tol)?;
    let a = load(input)?;
    let report = bounds::full_report(&a, tol).map_err(error_outcome)?;
    Ok(Outcome::ok(if pretty {
        io::pretty_report(&report)
    } else {
        io::to_json(&io::ReportDocument::from(&report))
    }))
}

fn flatten_cmd(input: &PathBuf, mode: usize) -> Result<Outcome, Outcome> {
    let a = load(input)?;
    let m = a.flatten(mode).map_err(error_outcome)?;
    let dims: Vec<String> = a.shape().iter().map(|d| d.to_string()).collect();
    let comment = format!("mode-{mode} flattening of a {} tensor", dims.join("x"));
    Ok(Outcome::ok(io::write_matrix(&m, Some(&comment))))
}

fn certify_cmd(
    input: &PathBuf,
    mode: Option<usize>,
    tol: f64,
    pretty: bool,
) -> Result<Outcome, Outcome> {
    check_tol(tol)?;
    let a = load(input)?;
    if a.order() != 3 {
        return Err(error_outcome(Error::UnsupportedOrder(a.order())));
    }
    let modes: Vec<usize> = match mode {
        Some(m) => vec![m],
        None => (1..=3).collect(),
    };
    let mut closest: Option<(usize, f64)> = None;
    for &m in &modes {
        if let Some(cert) = bounds::certify_tightness(&a, m, tol).map_err(error_outcome)? {
            let stdout = if pretty {
                io::pretty_certificate(&cert)
            } else {
                io::to_json(&io::CertifyDocument {
                    tool: io::TOOL_NAME,
                    version: io::TOOL_VERSION,
                    shape: a.shape().to_vec(),
                    tol: io::Sci(tol),
                    certified: true,
                    mode: m,
                    max_z_deviation: io::Sci(cert.max_z_deviation),
                    certificate: Some((&cert).into()),
                })
            };
            return Ok(Outcome::ok(stdout));
        }
        let analysis = bounds::analyze_mode(&a, m).map_err(error_outcome)?;
        let deviation = analysis
            .z_nuclear
            .iter()
            .map(|z| (z - 1.0).abs())
            .fold(0.0, f64::max);
        if closest.is_none_or(|(_, d)| deviation < d) {
            closest = Some((m, deviation));
        }
    }
    let (m, deviation) = closest.expect("at least one mode tried");
    let stdout = if pretty {
        format!(
            "not certified (mode {m}, max fiber deviation {})\n",
            io::format_sci(deviation)
        )
    } else {
        io::to_json(&io::CertifyDocument {
            tool: io::TOOL_NAME,
            version: io::TOOL_VERSION,
            shape: a.shape().to_vec(),
            tol: io::Sci(tol),
            certified: false,
            mode: m,
            max_z_deviation: io::Sci(deviation),
            certificate: None,
        })
    };
    Ok(Outcome {
        code: EXIT_NOT_CERTIFIED,
        stdout,
        stderr: String::new(),
    })
}

fn oracle_cmd(
    input: &PathBuf,
    restarts: usize,
    seed: u64,
    max_terms: Option<usize>,
    pretty: bool,
) -> Result<Outcome, Outcome> {
    let a = load(input)?;
    if a.len() > ORACLE_MAX_ENTRIES {
        return Err(Outcome::fail(
            EXIT_TOO_LARGE,
            format!(
                "oracle refuses tensors above {ORACLE_MAX_ENTRIES} entries (input has {})",
                a.len()
            ),
        ));
    }
    let mut stderr = String::new();
    if a.len() > ORACLE_WARN_ENTRIES {
        stderr.push_str(&format!(
            "warning: oracle is meant for small tensors; {} entries may take very long\n",
            a.len()
        ));
    }
    let mut config = OracleConfig::for_tensor(&a);
    config.restarts = restarts;
    config.seed = seed;
    if let Some(t) = max_terms {
        config.max_terms = t;
    }
    let (estimate, code) = match oracle::primal_estimate(&a, &config) {
        Ok(e) => (e, EXIT_OK),
        Err(Error::DidNotConverge { best }) => {
            stderr.push_str("warning: residual tolerance not reached; estimate is not feasible\n");
            (*best, EXIT_NOT_CONVERGED)
        }
        Err(e) => return Err(error_outcome(e)),
    };
    let spectral = (
        oracle::spectral_lower_estimate(&a, restarts.max(1), seed).map_err(error_outcome)?,
        oracle::spectral_upper_bound(&a),
    );
    let stdout = if pretty {
        io::pretty_oracle(&estimate, a.shape(), spectral)
    } else {
        io::to_json(&io::OracleDocument::new(
            a.shape(),
            &estimate,
            DEFAULT_RESIDUAL_TOL,
            spectral,
        ))
    };
    Ok(Outcome {
        code,
        stdout,
        stderr,
    })
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome::ok(text)
            };
        }
    };
    let result = match &cli.command {
        Command::Bounds { input, tol, pretty } => bounds_cmd(input, *tol, *pretty),
        Command::Flatten { input, mode } => flatten_cmd(input, *mode),
        Command::Certify {
            input,
            mode,
            tol,
            pretty,
        } => certify_cmd(input, *mode, *tol, *pretty),
        Command::Oracle {
            input,
            restarts,
            seed,
            max_terms,
            pretty,
        } => oracle_cmd(input, *restarts, *seed, *max_terms, *pretty),
    };
    result.unwrap_or_else(|e| e)
}
