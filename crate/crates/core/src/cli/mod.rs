//! The `pfrmt` command-line front end.

pub mod bench;
pub mod compute;
pub mod config;
pub mod grid;
pub mod verify;

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde_json::json;

use crate::error::{PfrmtError, Result};
use crate::kernels::EvalOptions;
use config::RunConfig;
use grid::{KernelGrid, KernelKind};
use verify::Level;

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "pfrmt", version, about = "Characteristic polynomial ratio averages for β=1 and β=4 ensembles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one configuration by the Pfaffian formulas and/or the oracles.
    Compute {
        /// JSON config file, or `-` for standard input.
        #[arg(long)]
        config: String,
        /// Overrides the config's `output` path.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the verification suite.
    Verify {
        #[arg(value_enum, default_value = "quick")]
        level: Level,
        /// Negate the even-sum prefactor (test hook for the suite itself).
        #[arg(long)]
        inject_sign_flip: bool,
        #[arg(long)]
        json: bool,
    },
    /// Evaluate a kernel on a grid of complex points and write CSV.
    KernelGrid {
        #[arg(long)]
        config: String,
        #[arg(long, value_enum)]
        kernel: KernelKind,
        /// `re,im`
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        x_from: Complex64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        x_to: Complex64,
        #[arg(long, default_value_t = 10)]
        nx: usize,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        y_from: Complex64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        y_to: Complex64,
        #[arg(long, default_value_t = 10)]
        ny: usize,
        /// CSV destination; standard output when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Time the Pfaffian path against the quadrature oracle over a sweep of sizes.
    Bench {
        #[arg(long)]
        config: String,
        /// Comma-separated sizes; defaults to 1,2,3,4 (β=1) or 1,2,3 (β=4).
        #[arg(long, value_delimiter = ',')]
        sweep: Option<Vec<usize>>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Dump the skew-orthogonal polynomial coefficients of an ensemble as CSV.
    SkewPoly {
        #[arg(long)]
        config: String,
        /// Number of polynomials (even).
        #[arg(long)]
        d: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let (re, im) = s.split_once(',').ok_or_else(|| format!("expected `re,im`, got {s:?}"))?;
    let re: f64 = re.trim().parse().map_err(|e| format!("{e}"))?;
    let im: f64 = im.trim().parse().map_err(|e| format!("{e}"))?;
    Ok(Complex64::new(re, im))
}

fn read_config(path: &str) -> Result<RunConfig> {
    let text = if path == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| PfrmtError::Config { field: "--config".into(), message: format!("{path}: {e}") })?
    };
    RunConfig::from_json(&text)
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

/// Machine-readable error object.
pub fn error_json(e: &PfrmtError) -> serde_json::Value {
    let field = match e {
        PfrmtError::Config { field, .. } => Some(field.clone()),
        _ => None,
    };
    let message = match e {
        PfrmtError::Config { message, .. } => message.clone(),
        other => other.to_string(),
    };
    json!({ "error": { "kind": e.kind(), "message": message, "field": field } })
}

pub fn exit_code(e: &PfrmtError) -> i32 {
    match e {
        PfrmtError::Config { .. } => EXIT_CONFIG,
        _ => EXIT_COMPUTE,
    }
}

/// Worker count from `PFRMT_THREADS`, falling back to the logical core count.
fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("PFRMT_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| PfrmtError::Config { field: "PFRMT_THREADS".into(), message: format!("expected a positive integer, got {v:?}") })?;
        // Fails only when a pool already exists, e.g. when called twice in one process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<i32> {
    init_threads()?;
    match cli.command {
        Command::Compute { config, output } => {
            let mut c = read_config(&config)?;
            if output.is_some() {
                c.output = output;
            }
            let r = compute::cmd_compute(&c)?;
            match &c.output {
                Some(p) => {
                    fs::write(p, r.to_json() + "\n")?;
                    print!("{}", compute::summary(&r));
                }
                None => {
                    eprint!("{}", compute::summary(&r));
                    println!("{}", r.to_json());
                }
            }
            Ok(EXIT_OK)
        }
        Command::Verify { level, inject_sign_flip, json } => {
            let opts = EvalOptions { flip_even_sum_sign: inject_sign_flip, ..Default::default() };
            let checks = verify::run_checks(level, &opts);
            if json {
                println!("{}", serde_json::to_string_pretty(&checks).expect("serializable"));
            } else {
                print!("{}", verify::table(&checks));
            }
            Ok(if checks.iter().all(|c| c.passed) { EXIT_OK } else { EXIT_VERIFY })
        }
        Command::KernelGrid { config, kernel, x_from, x_to, nx, y_from, y_to, ny, output } => {
            let c = read_config(&config)?;
            let e = compute::ensemble_of(&c)?;
            let ks = grid::kernel_set(&e, &c)?;
            let rows = grid::kernel_grid(&ks, kernel, &KernelGrid { x_from, x_to, nx, y_from, y_to, ny })?;
            grid::write_kernel_csv(&rows, open_out(output.as_deref())?)?;
            Ok(EXIT_OK)
        }
        Command::Bench { config, sweep, output } => {
            let c = read_config(&config)?;
            let sweep = sweep.unwrap_or_else(|| bench::default_sweep(c.ensemble.beta()));
            let r = bench::cmd_bench(&c, &sweep)?;
            write_text(output.as_deref(), &(serde_json::to_string_pretty(&r).expect("serializable") + "\n"))?;
            Ok(EXIT_OK)
        }
        Command::SkewPoly { config, d, output } => {
            let c = read_config(&config)?;
            let b = grid::skew_basis(&c, d)?;
            grid::write_basis_csv(&b, open_out(output.as_deref())?)?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            exit_code(&e)
        }
    }
}
