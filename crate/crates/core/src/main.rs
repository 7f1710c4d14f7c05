use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ktwb::calc_var::TheorySpec;
use ktwb::cli::{emit_report, parse_lattice, parse_theory, run_pipeline, Format, Options};
use ktwb::theories;

/// Reduced phase space workbench for Lagrangian field theories.
#[derive(Debug, Parser)]
#[command(name = "ktwb", version)]
struct Cli {
    #[command(subcommand)]
    mode: Mode,
}

#[derive(Debug, Subcommand)]
enum Mode {
    /// Symbolic derivation only, plus any checks asked for.
    Derive(Args),
    /// Derivation, checks and comparison with the stored goldens.
    Check(Args),
}

#[derive(Debug, clap::Args)]
struct Args {
    /// Built-in theory name or path to a theory file.
    theory: String,
    /// Lattice size, e.g. 16x16x16.
    #[arg(long, value_parser = |s: &str| parse_lattice(s).map(Dims))]
    lattice: Option<Dims>,
    /// Number of pointwise samples for the coframe checks.
    #[arg(long = "point-checks")]
    point_checks: Option<usize>,
    /// Seed for sampling; KT_SEED takes precedence.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tolerance for sampled brackets.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Plain)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Debug)]
struct Dims(Vec<usize>);

const PARSE_ERROR: u8 = 1;
const CHECK_FAILURE: u8 = 2;
const INTERNAL_ERROR: u8 = 3;

fn load(theory: &str) -> Result<TheorySpec, String> {
    if theories::NAMES.contains(&theory) {
        return theories::builtin(theory).map_err(|e| e.to_string());
    }
    let text = std::fs::read_to_string(theory).map_err(|e| format!("{theory}: {e}"))?;
    parse_theory(&text).map_err(|e| format!("{theory}: {e}"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { PARSE_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (args, check) = match cli.mode {
        Mode::Derive(a) => (a, false),
        Mode::Check(a) => (a, true),
    };
    let seed = match std::env::var("KT_SEED") {
        Ok(s) => match s.trim().parse() {
            Ok(v) => v,
            Err(_) => {
                eprintln!("error: KT_SEED `{s}` is not an unsigned integer");
                return ExitCode::from(PARSE_ERROR);
            }
        },
        Err(_) => args.seed,
    };
    let spec = match load(&args.theory) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(PARSE_ERROR);
        }
    };
    let has_golden = theories::golden_source(&spec.name).is_some();
    let default_points = if check && !theories::kernel_targets(&spec.name).is_empty() { 20 } else { 0 };
    let opts = Options {
        lattice: args.lattice.map(|d| d.0),
        run_lattice: check && has_golden,
        point_checks: args.point_checks.unwrap_or(default_points),
        seed,
        tol: args.tol,
        golden: check,
    };
    let report = match run_pipeline(&spec, &opts) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(INTERNAL_ERROR);
        }
    };
    let bytes = emit_report(&report, args.format);
    let written = match &args.out {
        Some(p) => std::fs::write(p, &bytes).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes).map_err(|e| e.to_string())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(INTERNAL_ERROR);
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(CHECK_FAILURE)
    }
}
