//! `qlde` command-line front end.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use qlde::io::{
    decomposition_to_json, read_problem, read_real_vectors, report_to_csv, report_to_json,
    sweep_to_csv,
};
use qlde::lcu::{four_unitary_decompose, pauli_decompose};
use qlde::reference::select_order;
use qlde::solver::{run_sweep, solve_with, DecompositionChoice, Method, SolveOptions};
use qlde::Error;

#[derive(Parser)]
#[command(
    name = "qlde",
    version,
    about = "Truncated-Taylor LCU solver for dx/dt = Mx + b"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file and print a report.
    Solve {
        problem: PathBuf,
        /// classical-exact, taylor-truncated, circuit-case1, circuit-case2 or circuit-experiment.
        #[arg(long, default_value = "taylor-truncated")]
        method: Method,
        /// Truncation order; defaults to the file's "k", then 4.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum, default_value_t = Mode::Pauli)]
        decomposition: Mode,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        out: Format,
        /// Register cap in qubits (amplitudes ≤ 2^max-qubits).
        #[arg(long, default_value_t = 20)]
        max_qubits: u32,
    },
    /// Select a truncation order and print the error bounds.
    Bound {
        problem: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
    },
    /// Sweep the 4-qubit experiment circuit over rotation angles.
    Demo {
        #[arg(long, default_value_t = 0.4)]
        t: f64,
        #[arg(long, default_value_t = 4)]
        k: usize,
        /// Comma-separated angles, radians or with a "pi" suffix (e.g. 0.3pi).
        #[arg(long, default_value = "0.1pi,0.2pi,0.3pi,0.4pi,0.5pi")]
        betas: String,
        /// JSON list of measured vectors, one per angle.
        #[arg(long)]
        experimental_path: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        out: Format,
    },
    /// Decompose the problem matrix into weighted unitaries.
    Decompose {
        problem: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Pauli)]
        mode: Mode,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Pauli,
    FourUnitary,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Pauli => "pauli",
            Mode::FourUnitary => "four-unitary",
        }
    }

    fn choice(self) -> DecompositionChoice {
        match self {
            Mode::Pauli => DecompositionChoice::Pauli,
            Mode::FourUnitary => DecompositionChoice::FourUnitary,
        }
    }
}

fn parse_beta(s: &str) -> Result<f64, Error> {
    let s = s.trim();
    let lower = s.to_ascii_lowercase();
    let value = if let Some(num) = lower.strip_suffix("pi").or_else(|| s.strip_suffix('π')) {
        let num = num.trim().trim_end_matches('*');
        let factor = match num {
            "" | "+" => 1.0,
            "-" => -1.0,
            _ => num.parse::<f64>().map_err(|_| bad_beta(s))?,
        };
        factor * PI
    } else {
        s.parse::<f64>().map_err(|_| bad_beta(s))?
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad_beta(s))
    }
}

fn bad_beta(s: &str) -> Error {
    Error::InvalidInput(format!(
        "bad beta '{s}': use radians or a 'pi' suffix like 0.3pi"
    ))
}

fn run(cli: Cli) -> Result<String, Error> {
    match cli.command {
        Command::Solve {
            problem,
            method,
            k,
            decomposition,
            out,
            max_qubits,
        } => {
            if max_qubits > 40 {
                return Err(Error::InvalidInput(format!(
                    "--max-qubits {max_qubits} exceeds 40"
                )));
            }
            let file = read_problem(&problem)?;
            let k = k.or(file.k).unwrap_or(4);
            let opts = SolveOptions {
                decomposition: decomposition.choice(),
                max_dim: 1usize << max_qubits,
            };
            let report = solve_with(&file.problem, k, method, &opts)?;
            Ok(match out {
                Format::Json => report_to_json(&report) + "\n",
                Format::Csv => report_to_csv(&report),
            })
        }
        Command::Bound { problem, epsilon } => {
            let file = read_problem(&problem)?;
            let (k, bounds) = select_order(&file.problem, epsilon)?;
            let doc = json!({
                "epsilon": epsilon,
                "k": k,
                "tail_bound": bounds.tail_bound,
                "jordan_bound": bounds.jordan_bound,
                "c0": bounds.c0,
                "k_from_c0": bounds.k_from_c0,
            });
            Ok(serde_json::to_string_pretty(&doc).expect("json") + "\n")
        }
        Command::Demo {
            t,
            k,
            betas,
            experimental_path,
            out,
        } => {
            let betas = betas
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(parse_beta)
                .collect::<Result<Vec<_>, _>>()?;
            let experimental = experimental_path
                .as_deref()
                .map(read_real_vectors)
                .transpose()?;
            let rows = run_sweep(t, k, &betas, experimental.as_deref())?;
            Ok(match out {
                Format::Csv => sweep_to_csv(&rows),
                Format::Json => serde_json::to_string_pretty(&rows).expect("json") + "\n",
            })
        }
        Command::Decompose { problem, mode } => {
            let file = read_problem(&problem)?;
            let m = file.problem.m();
            let dec = match mode {
                Mode::Pauli => pauli_decompose(m)?,
                Mode::FourUnitary => four_unitary_decompose(m)?,
            };
            let doc = decomposition_to_json(&dec, m, mode.name());
            Ok(serde_json::to_string_pretty(&doc).expect("json") + "\n")
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Capacity { .. } => 3,
        Error::Build(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_notation() {
        assert!((parse_beta("0.3pi").unwrap() - 0.3 * PI).abs() < 1e-15);
        assert!((parse_beta("0.3π").unwrap() - 0.3 * PI).abs() < 1e-15);
        assert!((parse_beta("pi").unwrap() - PI).abs() < 1e-15);
        assert!((parse_beta("-0.5PI").unwrap() + 0.5 * PI).abs() < 1e-15);
        assert_eq!(parse_beta("0.25").unwrap(), 0.25);
        assert_eq!(parse_beta("0").unwrap(), 0.0);
        assert!(parse_beta("abc").is_err());
        assert!(parse_beta("0.1xpi").is_err());
    }
}
