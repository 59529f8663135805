mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spinhom::ground_state::{AnnealSchedule, SolveOptions, DEFAULT_ENUMERATION_CAP};
use spinhom::{Execution, Rational, Spin};

#[derive(Parser, Debug)]
#[command(name = "spinhom", version, about = "Homogenized surface tensions and bulk densities of periodic spin lattices")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args, Debug)]
pub struct Global {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, env = "SPINHOM_THREADS", global = true)]
    threads: Option<usize>,
    /// Largest number of free spin groups solved by enumeration.
    #[arg(long, env = "SPINHOM_ENUM_CAP", default_value_t = DEFAULT_ENUMERATION_CAP, global = true)]
    enum_cap: usize,
    /// Largest cube side tried when looking for the coarsening side.
    #[arg(long, env = "SPINHOM_COARSENING_CAP", global = true)]
    coarsening_cap: Option<i64>,
    /// Fall back to seeded annealing on problems no exact solver accepts.
    #[arg(long, global = true)]
    anneal: Option<u64>,
    #[arg(long, env = "SPINHOM_ANNEAL_SWEEPS", default_value_t = AnnealSchedule::default().sweeps, global = true)]
    anneal_sweeps: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check every structural hypothesis of a model.
    Validate { model: Input },
    /// Periodic components of each phase and their classification.
    Components { model: Input },
    /// Surface tension cell values `f_T^j(ν)`.
    Fhom {
        model: Input,
        /// Phases to tabulate (default: all).
        #[arg(long, value_delimiter = ',')]
        phase: Vec<usize>,
        /// Integer normal, e.g. `1,0`.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        normal: Vec<i64>,
        #[arg(long = "T", value_delimiter = ',', required = true)]
        t: Vec<i64>,
    },
    /// Bulk density bounds `φ_M`, `φ̃_M` and the torus value.
    Phi {
        model: Input,
        /// Spin vector, e.g. `--z=-1,1`; repeat for several (default: all).
        #[arg(long, allow_hyphen_values = true, value_parser = parse_spins)]
        z: Vec<Vec<Spin>>,
        #[arg(long = "M", value_delimiter = ',', required = true)]
        m: Vec<i64>,
    },
    /// Discrete energy `F_ε` of a field file.
    Energy { model: Input, field: Input },
    /// Coarse-grain a field on one phase.
    Extend {
        model: Input,
        field: Input,
        #[arg(long)]
        phase: usize,
        #[arg(long = "M")]
        m: i64,
        /// Write the extended field here.
        #[arg(long)]
        field_out: Option<PathBuf>,
    },
    /// The limit functional on a target file.
    GammaEval {
        model: Input,
        target: Input,
        #[command(flatten)]
        tables: TableArgs,
    },
    /// Energies of recovery fields along a sequence of scales.
    Converge {
        model: Input,
        target: Input,
        #[arg(long, value_delimiter = ',', value_parser = parse_rational, required = true)]
        eps: Vec<Rational>,
        /// Paste cube side.
        #[arg(long = "paste-M")]
        paste_m: i64,
        #[command(flatten)]
        tables: TableArgs,
    },
    /// Run the bundled closed-form regression suite.
    Examples,
}

#[derive(Args, Debug)]
struct TableArgs {
    /// Cell sizes for the surface tensions.
    #[arg(long = "T", value_delimiter = ',', required = true)]
    t: Vec<i64>,
    /// Cube sides for the bulk density.
    #[arg(long = "M", value_delimiter = ',', required = true)]
    m: Vec<i64>,
}

/// A path that exists, with its contents.
#[derive(Clone, Debug)]
pub struct Input {
    pub path: PathBuf,
    pub text: String,
}

impl std::str::FromStr for Input {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let path = PathBuf::from(s);
        let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read {s}: {e}"))?;
        Ok(Self { path, text })
    }
}

fn parse_spins(s: &str) -> Result<Vec<Spin>, String> {
    s.split(',')
        .map(|v| {
            let n: i64 = v.trim().parse().map_err(|_| format!("bad spin {v:?}"))?;
            Spin::from_value(n).ok_or_else(|| format!("spin must be 1 or -1, got {n}"))
        })
        .collect()
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    spinhom::rational::parse(s).map_err(|e| e.to_string())
}

impl Global {
    fn execution(&self) -> Execution {
        if self.threads == Some(1) {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }

    fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            enumeration_cap: self.enum_cap,
            anneal: self.anneal.map(|seed| (seed, AnnealSchedule { sweeps: self.anneal_sweeps, ..AnnealSchedule::default() })),
            execution: self.execution(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads.filter(|&n| n > 1) {
        // read once by the global pool on first use
        std::env::set_var("RAYON_NUM_THREADS", n.to_string());
    }
    match commands::run(&cli.command, &cli.global) {
        Ok(outcome) => {
            if let Err(e) = output::emit(&outcome.report, cli.global.format, cli.global.out.as_deref()) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            if outcome.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
