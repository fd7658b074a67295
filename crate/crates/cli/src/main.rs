use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mstruct_cli::commands::{self, emit, Options};
use mstruct_cli::{exit_code, verify, Env};
use mstruct_core::group::DEFAULT_BUDGET;
use mstruct_core::manhattan::CurveMethod;
use mstruct_core::{Error, Result};

#[derive(Parser)]
#[command(name = "mstruct", version, about = "Metric structures on free groups")]
struct Cli {
    /// JSON config with the group, providers and tasks.
    #[arg(long, short, global = true, default_value = "configs/f2.json")]
    config: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Output file (directory for `verify` and `tasks`); stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    max_length: Option<usize>,
    #[arg(long)]
    radius: Option<usize>,
    /// Largest ball (in elements) any enumeration may touch.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
}

#[derive(Args, Clone)]
struct PairArgs {
    /// Two provider names, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pair: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Stable translation lengths of every class up to --max-length.
    Ell {
        #[arg(long)]
        provider: String,
        #[command(flatten)]
        common: Common,
    },
    /// Dilation estimate Dil(A, B).
    Dil {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Symmetrized distance between two structures.
    Delta {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Manhattan curve of the pair `dStar,d` as CSV.
    Theta {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[arg(long, default_value = "exact")]
        method: String,
        #[command(flatten)]
        common: Common,
    },
    /// Arc-length samples of the geodesic through `dStar,d` as CSV.
    Geodesic {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Boundary limits of the geodesic through `dStar,d`.
    Boundary {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Transversality report for a boundary pair `lInf,lMinusInf`.
    Transversal {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Strongly Markov structure analysis (shortlex if no structure given).
    Automaton {
        #[arg(long)]
        structure: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the verification battery.
    Verify {
        #[arg(long, default_value = "core")]
        suite: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run every task listed in the config.
    Tasks {
        #[command(flatten)]
        common: Common,
    },
}

fn options(common: &Common) -> Options {
    Options { max_length: common.max_length, radius: common.radius, budget: common.budget, ..Options::default() }
}

fn two(pair: &PairArgs) -> Result<(&str, &str)> {
    match &pair.pair[..] {
        [a, b] => Ok((a, b)),
        _ => Err(Error::InvalidInput("--pair takes exactly two provider names".into())),
    }
}

fn run(cli: Cli) -> Result<i32> {
    if let Command::Verify { suite, common } = &cli.command {
        if suite != "core" {
            return Err(Error::InvalidInput(format!("unknown suite `{suite}`")));
        }
        // The config must still load; the battery uses its own fixtures.
        Env::load(&cli.config)?;
        let run = verify::core_suite()?;
        print!("{}", verify::summary(&run.report));
        if let Some(dir) = &common.out {
            for (name, text) in &run.files {
                emit(Some(&dir.join(name)), text)?;
            }
        }
        return Ok(if run.report.passed { 0 } else { 1 });
    }
    let env = Env::load(&cli.config)?;
    let (text, out) = match &cli.command {
        Command::Ell { provider, common } => (commands::ell(&env, provider, &options(common))?, &common.out),
        Command::Dil { pair, common } => {
            let (a, b) = two(pair)?;
            (commands::dil(&env, a, b, &options(common))?, &common.out)
        }
        Command::Delta { pair, common } => {
            let (a, b) = two(pair)?;
            (commands::delta(&env, a, b, &options(common))?, &common.out)
        }
        Command::Theta { pair, grid, method, common } => {
            let (a, b) = two(pair)?;
            let opts = Options { grid: grid.clone(), method: method.parse::<CurveMethod>()?, ..options(common) };
            (commands::theta(&env, a, b, &opts)?, &common.out)
        }
        Command::Geodesic { pair, grid, common } => {
            let (a, b) = two(pair)?;
            let opts = Options { grid: grid.clone(), ..options(common) };
            (commands::geodesic(&env, a, b, &opts)?, &common.out)
        }
        Command::Boundary { pair, common } => {
            let (a, b) = two(pair)?;
            (commands::boundary(&env, a, b, &options(common))?, &common.out)
        }
        Command::Transversal { pair, common } => {
            let (a, b) = two(pair)?;
            (commands::transversal(&env, a, b, &options(common))?, &common.out)
        }
        Command::Automaton { structure, common } => {
            let opts = Options { structure: structure.clone(), ..options(common) };
            (commands::automaton(&env, &opts)?, &common.out)
        }
        Command::Tasks { common } => {
            let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("."));
            for name in commands::run_all_tasks(&env, &dir)? {
                println!("{}", dir.join(name).display());
            }
            return Ok(0);
        }
        Command::Verify { .. } => unreachable!("handled above"),
    };
    emit(out.as_deref(), &text)?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
