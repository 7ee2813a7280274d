use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use volflux_cli::{list_builtins, run_scenario, ConfigError, Overrides, Scenario, Suite};

#[derive(Debug, Parser)]
#[command(name = "volflux", version, about = "Verify flux and fundamental-group averaging on flat surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run verification suites and write reports.
    Run(RunArgs),
    /// List shipped surfaces, curve systems and suites.
    List,
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// Scenario JSON file. Without it all defaults apply.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Comma-separated suite names.
    #[arg(long, value_delimiter = ',')]
    suite: Vec<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory for report.json and the CSV files.
    #[arg(long, default_value = "volflux-out")]
    out: PathBuf,
    /// Multiplies every statistical tolerance.
    #[arg(long)]
    tolerance_scale: Option<f64>,
}

fn overrides(args: &RunArgs) -> Result<Overrides, ConfigError> {
    let suites = if args.suite.is_empty() {
        None
    } else {
        Some(
            args.suite
                .iter()
                .map(|s| Suite::parse(s.trim()).ok_or_else(|| ConfigError::Option(format!("unknown suite `{s}`"))))
                .collect::<Result<Vec<_>, _>>()?,
        )
    };
    Ok(Overrides {
        suites,
        samples: args.samples,
        grid: args.grid,
        seed: args.seed,
        tolerance_scale: args.tolerance_scale,
    })
}

fn run(args: &RunArgs) -> Result<bool, ConfigError> {
    let ov = overrides(args)?;
    let report = match &args.scenario {
        Some(path) => run_scenario(path, &ov)?,
        None => {
            let mut sc = Scenario::default();
            ov.apply(&mut sc);
            volflux_cli::run(&sc)?
        }
    };
    print!("{}", report.summary());
    for t in &report.timings {
        println!("{:<16} {:.2}s", t.suite, t.seconds);
    }
    report
        .write(&args.out)
        .map_err(|e| ConfigError::Io { path: args.out.display().to_string(), message: e.to_string() })?;
    Ok(report.aggregate_pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            print!("{}", list_builtins());
            ExitCode::SUCCESS
        }
        Command::Run(args) => {
            if let Some(n) = args.workers {
                if n == 0 || rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
                    eprintln!("error: invalid option: cannot start {n} workers");
                    return ExitCode::from(2);
                }
            }
            match run(&args) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::from(1),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
