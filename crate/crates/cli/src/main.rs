mod config;
mod failure;
mod output;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use maslovlab::maslov::MaslovOptions;
use maslovlab::verification::{find_suite, run_suite, suites, BatteryReport};

use config::Scenario;
use failure::Failure;
use scenario::Settings;

const SEED_VAR: &str = "MASLOVLAB_SEED";

#[derive(Parser)]
#[command(name = "maslovlab", version, about = "Maslov index and spectral flow computations")]
struct Cli {
    /// directory for the JSON report and CSV curves
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// relative rank tolerance for subspace arithmetic
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    /// absolute eigenvalue zero tolerance for spectral flow
    #[arg(long, global = true)]
    tol_zero: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario described by a JSON config.
    Run { config: PathBuf },
    /// Run a property battery (`all` runs every battery).
    Verify {
        suite: String,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn env_seed() -> Result<Option<u64>, Failure> {
    match std::env::var(SEED_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::Schema(format!("{SEED_VAR}: not an unsigned integer: {v:?}"))),
        Err(_) => Ok(None),
    }
}

fn check_tolerances(cli: &Cli) -> Result<(), Failure> {
    if let Some(r) = cli.tol_rank {
        if !(r > 0.0 && r < 1.0) {
            return Err(Failure::Schema(format!("--tol-rank: must lie in (0, 1), got {r}")));
        }
    }
    if let Some(z) = cli.tol_zero {
        if !(z.is_finite() && z > 0.0) {
            return Err(Failure::Schema(format!("--tol-zero: must be positive, got {z}")));
        }
    }
    Ok(())
}

fn run(cli: &Cli, config: &Path) -> Result<(), Failure> {
    let scenario = Scenario::load(config)?;
    let settings = Settings { rank_tol: cli.tol_rank, zero_tol: cli.tol_zero, seed: env_seed()?.unwrap_or(scenario.seed) };
    let outcome = scenario::run(&scenario, &settings)?;
    std::fs::create_dir_all(&cli.out_dir)?;
    let report = cli.out_dir.join(scenario::report_file(&scenario.name));
    std::fs::write(&report, &outcome.json)?;
    if let Some(theta) = &outcome.theta {
        output::write_theta(&cli.out_dir.join(scenario::theta_file(&scenario.name)), theta)?;
    }
    if let Some(eigen) = &outcome.eigen {
        output::write_eigen(&cli.out_dir.join(scenario::eigen_file(&scenario.name)), eigen)?;
    }
    print!("{}", outcome.json);
    eprintln!("report written to {}", report.display());
    outcome.violation.map_or(Ok(()), Err)
}

fn verify(cli: &Cli, name: &str, trials: Option<usize>, seed: Option<u64>) -> Result<(), Failure> {
    let chosen: Vec<_> = if name == "all" {
        suites().iter().collect()
    } else {
        let known = || suites().iter().map(|s| s.name).collect::<Vec<_>>().join(", ");
        vec![find_suite(name).ok_or_else(|| Failure::Schema(format!("unknown suite `{name}` (known: all, {})", known())))?]
    };
    let seed = match seed {
        Some(s) => s,
        None => env_seed()?.unwrap_or(1),
    };
    let mut opts = MaslovOptions::default();
    if let Some(r) = cli.tol_rank {
        opts.rank_tol = r;
    }
    let reports: Vec<BatteryReport> =
        chosen.iter().map(|s| run_suite(s, trials.unwrap_or(s.default_trials), seed, &opts)).collect();
    let width = reports.iter().map(|r| r.identity.len()).max().unwrap_or(8).max(8);
    println!("{:<16} {:<width$} {:>7} {:>9}", "suite", "identity", "trials", "failures");
    for r in &reports {
        println!("{:<16} {:<width$} {:>7} {:>9}", r.suite, r.identity, r.trials, r.failures);
    }
    for r in &reports {
        if let Some(f) = &r.first_failure {
            println!("{}: first failure at {f}", r.suite);
        }
    }
    match reports.iter().find(|r| !r.passed()) {
        Some(r) => Err(Failure::invariant(r.identity.clone(), format!("{} of {} trials failed", r.failures, r.trials))),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = check_tolerances(&cli).and_then(|_| match &cli.command {
        Command::Run { config } => run(&cli, config),
        Command::Verify { suite, trials, seed } => verify(&cli, suite, *trials, *seed),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.exit_code())
        }
    }
}
