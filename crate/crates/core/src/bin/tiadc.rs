use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tiadc::experiment::{self, ConfigIssue, ExperimentConfig, Scenario};

#[derive(Parser)]
#[command(
    name = "tiadc",
    version,
    about = "Time-interleaved ADC simulator and calibration experiments"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand, Clone)]
enum Verb {
    /// Simulate and analyse one record (SPECTRUM or BANDWIDTH_DEMO).
    Simulate(Args),
    /// Identify channel mismatches against the reference channel.
    Identify(Args),
    /// Identify, correct, and compare spectra before and after.
    Calibrate(Args),
    /// Monte-Carlo SINAD versus mismatch spread.
    Sweep(Args),
    /// Check a configuration and print it with defaults filled in.
    Validate(Args),
}

#[derive(clap::Args, Clone)]
struct Args {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

fn report_issues(issues: &[ConfigIssue]) -> ExitCode {
    for issue in issues {
        eprintln!("config error: {issue}");
    }
    ExitCode::from(EXIT_CONFIG)
}

fn load(args: &Args, verb: &Verb) -> Result<ExperimentConfig, ExitCode> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| {
            eprintln!("config error: cannot read {}: {e}", path.display());
            ExitCode::from(EXIT_CONFIG)
        })?,
        None => String::new(),
    };
    let mut cfg = experiment::validate(&text).map_err(|i| report_issues(&i))?;
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(dir) = &args.out_dir {
        cfg.output_dir = dir.to_string_lossy().into_owned();
    }
    let scenario = match verb {
        Verb::Simulate(_) => match cfg.scenario {
            Scenario::BandwidthDemo => Scenario::BandwidthDemo,
            _ => Scenario::Spectrum,
        },
        Verb::Identify(_) => Scenario::Identify,
        Verb::Calibrate(_) => Scenario::Calibrate,
        Verb::Sweep(_) => Scenario::Sweep,
        Verb::Validate(_) => cfg.scenario,
    };
    experiment::with_scenario(cfg, scenario).map_err(|i| report_issues(&i))
}

fn run(verb: Verb) -> ExitCode {
    let args = match &verb {
        Verb::Simulate(a)
        | Verb::Identify(a)
        | Verb::Calibrate(a)
        | Verb::Sweep(a)
        | Verb::Validate(a) => a,
    };
    let cfg = match load(args, &verb) {
        Ok(cfg) => cfg,
        Err(code) => return code,
    };
    if let Verb::Validate(_) = verb {
        println!("{}", cfg.to_json());
        return ExitCode::SUCCESS;
    }

    let result = match experiment::execute(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    };
    let artifacts = experiment::render(&result);
    let dir = PathBuf::from(&cfg.output_dir);
    let files = match artifacts.write_to(&dir) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: writing {}: {e}", dir.display());
            return ExitCode::from(EXIT_RUNTIME);
        }
    };

    match args.format {
        Some(Format::Json) => print!("{}", artifacts.report_json),
        Some(Format::Csv) => print!(
            "{}",
            artifacts
                .sweep_csv
                .as_ref()
                .unwrap_or(&artifacts.spectrum_csv)
        ),
        None => {
            let s = result.output_spectrum();
            println!(
                "SINAD {:.2} dB  SFDR {:.2} dB  ENOB {:.2} bits  floor {:.2} dBc",
                s.sinad_db, s.sfdr_db, s.enob_bits, s.noise_floor_dbc
            );
            if let Some(points) = &result.sweep {
                for p in points {
                    println!(
                        "sigma {:<10} uncompensated {:.2} dB  compensated {:.2} dB",
                        p.sigma,
                        p.aggregate_sinad_db_uncompensated,
                        p.aggregate_sinad_db_compensated
                    );
                }
            }
            if !result.excluded.is_empty() {
                println!("excluded trials: {}", result.excluded.len());
            }
            for f in files {
                println!("wrote {}", f.display());
            }
        }
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    run(cli.verb)
}
