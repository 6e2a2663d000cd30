//! Command-line front end: run experiment sweeps from a TOML config, verify
//! suites with terse pass/fail output, and list the model catalog.
//!
//! Exit codes: 0 all checks passed, 1 some slack violated, 2 configuration
//! error, 3 I/O error.

mod config;
mod report;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::load_config;
use report::OutputFormat;

#[derive(Parser)]
#[command(
    name = "lattherm",
    version,
    about = "Thermal-chain entropy experiments and inequality verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured sweep and emit result records.
    Run {
        config: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (defaults to the rayon heuristic).
        #[arg(long)]
        threads: Option<usize>,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Display entropies in bits instead of nats (output rescale only).
        #[arg(long)]
        bits: bool,
    },
    /// Run the suites and print one terse pass/fail line per record.
    Verify {
        config: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List the model catalog and its conventions.
    Models,
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(f),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            format,
            out,
            threads,
            seed,
            bits,
        } => {
            let mut cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(2);
                }
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let records = with_threads(threads, || runner::run(&cfg));
            let all_pass = records.iter().all(|r| r.pass);
            let display = if bits {
                report::rescale_to_bits(&records)
            } else {
                records
            };
            let format = match format {
                Format::Csv => OutputFormat::Csv,
                Format::Json => OutputFormat::Json,
            };
            let write_result = match &out {
                Some(path) => {
                    std::fs::File::create(path).and_then(|f| report::emit(&display, format, f))
                }
                None => report::emit(&display, format, std::io::stdout().lock()),
            };
            if let Err(e) = write_result {
                eprintln!("cannot write output: {e}");
                return ExitCode::from(3);
            }
            ExitCode::from(if all_pass { 0 } else { 1 })
        }
        Command::Verify {
            config,
            threads,
            seed,
        } => {
            let mut cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(2);
                }
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let records = with_threads(threads, || runner::run(&cfg));
            for line in runner::terse_lines(&records) {
                println!("{line}");
            }
            let failed = records.iter().filter(|r| !r.pass).count();
            println!("{} records, {} failed", records.len(), failed);
            ExitCode::from(if failed == 0 { 0 } else { 1 })
        }
        Command::Models => {
            println!("model catalog (translation-invariant, range 1, open boundaries):");
            println!(
                "  tfim    spin     H = -J Σ Z_i Z_(i+1) - g Σ X_i                params: j, g"
            );
            println!("  xxz     spin     H = Jxy Σ (X X + Y Y)/4 + Jz Σ Z Z/4 - h Σ Z/2  params: jxy, jz, h");
            println!("  kitaev  fermion  H = Σ [-t(c†c + h.c.) + Δ(cc + h.c.) - μ(n - 1/2)]  params: t, delta, mu");
            println!();
            println!("regions: half | central-k | prefix-k | sites:a,b,c");
            println!("suites:  area_law lts gibbs_condition halves_series donald pinsker ssa ground_state gaussian_scan dynamics");
            ExitCode::from(0)
        }
    }
}
