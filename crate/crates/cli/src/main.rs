use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use abmod::session::{parse_session, run_session, Settings};
use clap::{Parser, ValueEnum};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
}

/// Runs an (a,b)-module session file and prints a report.
#[derive(Parser, Debug)]
#[command(name = "abmod", version)]
struct Args {
    /// Session file; standard input when omitted.
    file: Option<PathBuf>,
    /// Default series precision for bindings.
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(1..))]
    precision: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    output: Format,
    /// Iteration cap for saturation.
    #[arg(long)]
    max_sat_iter: Option<usize>,
    /// Seed for randomized searches.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Treat validation diagnostics as errors.
    #[arg(long)]
    check: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match &args.file {
        Some(p) => std::fs::read_to_string(p),
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map(|_| s)
        }
    };
    let text = match text {
        Ok(t) => t,
        Err(e) => {
            eprintln!("abmod: cannot read input: {e}");
            return ExitCode::from(2);
        }
    };
    let session = match parse_session(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("abmod: {e}");
            return ExitCode::from(2);
        }
    };
    let settings = Settings {
        precision: args.precision as usize,
        max_sat_iter: args.max_sat_iter,
        seed: args.seed,
        check: args.check,
    };
    let report = run_session(&session, &settings);
    match args.output {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&report.to_json()).expect("report serializes")
        ),
        Format::Text => print!("{}", report.to_text()),
    }
    if report.failed() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
