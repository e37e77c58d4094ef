use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qframe_cli::{config, run, Mode, Overrides, EXIT_PASS, EXIT_VIOLATION};

/// Run a reference-frame experiment described by a JSON config.
#[derive(Parser, Debug)]
#[command(name = "qframe", version)]
struct Args {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// converge, conserve, thermo or battery; overrides `mode` in the config.
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long, short)]
    verbose: bool,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            // help and version are not errors
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let overrides = Overrides {
        mode: args.mode,
        seed: args.seed,
        out: args.out,
    };
    let result = config::load(&args.config, &overrides).and_then(|c| run(&c));
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if args.verbose {
        for line in &outcome.details {
            eprintln!("{line}");
        }
        for f in &outcome.files {
            eprintln!("wrote {}", f.display());
        }
    }
    for line in &outcome.summary {
        println!("{line}");
    }
    if outcome.passed() {
        ExitCode::from(EXIT_PASS as u8)
    } else {
        for v in &outcome.violations {
            eprintln!("violation: {v}");
        }
        ExitCode::from(EXIT_VIOLATION as u8)
    }
}
