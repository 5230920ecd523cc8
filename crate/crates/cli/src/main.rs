use std::fs;
use std::process::ExitCode;

use clap::Parser;

use pavc::{run_command, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let rep = match run_command(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let text = serde_json::to_string_pretty(&rep).expect("report serializes") + "\n";
    match &cli.report {
        Some(p) => {
            if let Err(e) = fs::write(p, &text) {
                eprintln!("error: writing {}: {e}", p.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    for c in rep.checks.iter().filter(|c| !c.pass) {
        eprintln!("FAIL {}: {}", c.name, c.detail);
    }
    if rep.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
