use std::process::ExitCode;

use clap::Parser;
use situ::cli::{run, Cli};
use situ::config::SEED_ENV;

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or_default().trim_start_matches("error: ");
            eprintln!("error[usage]: {}", one_line(first));
            return ExitCode::from(2);
        }
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    match run(cli, env_seed.as_deref()) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            if outcome.problems.is_empty() {
                return ExitCode::SUCCESS;
            }
            for p in &outcome.problems {
                println!("{p}");
            }
            eprintln!(
                "error[invalid]: {} problem(s), first: {}",
                outcome.problems.len(),
                one_line(&outcome.problems[0])
            );
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error[{}]: {}", e.kind(), one_line(&e.to_string()));
            ExitCode::from(1)
        }
    }
}
