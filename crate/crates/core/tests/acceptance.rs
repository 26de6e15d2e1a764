//! Runs every acceptance check and prints one line per check.

use std::process::ExitCode;

use clickbounds::acceptance::run_all;

fn main() -> ExitCode {
    let threads = std::env::var("CLICKBOUNDS_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0);
    let outcomes = run_all(threads, 0, |o| println!("{o}"));
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("acceptance: {} passed, {failed} failed", outcomes.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
