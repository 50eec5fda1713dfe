//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_UNATTAINABLE` are still evaluated and printed;
//! the target fails if any other criterion fails, or if a known-unattainable
//! one unexpectedly passes (so the list cannot go stale).

use std::process::ExitCode;

use inflow_shock::verify::{run_all, KNOWN_UNATTAINABLE};

fn main() -> ExitCode {
    let results = run_all(4000, 0);
    println!();
    for r in &results {
        println!("{}", r.line());
    }
    for (id, why) in KNOWN_UNATTAINABLE {
        println!("note: criterion {id} cannot pass as stated: {why}");
    }
    let mut ok = results.len() == 9;
    if !ok {
        println!("expected 9 criteria, got {}", results.len());
    }
    for r in &results {
        let known = KNOWN_UNATTAINABLE.iter().any(|(id, _)| *id == r.id);
        if r.passed == known {
            println!("unexpected outcome: {}", r.line());
            ok = false;
        }
    }
    println!("acceptance: {}", if ok { "ok" } else { "FAILED" });
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
