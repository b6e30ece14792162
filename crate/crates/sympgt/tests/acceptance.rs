//! One line per acceptance criterion. Exits nonzero if a hard criterion fails
//! that is not listed in `KNOWN_FAILURES`, or if a listed one starts passing.

use std::process::ExitCode;

use sympgt::verify::{run_all, Scale};

/// Criteria whose failure is analysed in the project notes; they stay visible here.
const KNOWN_FAILURES: &[(&str, &str)] = &[
    ("6a", "P(·;q,t0) equals the kernel exactly for every t0, so there is no linear decay"),
    ("13a", "from its definition Φ(2) = 2^λ·2K_{2λ}(2√2 e^{-x/2}); the stated Bessel argument and prefactor differ"),
];

fn main() -> ExitCode {
    let scale = match std::env::var("SYMPGT_ACCEPTANCE").as_deref() {
        Ok("quick") => Scale::Quick,
        _ => Scale::Full,
    };
    println!("acceptance suite ({scale:?})");
    let outcomes = run_all(scale);
    let mut unexpected = Vec::new();
    for o in &outcomes {
        let known = KNOWN_FAILURES.iter().find(|(id, _)| *id == o.id);
        match known {
            Some((_, why)) if !o.passed() => println!("{o}\n       known failure: {why}"),
            Some(_) => {
                println!("{o}\n       listed as a known failure but passed");
                unexpected.push(o.id);
            }
            None => {
                println!("{o}");
                if o.hard && !o.passed() {
                    unexpected.push(o.id);
                }
            }
        }
    }
    let hard = outcomes.iter().filter(|o| o.hard).count();
    let passed = outcomes.iter().filter(|o| o.hard && o.passed()).count();
    println!("hard criteria passed: {passed}/{hard}; known failures: {}", KNOWN_FAILURES.len());
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected results: {unexpected:?}");
        ExitCode::FAILURE
    }
}
