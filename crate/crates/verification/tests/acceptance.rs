//! Runs every acceptance criterion and prints one PASS/FAIL line each.
//!
//! Optional arguments select criteria by number:
//! `cargo test -p l96-verification --test acceptance -- 3 7`.

use std::process::ExitCode;
use std::time::Instant;

use l96_verification::*;

fn main() -> ExitCode {
    let picked: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wants = |id: u32| picked.is_empty() || picked.contains(&id);
    let needs_scan = [8, 9, 10, 12].iter().any(|&id| wants(id));
    let scan = if needs_scan { Scan::compute() } else { Err(l96::Error::Precondition("scan not requested".into())) };

    let checks: [(u32, &dyn Fn() -> Verdict); 13] = [
        (1, &cap_reproduction),
        (2, &generation_table),
        (3, &shift_invariance),
        (4, &standard_generators),
        (5, &structural_identities),
        (6, &determinant_rate_check),
        (7, &eigenvalue_certificate),
        (8, &|| estimator_coherence(&scan)),
        (9, &|| exponent_sign_structure(&scan)),
        (10, &|| moment_exponent(&scan)),
        (11, &hormander_rank),
        (12, &|| phenomenology(&scan)),
        (13, &determinism),
    ];
    let mut verdicts = Vec::new();
    for (id, check) in checks.iter().filter(|(id, _)| wants(*id)) {
        let start = Instant::now();
        let v = check();
        assert_eq!(v.id, *id);
        println!("{}  ({:.1} s)", v.line(), start.elapsed().as_secs_f64());
        for d in &v.details {
            println!("        {d}");
        }
        verdicts.push(v);
    }
    println!();
    println!("acceptance summary:");
    for v in &verdicts {
        println!("{}", v.line());
    }
    let failed = verdicts.iter().filter(|v| !v.pass).count();
    println!("{} passed, {failed} failed", verdicts.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
