//! The ten acceptance criteria, one pass/fail line each.
//!
//! Run with `cargo test -p wiener-chaos --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use wiener_chaos::verify::{criterion, Check, VerifyOptions};

const TITLES: [&str; 10] = [
    "Hermite orthogonality",
    "Wick product of Hermite polynomials",
    "truncated Itô identity and isometry",
    "truncated Stratonovich identity and trace formula",
    "fBm K1 bound",
    "operator norm bound",
    "fBm covariance from the kernel",
    "Wick SDE: closed form, Picard, second moment, sampling",
    "Monte Carlo agreement of discrete integrals",
    "basis independence",
];

/// Wall-clock limits that are part of a criterion.
fn time_limit(id: u8) -> Option<Duration> {
    match id {
        1 => Some(Duration::from_secs(1)),
        5 => Some(Duration::from_secs(10)),
        7 => Some(Duration::from_secs(30)),
        _ => None,
    }
}

fn describe(c: &Check) -> String {
    format!("{}={:.3e} (tol {:.1e})", c.name, c.value, c.tolerance)
}

#[test]
fn acceptance() {
    let opts = VerifyOptions::default();
    let start = Instant::now();
    let mut failures = Vec::new();
    for id in 1..=10u8 {
        let t0 = Instant::now();
        let checks = criterion(id, &opts).unwrap_or_else(|e| panic!("criterion {id}: {e}"));
        let elapsed = t0.elapsed();
        let in_time = time_limit(id).is_none_or(|limit| elapsed <= limit);
        let pass = in_time && checks.iter().all(|c| c.pass);
        let failing: Vec<String> = checks.iter().filter(|c| !c.pass).map(describe).collect();
        let worst = checks
            .iter()
            .max_by(|a, b| (a.value / a.tolerance.max(f64::MIN_POSITIVE)).total_cmp(&(b.value / b.tolerance.max(f64::MIN_POSITIVE))))
            .map(describe)
            .unwrap_or_default();
        println!(
            "[{}] criterion {id:>2}: {} ({} checks, {:.2} s){}",
            if pass { "PASS" } else { "FAIL" },
            TITLES[id as usize - 1],
            checks.len(),
            elapsed.as_secs_f64(),
            if pass {
                format!("; tightest {worst}")
            } else if !in_time {
                format!("; over time limit {:?}", time_limit(id).unwrap())
            } else {
                format!("; failing {}", failing.join(", "))
            }
        );
        if !pass {
            failures.push(id);
        }
    }
    println!("total {:.2} s", start.elapsed().as_secs_f64());
    assert!(failures.is_empty(), "failing criteria: {failures:?}");
}
