//! Runs every reproduction case and prints one line per case.

use rkhs_coreset::repro;

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let mut failed = 0;
    for name in repro::CASES {
        match repro::run_case(name, seed) {
            Ok(r) => {
                failed += usize::from(!r.passed);
                println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.summary);
            }
            Err(e) => {
                failed += 1;
                println!("ERROR {name}: {e}");
            }
        }
    }
    std::process::exit(i32::from(failed > 0));
}
