//! Herding on the explicit construction where `||w_t||` is unbounded.

use rkhs_coreset::counterexample::{divergence_check, figure2_data, run, verify_invariants, Construction};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cons = Construction::new(40)?;
    let state = run(&cons, 250_000)?;
    let inv = verify_invariants(&state, &cons);
    let div = divergence_check(&state);
    println!("C = {}, N_2 = {}", cons.c, cons.big_n(2));
    println!("invariant violations {:?}, a_n reached up to n = {}", inv.violations, inv.horizon_n);
    println!("max ||w_t|| = {:.4}, last record at t = {}", div.max_norm, div.last_record_t);

    for row in figure2_data(&state, &cons, &[10, 20])?.iter().filter(|r| r.n % 3 == 0) {
        println!("m = {:>2} n = {:>2}  |<e_n, w>| = {:.3e}  lower {:.3e}", row.m, row.n, row.abs_coef, row.lower_bound);
    }
    Ok(())
}
