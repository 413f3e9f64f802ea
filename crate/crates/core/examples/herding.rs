//! Kernel herding on a uniform sample of the square.

use rkhs_coreset::compress::{error_sq, herd};
use rkhs_coreset::kernel::Kernel;
use rkhs_coreset::repro::{rng, uniform_cube};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let points = uniform_cube(&mut rng(1), 500, 2);
    let kernel = Kernel::poly_no_const(3);
    let run = herd(&kernel, &points, 64, 0)?;

    for s in run.trace.steps.iter().filter(|s| s.t.is_power_of_two()) {
        println!("t = {:3}  error = {:.3e}  t * error = {:.4}", s.t, s.error_sq.sqrt(), s.t as f64 * s.error_sq.sqrt());
    }
    let merged = run.coreset.merged(0.0);
    println!("{} distinct points, final error {:.3e}", merged.len(), error_sq(&kernel, &merged, &points)?.sqrt());
    Ok(())
}
