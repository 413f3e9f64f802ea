//! Kernel-matrix width bounds for `k_d(x, y) = sum_{u <= d} (xy)^u` against
//! the sup-norm error of explicit approximating functions.

use rkhs_coreset::repro::figure3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>2} {:>12} {:>12} {:>12}", "d", "lambda_min", "lower bound", "achieved");
    for r in figure3()? {
        println!("{:>2} {:>12.5} {:>12.5} {:>12.5}", r.d, r.lambda_min, r.lower_bound, r.achieved_error);
    }
    Ok(())
}
