//! Epsilon-net baseline: snap points to grid centers and compare its size
//! and error with herding at the same budget.

use rkhs_coreset::compress::{epsnet_compress, herd};
use rkhs_coreset::kernel::Kernel;
use rkhs_coreset::repro::{rng, uniform_cube};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let points = uniform_cube(&mut rng(3), 2000, 2).with_domain_box(vec![(-1.0, 1.0), (-1.0, 1.0)])?;
    let kernel = Kernel::poly_no_const(2);
    for eps in [0.8, 0.4, 0.2, 0.1] {
        let net = epsnet_compress(&points, eps, &kernel)?;
        let budget = net.centers.len();
        let hd = herd(&kernel, &points, budget, 0)?;
        println!(
            "eps = {eps:<4} cells {:>5}  occupied {:>4}  net error {:.3e}  herding error {:.3e}",
            net.n_net,
            budget,
            net.error_sq.sqrt(),
            hd.trace.last_error_sq().sqrt()
        );
    }
    Ok(())
}
