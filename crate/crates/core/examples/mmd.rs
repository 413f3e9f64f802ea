//! Two-sample MMD: exact, on coresets, and with hierarchical compression.

use rkhs_coreset::compress::frank_wolfe;
use rkhs_coreset::kernel::Kernel;
use rkhs_coreset::learn::{mmd_sq, mmd_sq_compressed, mmd_sq_hierarchical};
use rkhs_coreset::points::PointSet;
use rkhs_coreset::repro::{rng, uniform_cube};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = uniform_cube(&mut rng(5), 1500, 2);
    let shifted: Vec<Vec<f64>> = uniform_cube(&mut rng(6), 1200, 2).rows().map(|p| vec![p[0] + 0.1, p[1]]).collect();
    let b = PointSet::new(shifted)?;
    let kernel = Kernel::poly_no_const(2);

    let exact = mmd_sq(&kernel, &a, &b)?;
    println!("exact         MMD {:.5}", exact.mmd_sq.sqrt());

    let (ca, _) = frank_wolfe(&kernel, &a, 16)?;
    let (cb, _) = frank_wolfe(&kernel, &b, 16)?;
    let c = mmd_sq_compressed(&kernel, &ca, &a, &cb, &b)?;
    println!("compressed    MMD {:.5}  +- {:.2e}", c.mmd_sq.sqrt(), c.error_budget.unwrap_or(0.0));

    let h = mmd_sq_hierarchical(&kernel, &a, &b, 16)?;
    println!("hierarchical  MMD {:.5}  +- {:.2e}", h.mmd_sq.sqrt(), h.error_budget.unwrap_or(0.0));
    Ok(())
}
