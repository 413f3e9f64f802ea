//! Ridge regression on a Frank-Wolfe coreset compared with the full sample.

use rand::Rng;
use rkhs_coreset::compress::{frank_wolfe, Coreset};
use rkhs_coreset::kernel::Kernel;
use rkhs_coreset::learn::{krr_fit, krr_predict, KrrMode};
use rkhs_coreset::points::{linspace, PointSet};
use rkhs_coreset::repro::rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut r = rng(4);
    let xs: Vec<f64> = (0..400).map(|_| r.random_range(-1.0..1.0)).collect();
    let ys: Vec<f64> = xs.iter().map(|x| x * x * x - x + 0.05 * r.random_range(-1.0..1.0)).collect();
    let points = PointSet::from_scalars(&xs)?;
    let kernel = Kernel::poly_no_const(3);
    let lambda = 1e-4;

    let full = krr_fit(&kernel, &Coreset::full(&points), &points, &ys, lambda, KrrMode::Suboptimal)?;
    let (coreset, _) = frank_wolfe(&kernel, &points, 12)?;
    let small = krr_fit(&kernel, &coreset, &points, &ys, lambda, KrrMode::MinimalNorm)?;
    println!("support: full {}  coreset {}", full.alpha.len(), small.alpha.len());

    for x in linspace(-1.0, 1.0, 5) {
        println!(
            "x = {x:>5.2}  truth {:>8.4}  full {:>8.4}  coreset {:>8.4}",
            x * x * x - x,
            krr_predict(&full, &[x])?,
            krr_predict(&small, &[x])?
        );
    }
    Ok(())
}
