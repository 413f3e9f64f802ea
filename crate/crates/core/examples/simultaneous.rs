//! One coreset for both the covariance and the label-weighted mean, using the
//! direct-sum kernel on `(y, x)` pairs.

use rand::Rng;
use rkhs_coreset::compress::error_sq;
use rkhs_coreset::kernel::Kernel;
use rkhs_coreset::learn::{simultaneous_coreset, simultaneous_kernel, Algo};
use rkhs_coreset::points::PointSet;
use rkhs_coreset::repro::rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut r = rng(7);
    let xs: Vec<f64> = (0..300).map(|_| r.random_range(-1.0..1.0)).collect();
    let ys: Vec<f64> = xs.iter().map(|x| (3.0 * x).sin()).collect();
    let points = PointSet::from_scalars(&xs)?.with_labels(ys)?;
    let kernel = Kernel::poly_no_const(2);
    let joint = simultaneous_kernel(&kernel, false);
    let aug = points.augmented()?;

    for algo in [Algo::Herd, Algo::FrankWolfe] {
        let (c, _) = simultaneous_coreset(&kernel, &points, 24, algo, false)?;
        let merged = c.merged(1e-12);
        println!("{algo:?}: {} points, joint error {:.3e}", merged.len(), error_sq(&joint, &merged, &aug)?.sqrt());
    }
    Ok(())
}
