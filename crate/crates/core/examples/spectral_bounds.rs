//! Lower bounds on the width of the embedded hull for the polynomial kernel
//! on [-1, 1], computed through several routes.

use rkhs_coreset::kernel::Kernel;
use rkhs_coreset::points::{linspace, PointSet};
use rkhs_coreset::spectral::{
    ball_report, diam_lower_kfunctional, diam_lower_kplus, diam_lower_mercer_estimated, select_points,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kernel = Kernel::poly_no_const(2);
    let grid = PointSet::from_scalars(&linspace(-1.0, 1.0, 201))?;

    let points = select_points(&kernel.plus_constant(true), &grid, 3)?;
    let kplus = diam_lower_kplus(&kernel, &points)?;
    println!("k+ on 3 points:       lambda {:.4}  width >= {:.4}", kplus.lambda_min, kplus.diam_lower);

    let mercer = diam_lower_mercer_estimated(&kernel, &grid, false)?;
    println!("Mercer (estimated):   lambda {:.4}  width >= {:.4}", mercer.lambda_min, mercer.diam_lower);

    let pair = select_points(&kernel, &grid, 2)?;
    let kf = diam_lower_kfunctional(&kernel, &pair, &grid, 0.05, 2)?;
    println!("K-functional (t=0.05): width >= {:.4}", kf.diam_lower);

    let ball = ball_report(kplus.diam_lower, 0.1, 0.5, 2.0, 1, 2.0)?;
    println!("ball radius {:.3e} reached from n = {}", ball.delta, ball.n_threshold);
    Ok(())
}
