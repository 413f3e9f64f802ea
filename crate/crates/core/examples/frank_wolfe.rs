//! Frank-Wolfe with line search versus herding on the same sample.

use rkhs_coreset::compress::{frank_wolfe, herd};
use rkhs_coreset::kernel::Kernel;
use rkhs_coreset::repro::{rng, uniform_circle};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let points = uniform_circle(&mut rng(2), 1000);
    let kernel = Kernel::poly_no_const(4);
    let (coreset, fw) = frank_wolfe(&kernel, &points, 128)?;
    let hd = herd(&kernel, &points, 128, 0)?;

    println!("{:>5} {:>12} {:>12}", "t", "herding", "frank-wolfe");
    for t in [1, 2, 4, 8, 16, 32, 64, 128] {
        let e = |s: &rkhs_coreset::compress::CompressionTrace| s.steps[t - 1].error_sq.sqrt();
        println!("{t:>5} {:>12.3e} {:>12.3e}", e(&hd.trace), e(&fw));
    }
    let merged = coreset.merged(1e-12);
    println!("Frank-Wolfe support: {} points", merged.len());
    Ok(())
}
