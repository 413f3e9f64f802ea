//! Lower bounds on the width of the embedded convex hull, ball radii, and
//! uniform deviation bounds.

use crate::error::{Error, Result};
use crate::kernel::{gram, GramMatrix, Kernel};
use crate::linalg;
use crate::points::PointSet;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use std::collections::VecDeque;
use std::f64::consts::PI;

/// Default relative Rayleigh-quotient tolerance for [`smallest_eig`].
pub const EIG_TOL: f64 = 1e-10;
/// Default iteration cap for [`smallest_eig`].
pub const EIG_MAX_ITER: usize = 100_000;
/// Smallest eigenvalues below this fraction of the largest count as zero.
pub const RANK_RTOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundVariant {
    KPlus,
    KMinus,
    MercerSupplied,
    MercerEstimated,
    KFunctional,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub lambda_min: f64,
    pub d_used: usize,
    pub diam_lower: f64,
    pub bound_variant: BoundVariant,
    pub notes: String,
    /// True when an eigenvalue was estimated from a grid rather than supplied.
    pub estimated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallReport {
    pub b: f64,
    pub delta: f64,
    pub n_threshold: u64,
    pub q: f64,
    pub c_density: f64,
    #[serde(rename = "L")]
    pub lipschitz: f64,
    pub l_dim: usize,
}

/// Largest eigenvalue of a symmetric PSD matrix by power iteration on a
/// small block with a Rayleigh–Ritz step.
///
/// Stops once the Ritz residual, or the Ritz-value change extrapolated with
/// the observed contraction rate, falls below `tol` relative to the estimate.
pub fn dominant_eig(m: &DMatrix<f64>, tol: f64, max_iter: usize) -> Result<f64> {
    block_power(m, tol, max_iter, Extreme::Largest, f64::abs)
}

/// Smallest eigenvalue of a symmetric PSD matrix by two-phase power
/// iteration: first the top eigenvalue `l1` of `K`, then the most negative
/// eigenvalue of `K - l1 I`.
///
/// Both phases iterate a block of up to [`EIG_BLOCK`] vectors with a
/// Rayleigh–Ritz step, so that clusters at either end of the spectrum do not
/// stall convergence.
pub fn smallest_eig(gram: &GramMatrix, tol: f64, max_iter: usize) -> Result<f64> {
    let k = &gram.entries;
    if !(tol > 0.0) {
        return Err(Error::Precondition("tol must be positive".into()));
    }
    if k.nrows() != k.ncols() {
        return Err(Error::Invalid("matrix must be square".into()));
    }
    let l1 = dominant_eig(k, tol.sqrt().max(tol), max_iter)?;
    let shifted = k - DMatrix::identity(k.nrows(), k.nrows()) * l1;
    let mu = block_power(&shifted, tol, max_iter, Extreme::Smallest, |th| (l1 + th).abs().max(1e-6 * l1.abs()))?;
    Ok(l1 + mu.min(0.0))
}

/// Block size of the second phase of [`smallest_eig`].
pub const EIG_BLOCK: usize = 8;

#[derive(Clone, Copy)]
enum Extreme {
    Largest,
    Smallest,
}

/// Largest or smallest Ritz value of orthogonal iteration on a semidefinite
/// `m`. The block starts from the all-ones vector plus seeded random columns,
/// so eigenvectors orthogonal to the all-ones vector are not missed. Stops on
/// a small Ritz residual, on Ritz-value stagnation, or when the change
/// extrapolated with the geometric-mean contraction rate over the last
/// `RATE_WINDOW` steps falls below `tol * scale`.
fn block_power(m: &DMatrix<f64>, tol: f64, max_iter: usize, which: Extreme, scale: impl Fn(f64) -> f64) -> Result<f64> {
    const RATE_WINDOW: usize = 64;
    let n = m.nrows();
    if n == 0 {
        return Err(Error::Invalid("empty matrix".into()));
    }
    let b = EIG_BLOCK.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v = DMatrix::<f64>::from_fn(n, b, |_, j| {
        let x: f64 = StandardNormal.sample(&mut rng);
        if j == 0 { 1.0 } else { x }
    });
    v = v.qr().q();
    let mut prev: Option<f64> = None;
    let mut deltas: VecDeque<f64> = VecDeque::with_capacity(RATE_WINDOW + 1);
    let mut theta = 0.0;
    for _ in 0..max_iter {
        let w = m * &v;
        let h = v.transpose() * &w;
        let h = (&h + h.transpose()) * 0.5;
        let eig = h.symmetric_eigen();
        let better = |a: f64, b: f64| match which {
            Extreme::Largest => a > b,
            Extreme::Smallest => a < b,
        };
        let (j, th) = eig
            .eigenvalues
            .iter()
            .cloned()
            .enumerate()
            .fold((0, eig.eigenvalues[0]), |best, cur| if better(cur.1, best.1) { cur } else { best });
        theta = th;
        let y = eig.eigenvectors.column(j);
        let target = tol * scale(theta).max(f64::MIN_POSITIVE);
        let residual = (&w * y - &v * y * theta).norm();
        if residual <= target {
            return Ok(theta);
        }
        if w.norm() <= 1e-300 {
            return Ok(0.0);
        }
        if let Some(p) = prev {
            let delta = (theta - p).abs();
            if delta <= 4.0 * f64::EPSILON * theta.abs() {
                return Ok(theta);
            }
            if deltas.len() == RATE_WINDOW + 1 {
                deltas.pop_front();
            }
            deltas.push_back(delta);
            if deltas.len() == RATE_WINDOW + 1 {
                let rate = (delta / deltas[0]).powf(1.0 / RATE_WINDOW as f64);
                if rate < 1.0 && delta / (1.0 - rate) <= target {
                    return Ok(theta);
                }
            }
        }
        prev = Some(theta);
        let q = w.qr().q();
        // Rank loss in the block (for instance a zero matrix) leaves columns
        // that QR cannot orthonormalize; keep the previous block then.
        if q.iter().all(|x| x.is_finite()) {
            v = q;
        }
    }
    Err(Error::Convergence { iterations: max_iter, last: theta })
}

fn full_rank_min_eig(g: &GramMatrix) -> Result<f64> {
    let lmax = dominant_eig(&g.entries, EIG_TOL, EIG_MAX_ITER)?;
    let lmin = smallest_eig(g, EIG_TOL, EIG_MAX_ITER)?;
    if !(lmax > 0.0) || lmin <= RANK_RTOL * lmax {
        return Err(Error::RankDeficient(format!(
            "smallest eigenvalue {lmin:e} of a {}x{} kernel matrix",
            g.n(),
            g.n()
        )));
    }
    Ok(lmin)
}

/// `(lambda_d / d)^{1/2}` for a full-rank `d x d` kernel matrix; lower bounds
/// `||h||_inf / ||h||` over the RKHS spanned by the points.
pub fn sup_ratio_bound(gram: &GramMatrix) -> Result<f64> {
    let l = full_rank_min_eig(gram)?;
    Ok((l / gram.n() as f64).sqrt())
}

/// Width bound through `k + 1` on `d + 1` points, for kernels whose RKHS
/// excludes the constant function.
pub fn diam_lower_kplus(kernel: &Kernel, points: &PointSet) -> Result<SpectralReport> {
    let g = gram(&kernel.plus_constant(true), points)?;
    let l = full_rank_min_eig(&g)?;
    let m = points.len();
    Ok(SpectralReport {
        lambda_min: l,
        d_used: m,
        diam_lower: 0.5 * (l / m as f64).sqrt(),
        bound_variant: BoundVariant::KPlus,
        notes: format!("smallest eigenvalue of k+1 on {m} points"),
        estimated: false,
    })
}

/// Width bound for kernels whose RKHS contains the constant function, on `d`
/// points (`d >= 2`). `c_sq = 1 / ||1||^2` identifies the reduced kernel.
pub fn diam_lower_kminus(kernel: &Kernel, points: &PointSet, c_sq: f64) -> Result<SpectralReport> {
    if !(c_sq >= 0.0) {
        return Err(Error::Precondition("c_sq must be non-negative".into()));
    }
    let d = kernel.meta().dim_rkhs.unwrap_or(points.len());
    if d < 2 {
        return Err(Error::Precondition("the reduced-kernel bound requires d >= 2".into()));
    }
    if points.len() < d {
        return Err(Error::RankDeficient(format!("{} points cannot give a full-rank {d}x{d} matrix", points.len())));
    }
    if points.len() > d {
        return Err(Error::Precondition(format!("expected {d} points, got {}", points.len())));
    }
    let g = gram(kernel, points)?;
    let l = full_rank_min_eig(&g)?;
    Ok(SpectralReport {
        lambda_min: l,
        d_used: d,
        diam_lower: 0.5 * (l / d as f64).sqrt(),
        bound_variant: BoundVariant::KMinus,
        notes: format!("c_sq = {c_sq}"),
        estimated: false,
    })
}

/// Width bound `lambda^{1/2} / 2` from the lowest Mercer eigenvalue, valid for
/// `0 < lambda <= 4`. Without the constant in the RKHS, `lambda` refers to
/// `k + 1`.
pub fn diam_lower_mercer(lambda_tilde: f64, contains_const: bool) -> Result<SpectralReport> {
    mercer_report(lambda_tilde, contains_const, BoundVariant::MercerSupplied)
}

fn mercer_report(lambda: f64, contains_const: bool, variant: BoundVariant) -> Result<SpectralReport> {
    if !(lambda > 0.0) {
        return Err(Error::Precondition(format!("Mercer eigenvalue must be positive, got {lambda}")));
    }
    if lambda > 4.0 {
        return Err(Error::Precondition(format!("Mercer eigenvalue {lambda} is outside the regime lambda <= 4")));
    }
    let notes = if contains_const {
        "lowest Mercer eigenvalue of k"
    } else {
        "lowest Mercer eigenvalue of k+1"
    };
    Ok(SpectralReport {
        lambda_min: lambda,
        d_used: 0,
        diam_lower: lambda.sqrt() / 2.0,
        bound_variant: variant,
        notes: notes.into(),
        estimated: variant == BoundVariant::MercerEstimated,
    })
}

/// Mercer bound with the eigenvalue estimated on `grid`.
pub fn diam_lower_mercer_estimated(kernel: &Kernel, grid: &PointSet, contains_const: bool) -> Result<SpectralReport> {
    let k = if contains_const { kernel.clone() } else { kernel.plus_constant(true) };
    let lambda = mercer_estimate(&k, grid)?;
    let mut r = mercer_report(lambda, contains_const, BoundVariant::MercerEstimated)?;
    r.d_used = linalg::rank(&gram(&k, grid)?.entries, RANK_RTOL);
    r.notes = format!("{} (estimated from {} grid points)", r.notes, grid.len());
    Ok(r)
}

/// Smallest eigenvalue of `K / m` on an `m`-point grid above the numerical
/// rank threshold; approximates the lowest Mercer eigenvalue for the
/// empirical measure of the grid.
pub fn mercer_estimate(kernel: &Kernel, grid: &PointSet) -> Result<f64> {
    let g = gram(kernel, grid)?;
    let m = grid.len() as f64;
    let ev: Vec<f64> = linalg::sym_eigenvalues(&g.entries).into_iter().map(|v| v / m).collect();
    let top = ev.last().copied().unwrap_or(0.0);
    if !(top > 0.0) {
        return Err(Error::Numerical("kernel matrix has no positive eigenvalue".into()));
    }
    ev.into_iter()
        .find(|&v| v > RANK_RTOL * top)
        .ok_or_else(|| Error::Numerical("kernel matrix has no positive eigenvalue".into()))
}

/// Picks `count` rows of `grid` by pivoted Cholesky on the kernel matrix,
/// favouring well-conditioned subsets.
pub fn select_points(kernel: &Kernel, grid: &PointSet, count: usize) -> Result<PointSet> {
    let g = gram(kernel, grid)?;
    let (piv, _) = linalg::pivoted_cholesky(&g.entries, count, 1e-14);
    if piv.len() < count {
        return Err(Error::RankDeficient(format!("only {} independent points found, {count} requested", piv.len())));
    }
    grid.subset(&piv)
}

/// Width bound `(1/4) (lambda_d / d)^{1/2} K(1, t)` for kernels without the
/// constant, on `d` points with `lambda_d <= 4 d`. `K(1, t)` is evaluated at
/// the given `t > 0` rather than in the limit `t -> 0`; since it is
/// non-decreasing in `t`, the value approaches the bound from above.
pub fn diam_lower_kfunctional(
    kernel: &Kernel,
    points: &PointSet,
    grid: &PointSet,
    t: f64,
    basis_size: usize,
) -> Result<SpectralReport> {
    let g = gram(kernel, points)?;
    let l = full_rank_min_eig(&g)?;
    let d = points.len() as f64;
    if l > 4.0 * d {
        return Err(Error::Precondition(format!("lambda_d = {l} exceeds 4 d = {}", 4.0 * d)));
    }
    let kf = k_functional(kernel, grid, t, basis_size)?;
    Ok(SpectralReport {
        lambda_min: l,
        d_used: points.len(),
        diam_lower: 0.25 * (l / d).sqrt() * kf.value,
        bound_variant: BoundVariant::KFunctional,
        notes: format!("K(1, t) = {} at t = {t} (residual {})", kf.value, kf.residual),
        estimated: true,
    })
}

/// [`ball_radius`] and [`sample_threshold`] combined.
pub fn ball_report(b: f64, q: f64, c: f64, lipschitz: f64, l: usize, sup_k: f64) -> Result<BallReport> {
    let delta = ball_radius(b, c, lipschitz, l)?;
    let n_threshold = sample_threshold(delta, q, c, lipschitz, l, sup_k)?;
    Ok(BallReport { b, delta, n_threshold, q, c_density: c, lipschitz, l_dim: l })
}

/// Options for [`k_functional_with`].
#[derive(Clone, Copy, Debug)]
pub struct KFunctionalOptions {
    pub eta0: f64,
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for KFunctionalOptions {
    fn default() -> Self {
        Self { eta0: 0.1, restarts: 5, iterations: 4000, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KFunctionalEstimate {
    /// Best objective value found; an upper estimate of `K(1, t)`.
    pub value: f64,
    /// Spread between the best values of the individual restarts.
    pub residual: f64,
    pub basis_used: usize,
}

/// Estimates `K(1, t) = inf_h ||1 - h||_inf + t ||h||` with `h` restricted to
/// the span of `basis_size` pivoted-Cholesky points of `grid` and the sup norm
/// taken over the grid.
pub fn k_functional(kernel: &Kernel, grid: &PointSet, t: f64, basis_size: usize) -> Result<KFunctionalEstimate> {
    k_functional_with(kernel, grid, t, basis_size, KFunctionalOptions::default())
}

pub fn k_functional_with(
    kernel: &Kernel,
    grid: &PointSet,
    t: f64,
    basis_size: usize,
    opts: KFunctionalOptions,
) -> Result<KFunctionalEstimate> {
    if !(t > 0.0) {
        return Err(Error::Precondition("t must be positive".into()));
    }
    let g = gram(kernel, grid)?;
    let (_, r) = linalg::pivoted_cholesky(&g.entries, basis_size.max(1), 1e-12);
    let rdim = r.ncols();
    let objective = |beta: &DVector<f64>| -> (f64, usize, f64) {
        let h = &r * beta;
        let (mut worst, mut at, mut sign) = (f64::NEG_INFINITY, 0, 0.0);
        for (i, v) in h.iter().enumerate() {
            let res = 1.0 - v;
            if res.abs() > worst {
                worst = res.abs();
                at = i;
                sign = res.signum();
            }
        }
        (worst + t * beta.norm(), at, sign)
    };
    let zero = DVector::zeros(rdim);
    let mut best = objective(&zero).0;
    if rdim == 0 {
        return Ok(KFunctionalEstimate { value: best, residual: 0.0, basis_used: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut restart_bests = Vec::with_capacity(opts.restarts);
    for k in 0..opts.restarts.max(1) {
        let mut beta = if k == 0 {
            zero.clone()
        } else {
            DVector::<f64>::from_fn(rdim, |_, _| StandardNormal.sample(&mut rng)) / (rdim as f64).sqrt()
        };
        let mut local = objective(&beta).0;
        for it in 1..=opts.iterations {
            let (val, at, sign) = objective(&beta);
            local = local.min(val);
            let mut grad: DVector<f64> = -r.row(at).transpose() * sign;
            let nb = beta.norm();
            if nb > 0.0 {
                grad += &beta * (t / nb);
            }
            beta -= grad * (opts.eta0 / (it as f64).sqrt());
        }
        local = local.min(objective(&beta).0);
        restart_bests.push(local);
        best = best.min(local);
    }
    if !best.is_finite() {
        return Err(Error::Convergence { iterations: opts.iterations, last: best });
    }
    let spread = restart_bests.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - best;
    Ok(KFunctionalEstimate { value: best, residual: spread, basis_used: rdim })
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    (h * PI.ln() - ln_gamma(h + 1.0)).exp()
}

/// Probability mass a density bounded below by `c` puts on a cap of depth
/// `gamma`, for `L`-Lipschitz RKHS functions on `d`-dimensional inputs.
pub fn counter_mass(gamma: f64, c: f64, lipschitz: f64, d: usize) -> Result<f64> {
    if !(gamma > 0.0 && c > 0.0 && lipschitz > 0.0) {
        return Err(Error::Precondition("gamma, c and L must be positive".into()));
    }
    if gamma / lipschitz > 1.0 {
        return Err(Error::Precondition(format!("gamma / L = {} exceeds 1", gamma / lipschitz)));
    }
    let df = d as f64;
    Ok(c * gamma.powf(df + 1.0) * unit_ball_volume(d) / ((df + 1.0) * (2.0 * lipschitz).powf(df)))
}

/// Radius of the ball around the mean embedding given a width lower bound `b`.
pub fn ball_radius(b: f64, c: f64, lipschitz: f64, l: usize) -> Result<f64> {
    if !(b >= 0.0 && c > 0.0 && lipschitz > 0.0 && l >= 1) {
        return Err(Error::Precondition("ball_radius needs b >= 0 and positive c, L, l".into()));
    }
    let lf = l as f64;
    let h = b / 2.0;
    let second = c * h.powf(lf + 1.0) * unit_ball_volume(l) / ((lf + 1.0) * (2.0 * lipschitz).powf(lf));
    Ok(h.min(second))
}

/// Sample size after which a ball of radius `delta / 4` around the empirical
/// mean embedding exists with probability `q`.
pub fn sample_threshold(delta: f64, q: f64, c: f64, lipschitz: f64, l: usize, sup_k: f64) -> Result<u64> {
    if !(delta > 0.0 && c > 0.0 && lipschitz > 0.0 && sup_k > 0.0 && l >= 1) {
        return Err(Error::Precondition("sample_threshold needs positive inputs".into()));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Precondition("q must lie in (0, 1)".into()));
    }
    let lf = l as f64;
    let lg = (2.0 * (1.0 / q).ln()).sqrt();
    let sk = sup_k.sqrt();
    let first = ((lg + 96.0 * sk / delta) / (c * unit_ball_volume(l) * (delta / (8.0 * lipschitz)).powf(lf))).powi(2);
    let second = ((4.0 * sk + 3.0 * lg) / (delta / 4.0)).powi(2);
    let v = first.max(second).ceil();
    if !v.is_finite() || v > u64::MAX as f64 {
        return Err(Error::Numerical("sample threshold overflows".into()));
    }
    Ok((v as u64).max(1))
}

/// Entropy-integral constant of the VC deviation bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VcConstants {
    pub c_tilde: f64,
    /// Replaces the computed `J(1)` when set.
    pub j_override: Option<f64>,
}

impl Default for VcConstants {
    fn default() -> Self {
        Self { c_tilde: 1e21, j_override: None }
    }
}

impl VcConstants {
    /// `J(1) = sqrt(log 2 c~) v sqrt(1 + 2 (d + 2))`, unless overridden.
    pub fn j_one(&self, d: usize) -> f64 {
        self.j_override
            .unwrap_or_else(|| (2.0 * self.c_tilde).ln().sqrt().max((1.0 + 2.0 * (d as f64 + 2.0)).sqrt()))
    }
}

/// Uniform deviation over a VC-subgraph class of dimension parameter `d`,
/// holding with probability `1 - e^{-x}`.
pub fn vc_uniform_bound(d: usize, n: u64, x: f64) -> f64 {
    vc_uniform_bound_with(d, n, x, VcConstants::default())
}

pub fn vc_uniform_bound_with(d: usize, n: u64, x: f64, consts: VcConstants) -> f64 {
    let j = consts.j_one(d);
    let nf = n as f64;
    let s = nf.sqrt();
    12.0 * j / s + (2.0 * x * (24.0 * j / s + 1.0)).sqrt() / s + x / (3.0 * nf)
}

/// Deviation bound for margin-type classes through Rademacher complexities,
/// holding with probability `p`; `b` bounds `sqrt(k(x, x))`.
pub fn rademacher_bound(gamma: f64, p: f64, n: u64, b: f64) -> f64 {
    ((2.0 * (1.0 / p).ln()).sqrt() + 24.0 * b / gamma) / (n as f64).sqrt()
}

/// Variant of [`rademacher_bound`] for a centered embedding (mean zero),
/// where the complexity term halves.
pub fn rademacher_bound_centered(gamma: f64, p: f64, n: u64, b: f64) -> f64 {
    ((2.0 * (1.0 / p).ln()).sqrt() + 12.0 * b / gamma) / (n as f64).sqrt()
}

/// Smallest `n >= 1` with `bound(n) < target`, for `bound` decreasing in `n`.
pub fn crossover(target: f64, bound: impl Fn(u64) -> f64) -> Option<u64> {
    if !(target > 0.0) {
        return None;
    }
    let mut hi = 1u64;
    while bound(hi) >= target {
        hi = hi.checked_mul(2)?;
    }
    let mut lo = hi / 2;
    if lo == 0 {
        return Some(1);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if bound(mid) < target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Probability that a uniform point of the unit circle has `<u, x> <= c`.
pub fn circle_halfplane_mass(c: f64) -> f64 {
    1.0 - c.clamp(-1.0, 1.0).acos() / PI
}

/// `P psi_gamma(<u, .> - c)` under the uniform law on the unit circle, with
/// the ramp `psi_gamma` falling from 1 to 0 over `[c - gamma, c]`.
pub fn circle_ramp_mass(c: f64, gamma: f64) -> f64 {
    let cg = (c - gamma).max(-1.0);
    1.0 - cg.acos() / PI * (1.0 - c / gamma) - c * c.acos() / (PI * gamma)
        + ((1.0 - c * c).sqrt() - (1.0 - cg * cg).sqrt()) / (PI * gamma)
}

/// Sample size from which the VC bound certifies a ball of `radius` around
/// the origin in the hull of a uniform sample of the unit circle with
/// probability `p`.
pub fn vc_circle_crossover(radius: f64, p: f64, consts: VcConstants) -> Option<u64> {
    let margin = circle_halfplane_mass(-radius);
    let x = (1.0 / p).ln();
    crossover(margin, |n| vc_uniform_bound_with(2, n, x, consts))
}

/// Rademacher counterpart of [`vc_circle_crossover`] with ramp width `gamma`.
///
/// With `exact_margin` the deviation is compared with the ramp mass at
/// `c = -radius`; otherwise with `radius` itself, a smaller and therefore
/// conservative margin.
pub fn rademacher_circle_crossover(radius: f64, p: f64, gamma: f64, exact_margin: bool) -> Option<u64> {
    let margin = if exact_margin { circle_ramp_mass(-radius, gamma) } else { radius };
    crossover(margin, |n| rademacher_bound_centered(gamma, p, n, 1.0))
}

/// Width lower bound in the direct sum of the covariance and label-weighted
/// mean spaces along the unit direction `(g, h)`.
pub fn direct_sum_diam_lower(
    norm_g: f64,
    norm_h: f64,
    b_up: f64,
    b_down: f64,
    diam_c: f64,
    diam_codot: f64,
) -> Result<f64> {
    if ((norm_g * norm_g + norm_h * norm_h) - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition("(norm_g, norm_h) must lie on the unit circle".into()));
    }
    if !(norm_g >= 0.0 && norm_h >= 0.0) {
        return Err(Error::Precondition("norms must be non-negative".into()));
    }
    if b_up + b_down < 0.0 {
        return Err(Error::Precondition("b_up + b_down must be non-negative".into()));
    }
    Ok((norm_h * (b_up + b_down) / 2.0 * diam_c).max(norm_g * diam_codot))
}
