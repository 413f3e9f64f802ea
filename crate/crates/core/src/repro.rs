//! Named reproduction cases. Each case checks one acceptance criterion and
//! returns a serializable report; `kc repro` writes them to disk.

use crate::compress::{error_sq, frank_wolfe, herd, Coreset};
use crate::counterexample::{self, Construction};
use crate::error::{Error, Result};
use crate::kernel::{gram, GramMatrix, Kernel, Monomial};
use crate::learn::{self, KrrMode};
use crate::points::{linspace, PointSet};
use crate::spectral::{self, VcConstants};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use crate::io;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

pub const CASES: &[&str] = &[
    "figure3",
    "circle",
    "crossover",
    "herd-identity",
    "fw-rate",
    "simplex",
    "krr",
    "mmd",
    "counterexample",
    "measure",
    "spectral-oracle",
    "determinism",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub name: String,
    pub passed: bool,
    pub summary: String,
    pub data: Value,
}

fn report(name: &str, passed: bool, summary: String, data: Value) -> CaseReport {
    CaseReport { name: name.to_string(), passed, summary, data }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform points in `[-1, 1]^dim`.
pub fn uniform_cube(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> PointSet {
    let data: Vec<f64> = (0..n * dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
    PointSet::from_flat(data, n, dim).expect("finite data")
}

/// Uniform points on the unit circle.
pub fn uniform_circle(rng: &mut ChaCha8Rng, n: usize) -> PointSet {
    let data: Vec<f64> = (0..n)
        .flat_map(|_| {
            let a = rng.random_range(0.0..2.0 * PI);
            [a.cos(), a.sin()]
        })
        .collect();
    PointSet::from_flat(data, n, 2).expect("finite data")
}

// ---- Figure 3 ----

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Figure3Row {
    pub d: u32,
    pub lambda_min: f64,
    pub lower_bound: f64,
    pub achieved_error: f64,
}

/// Unit-norm candidates `h_d` for the kernels `k_d(x, y) = sum_{u<=d} (xy)^u`,
/// given by their coefficients on `x, x^2, ...`.
pub fn figure3_candidate(d: u32) -> Vec<f64> {
    match d {
        1 => vec![1.0],
        2 => vec![0.0, 1.0],
        3 => [1.0, 1.0, -1.0].iter().map(|c| c / 3f64.sqrt()).collect(),
        4 => [-1.0, 1.0, 1.0, -1.0].iter().map(|c| c / 2.0).collect(),
        _ => vec![],
    }
}

/// `inf_c sup_x |h(x) - c|` on `m` equispaced points of `[-1, 1]`.
pub fn sup_distance_to_constants(coefs: &[f64], m: usize) -> f64 {
    let (lo, hi) = linspace(-1.0, 1.0, m).into_iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
        let v: f64 = coefs.iter().enumerate().map(|(u, c)| c * x.powi(u as i32 + 1)).sum();
        (lo.min(v), hi.max(v))
    });
    (hi - lo) / 2.0
}

/// Kernel-matrix lower bound with `k_d + 1` on `d + 1` equispaced points of
/// `[-1, 1]` against the error of the candidate functions.
pub fn figure3() -> Result<Vec<Figure3Row>> {
    (1..=4)
        .map(|d| {
            let pts = PointSet::from_scalars(&linspace(-1.0, 1.0, d as usize + 1))?;
            let r = spectral::diam_lower_kplus(&Kernel::poly_no_const(d), &pts)?;
            let achieved = if d == 1 { 1.0 } else { sup_distance_to_constants(&figure3_candidate(d), 10_000) };
            Ok(Figure3Row { d, lambda_min: r.lambda_min, lower_bound: r.diam_lower, achieved_error: achieved })
        })
        .collect()
}

fn case_figure3() -> Result<CaseReport> {
    let rows = figure3()?;
    let ok = rows.iter().all(|r| r.lower_bound <= r.achieved_error);
    let s = rows.iter().map(|r| format!("d={} bound={:.4} error={:.4}", r.d, r.lower_bound, r.achieved_error)).collect::<Vec<_>>().join("; ");
    Ok(report("figure3", ok, s, json!(rows)))
}

// ---- circle ----

/// Whether the convex hull of `pts` contains the disc of `radius` around the
/// origin, probed along `directions` equally spaced unit vectors.
pub fn hull_contains_disc(pts: &PointSet, radius: f64, directions: usize) -> bool {
    (0..directions).all(|k| {
        let a = 2.0 * PI * k as f64 / directions as f64;
        let (c, s) = (a.cos(), a.sin());
        pts.rows().map(|r| c * r[0] + s * r[1]).fold(f64::NEG_INFINITY, f64::max) >= radius
    })
}

/// Fraction of trials in which `n` uniform points on the circle contain the
/// disc of `radius` in their hull.
pub fn circle_fraction(seed: u64, n: usize, trials: usize, radius: f64, directions: usize) -> f64 {
    let mut r = rng(seed);
    let hits = (0..trials).filter(|_| hull_contains_disc(&uniform_circle(&mut r, n), radius, directions)).count();
    hits as f64 / trials as f64
}

fn case_circle(seed: u64) -> Result<CaseReport> {
    let f = circle_fraction(seed, 50, 500, 0.2, 360);
    Ok(report("circle", f >= 0.9, format!("disc of radius 0.2 contained in {:.1}% of 500 trials (n = 50)", 100.0 * f), json!({ "fraction": f })))
}

// ---- crossover ----

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossovers {
    pub vc: u64,
    pub rademacher_conservative: u64,
    pub rademacher_exact_margin: u64,
}

/// Crossover sample sizes for a disc of radius 0.2 with probability 0.9 on
/// the unit circle, with `J(1) = 8` and ramp width 1.
pub fn crossovers() -> Result<Crossovers> {
    let consts = VcConstants { j_override: Some(8.0), ..Default::default() };
    let none = || Error::Numerical("crossover search overflowed".into());
    Ok(Crossovers {
        vc: spectral::vc_circle_crossover(0.2, 0.1, consts).ok_or_else(none)?,
        rademacher_conservative: spectral::rademacher_circle_crossover(0.2, 0.1, 1.0, false).ok_or_else(none)?,
        rademacher_exact_margin: spectral::rademacher_circle_crossover(0.2, 0.1, 1.0, true).ok_or_else(none)?,
    })
}

fn within(v: u64, target: f64, rel: f64) -> bool {
    ((v as f64 - target) / target).abs() <= rel
}

fn case_crossover() -> Result<CaseReport> {
    let c = crossovers()?;
    let ok = within(c.vc, 52_000.0, 0.05) && within(c.rademacher_conservative, 5_000.0, 0.05);
    let s = format!(
        "VC {} (target 52000), Rademacher {} (target 5000; {} with the exact ramp margin)",
        c.vc, c.rademacher_conservative, c.rademacher_exact_margin
    );
    Ok(report("crossover", ok, s, json!(c)))
}

// ---- herding identity ----

/// Random monomial features on `dim` variables; about a third of the time the
/// coordinate features, which give the linear kernel.
pub fn random_monomials(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Monomial> {
    if rng.random_range(0..3) == 0 {
        return (0..dim).map(|j| Monomial { coef: 1.0, powers: (0..dim).map(|c| u32::from(c == j)).collect() }).collect();
    }
    (0..rng.random_range(2..=5))
        .map(|_| Monomial {
            coef: rng.random_range(0.5..2.0),
            powers: (0..dim).map(|_| rng.random_range(0..=3)).collect(),
        })
        .collect()
}

/// A random kernel drawn from a small family of finite-dimensional kernels.
pub fn random_kernel(rng: &mut ChaCha8Rng, dim: usize) -> Kernel {
    match rng.random_range(0..3) {
        0 => Kernel::linear(),
        1 => Kernel::poly_no_const(rng.random_range(1..=3)),
        _ => Kernel::monomials(random_monomials(rng, dim)),
    }
}

fn features(m: &[Monomial], x: &[f64]) -> Vec<f64> {
    m.iter().map(|f| f.powers.iter().zip(x).fold(f.coef, |acc, (&p, &xi)| acc * xi.powi(p as i32))).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    /// Largest relative gap over steps with `||w_t|| >= 1e-6 * t * max_i ||phi(X_i)||`.
    pub max_rel_gap: f64,
    pub steps_checked: usize,
    /// Steps where the iterate sits at the rounding floor of its implicit
    /// representation, compared on an absolute scale instead.
    pub near_zero_steps: usize,
    pub max_near_zero_gap: f64,
}

/// Compares the herding iterate norm `||w_t||` with `t ||m_n - m_t||`
/// evaluated from explicit feature vectors, over `instances` random runs.
pub fn herd_identity(seed: u64, instances: usize) -> Result<IdentityCheck> {
    let mut r = rng(seed);
    let mut out = IdentityCheck { max_rel_gap: 0.0, steps_checked: 0, near_zero_steps: 0, max_near_zero_gap: 0.0 };
    for _ in 0..instances {
        let n = r.random_range(2..=200);
        let dim = r.random_range(1..=3);
        let t_max = r.random_range(1..=500);
        let pts = uniform_cube(&mut r, n, dim);
        let mono = random_monomials(&mut r, dim);
        let init = r.random_range(0..n);
        let run = herd(&Kernel::monomials(mono.clone()), &pts, t_max, init)?;

        let phi: Vec<DVector<f64>> = pts.rows().map(|x| DVector::from_vec(features(&mono, x))).collect();
        let mean = phi.iter().fold(DVector::zeros(mono.len()), |a, p| a + p) / n as f64;
        let phi_max = phi.iter().map(|p| p.norm()).fold(0.0, f64::max);
        let mut sum = DVector::zeros(mono.len());
        for (t, (&i, &wsq)) in run.coreset.indices.iter().zip(&run.w_norm_sq).enumerate() {
            let t = (t + 1) as f64;
            sum += &phi[i];
            let rhs = t * (&mean - &sum / t).norm();
            let lhs = wsq.sqrt();
            let scale = lhs.max(rhs);
            if scale >= 1e-6 * t * phi_max {
                out.steps_checked += 1;
                out.max_rel_gap = out.max_rel_gap.max((lhs - rhs).abs() / scale);
            } else {
                out.near_zero_steps += 1;
                out.max_near_zero_gap = out.max_near_zero_gap.max((lhs - rhs).abs() / (t * phi_max.max(f64::MIN_POSITIVE)));
            }
        }
    }
    Ok(out)
}

fn case_herd_identity(seed: u64) -> Result<CaseReport> {
    let c = herd_identity(seed, 20)?;
    let s = format!(
        "max relative gap {:e} over {} steps; {} near-zero steps with max scaled gap {:e}",
        c.max_rel_gap, c.steps_checked, c.near_zero_steps, c.max_near_zero_gap
    );
    Ok(report("herd-identity", c.max_rel_gap <= 1e-9, s, json!(c)))
}

// ---- Frank-Wolfe rate ----

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub instance: String,
    pub scaled_64: f64,
    pub scaled_128: f64,
    pub scaled_256: f64,
}

impl RateRow {
    pub fn passes(&self) -> bool {
        self.scaled_256 <= 1.25 * self.scaled_64
            && self.scaled_128 <= 1.25 * self.scaled_64
            && self.scaled_256 <= 1.25 * self.scaled_128
    }
}

fn scaled_error(errors: &[f64], t: usize) -> f64 {
    let e = errors.get(t - 1).or(errors.last()).copied().unwrap_or(0.0);
    t as f64 * e.max(0.0).sqrt()
}

/// `t * error(t)^{1/2}` at `t = 64, 128, 256` for Frank–Wolfe on dense
/// circle and square samples with the kernel `sum_{u<=4} <x,y>^u`.
pub fn fw_rate(seed: u64, n: usize) -> Result<Vec<RateRow>> {
    let mut r = rng(seed);
    let k = Kernel::poly_no_const(4);
    let samples = [("circle", uniform_circle(&mut r, n)), ("square", uniform_cube(&mut r, n, 2))];
    samples
        .into_iter()
        .map(|(name, pts)| {
            let (_, trace) = frank_wolfe(&k, &pts, 256)?;
            let e = trace.errors();
            Ok(RateRow {
                instance: name.into(),
                scaled_64: scaled_error(&e, 64),
                scaled_128: scaled_error(&e, 128),
                scaled_256: scaled_error(&e, 256),
            })
        })
        .collect()
}

fn case_fw_rate(seed: u64) -> Result<CaseReport> {
    let rows = fw_rate(seed, 2000)?;
    let ok = rows.iter().all(RateRow::passes);
    let s = rows
        .iter()
        .map(|r| format!("{}: {:.3e}, {:.3e}, {:.3e}", r.instance, r.scaled_64, r.scaled_128, r.scaled_256))
        .collect::<Vec<_>>()
        .join("; ");
    Ok(report("fw-rate", ok, s, json!(rows)))
}

// ---- simplex ----

/// Error of Frank–Wolfe after `d` steps with the delta kernel on `d` points,
/// for `d = 1..=d_max`.
pub fn simplex_errors(d_max: usize) -> Result<Vec<f64>> {
    (1..=d_max)
        .map(|d| {
            let pts = PointSet::from_scalars(&(0..d).map(|i| i as f64).collect::<Vec<_>>())?;
            let (_, trace) = frank_wolfe(&Kernel::delta(), &pts, d)?;
            Ok(trace.last_error_sq())
        })
        .collect()
}

fn case_simplex() -> Result<CaseReport> {
    let e = simplex_errors(10)?;
    let worst = e.iter().cloned().fold(0.0, f64::max);
    Ok(report("simplex", worst <= 1e-20, format!("largest error after d steps {worst:e}"), json!(e)))
}

// ---- ridge regression ----

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrrCheck {
    pub max_dense_gap: f64,
    pub max_mode_gap: f64,
}

/// Full-sample uniform coresets against `(K + n lambda I)^{-1} y`, and the
/// two solution modes against each other.
pub fn krr_check(seed: u64, instances: usize) -> Result<KrrCheck> {
    let mut r = rng(seed);
    let (mut dense_gap, mut mode_gap) = (0.0f64, 0.0f64);
    for _ in 0..instances {
        let n = r.random_range(2..=30);
        let pts = uniform_cube(&mut r, n, 2);
        let k = Kernel::poly_no_const(r.random_range(1..=3)).plus_constant(false);
        let y: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        let lambda = r.random_range(0.01..1.0);
        let full = Coreset::full(&pts);
        let sub = learn::krr_fit(&k, &full, &pts, &y, lambda, KrrMode::Suboptimal)?;
        let g = gram(&k, &pts)?.entries;
        let a = &g + DMatrix::identity(n, n) * (n as f64 * lambda);
        let oracle = a.lu().solve(&DVector::from_vec(y.clone())).ok_or_else(|| Error::Numerical("singular oracle".into()))?;
        let scale = oracle.amax().max(1.0);
        for (x, o) in sub.alpha.iter().zip(oracle.iter()) {
            dense_gap = dense_gap.max((x - o).abs() / scale);
        }
        if crate::linalg::rank(&g, crate::linalg::PINV_RTOL) == n {
            let min = learn::krr_fit(&k, &full, &pts, &y, lambda, KrrMode::MinimalNorm)?;
            for (x, o) in sub.alpha.iter().zip(&min.alpha) {
                mode_gap = mode_gap.max((x - o).abs() / scale);
            }
        }
    }
    Ok(KrrCheck { max_dense_gap: dense_gap, max_mode_gap: mode_gap })
}

fn case_krr(seed: u64) -> Result<CaseReport> {
    let c = krr_check(seed, 20)?;
    let ok = c.max_dense_gap <= 1e-9 && c.max_mode_gap <= 1e-8;
    Ok(report("krr", ok, format!("dense ridge gap {:e}, mode gap {:e}", c.max_dense_gap, c.max_mode_gap), json!(c)))
}

// ---- MMD ----

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MmdCheck {
    pub max_self_mmd: f64,
    pub compressed_violations: usize,
    pub hierarchical_violations: usize,
    pub instances: usize,
}

/// Resolution of a norm computed as the square root of a quadratic form:
/// `sqrt(64 eps max_i k(X_i, X_i))`.
pub fn rounding_floor(kernel: &Kernel, points: &PointSet) -> f64 {
    let max_diag = points.rows().map(|x| kernel.eval(x, x)).fold(0.0, f64::max);
    (64.0 * f64::EPSILON * max_diag).sqrt()
}

pub fn mmd_check(seed: u64, instances: usize) -> Result<MmdCheck> {
    let mut r = rng(seed);
    let mut out = MmdCheck { max_self_mmd: 0.0, compressed_violations: 0, hierarchical_violations: 0, instances };
    for _ in 0..instances {
        let dim = r.random_range(1..=3);
        let (na, nb) = (r.random_range(5..=80), r.random_range(5..=80));
        let a = uniform_cube(&mut r, na, dim);
        let b = uniform_cube(&mut r, nb, dim);
        let k = random_kernel(&mut r, dim);
        out.max_self_mmd = out.max_self_mmd.max(learn::mmd_sq(&k, &a, &a)?.mmd_sq);
        let exact = learn::mmd_sq(&k, &a, &b)?.mmd_sq.sqrt();
        let floor = rounding_floor(&k, &a).max(rounding_floor(&k, &b));
        let t = r.random_range(1..=16);
        let (ca, _) = frank_wolfe(&k, &a, t)?;
        let cb = herd(&k, &b, t, 0)?.coreset;
        let comp = learn::mmd_sq_compressed(&k, &ca, &a, &cb, &b)?;
        if (comp.mmd_sq.sqrt() - exact).abs() > comp.error_budget.unwrap_or(0.0) + floor {
            out.compressed_violations += 1;
        }
        let (bs, pt) = learn::hierarchical_defaults(a.len());
        let h = learn::hierarchical_compress(&k, &a, bs, pt, t)?;
        if error_sq(&k, &h.coreset, &a)?.sqrt() > h.total_budget() + floor {
            out.hierarchical_violations += 1;
        }
    }
    Ok(out)
}

fn case_mmd(seed: u64) -> Result<CaseReport> {
    let c = mmd_check(seed, 50)?;
    let ok = c.max_self_mmd <= 1e-10 && c.compressed_violations == 0 && c.hierarchical_violations == 0;
    let s = format!(
        "self MMD {:e}; budget violations: compressed {}, hierarchical {} of {}",
        c.max_self_mmd, c.compressed_violations, c.hierarchical_violations, c.instances
    );
    Ok(report("mmd", ok, s, json!(c)))
}

// ---- counterexample ----

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleSummary {
    pub c_constant: f64,
    pub n_2: u64,
    pub invariants: counterexample::InvariantReport,
    pub divergence: counterexample::DivergenceReport,
}

pub fn counterexample_summary(t_max: usize, n_max: u32) -> Result<CounterexampleSummary> {
    let cons = Construction::new(n_max)?;
    let state = counterexample::run(&cons, t_max)?;
    Ok(CounterexampleSummary {
        c_constant: cons.c,
        n_2: cons.big_n(2),
        invariants: counterexample::verify_invariants(&state, &cons),
        divergence: counterexample::divergence_check(&state),
    })
}

fn case_counterexample() -> Result<CaseReport> {
    let s = counterexample_summary(20_000, 40)?;
    let d = &s.divergence;
    let ok = s.c_constant == 64.0
        && s.n_2 == 4
        && s.invariants.passed
        && d.violations == 0
        && d.exceeds_first_peak
        && d.max_norm > 3.0;
    let summary = format!(
        "C = {}, N_2 = {}, invariant violations {:?}, divergence violations {} of {}, first peak at t = {}, last record at t = {}",
        s.c_constant, s.n_2, s.invariants.violations, d.violations, d.checked_steps, d.first_peak_t, d.last_record_t
    );
    let mut data = json!(s);
    data["divergence"]["envelope"] = json!(d.envelope.len());
    Ok(report("counterexample", ok, summary, data))
}

fn case_measure() -> Result<CaseReport> {
    let m = counterexample::measure_mean_check(20)?;
    let s = format!(
        "max |<e_n, m>| {:e}, max |<e~_(n,i), m>| {:e} over {} coordinates, truncated mass {}",
        m.max_abs_e, m.max_abs_etilde, m.coordinates_checked, m.integral_truncated
    );
    let mut data = json!(m);
    data["constants"] = json!(m.constants.len());
    Ok(report("measure", m.passed, s, data))
}

// ---- spectral oracle ----

/// Random symmetric matrix `Q diag(lambda) Q^T` with eigenvalues in `[lo, hi]`.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let q = a.qr().q();
    let d = DVector::from_fn(n, |_, _| rng.random_range(lo..=hi));
    let m = &q * DMatrix::from_diagonal(&d) * q.transpose();
    (&m + m.transpose()) * 0.5
}

pub fn spectral_oracle(seed: u64, instances: usize) -> Result<f64> {
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let n = r.random_range(1..=100);
        let m = random_spd(&mut r, n, 0.1, 1.0);
        let dense = m.clone().symmetric_eigen().eigenvalues.min();
        let got = spectral::smallest_eig(&GramMatrix::from_matrix(m), spectral::EIG_TOL, spectral::EIG_MAX_ITER)?;
        worst = worst.max((got - dense).abs() / dense.abs());
    }
    Ok(worst)
}

fn case_spectral_oracle(seed: u64) -> Result<CaseReport> {
    let w = spectral_oracle(seed, 50)?;
    Ok(report("spectral-oracle", w <= 1e-8, format!("max relative error {w:e} over 50 matrices"), json!({ "max_rel_err": w })))
}

// ---- determinism ----

fn case_determinism(seed: u64) -> Result<CaseReport> {
    let quick = |s: u64| -> Result<String> {
        let parts = [
            serde_json::to_string(&case_figure3()?.data)?,
            serde_json::to_string(&case_herd_identity(s)?.data)?,
            serde_json::to_string(&mmd_check(s, 5)?)?,
            serde_json::to_string(&counterexample_summary(2_000, 20)?)?,
        ];
        Ok(parts.join("\n"))
    };
    let a = quick(seed)?;
    let b = quick(seed)?;
    Ok(report("determinism", a == b, format!("{} bytes compared", a.len()), json!({ "identical": a == b })))
}

pub fn run_case(name: &str, seed: u64) -> Result<CaseReport> {
    match name {
        "figure3" => case_figure3(),
        "circle" => case_circle(seed),
        "crossover" => case_crossover(),
        "herd-identity" => case_herd_identity(seed),
        "fw-rate" => case_fw_rate(seed),
        "simplex" => case_simplex(),
        "krr" => case_krr(seed),
        "mmd" => case_mmd(seed),
        "counterexample" => case_counterexample(),
        "measure" => case_measure(),
        "spectral-oracle" => case_spectral_oracle(seed),
        "determinism" => case_determinism(seed),
        other => Err(Error::Invalid(format!("unknown case {other:?}; known cases: {}", CASES.join(", ")))),
    }
}

pub fn run_cases(names: &[String], seed: u64) -> Result<Vec<CaseReport>> {
    names.iter().map(|n| run_case(n, seed)).collect()
}

/// Writes `<case>.json` per report plus `summary.csv` and `summary.json`;
/// the Figure 3 case also gets `figure3.csv`. Returns the written paths.
pub fn write_reports(dir: &Path, reports: &[CaseReport]) -> Result<Vec<PathBuf>> {
    #[derive(Serialize)]
    struct Row<'a> {
        case: &'a str,
        passed: bool,
        summary: &'a str,
    }
    fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    for r in reports {
        let p = dir.join(format!("{}.json", r.name));
        io::write_json(&p, r)?;
        out.push(p);
        if r.name == "figure3" {
            let rows: Vec<Figure3Row> = serde_json::from_value(r.data.clone())?;
            let p = dir.join("figure3.csv");
            io::write_records_csv(&p, &rows)?;
            out.push(p);
        }
    }
    let rows: Vec<Row> = reports.iter().map(|r| Row { case: &r.name, passed: r.passed, summary: &r.summary }).collect();
    let p = dir.join("summary.csv");
    io::write_records_csv(&p, &rows)?;
    out.push(p);
    let p = dir.join("summary.json");
    io::write_json(&p, &rows)?;
    out.push(p);
    Ok(out)
}
