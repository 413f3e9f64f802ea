use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rkhs_coreset::error::Error;
use rkhs_coreset::kernel::{gram, GramMatrix, Kernel};
use rkhs_coreset::linalg::sym_eigenvalues;
use rkhs_coreset::points::{linspace, PointSet};
use rkhs_coreset::spectral::*;

fn scalars(xs: &[f64]) -> PointSet {
    PointSet::from_scalars(xs).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1e-300)
}

#[test]
fn smallest_eig_small_cases() {
    let g = GramMatrix::from_matrix(DMatrix::identity(3, 3));
    assert!(close(smallest_eig(&g, EIG_TOL, EIG_MAX_ITER).unwrap(), 1.0, 1e-10));
    let g = GramMatrix::from_matrix(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.25])));
    assert!(close(smallest_eig(&g, EIG_TOL, EIG_MAX_ITER).unwrap(), 0.25, 1e-10));
}

#[test]
fn smallest_eig_matches_dense_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let n = rng.random_range(2..40);
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let m = &a * a.transpose() + DMatrix::identity(n, n) * 0.05;
        let oracle = sym_eigenvalues(&m)[0];
        let got = smallest_eig(&GramMatrix::from_matrix(m), EIG_TOL, EIG_MAX_ITER).unwrap();
        assert!(close(got, oracle, 1e-8), "{got} vs {oracle}");
    }
}

#[test]
fn sup_ratio_examples() {
    let g = gram(&Kernel::delta(), &scalars(&[1.0, 2.0, 3.0, 4.0])).unwrap();
    assert!(close(sup_ratio_bound(&g).unwrap(), 0.5, 1e-10));
    let g = GramMatrix::from_matrix(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.25]));
    assert!(close(sup_ratio_bound(&g).unwrap(), 0.125f64.sqrt(), 1e-10));
    let g = GramMatrix::from_matrix(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]));
    assert!(matches!(sup_ratio_bound(&g), Err(Error::RankDeficient(_))));
}

#[test]
fn kplus_linear_on_two_points() {
    let r = diam_lower_kplus(&Kernel::linear(), &scalars(&[-1.0, 1.0])).unwrap();
    assert_eq!(r.bound_variant, BoundVariant::KPlus);
    assert!(close(r.lambda_min, 2.0, 1e-10));
    assert!(close(r.diam_lower, 0.5, 1e-10));
    assert!(r.diam_lower <= 1.0);
}

#[test]
fn kplus_rejects_rank_deficient() {
    let err = diam_lower_kplus(&Kernel::zero(), &scalars(&[0.0, 1.0]));
    assert!(matches!(err, Err(Error::RankDeficient(_))));
}

// h = a x + b x^2 with a^2 + b^2 = 1 spans the unit sphere of the RKHS of k_2.
fn brute_force_half_width(grid: &[f64], dirs: usize) -> f64 {
    (0..dirs)
        .map(|j| {
            let th = std::f64::consts::PI * j as f64 / dirs as f64;
            let (a, b) = (th.cos(), th.sin());
            let v: Vec<f64> = grid.iter().map(|&x| a * x + b * x * x).collect();
            let hi = v.iter().cloned().fold(f64::MIN, f64::max);
            let lo = v.iter().cloned().fold(f64::MAX, f64::min);
            (hi - lo) / 2.0
        })
        .fold(f64::MAX, f64::min)
}

#[test]
fn kplus_poly2_below_brute_force() {
    let r = diam_lower_kplus(&Kernel::poly_no_const(2), &scalars(&[-1.0, 0.0, 1.0])).unwrap();
    let truth = brute_force_half_width(&linspace(-1.0, 1.0, 1001), 10_000);
    assert!(r.diam_lower > 0.0);
    assert!(r.diam_lower <= truth, "{} > {truth}", r.diam_lower);
}

#[test]
fn kminus_delta_on_two_points() {
    let r = diam_lower_kminus(&Kernel::delta(), &scalars(&[0.0, 1.0]), 0.5).unwrap();
    assert_eq!(r.bound_variant, BoundVariant::KMinus);
    assert!(close(r.diam_lower, 0.5 * 0.5f64.sqrt(), 1e-10));
    assert!(r.diam_lower <= 2f64.sqrt());
}

#[test]
fn kminus_preconditions() {
    let err = diam_lower_kminus(&Kernel::constant(1.0), &scalars(&[0.0]), 1.0);
    assert!(matches!(err, Err(Error::Precondition(_))));
    let two_feature = Kernel::feature_map("two", 2, |x| vec![x[0], 1.0]);
    let err = diam_lower_kminus(&two_feature, &scalars(&[0.0]), 1.0);
    assert!(matches!(err, Err(Error::RankDeficient(_))));
}

#[test]
fn mercer_supplied() {
    assert!(close(diam_lower_mercer(4.0, true).unwrap().diam_lower, 1.0, 1e-15));
    assert!(close(diam_lower_mercer(0.01, false).unwrap().diam_lower, 0.05, 1e-12));
    assert!(diam_lower_mercer(4.5, true).is_err());
    assert!(diam_lower_mercer(0.0, true).is_err());
}

#[test]
fn mercer_estimate_orthonormal_features() {
    let m = 8;
    let k = Kernel::feature_map("onehot", m, move |x| {
        let mut v = vec![0.0; m];
        v[x[0] as usize] = 1.0;
        v
    });
    let grid = scalars(&(0..m).map(|i| i as f64).collect::<Vec<_>>());
    assert!(close(mercer_estimate(&k, &grid).unwrap(), 1.0 / m as f64, 1e-12));
    assert!(mercer_estimate(&Kernel::zero(), &grid).is_err());
}

#[test]
fn mercer_estimated_poly2_below_brute_force() {
    let grid = scalars(&linspace(-1.0, 1.0, 201));
    let r = diam_lower_mercer_estimated(&Kernel::poly_no_const(2), &grid, false).unwrap();
    assert_eq!(r.bound_variant, BoundVariant::MercerEstimated);
    assert!(r.estimated);
    assert!(r.diam_lower <= brute_force_half_width(&linspace(-1.0, 1.0, 1001), 10_000));
}

#[test]
fn mercer_estimate_stabilizes_under_refinement() {
    let k = Kernel::poly_no_const(2).plus_constant(true);
    let vals: Vec<f64> = [51, 101, 201, 401]
        .iter()
        .map(|&m| mercer_estimate(&k, &scalars(&linspace(-1.0, 1.0, m))).unwrap())
        .collect();
    let d: Vec<f64> = vals.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    assert!(d[1] < d[0] && d[2] < d[1], "{vals:?}");
}

#[test]
fn k_functional_constant_case() {
    let k = Kernel::delta().minus_constant(0.0).unwrap();
    let grid = scalars(&linspace(0.0, 1.0, 16));
    let est = k_functional(&k, &grid, 1.0, 16).unwrap();
    assert!(est.value <= 1.0 + 1e-12 && est.value >= 1.0 - 1e-3, "{est:?}");
}

#[test]
fn k_functional_bounded_and_monotone() {
    let k = Kernel::poly_no_const(2).plus_constant(false);
    let grid = scalars(&linspace(-1.0, 1.0, 64));
    let ts = [0.01, 0.1, 0.5, 1.0, 3.0];
    let vals: Vec<f64> = ts.iter().map(|&t| k_functional(&k, &grid, t, 3).unwrap().value).collect();
    for v in &vals {
        assert!((0.0..=1.0).contains(v));
    }
    for w in vals.windows(2) {
        assert!(w[1] >= w[0] - 1e-6, "{vals:?}");
    }
    assert!(k_functional(&k, &grid, 0.0, 3).is_err());
}

#[test]
fn counter_mass_examples() {
    assert!(close(counter_mass(1.0, 1.0, 1.0, 1).unwrap(), 0.5, 1e-12));
    assert!(counter_mass(1e-9, 1.0, 1.0, 1).unwrap() < 1e-17);
    let a = counter_mass(0.5, 1.0, 1.0, 1).unwrap();
    let b = counter_mass(0.5, 1.0, 2.0, 1).unwrap();
    assert!(close(b, a / 2.0, 1e-12));
    assert!(counter_mass(2.0, 1.0, 1.0, 1).is_err());
}

#[test]
fn unit_ball_volumes() {
    assert!(close(unit_ball_volume(1), 2.0, 1e-12));
    assert!(close(unit_ball_volume(2), std::f64::consts::PI, 1e-12));
    assert!(close(unit_ball_volume(3), 4.0 / 3.0 * std::f64::consts::PI, 1e-12));
    assert!(unit_ball_volume(400).is_finite());
}

#[test]
fn ball_radius_examples() {
    assert!(close(ball_radius(2.0, 1.0, 1.0, 1).unwrap(), 0.5, 1e-12));
    assert_eq!(ball_radius(0.0, 1.0, 1.0, 1).unwrap(), 0.0);
    let mut prev = 0.0;
    for c in [0.1, 0.5, 1.0, 10.0, 100.0] {
        let r = ball_radius(1.0, c, 1.0, 2).unwrap();
        assert!(r >= prev && r <= 0.5);
        prev = r;
    }
}

// Independent transcription of the threshold: the larger of the two squared terms.
fn threshold_oracle(delta: f64, q: f64, c: f64, l_lip: f64, l: i32, sup_k: f64) -> f64 {
    let beta = std::f64::consts::PI.powf(l as f64 / 2.0) / statrs::function::gamma::gamma(l as f64 / 2.0 + 1.0);
    let s = (2.0 * (1.0 / q).ln()).sqrt();
    let num = s + 96.0 * sup_k.sqrt() / delta;
    let den = c * beta * (delta / (8.0 * l_lip)).powi(l);
    let t1 = (num / den).powi(2);
    let t2 = (4.0 * (4.0 * sup_k.sqrt() + 3.0 * s) / delta).powi(2);
    t1.max(t2).ceil()
}

#[test]
fn sample_threshold_regression() {
    let n = sample_threshold(0.5, 0.1, 1.0, 1.0, 1, 1.0).unwrap();
    assert_eq!(n as f64, threshold_oracle(0.5, 0.1, 1.0, 1.0, 1, 1.0));
    assert_eq!(n, 2_412_330);
    assert!(sample_threshold(1.0, 0.1, 1.0, 1.0, 1, 1.0).unwrap() < n);
    let near_one = sample_threshold(0.5, 1.0 - 1e-12, 1.0, 1.0, 1, 1.0).unwrap() as f64;
    assert!(close(near_one, (96.0f64 / 0.5 / (2.0 * 0.5 / 8.0)).powi(2), 1e-5));
    assert!(sample_threshold(0.5, 1.0, 1.0, 1.0, 1, 1.0).is_err());
}

#[test]
fn ball_report_consistent() {
    let r = ball_report(1.0, 0.1, 1.0, 1.0, 2, 1.0).unwrap();
    assert!(r.delta <= r.b / 2.0);
    assert!(r.n_threshold >= 1);
}

#[test]
fn vc_bound_examples() {
    let c = VcConstants::default();
    assert!(close(vc_uniform_bound(2, 100, 0.0), 12.0 * c.j_one(2) / 10.0, 1e-12));
    let mut prev = f64::MAX;
    for n in [1, 10, 100, 1000, 10_000] {
        let v = vc_uniform_bound(2, n, 2.0);
        assert!(v < prev);
        prev = v;
    }
    let n = vc_circle_crossover(0.2, 0.1, VcConstants { c_tilde: 1e21, j_override: Some(8.0) }).unwrap();
    assert!((n as f64 - 52_000.0).abs() <= 0.05 * 52_000.0, "{n}");
}

#[test]
fn rademacher_examples() {
    let lim = rademacher_bound(1.0, 1.0, 100, 1.0);
    assert!(close(lim, 24.0 / 10.0, 1e-12));
    let a = rademacher_bound(1.0, 1.0, 100, 1.0);
    let b = rademacher_bound(2.0, 1.0, 100, 1.0);
    assert!(close(b, a / 2.0, 1e-12));
    let n = rademacher_circle_crossover(0.2, 0.1, 1.0, false).unwrap();
    assert!((n as f64 - 5000.0).abs() <= 0.05 * 5000.0, "{n}");
    let exact = rademacher_circle_crossover(0.2, 0.1, 1.0, true).unwrap();
    assert!(exact < n);
}

#[test]
fn circle_margins() {
    assert!(close(circle_halfplane_mass(0.0), 0.5, 1e-15));
    assert!(close(circle_halfplane_mass(1.0), 1.0, 1e-15));
    let c = -0.2;
    let g = 1.0;
    let m = 200_000;
    let mc: f64 = (0..m)
        .map(|i| {
            let th = 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / m as f64;
            let s = th.cos() - c;
            if s <= -g {
                1.0
            } else if s >= 0.0 {
                0.0
            } else {
                -s / g
            }
        })
        .sum::<f64>()
        / m as f64;
    assert!((circle_ramp_mass(c, g) - mc).abs() < 1e-8);
}

#[test]
fn crossover_search() {
    assert_eq!(crossover(0.1, |n| 1.0 / n as f64), Some(11));
    assert_eq!(crossover(2.0, |n| 1.0 / n as f64), Some(1));
    assert_eq!(crossover(0.0, |n| 1.0 / n as f64), None);
}

#[test]
fn direct_sum_examples() {
    assert!(close(direct_sum_diam_lower(0.0, 1.0, 1.0, 1.0, 2.0, 5.0).unwrap(), 2.0, 1e-15));
    assert_eq!(direct_sum_diam_lower(0.0, 1.0, 0.0, 0.0, 2.0, 5.0).unwrap(), 0.0);
    assert!(close(direct_sum_diam_lower(1.0, 0.0, 1.0, 1.0, 2.0, 5.0).unwrap(), 5.0, 1e-15));
    assert!(direct_sum_diam_lower(0.5, 0.5, 1.0, 1.0, 2.0, 5.0).is_err());
}

#[test]
fn select_points_full_rank() {
    let grid = scalars(&linspace(-1.0, 1.0, 50));
    let k = Kernel::poly_no_const(2).plus_constant(true);
    let p = select_points(&k, &grid, 3).unwrap();
    assert_eq!(p.len(), 3);
    assert!(diam_lower_kplus(&Kernel::poly_no_const(2), &p).is_ok());
    assert!(select_points(&k, &grid, 4).is_err());
}

#[test]
fn dominant_eig_matches_dense() {
    let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0]);
    let top = *sym_eigenvalues(&m).last().unwrap();
    assert!(close(dominant_eig(&m, EIG_TOL, EIG_MAX_ITER).unwrap(), top, 1e-10));
}
