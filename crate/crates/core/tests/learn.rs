use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rkhs_coreset::compress::{error_sq, frank_wolfe, Coreset};
use rkhs_coreset::kernel::{gram, Kernel};
use rkhs_coreset::learn::*;
use rkhs_coreset::points::PointSet;

fn sample(seed: u64, n: usize) -> (PointSet, Vec<f64>) {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
    let ys: Vec<f64> = xs.iter().map(|x| x * x - 0.5 * x + r.random_range(-0.1..0.1)).collect();
    (PointSet::from_scalars(&xs).unwrap(), ys)
}

#[test]
fn full_coreset_matches_dense_ridge() {
    let (pts, y) = sample(1, 30);
    let k = Kernel::poly_no_const(3);
    let lambda = 0.1;
    let reg = krr_fit(&k, &Coreset::full(&pts), &pts, &y, lambda, KrrMode::Suboptimal).unwrap();
    let kk = gram(&k, &pts).unwrap().entries;
    let n = pts.len();
    let a = &kk + DMatrix::identity(n, n) * (lambda * n as f64);
    let alpha = a.lu().solve(&DVector::from_vec(y.clone())).unwrap();
    for (x, o) in reg.alpha.iter().zip(alpha.iter()) {
        assert!((x - o).abs() < 1e-9 * o.abs().max(1.0));
    }
}

#[test]
fn linear_prediction_is_feature_space_dot() {
    let (pts, y) = sample(2, 20);
    let reg = krr_fit(&Kernel::linear(), &Coreset::full(&pts), &pts, &y, 0.05, KrrMode::Suboptimal).unwrap();
    let w: f64 = reg.alpha.iter().zip(&reg.support_points).map(|(a, s)| a * s[0]).sum();
    for x in [-0.7, 0.1, 0.9] {
        assert!((krr_predict(&reg, &[x]).unwrap() - w * x).abs() < 1e-12);
    }
}

#[test]
fn minimal_norm_solves_normal_equations() {
    let (pts, y) = sample(3, 40);
    let k = Kernel::poly_no_const(2);
    let (c, _) = frank_wolfe(&k, &pts, 8).unwrap();
    for mode in [KrrMode::Suboptimal, KrrMode::MinimalNorm] {
        let reg = krr_fit(&k, &c, &pts, &y, 0.01, mode).unwrap();
        let res = krr_normal_residual(&reg, &pts, &y).unwrap();
        if mode == KrrMode::MinimalNorm {
            assert!(res < 1e-8, "{res}");
        }
        assert!(reg.alpha.iter().all(|a| a.is_finite()));
    }
}

#[test]
fn identity_regularizer_differs_from_weighted() {
    let (pts, y) = sample(4, 25);
    let k = Kernel::poly_no_const(2);
    let c = Coreset::full(&pts);
    let a = krr_fit_with(&k, &c, &pts, &y, 0.1, KrrMode::Suboptimal, Regularizer::Identity).unwrap();
    let b = krr_fit_with(&k, &c, &pts, &y, 0.1 / 25.0, KrrMode::Suboptimal, Regularizer::InverseWeights).unwrap();
    for (x, z) in a.alpha.iter().zip(&b.alpha) {
        assert!((x - z).abs() < 1e-9 * x.abs().max(1.0));
    }
}

#[test]
fn regressor_needs_kernel_after_deserialization() {
    let (pts, y) = sample(5, 10);
    let reg = krr_fit(&Kernel::linear(), &Coreset::full(&pts), &pts, &y, 0.1, KrrMode::Suboptimal).unwrap();
    let json = serde_json::to_string(&reg).unwrap();
    let back: Regressor = serde_json::from_str(&json).unwrap();
    assert!(krr_predict(&back, &[0.3]).is_err());
    let back = back.with_kernel(Kernel::linear());
    assert_eq!(krr_predict(&back, &[0.3]).unwrap(), krr_predict(&reg, &[0.3]).unwrap());
}

#[test]
fn mmd_singletons() {
    let a = PointSet::from_scalars(&[0.0]).unwrap();
    let b = PointSet::from_scalars(&[1.0]).unwrap();
    assert_eq!(mmd_sq(&Kernel::delta(), &a, &b).unwrap().mmd_sq, 2.0);
    assert_eq!(mmd_sq(&Kernel::delta(), &a, &a).unwrap().mmd_sq, 0.0);
    let l = mmd_sq(&Kernel::linear(), &PointSet::from_scalars(&[2.0]).unwrap(), &b).unwrap();
    assert!((l.mmd_sq - 1.0).abs() < 1e-15);
    let two_d = PointSet::new(vec![vec![0.0, 1.0]]).unwrap();
    assert!(mmd_sq(&Kernel::linear(), &a, &two_d).is_err());
}

#[test]
fn compressed_mmd_within_budget() {
    let (a, _) = sample(6, 80);
    let (b, _) = sample(7, 60);
    let k = Kernel::poly_no_const(3);
    let exact = mmd_sq(&k, &a, &b).unwrap().mmd_sq.sqrt();
    let (ca, _) = frank_wolfe(&k, &a, 6).unwrap();
    let (cb, _) = frank_wolfe(&k, &b, 6).unwrap();
    let r = mmd_sq_compressed(&k, &ca, &a, &cb, &b).unwrap();
    assert_eq!(r.mode, MmdMode::Compressed);
    let floor = (64.0 * f64::EPSILON * 3.0).sqrt();
    assert!((r.mmd_sq.sqrt() - exact).abs() <= r.error_budget.unwrap() + floor);
}

#[test]
fn hierarchical_single_batch_equals_frank_wolfe() {
    let (pts, _) = sample(8, 30);
    let k = Kernel::poly_no_const(2);
    let h = hierarchical_compress(&k, &pts, 30, 30, 5).unwrap();
    let (fw, _) = frank_wolfe(&k, &pts, 5).unwrap();
    let e1 = error_sq(&k, &h.coreset, &pts).unwrap();
    let e2 = error_sq(&k, &fw, &pts).unwrap();
    assert!((e1 - e2).abs() < 1e-10, "{e1} vs {e2}");
    assert!(e1.sqrt() <= h.total_budget() + 1e-7);
}

#[test]
fn hierarchical_defaults_values() {
    assert_eq!(hierarchical_defaults(100), (10, 7));
    assert_eq!(hierarchical_defaults(1), (1, 1));
}

#[test]
fn simultaneous_coreset_needs_labels() {
    let (pts, y) = sample(9, 30);
    let k = Kernel::poly_no_const(2);
    assert!(simultaneous_coreset(&k, &pts, 5, Algo::FrankWolfe, false).is_err());
    let labelled = pts.with_labels(y).unwrap();
    let (c, trace) = simultaneous_coreset(&k, &labelled, 5, Algo::Herd, true).unwrap();
    assert_eq!(c.source_id, labelled.id());
    assert_eq!(trace.steps.len(), 5);
}
