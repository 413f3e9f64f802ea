use nalgebra::DMatrix;
use rkhs_coreset::error::Error;
use rkhs_coreset::kernel::{estimate_const_norm, gram, Kernel, KernelConfig, Monomial};
use rkhs_coreset::points::{grid, linspace, PointSet};

fn scalars(xs: &[f64]) -> PointSet {
    PointSet::from_scalars(xs).unwrap()
}

#[test]
fn delta_gram_on_distinct_points_is_identity() {
    let g = gram(&Kernel::delta(), &scalars(&[1.0, 2.0, 3.0])).unwrap();
    assert_eq!(g.entries, DMatrix::identity(3, 3));
}

#[test]
fn two_feature_kernel_gram_is_diagonal() {
    let r = 0.7;
    let k = Kernel::feature_map("h_f", 2, move |x| {
        let (h, f) = if x[0] == 0.0 { (1.0, 0.0) } else { (0.0, r) };
        vec![h, f]
    });
    let g = gram(&k, &scalars(&[0.0, 1.0])).unwrap();
    assert_eq!(g.entries, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, r * r]));
}

#[test]
fn poly_two_at_one() {
    assert_eq!(Kernel::poly_no_const(2).eval(&[1.0], &[1.0]), 2.0);
    assert_eq!(Kernel::poly_no_const(3).eval(&[2.0], &[0.5]), 3.0);
}

#[test]
fn non_finite_entry_is_named() {
    let k = Kernel::feature_map("inv", 1, |x| vec![1.0 / x[0]]);
    match gram(&k, &scalars(&[1.0, 0.0])) {
        Err(Error::NonFinite { i, j }) => assert_eq!((i, j), (0, 1)),
        other => panic!("expected a non-finite error, got {other:?}"),
    }
}

#[test]
fn plus_constant_examples() {
    let one = Kernel::zero().plus_constant(false);
    assert_eq!(one.eval(&[3.0], &[-2.0]), 1.0);
    let kp = Kernel::linear().plus_constant(true);
    assert_eq!(kp.eval(&[1.0], &[-1.0]), 0.0);

    let pts = scalars(&[-1.0, -0.2, 0.5, 0.9]);
    let k = Kernel::poly_no_const(3);
    let a = gram(&k.plus_constant(true), &pts).unwrap().entries;
    let b = gram(&k, &pts).unwrap().entries.add_scalar(1.0);
    assert_eq!(a, b);
    assert_eq!(k.plus_constant(true).meta().dim_rkhs, Some(4));
    assert_eq!(k.plus_constant(false).meta().dim_rkhs, None);
}

#[test]
fn minus_constant_examples() {
    let km = Kernel::delta().minus_constant(0.5).unwrap();
    assert_eq!(km.eval(&[0.0], &[0.0]), 0.5);
    assert_eq!(km.eval(&[0.0], &[1.0]), -0.5);

    let k = Kernel::poly_no_const(2);
    let same = k.minus_constant(0.0).unwrap();
    assert_eq!(same.id(), k.id());

    let zero = Kernel::constant(1.0).minus_constant(1.0).unwrap();
    assert_eq!(zero.eval(&[0.3], &[4.0]), 0.0);

    assert!(matches!(Kernel::delta().minus_constant(-1.0), Err(Error::Precondition(_))));
}

#[test]
fn minus_constant_checked_rejects_indefinite() {
    let g = scalars(&[0.0, 1.0]);
    assert!(Kernel::delta().minus_constant_checked(0.5, &g).is_ok());
    assert!(matches!(Kernel::delta().minus_constant_checked(0.9, &g), Err(Error::InvalidConstant { .. })));
}

#[test]
fn plus_minus_round_trip() {
    let pts = grid(&[(-1.0, 1.0), (-1.0, 1.0)], 4).unwrap();
    for k in [Kernel::linear(), Kernel::poly_no_const(3), Kernel::delta()] {
        let back = k.plus_constant(false).minus_constant(1.0).unwrap();
        let a = gram(&back, &pts).unwrap().entries;
        let b = gram(&k, &pts).unwrap().entries;
        assert!((a - b).amax() <= 1e-12);
    }
}

#[test]
fn constant_norm_estimates() {
    let n = estimate_const_norm(&Kernel::delta(), &scalars(&[0.0, 1.0])).unwrap();
    assert!((n - 2.0).abs() < 1e-12);
    let n = estimate_const_norm(&Kernel::constant(1.0), &scalars(&[-0.3, 0.1, 0.8])).unwrap();
    assert!((n - 1.0).abs() < 1e-12);
    let err = estimate_const_norm(&Kernel::poly_no_const(4), &scalars(&linspace(-1.0, 1.0, 9)));
    assert!(matches!(err, Err(Error::ConstantNotRepresentable { .. })));
}

#[test]
fn squared_examples() {
    let sq = Kernel::delta().squared();
    assert_eq!(sq.eval(&[1.0], &[1.0]), 1.0);
    assert_eq!(sq.eval(&[1.0], &[2.0]), 0.0);
    assert_eq!(Kernel::linear().squared().eval(&[2.0], &[3.0]), 36.0);
}

#[test]
fn extended_ignores_labels() {
    let e = Kernel::linear().extended();
    assert_eq!(e.eval(&[5.0, 2.0], &[-7.0, 3.0]), 36.0);
    assert_eq!(Kernel::delta().extended().eval(&[1.0, 4.0], &[9.0, 4.0]), 1.0);
    assert_eq!(Kernel::delta().extended().eval(&[1.0, 4.0], &[1.0, 5.0]), 0.0);
}

#[test]
fn y_weighted_examples() {
    let k = Kernel::poly_no_const(2);
    let ky = k.y_weighted();
    assert_eq!(ky.eval(&[1.0, 0.4], &[1.0, -0.3]), k.eval(&[0.4], &[-0.3]));
    assert_eq!(ky.eval(&[0.0, 0.4], &[2.0, 0.9]), 0.0);
    assert_eq!(Kernel::delta().y_weighted().eval(&[2.0, 1.0], &[3.0, 1.0]), 6.0);
}

#[test]
fn sum_examples() {
    let k = Kernel::poly_no_const(2);
    let s = k.sum(&Kernel::zero());
    assert_eq!(s.eval(&[0.3], &[0.6]), k.eval(&[0.3], &[0.6]));

    let d = k.extended().sum(&k.y_weighted());
    let (x, xp) = (0.4, -0.8);
    let kv = k.eval(&[x], &[xp]);
    assert_eq!(d.eval(&[1.0, x], &[1.0, xp]), kv * kv + kv);
}

#[test]
fn config_round_trip() {
    let ks = [
        Kernel::poly_no_const(3).plus_constant(false),
        Kernel::delta().minus_constant(0.5).unwrap(),
        Kernel::linear().direct_sum(),
        Kernel::monomials(vec![Monomial { coef: 2.0, powers: vec![1, 0] }, Monomial { coef: 1.0, powers: vec![0, 2] }]),
    ];
    let pts = PointSet::new(vec![vec![0.5, -1.0], vec![0.25, 2.0], vec![-0.75, 0.1]]).unwrap();
    for k in ks {
        let cfg = k.config().unwrap();
        let json = serde_json::to_string(&cfg).unwrap();
        let back: KernelConfig = serde_json::from_str(&json).unwrap();
        let k2 = back.build().unwrap();
        assert_eq!(gram(&k, &pts).unwrap().entries, gram(&k2, &pts).unwrap().entries);
    }
    assert!(Kernel::feature_map("f", 1, |x| vec![x[0]]).config().is_none());
    let bad: KernelConfig = serde_json::from_str(r#"{"kind":"gaussian","params":{}}"#).unwrap();
    assert!(bad.build().is_err());
}

#[test]
fn point_set_validation() {
    assert!(PointSet::new(vec![]).is_err());
    assert!(PointSet::new(vec![vec![1.0], vec![f64::NAN]]).is_err());
    assert!(PointSet::new(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
    assert!(scalars(&[1.0, 2.0]).with_labels(vec![1.0]).is_err());
    let p = scalars(&[1.0, 2.0]).with_labels(vec![3.0, 4.0]).unwrap();
    let a = p.augmented().unwrap();
    assert_eq!(a.row(1), &[4.0, 2.0]);
    assert_eq!(p.id(), scalars(&[1.0, 2.0]).with_labels(vec![3.0, 4.0]).unwrap().id());
    assert_ne!(p.id(), scalars(&[1.0, 2.5]).id());
}
