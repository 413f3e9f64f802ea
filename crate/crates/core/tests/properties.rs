use proptest::prelude::*;
use rkhs_coreset::compress::{error_sq, frank_wolfe, herd};
use rkhs_coreset::counterexample::{run, verify_invariants, Construction};
use rkhs_coreset::kernel::{gram, psd_tolerance, Kernel};
use rkhs_coreset::linalg::sym_eigenvalues;
use rkhs_coreset::points::PointSet;
use rkhs_coreset::spectral::{ball_radius, rademacher_bound, vc_uniform_bound};

fn point_set(max_n: usize, dim: usize) -> impl Strategy<Value = PointSet> {
    prop::collection::vec(prop::collection::vec(-1.0f64..1.0, dim), 1..=max_n)
        .prop_map(|rows| PointSet::new(rows).unwrap())
}

fn kernels() -> Vec<Kernel> {
    vec![
        Kernel::linear(),
        Kernel::poly_no_const(3),
        Kernel::delta(),
        Kernel::poly_no_const(2).plus_constant(false),
        Kernel::linear().squared(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gram_symmetric_psd(pts in point_set(20, 2)) {
        for k in kernels() {
            let g = gram(&k, &pts).unwrap().entries;
            prop_assert_eq!(&g, &g.transpose());
            let low = sym_eigenvalues(&g)[0];
            prop_assert!(low >= -psd_tolerance(&g), "{} {}", k.id(), low);
        }
    }

    #[test]
    fn squared_gram_is_entrywise_square(pts in point_set(12, 2)) {
        let k = Kernel::poly_no_const(2);
        let g = gram(&k, &pts).unwrap().entries;
        let s = gram(&k.squared(), &pts).unwrap().entries;
        prop_assert_eq!(s, g.component_mul(&g));
    }

    #[test]
    fn sum_and_weighted_grams(pts in point_set(12, 2)) {
        let k = Kernel::poly_no_const(2);
        let inner: Vec<Vec<f64>> = pts.rows().map(|r| vec![r[1]]).collect();
        let inner = PointSet::new(inner).unwrap();
        let g = gram(&k, &inner).unwrap().entries;
        let gy = gram(&k.y_weighted(), &pts).unwrap().entries;
        let y: Vec<f64> = pts.rows().map(|r| r[0]).collect();
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                prop_assert_eq!(gy[(i, j)], y[i] * y[j] * g[(i, j)]);
            }
        }
        let ge = gram(&k.extended(), &pts).unwrap().entries;
        prop_assert_eq!(&ge, &g.component_mul(&g));
        let gs = gram(&k.extended().sum(&k.y_weighted()), &pts).unwrap().entries;
        prop_assert_eq!(gs, &ge + &gy);
    }

    #[test]
    fn coreset_weights_on_simplex(pts in point_set(30, 2), t in 1usize..15) {
        let k = Kernel::poly_no_const(3);
        let run = herd(&k, &pts, t, 0).unwrap();
        let (fw, _) = frank_wolfe(&k, &pts, t).unwrap();
        for c in [&run.coreset, &fw] {
            prop_assert!(c.weights.iter().all(|&w| w >= 0.0));
            prop_assert!((c.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(c.indices.iter().all(|&i| i < pts.len()));
        }
    }

    #[test]
    fn frank_wolfe_error_non_increasing(pts in point_set(40, 2), t in 2usize..25) {
        let k = Kernel::poly_no_const(2);
        let (c, trace) = frank_wolfe(&k, &pts, t).unwrap();
        let errs = trace.errors();
        for w in errs.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
        let direct = error_sq(&k, &c, &pts).unwrap();
        prop_assert!((direct - trace.last_error_sq()).abs() <= 1e-9 * direct.max(1e-3));
    }

    #[test]
    fn herding_error_matches_direct(pts in point_set(40, 1), t in 1usize..20) {
        let k = Kernel::poly_no_const(2);
        let run = herd(&k, &pts, t, 0).unwrap();
        let direct = error_sq(&k, &run.coreset, &pts).unwrap();
        prop_assert!((direct - run.trace.last_error_sq()).abs() <= 1e-9 * direct.max(1e-3));
    }

    #[test]
    fn ball_radius_at_most_half_b(b in 0.0f64..10.0, c in 0.01f64..100.0, l_lip in 0.1f64..10.0, l in 1usize..6) {
        prop_assert!(ball_radius(b, c, l_lip, l).unwrap() <= b / 2.0);
    }

    #[test]
    fn deviation_bounds_decrease_in_n(n in 1u64..1_000_000, x in 0.0f64..10.0, p in 0.01f64..0.99) {
        prop_assert!(vc_uniform_bound(2, n + 1, x) < vc_uniform_bound(2, n, x));
        prop_assert!(rademacher_bound(1.0, p, n + 1, 1.0) < rademacher_bound(1.0, p, n, 1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn counterexample_norm_tracking(n_max in 4u32..20, t in 50usize..1500) {
        let cons = Construction::new(n_max).unwrap();
        let state = run(&cons, t).unwrap();
        let rep = verify_invariants(&state, &cons);
        prop_assert!(rep.norm_consistency < 1e-9);
    }
}
