use std::collections::HashMap;

use rkhs_coreset::counterexample::*;

#[test]
fn constants() {
    assert_eq!(c_constant(), 64.0);
    assert_eq!(chain_length(1), 1);
    assert_eq!(chain_length(2), 4);
    assert_eq!(chain_length(3), 6);
    assert_eq!(chain_length(5), 13);
    let c = Construction::new(10).unwrap();
    assert_eq!(c.big_n(2), 4);
    assert!((c.beta(2) + 1.0 / 8.0).abs() < 1e-15);
    assert!(Construction::new(1).is_err());
    assert!(Construction::new(N_MAX_LIMIT + 1).is_err());
}

#[test]
fn adjacent_chain_atoms_overlap_in_one_coordinate() {
    let c = Construction::new(6).unwrap();
    for n in 2..=5 {
        for i in 1..=c.big_n(n) {
            let a = c.atom(AtomKind::C(n, i)).unwrap();
            let next = if i < c.big_n(n) { AtomKind::C(n, i + 1) } else { AtomKind::C(n + 1, 1) };
            let b = c.atom(next).unwrap();
            let mut s = SparseVec::default();
            s.axpy(1.0, &a);
            let expected = if i < c.big_n(n) {
                c.beta(n) * c.beta(n) - c.alpha(n, i + 1).powi(2)
            } else {
                -c.alpha(n + 1, 1).powi(2)
            };
            assert!((s.dot(&b) - expected).abs() < 1e-14);
        }
    }
    assert!(c.atom(AtomKind::C(2, 5)).is_err());
    assert!(c.atom(AtomKind::D(1)).is_err());
}

// Dense herding over the full atom list, ties resolved by list order.
fn brute_force_choices(cons: &Construction, t_max: usize) -> Vec<AtomKind> {
    let atoms = cons.atoms(cons.n_max);
    let mut w: HashMap<BasisIndex, f64> = HashMap::new();
    for (b, v) in &cons.atom(AtomKind::C(1, 1)).unwrap().vec {
        *w.entry(*b).or_default() += v;
    }
    let mut out = Vec::new();
    for _ in 0..t_max {
        let scores: Vec<f64> =
            atoms.iter().map(|a| a.vec.iter().map(|(b, v)| w.get(b).copied().unwrap_or(0.0) * v).sum()).collect();
        let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let tol = TIE_TOL * best.abs().max(1.0);
        let k = scores.iter().position(|&s| s >= best - tol).unwrap();
        for (b, v) in &atoms[k].vec {
            *w.entry(*b).or_default() -= v;
        }
        out.push(atoms[k].kind);
    }
    out
}

#[test]
fn lazy_candidates_match_brute_force() {
    let cons = Construction::new(7).unwrap();
    let t = 600;
    let state = run(&cons, t).unwrap();
    assert_eq!(state.chosen_log, brute_force_choices(&cons, t));
}

#[test]
fn invariants_hold() {
    let cons = Construction::new(30).unwrap();
    let state = run(&cons, 5000).unwrap();
    let rep = verify_invariants(&state, &cons);
    assert!(rep.passed, "{rep:?}");
    assert_eq!(rep.violations, [0; 4]);
    assert!(rep.norm_consistency < 1e-9);
    for (k, kind) in state.chosen_log.iter().enumerate().take(3) {
        assert!(matches!(kind, AtomKind::A(_) | AtomKind::B(_) | AtomKind::C(..) | AtomKind::D(_)), "{k}");
    }
}

#[test]
fn divergence_bound_sign() {
    assert_eq!(first_positive_bound(), 46);
    assert!(divergence_bound(45) <= 0.0);
    assert!(divergence_bound(46) > 0.0);
}

#[test]
fn norm_grows_past_first_peak() {
    let cons = Construction::new(40).unwrap();
    let state = run(&cons, 20_000).unwrap();
    let d = divergence_check(&state);
    assert_eq!(d.violations, 0);
    assert!(d.exceeds_first_peak);
    assert!(d.max_norm > 3.0);
}

#[test]
fn figure2_rows_respect_lower_bound() {
    let cons = Construction::new(20).unwrap();
    let state = run(&cons, 20_000).unwrap();
    let rows = figure2_data(&state, &cons, &[5, 10]).unwrap();
    assert_eq!(rows.len(), 4 + 9);
    for r in &rows {
        assert!(r.abs_coef >= r.lower_bound - 1e-9, "{r:?}");
    }
    assert!(figure2_data(&state, &cons, &[20]).is_err());
}

#[test]
fn measure_representation() {
    let rep = measure_mean_check(12).unwrap();
    assert!(rep.passed, "{rep:?}");
    assert!(rep.coordinates_checked > 0);
}
