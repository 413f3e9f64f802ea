//! A sequence-space instance on which kernel herding fails to converge.
//!
//! The Hilbert space has orthonormal directions `e_n` and `e~_{n,i}`. Atoms
//! `a_n`, `b_n` live on `e_n`, chains `c_{n,i}` couple `e_n` with two
//! neighbouring `e~` directions, and `d_n` sit on `e~_{n,1}`. Herding starts
//! at `w_1 = c_{1,1}` with target mean zero. The number `N_n` of chain atoms
//! grows like `2^n / n`, so chain atoms are only generated where `w` touches
//! them.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Largest supported truncation level.
pub const N_MAX_LIMIT: u32 = 60;
/// Relative tie tolerance for the greedy step.
pub const TIE_TOL: f64 = 1e-12;
/// Absolute tolerance of every invariant comparison.
pub const INVARIANT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BasisIndex {
    E(u32),
    ETilde(u32, u64),
}

/// Atom labels. The derived order (A < B < C < D, then indices) is the
/// tie-breaking order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AtomKind {
    A(u32),
    B(u32),
    C(u32, u64),
    D(u32),
}

impl AtomKind {
    pub fn letter(&self) -> char {
        match self {
            AtomKind::A(_) => 'a',
            AtomKind::B(_) => 'b',
            AtomKind::C(..) => 'c',
            AtomKind::D(_) => 'd',
        }
    }

    pub fn n(&self) -> u32 {
        match *self {
            AtomKind::A(n) | AtomKind::B(n) | AtomKind::D(n) | AtomKind::C(n, _) => n,
        }
    }

    /// Second index; 0 for atoms without one.
    pub fn i(&self) -> u64 {
        match *self {
            AtomKind::C(_, i) => i,
            _ => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub kind: AtomKind,
    pub vec: Vec<(BasisIndex, f64)>,
}

impl Atom {
    pub fn norm_sq(&self) -> f64 {
        self.vec.iter().map(|(_, v)| v * v).sum()
    }
}

/// `4 ceil(3 + 4 ln 9 / ln 2)`.
pub fn c_constant() -> f64 {
    4.0 * (3.0 + 4.0 * 9f64.ln() / 2f64.ln()).ceil()
}

/// `ceil(2^{n+1} / n)` for `n >= 2`, and 1 for `n = 1`.
pub fn chain_length(n: u32) -> u64 {
    if n <= 1 {
        return 1;
    }
    let num = 1u128 << (n + 1);
    num.div_ceil(n as u128) as u64
}

/// Closed-form constants of the construction up to `n_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Construction {
    pub n_max: u32,
    pub c: f64,
    a_prime: Vec<f64>,
    big_n: Vec<u64>,
    beta: Vec<f64>,
}

impl Construction {
    pub fn new(n_max: u32) -> Result<Self> {
        if !(2..=N_MAX_LIMIT).contains(&n_max) {
            return Err(Error::Invalid(format!("n_max must lie in 2..={N_MAX_LIMIT}, got {n_max}")));
        }
        let c = c_constant();
        let top = n_max as usize + 1;
        let mut a_prime = vec![f64::NAN; top + 1];
        let mut big_n = vec![0u64; top + 1];
        let mut beta = vec![f64::NAN; top + 1];
        for n in 1..=top {
            let p = 2f64.powi(n as i32);
            a_prime[n] = c * (p / ((n + 1) as f64).ln()).ceil() / p;
            big_n[n] = chain_length(n as u32);
            beta[n] = -1.0 / (n as f64 * big_n[n] as f64);
        }
        Ok(Self { n_max, c, a_prime, big_n, beta })
    }

    pub fn a_prime(&self, n: u32) -> f64 {
        self.a_prime[n as usize]
    }

    /// `<a_n, e_n> = a'_n + 1/n`
    pub fn a_coef(&self, n: u32) -> f64 {
        self.a_prime[n as usize] + 1.0 / n as f64
    }

    /// `<b_n, e_n> = -2^{-n}`
    pub fn b_coef(&self, n: u32) -> f64 {
        -(2f64.powi(-(n as i32)))
    }

    pub fn big_n(&self, n: u32) -> u64 {
        self.big_n[n as usize]
    }

    pub fn beta(&self, n: u32) -> f64 {
        self.beta[n as usize]
    }

    /// `alpha_{n,i} = sqrt(<e_n, a_n> / n + (i - 1) beta_n^2)`. Every use of an
    /// `alpha` goes through here so that coefficients cancel exactly.
    pub fn alpha(&self, n: u32, i: u64) -> f64 {
        let b = self.beta(n);
        (self.a_coef(n) / n as f64 + (i - 1) as f64 * b * b).sqrt()
    }

    fn check_kind(&self, kind: AtomKind) -> Result<()> {
        let ok = match kind {
            AtomKind::A(n) | AtomKind::B(n) => (1..=self.n_max).contains(&n),
            AtomKind::C(1, i) => i == 1,
            AtomKind::C(n, i) => (2..=self.n_max).contains(&n) && (1..=self.big_n(n)).contains(&i),
            AtomKind::D(n) => (2..=self.n_max).contains(&n),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!("atom {kind:?} is outside the construction")))
        }
    }

    /// The atom with the given label. The last chain atom at `n_max` omits its
    /// component along `e~_{n_max+1,1}`.
    pub fn atom(&self, kind: AtomKind) -> Result<Atom> {
        self.check_kind(kind)?;
        use BasisIndex::*;
        let vec = match kind {
            AtomKind::A(n) => vec![(E(n), self.a_coef(n))],
            AtomKind::B(n) => vec![(E(n), self.b_coef(n))],
            AtomKind::C(1, _) => vec![(E(1), 1.0), (ETilde(2, 1), self.alpha(2, 1))],
            AtomKind::C(n, i) => {
                let mut v = vec![(E(n), self.beta(n)), (ETilde(n, i), self.alpha(n, i))];
                if i < self.big_n(n) {
                    v.push((ETilde(n, i + 1), -self.alpha(n, i + 1)));
                } else if n < self.n_max {
                    v.push((ETilde(n + 1, 1), -self.alpha(n + 1, 1)));
                }
                v
            }
            AtomKind::D(2) => vec![(ETilde(2, 1), -0.5 * self.alpha(2, 1))],
            AtomKind::D(n) => vec![(ETilde(n, 1), 0.5 * self.alpha(n, 1))],
        };
        Ok(Atom { kind, vec })
    }

    /// All `a_n`, `b_n`, `d_n` and the chain atoms with `n <= chain_limit`.
    pub fn atoms(&self, chain_limit: u32) -> Vec<Atom> {
        let mut out = Vec::new();
        for n in 1..=self.n_max {
            out.push(self.atom(AtomKind::A(n)).unwrap());
        }
        for n in 1..=self.n_max {
            out.push(self.atom(AtomKind::B(n)).unwrap());
        }
        out.push(self.atom(AtomKind::C(1, 1)).unwrap());
        for n in 2..=chain_limit.min(self.n_max) {
            for i in 1..=self.big_n(n) {
                out.push(self.atom(AtomKind::C(n, i)).unwrap());
            }
        }
        for n in 2..=self.n_max {
            out.push(self.atom(AtomKind::D(n)).unwrap());
        }
        out
    }
}

/// Builds the construction and the atoms `a_n`, `b_n`, `d_n` and `c_{1,1}`;
/// chain atoms for `n >= 2` come from [`Construction::atom`] on demand.
pub fn build_atoms(n_max: u32) -> Result<(Construction, Vec<Atom>)> {
    let c = Construction::new(n_max)?;
    let atoms = c.atoms(1);
    Ok((c, atoms))
}

/// Sparse vector over the basis; coefficients along `e~` that cancel to zero
/// are removed.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVec {
    e: Vec<f64>,
    et: BTreeMap<(u32, u64), f64>,
}

impl SparseVec {
    pub fn get(&self, idx: BasisIndex) -> f64 {
        match idx {
            BasisIndex::E(n) => self.e.get(n as usize - 1).copied().unwrap_or(0.0),
            BasisIndex::ETilde(n, i) => self.et.get(&(n, i)).copied().unwrap_or(0.0),
        }
    }

    pub fn e(&self, n: u32) -> f64 {
        self.get(BasisIndex::E(n))
    }

    pub fn add(&mut self, idx: BasisIndex, v: f64) {
        match idx {
            BasisIndex::E(n) => {
                let k = n as usize - 1;
                if self.e.len() <= k {
                    self.e.resize(k + 1, 0.0);
                }
                self.e[k] += v;
            }
            BasisIndex::ETilde(n, i) => {
                let slot = self.et.entry((n, i)).or_insert(0.0);
                *slot += v;
                if *slot == 0.0 {
                    self.et.remove(&(n, i));
                }
            }
        }
    }

    pub fn axpy(&mut self, s: f64, atom: &Atom) {
        for &(idx, v) in &atom.vec {
            self.add(idx, s * v);
        }
    }

    pub fn dot(&self, atom: &Atom) -> f64 {
        atom.vec.iter().map(|&(idx, v)| self.get(idx) * v).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.e.iter().map(|v| v * v).sum::<f64>() + self.et.values().map(|v| v * v).sum::<f64>()
    }

    /// Nonzero coefficients along `e_n`, as `(n, value)`.
    pub fn e_entries(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.e.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(k, &v)| (k as u32 + 1, v))
    }

    pub fn et_entries(&self) -> impl Iterator<Item = ((u32, u64), f64)> + '_ {
        self.et.iter().map(|(&k, &v)| (k, v))
    }

    pub fn is_zero(&self) -> bool {
        self.et.is_empty() && self.e.iter().all(|v| *v == 0.0)
    }
}

/// A finished herding run: `snapshots[k]` is `w_{k+1}`, the iterate before
/// step `k + 1`, and `chosen_log[k]` the atom chosen there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HerdState {
    pub t: usize,
    pub w: SparseVec,
    pub chosen_log: Vec<AtomKind>,
    pub norm_sq_trace: Vec<f64>,
    pub snapshots: Vec<SparseVec>,
    /// Steps at which another atom scored within the tie tolerance.
    pub ties: Vec<usize>,
}

fn candidates(cons: &Construction, w: &SparseVec) -> BTreeSet<AtomKind> {
    let mut out = BTreeSet::new();
    let n_max = cons.n_max;
    let nonzero_et: BTreeSet<(u32, u64)> = w.et.keys().copied().collect();
    out.insert(AtomKind::C(1, 1));
    for (n, _) in w.e_entries() {
        if n > n_max {
            continue;
        }
        out.insert(AtomKind::A(n));
        out.insert(AtomKind::B(n));
        if n >= 2 {
            // chain atoms of level n that touch no nonzero e~ all score
            // beta_n <w, e_n>; the first of them represents the rest
            let nn = cons.big_n(n);
            let touches = |i: u64| {
                nonzero_et.contains(&(n, i))
                    || (i < nn && nonzero_et.contains(&(n, i + 1)))
                    || (i == nn && n < n_max && nonzero_et.contains(&(n + 1, 1)))
            };
            if let Some(i) = (1..=nn).find(|&i| !touches(i)) {
                out.insert(AtomKind::C(n, i));
            }
        }
    }
    for &(n, i) in &nonzero_et {
        if n > n_max || i > cons.big_n(n) {
            continue;
        }
        out.insert(AtomKind::C(n, i));
        if i >= 2 {
            out.insert(AtomKind::C(n, i - 1));
        } else {
            if n >= 3 {
                out.insert(AtomKind::C(n - 1, cons.big_n(n - 1)));
            }
            out.insert(AtomKind::D(n));
        }
    }
    out
}

/// Runs `t_max` herding steps from `w_1 = c_{1,1}`, choosing the atom with
/// the largest inner product with `w_t` and setting `w_{t+1} = w_t - x_t`.
pub fn run(cons: &Construction, t_max: usize) -> Result<HerdState> {
    if t_max == 0 {
        return Err(Error::Invalid("T must be at least 1".into()));
    }
    let mut w = SparseVec::default();
    let c11 = cons.atom(AtomKind::C(1, 1))?;
    w.axpy(1.0, &c11);
    let mut norm_sq = w.norm_sq();
    let mut state = HerdState {
        t: 0,
        w: SparseVec::default(),
        chosen_log: Vec::with_capacity(t_max),
        norm_sq_trace: Vec::with_capacity(t_max),
        snapshots: Vec::with_capacity(t_max),
        ties: Vec::new(),
    };
    for t in 1..=t_max {
        state.snapshots.push(w.clone());
        state.norm_sq_trace.push(norm_sq);
        let mut scored = Vec::new();
        for kind in candidates(cons, &w) {
            let atom = cons.atom(kind)?;
            scored.push((w.dot(&atom), atom));
        }
        let best = scored.iter().map(|(v, _)| *v).fold(f64::NEG_INFINITY, f64::max);
        if !(best > 0.0) {
            return Err(Error::Boundary { t });
        }
        let tol = TIE_TOL * best.abs().max(1.0);
        let mut close = scored.iter().filter(|(v, _)| *v >= best - tol);
        let (value, atom) = close.next().expect("best is attained");
        if close.next().is_some() {
            state.ties.push(t);
        }
        norm_sq += -2.0 * value + atom.norm_sq();
        w.axpy(-1.0, atom);
        state.chosen_log.push(atom.kind);
    }
    state.t = t_max;
    state.w = w;
    Ok(state)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub t: usize,
    pub item: u8,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub steps: usize,
    /// Largest `n` with `a_n` chosen.
    pub horizon_n: u32,
    /// Violation counts for items (1) to (4).
    pub violations: [usize; 4],
    pub first_failure: Option<Violation>,
    /// Largest relative gap between the tracked and recomputed `||w_t||^2`.
    pub norm_consistency: f64,
    pub passed: bool,
}

/// `ceil(1 + log2(n ln(n + 1)))`
pub fn lower_index(n: u32) -> u32 {
    let nf = n as f64;
    (1.0 + (nf * (nf + 1.0).ln()).log2()).ceil() as u32
}

/// `min(a'_j, max(2^j <a_n, e_n> / n - 2^{-j}, 0))`
pub fn gamma_lower(cons: &Construction, j: u32, n: u32) -> f64 {
    let pj = 2f64.powi(j as i32);
    cons.a_prime(j).min((pj * cons.a_coef(n) / n as f64 - 1.0 / pj).max(0.0))
}

/// Smallest `a` index not chosen before each step, for every step.
fn frontier_a(state: &HerdState) -> Vec<u32> {
    let mut next = 1u32;
    state
        .chosen_log
        .iter()
        .map(|k| {
            let cur = next;
            if *k == AtomKind::A(next) {
                next += 1;
            }
            cur
        })
        .collect()
}

/// Checks the structural invariants of the run at every step.
pub fn verify_invariants(state: &HerdState, cons: &Construction) -> InvariantReport {
    let tol = INVARIANT_TOL;
    let mut violations = [0usize; 4];
    let mut first: Option<Violation> = None;
    let mut record = |t: usize, item: u8, detail: String, violations: &mut [usize; 4]| {
        violations[item as usize - 1] += 1;
        if first.is_none() {
            first = Some(Violation { t, item, detail });
        }
    };
    let mut next_a = 1u32;
    let mut chosen_c: BTreeSet<(u32, u64)> = BTreeSet::new();
    let mut c_front = (2u32, 1u64);
    let mut norm_consistency = 0.0f64;

    for (k, (w, kind)) in state.snapshots.iter().zip(&state.chosen_log).enumerate() {
        let t = k + 1;
        let n = next_a;

        let recomputed = w.norm_sq();
        let rel = (recomputed - state.norm_sq_trace[k]).abs() / recomputed.max(f64::MIN_POSITIVE);
        norm_consistency = norm_consistency.max(rel);

        // (1)
        match cons.atom(*kind) {
            Ok(atom) => {
                if !(w.dot(&atom) > 0.0) {
                    record(t, 1, format!("chosen {kind:?} has non-positive score"), &mut violations);
                }
            }
            Err(_) => record(t, 1, format!("chosen {kind:?} is not an atom"), &mut violations),
        }

        // (2)
        if t >= 2 {
            if let Some(msg) = check_form(cons, w, n, c_front) {
                record(t, 2, msg, &mut violations);
            }
        }

        // (3)
        if n >= 7 {
            let bound = -1.0 / ((n + 1) as f64).ln();
            for i in lower_index(n)..n {
                if w.e(i) > bound + tol {
                    record(t, 3, format!("<e_{i}, w> = {} above {bound} with n = {n}", w.e(i)), &mut violations);
                    break;
                }
            }
        }

        // (4)
        match *kind {
            AtomKind::A(m) if m == next_a => next_a += 1,
            AtomKind::A(m) => {
                record(t, 4, format!("a_{m} chosen while a_{next_a} is the next unchosen"), &mut violations)
            }
            AtomKind::C(1, 1) => {}
            AtomKind::C(m, i) => {
                chosen_c.insert((m, i));
                while chosen_c.contains(&c_front) {
                    c_front = if c_front.1 < cons.big_n(c_front.0) {
                        (c_front.0, c_front.1 + 1)
                    } else {
                        (c_front.0 + 1, 1)
                    };
                }
            }
            _ => {}
        }
    }
    let passed = violations.iter().all(|&v| v == 0) && norm_consistency <= 1e-9;
    InvariantReport {
        steps: state.chosen_log.len(),
        horizon_n: next_a - 1,
        violations,
        first_failure: first,
        norm_consistency,
        passed,
    }
}

/// Two-case form of `w_t` given the first unchosen `a_n` and the first
/// unchosen chain atom; `None` when it matches.
fn check_form(cons: &Construction, w: &SparseVec, n: u32, front: (u32, u64)) -> Option<String> {
    let tol = INVARIANT_TOL;
    if n > cons.n_max {
        return Some(format!("first unchosen a_{n} lies beyond the truncation"));
    }
    let (gamma_n, et_expected) = if front.0 == n {
        let i = front.1;
        (-((i - 1) as f64) * cons.beta(n), (n, i))
    } else if front == (n + 1, 1) {
        (1.0 / n as f64, (n + 1, 1))
    } else {
        return Some(format!("first unchosen chain atom {front:?} does not match a_{n}"));
    };
    if (w.e(n) - gamma_n).abs() > tol {
        return Some(format!("<e_{n}, w> = {} but expected {gamma_n}", w.e(n)));
    }
    for (m, v) in w.e_entries() {
        if m > n && v.abs() > tol {
            return Some(format!("<e_{m}, w> = {v} beyond the frontier {n}"));
        }
    }
    let mut ets = w.et_entries();
    let expected = cons.alpha(et_expected.0, et_expected.1);
    match (ets.next(), ets.next()) {
        (Some((key, v)), None) if key == et_expected && (v - expected).abs() <= tol => {}
        _ => return Some(format!("e~ part of w differs from alpha{et_expected:?} e~{et_expected:?}")),
    }
    for j in 1..n {
        let gamma = -w.e(j);
        let pj = 2f64.powi(j as i32);
        let grid = (gamma * pj).round() / pj;
        if (gamma - grid).abs() > tol {
            return Some(format!("gamma_{j} = {gamma} is off the 2^-{j} grid"));
        }
        if gamma > cons.a_prime(j) + tol {
            return Some(format!("gamma_{j} = {gamma} exceeds a'_{j} = {}", cons.a_prime(j)));
        }
        let lo = gamma_lower(cons, j, n);
        if gamma < lo - tol {
            return Some(format!("gamma_{j} = {gamma} below its lower bound {lo}"));
        }
    }
    None
}

/// `(n - 3) / ln^2(n + 1) - 2 / ln 2`
pub fn divergence_bound(n: u32) -> f64 {
    let l = ((n + 1) as f64).ln();
    (n as f64 - 3.0) / (l * l) - 2.0 / 2f64.ln()
}

/// Smallest `n >= 7` at which [`divergence_bound`] is positive.
pub fn first_positive_bound() -> u32 {
    (7..).find(|&n| divergence_bound(n) > 0.0).expect("the bound grows without limit")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeEntry {
    pub n: u32,
    pub bound: f64,
    /// Smallest `||w_t||^2` over steps with first unchosen `a_n`.
    pub min_norm_sq: f64,
    pub max_norm_sq: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub checked_steps: usize,
    pub violations: usize,
    pub first_positive_n: u32,
    pub max_norm: f64,
    pub envelope: Vec<EnvelopeEntry>,
    /// Step at which the first local maximum of `||w_t||` occurs.
    pub first_peak_t: usize,
    /// Last step at which `||w_t||` set a new running maximum.
    pub last_record_t: usize,
    /// Whether `||w_t||` exceeds its first peak later in the run.
    pub exceeds_first_peak: bool,
}

/// Checks the lower bound on `||w_t||^2` at every step whose first unchosen
/// `a_n` has `n >= 7`, and summarizes the growth of `||w_t||`.
pub fn divergence_check(state: &HerdState) -> DivergenceReport {
    let front = frontier_a(state);
    let mut checked = 0;
    let mut violations = 0;
    let mut env: BTreeMap<u32, EnvelopeEntry> = BTreeMap::new();
    for (k, &n) in front.iter().enumerate() {
        let v = state.norm_sq_trace[k];
        let e = env.entry(n).or_insert(EnvelopeEntry {
            n,
            bound: divergence_bound(n),
            min_norm_sq: f64::INFINITY,
            max_norm_sq: f64::NEG_INFINITY,
        });
        e.min_norm_sq = e.min_norm_sq.min(v);
        e.max_norm_sq = e.max_norm_sq.max(v);
        if n >= 7 {
            checked += 1;
            if v < divergence_bound(n) - INVARIANT_TOL {
                violations += 1;
            }
        }
    }
    let norms = &state.norm_sq_trace;
    let first_peak_t = (1..norms.len()).find(|&k| norms[k] < norms[k - 1]).unwrap_or(norms.len());
    let peak = norms[..first_peak_t].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut running = f64::NEG_INFINITY;
    let mut last_record_t = 0;
    for (k, &v) in norms.iter().enumerate() {
        if v > running {
            running = v;
            last_record_t = k + 1;
        }
    }
    DivergenceReport {
        checked_steps: checked,
        violations,
        first_positive_n: first_positive_bound(),
        max_norm: running.sqrt(),
        envelope: env.into_values().collect(),
        first_peak_t,
        last_record_t,
        exceeds_first_peak: norms[first_peak_t.min(norms.len())..].iter().any(|&v| v > peak),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig2Row {
    pub m: u32,
    pub t: usize,
    pub n: u32,
    pub abs_coef: f64,
    pub lower_bound: f64,
}

/// `|<e_n, w_t>|` for `n < m` at the step that chooses `a_m`, with the lower
/// bound `min(a'_n, max(2^n <a_m, e_m> / m - 2^{-n}, 0))`.
pub fn figure2_data(state: &HerdState, cons: &Construction, m_values: &[u32]) -> Result<Vec<Fig2Row>> {
    let picks: BTreeMap<u32, usize> = state
        .chosen_log
        .iter()
        .enumerate()
        .filter_map(|(k, kind)| match kind {
            AtomKind::A(m) => Some((*m, k)),
            _ => None,
        })
        .collect();
    let mut rows = Vec::new();
    for &m in m_values {
        let k = *picks.get(&m).ok_or_else(|| {
            let reach: Vec<String> = picks.keys().map(|m| m.to_string()).collect();
            Error::Invalid(format!("a_{m} is not reached; reachable m: {}", reach.join(",")))
        })?;
        let w = &state.snapshots[k];
        for n in 1..m {
            rows.push(Fig2Row { m, t: k + 1, n, abs_coef: w.e(n).abs(), lower_bound: gamma_lower(cons, n, m) });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityConstants {
    pub n: u32,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// `NaN` for `n = 1`, which has no `d` atom.
    pub d: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub n_max: u32,
    pub normalization: f64,
    pub series_terms: u32,
    /// Integral of the density restricted to levels `n <= n_max`.
    pub integral_truncated: f64,
    /// `1 - integral_truncated`, the mass carried by levels beyond `n_max`.
    pub tail_residual: f64,
    pub max_abs_e: f64,
    pub max_abs_etilde: f64,
    pub coordinates_checked: usize,
    pub constants: Vec<DensityConstants>,
    pub passed: bool,
}

/// Interval geometry of the piecewise-linear embedding.
struct Geometry;

impl Geometry {
    fn y(n: u32) -> f64 {
        1.0 / (n as f64 + 1.0)
    }
    fn z(n: u32) -> f64 {
        (Self::y(n) + Self::y(n + 1)) / 2.0
    }
    fn yt(n: u32) -> f64 {
        1.0 / n as f64
    }
    fn delta(n: u32, big_n: f64) -> f64 {
        (Self::yt(n) - Self::yt(n + 1)) / big_n
    }
    /// Combined length of the two ramps carrying `a_n`.
    fn len_a(n: u32) -> f64 {
        if n == 1 {
            1.0 - (Self::y(1) + Self::z(1)) / 2.0
        } else {
            (Self::z(n - 1) - Self::z(n)) / 2.0
        }
    }
    fn len_b(n: u32) -> f64 {
        (Self::y(n) - Self::y(n + 1)) / 2.0
    }
}

/// Density constants per unit normalization, for `n = 1..=levels`. Uses the
/// closed forms of `N_n` in floating point so that `levels` may exceed the
/// atom truncation.
fn unit_constants(levels: u32, cons: &Construction) -> Vec<DensityConstants> {
    let big_n = |n: u32| if n <= cons.n_max + 1 { cons.big_n(n) as f64 } else { (2f64.powi(n as i32 + 1) / n as f64).ceil() };
    let a_prime = |n: u32| {
        let p = 2f64.powi(n as i32);
        cons.c * (p / ((n + 1) as f64).ln()).ceil() / p
    };
    let a_coef = |n: u32| a_prime(n) + 1.0 / n as f64;
    let beta = |n: u32| -1.0 / (n as f64 * big_n(n));
    let delta = |n: u32| Geometry::delta(n, big_n(n));
    let neg_b = |n: u32| 2f64.powi(-(n as i32));

    let mut out: Vec<DensityConstants> = Vec::with_capacity(levels as usize);
    let a1 = neg_b(1) / (24.0 * a_coef(1)) / Geometry::len_a(1);
    let c1 = neg_b(1) / 12.0;
    let b1 = 12.0 * (Geometry::len_a(1) * a1 * a_coef(1) / neg_b(1) + 0.5 * c1 / neg_b(1));
    out.push(DensityConstants { n: 1, a: a1, b: b1, c: c1, d: f64::NAN });
    for n in 2..=levels {
        let nf = n as f64;
        let ratio = delta(n + 1) / delta(n);
        let a = nf / (nf + 1.0) * neg_b(n) / a_coef(n);
        let c = nf / (2.0 * (nf + 2.0)) * (-neg_b(n)) / beta(n) * ratio;
        let b = 2.0
            * (nf + 1.0)
            * (nf + 2.0)
            * (0.25 * (1.0 / nf - 1.0 / (nf + 2.0)) * a * a_coef(n) / neg_b(n)
                + (1.0 / nf - 1.0 / (nf + 1.0)) * c * beta(n) / neg_b(n));
        // alpha_{n,1} cancels from the ratios of e~_{n,1} coefficients
        let d = if n == 2 {
            let (c11, c21, d2) = (1.0, 1.0, -0.5);
            delta(1) / delta(2) * out[0].c * c11 / -d2 + c * c21 / -d2
        } else {
            let (c_prev_tail, c_n1, d_n) = (-1.0, 1.0, 0.5);
            delta(n - 1) / delta(n) * out[n as usize - 2].c * (-c_prev_tail) / d_n - c * c_n1 / d_n
        };
        out.push(DensityConstants { n, a, b, c, d });
    }
    out
}

/// Mass of the density over levels `1..=levels` as `scale * s + r`.
fn mass_parts(k: &[DensityConstants], cons: &Construction, levels: u32) -> (f64, f64) {
    let big_n = |n: u32| if n <= cons.n_max + 1 { cons.big_n(n) as f64 } else { (2f64.powi(n as i32 + 1) / n as f64).ceil() };
    let mut s = 0.0;
    let mut r = 0.5;
    for n in 1..=levels {
        let kc = &k[n as usize - 1];
        let d = Geometry::delta(n, big_n(n));
        s += kc.a * Geometry::len_a(n) + kc.b * Geometry::len_b(n) + kc.c * (Geometry::yt(n) - Geometry::yt(n + 1));
        if n >= 2 {
            s += kc.d * d;
            r += Geometry::yt(n) - d - Geometry::yt(n + 1);
        }
    }
    (s / 3.0, r / 3.0)
}

/// Number of levels summed when fixing the normalization.
pub const NORMALIZATION_LEVELS: u32 = 1000;

/// Evaluates every coordinate of the mean embedding of the constructed
/// measure up to `n_max` through the segment rule and checks that it
/// vanishes; also checks positivity of the density constants.
pub fn measure_mean_check(n_max: u32) -> Result<MeasureReport> {
    let cons = Construction::new(n_max)?;
    let long = unit_constants(NORMALIZATION_LEVELS, &cons);
    let (s_long, r_long) = mass_parts(&long, &cons, NORMALIZATION_LEVELS);
    // remaining levels contribute about c_n / (n (n + 1)) with c_n -> 1/2 and
    // the gaps 1 / (n (n + 1)) of the unit-density part
    let tail = 1.0 / (NORMALIZATION_LEVELS as f64 + 1.0);
    let scale = (1.0 - r_long - tail / 3.0) / (s_long + 0.5 * tail / 3.0);

    let constants: Vec<DensityConstants> = long[..n_max as usize]
        .iter()
        .map(|k| DensityConstants { n: k.n, a: scale * k.a, b: scale * k.b, c: scale * k.c, d: scale * k.d })
        .collect();
    for k in &constants {
        let d_ok = k.n == 1 || k.d > 0.0;
        if !(k.a > 0.0 && k.b >= 0.0 && k.c > 0.0 && d_ok) {
            return Err(Error::Invariant(format!("density constants at level {} are not positive: {k:?}", k.n)));
        }
    }

    // 6 <e, m> = sum over atoms of density * <e, atom> * ramp length
    let mut e = vec![0.0f64; n_max as usize + 1];
    let mut et: Vec<Vec<f64>> = (0..=n_max).map(|n| vec![0.0; if n >= 2 { cons.big_n(n) as usize + 1 } else { 0 }]).collect();
    let mut deposit = |atom: &Atom, weight: f64| {
        for &(idx, v) in &atom.vec {
            match idx {
                BasisIndex::E(n) => e[n as usize] += weight * v,
                BasisIndex::ETilde(n, i) => et[n as usize][i as usize] += weight * v,
            }
        }
    };
    for n in 1..=n_max {
        let k = &constants[n as usize - 1];
        let delta = Geometry::delta(n, cons.big_n(n) as f64);
        deposit(&cons.atom(AtomKind::A(n))?, k.a * Geometry::len_a(n));
        deposit(&cons.atom(AtomKind::B(n))?, k.b * Geometry::len_b(n));
        for i in 1..=cons.big_n(n) {
            deposit(&cons.atom(AtomKind::C(n, i))?, k.c * delta);
        }
        if n >= 2 {
            deposit(&cons.atom(AtomKind::D(n))?, k.d * delta);
        }
    }
    let max_abs_e = e.iter().map(|v| (v / 6.0).abs()).fold(0.0, f64::max);
    let max_abs_etilde = et.iter().flatten().map(|v| (v / 6.0).abs()).fold(0.0, f64::max);
    let coordinates_checked = n_max as usize + et.iter().map(|v| v.len().saturating_sub(1)).sum::<usize>();

    let (s_trunc, r_trunc) = mass_parts(&long, &cons, n_max);
    let integral_truncated = scale * s_trunc + r_trunc;
    Ok(MeasureReport {
        n_max,
        normalization: scale,
        series_terms: NORMALIZATION_LEVELS,
        integral_truncated,
        tail_residual: 1.0 - integral_truncated,
        max_abs_e,
        max_abs_etilde,
        coordinates_checked,
        constants,
        passed: max_abs_e <= 1e-10 && max_abs_etilde <= 1e-10,
    })
}
