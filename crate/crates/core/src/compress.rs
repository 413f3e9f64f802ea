//! Compression of the empirical mean embedding: kernel herding,
//! Frank–Wolfe with exact line search and an epsilon-net baseline.
//!
//! Candidates for every greedy step are the sample points themselves, so the
//! algorithms work inside the convex hull of the embedded sample. Ties go to
//! the smallest index.

use crate::error::{Error, Result};
use crate::kernel::{gram, Kernel};
use crate::points::PointSet;
use crate::linalg::pivoted_cholesky;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A weighted subset of a sample. Herding coresets may repeat indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coreset {
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
    pub source_id: String,
    pub n_source: usize,
}

impl Coreset {
    pub fn new(indices: Vec<usize>, weights: Vec<f64>, points: &PointSet) -> Result<Self> {
        let c = Self { indices, weights, source_id: points.id(), n_source: points.len() };
        c.validate()?;
        Ok(c)
    }

    /// Uniform weights over all points.
    pub fn full(points: &PointSet) -> Self {
        let n = points.len();
        Self {
            indices: (0..n).collect(),
            weights: vec![1.0 / n as f64; n],
            source_id: points.id(),
            n_source: n,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.indices.len() != self.weights.len() {
            return Err(Error::Invalid("coreset indices and weights differ in length".into()));
        }
        if self.indices.is_empty() {
            return Err(Error::Invalid("coreset is empty".into()));
        }
        if let Some(&i) = self.indices.iter().find(|&&i| i >= self.n_source) {
            return Err(Error::Invalid(format!("coreset index {i} out of range for {} points", self.n_source)));
        }
        if self.weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::Invalid("coreset weights must be non-negative".into()));
        }
        let s: f64 = self.weights.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!("coreset weights sum to {s}")));
        }
        Ok(())
    }

    /// Weights accumulated per source index, dense over the sample.
    pub fn dense_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.n_source];
        for (&i, &v) in self.indices.iter().zip(&self.weights) {
            w[i] += v;
        }
        w
    }

    /// Merges repeated indices (first-occurrence order) and drops weights
    /// at or below `threshold`.
    pub fn merged(&self, threshold: f64) -> Coreset {
        let mut order = Vec::new();
        let mut acc: Vec<Option<usize>> = vec![None; self.n_source];
        let mut weights: Vec<f64> = Vec::new();
        for (&i, &v) in self.indices.iter().zip(&self.weights) {
            match acc[i] {
                Some(slot) => weights[slot] += v,
                None => {
                    acc[i] = Some(order.len());
                    order.push(i);
                    weights.push(v);
                }
            }
        }
        let (indices, weights): (Vec<usize>, Vec<f64>) =
            order.into_iter().zip(weights).filter(|(_, w)| *w > threshold).unzip();
        Coreset { indices, weights, source_id: self.source_id.clone(), n_source: self.n_source }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub t: usize,
    pub chosen_index: usize,
    pub step: f64,
    pub error_sq: f64,
    /// Set when a negative rounding residue was clipped to zero.
    #[serde(default)]
    pub clipped: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CompressionTrace {
    pub steps: Vec<TraceStep>,
}

impl CompressionTrace {
    pub fn errors(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.error_sq).collect()
    }

    pub fn last_error_sq(&self) -> f64 {
        self.steps.last().map_or(f64::NAN, |s| s.error_sq)
    }

    fn push(&mut self, t: usize, chosen_index: usize, step: f64, raw: f64) {
        let clipped = raw < 0.0;
        self.steps.push(TraceStep { t, chosen_index, step, error_sq: raw.max(0.0), clipped });
    }
}

/// Whether the Gram matrix is cached (`O(n^2)` memory) or recomputed row by
/// row (`O(n)` memory).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum GramMode {
    #[default]
    Cached,
    Streaming,
}

enum Source<'a> {
    Cached(DMatrix<f64>),
    Streaming(&'a Kernel, &'a PointSet),
}

impl<'a> Source<'a> {
    fn new(kernel: &'a Kernel, points: &'a PointSet, mode: GramMode) -> Result<Self> {
        Ok(match mode {
            GramMode::Cached => Source::Cached(gram(kernel, points)?.entries),
            GramMode::Streaming => Source::Streaming(kernel, points),
        })
    }

    fn n(&self) -> usize {
        match self {
            Source::Cached(m) => m.nrows(),
            Source::Streaming(_, p) => p.len(),
        }
    }

    fn column(&self, j: usize) -> Result<Vec<f64>> {
        match self {
            Source::Cached(m) => Ok(m.column(j).iter().cloned().collect()),
            Source::Streaming(k, p) => {
                let xj = p.row(j);
                let col: Vec<f64> = (0..p.len()).into_par_iter().map(|i| k.eval(p.row(i), xj)).collect();
                if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                    return Err(Error::NonFinite { i, j });
                }
                Ok(col)
            }
        }
    }

    /// `K v` for a dense vector, accumulated row by row in index order.
    fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        match self {
            Source::Cached(m) => Ok((0..m.nrows())
                .into_par_iter()
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
                .collect()),
            Source::Streaming(k, p) => {
                let out: Vec<f64> = (0..p.len())
                    .into_par_iter()
                    .map(|i| {
                        let xi = p.row(i);
                        (0..p.len()).filter(|&j| v[j] != 0.0).map(|j| k.eval(xi, p.row(j)) * v[j]).sum()
                    })
                    .collect();
                if out.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Numerical("non-finite kernel row sum".into()));
                }
                Ok(out)
            }
        }
    }
}

fn argmax_first(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn argmin_first(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x < v[best] {
            best = i;
        }
    }
    best
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Result of [`herd`]: the coreset, its trace and `||w_t||^2` per step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HerdRun {
    pub coreset: Coreset,
    pub trace: CompressionTrace,
    pub w_norm_sq: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct HerdOptions {
    pub init_index: usize,
    pub mode: GramMode,
}

/// Kernel herding towards the empirical mean embedding.
///
/// `init_index` is the first selected point. After `t` selections
/// `w_t = t (m_n - m_t)`, where `m_t` is the average of the selected
/// embeddings, and the next point maximizes `<w_t, k(X_i, .)>`.
pub fn herd(kernel: &Kernel, points: &PointSet, t_max: usize, init_index: usize) -> Result<HerdRun> {
    herd_with(kernel, points, t_max, HerdOptions { init_index, mode: GramMode::Cached })
}

const FACTOR_RANK_CAP: usize = 512;

pub fn herd_with(kernel: &Kernel, points: &PointSet, t_max: usize, opts: HerdOptions) -> Result<HerdRun> {
    if t_max == 0 {
        return Err(Error::Invalid("T must be at least 1".into()));
    }
    let n = points.len();
    if opts.init_index >= n {
        return Err(Error::Invalid(format!("init_index {} out of range for {n} points", opts.init_index)));
    }
    let src = Source::new(kernel, points, opts.mode)?;
    let nf = n as f64;
    let uniform = vec![1.0 / nf; n];
    // r_i = <m_n, k(X_i, .)>, mm = ||m_n||^2
    let r = src.apply(&uniform)?;
    // cached mode: ||w_t|| from a factor K = F F^T
    let mut factor = match &src {
        Source::Cached(g) => {
            let (_, f) = pivoted_cholesky(g, FACTOR_RANK_CAP.min(n), 64.0 * f64::EPSILON);
            (f.ncols() < FACTOR_RANK_CAP || f.ncols() == n).then(|| {
                let mean = f.row_mean().transpose();
                let z = DVector::zeros(f.ncols());
                (f, mean, z)
            })
        }
        Source::Streaming(..) => None,
    };
    let mut counts = vec![0.0f64; n];
    let mut kc = vec![0.0f64; n];
    let mut s = vec![0.0f64; n];
    let mut trace = CompressionTrace::default();
    let mut norms = Vec::with_capacity(t_max);
    let mut chosen = Vec::with_capacity(t_max);
    let mut x = opts.init_index;

    for t in 1..=t_max {
        let col = src.column(x)?;
        let tf = t as f64;
        for i in 0..n {
            kc[i] += col[i];
            s[i] = tf * r[i] - kc[i];
        }
        counts[x] += 1.0;
        chosen.push(x);

        // w_t = sum_i (t/n - c_i) k(X_i, .)
        let w_sq = match &mut factor {
            Some((f, mean, z)) => {
                *z += &*mean - f.row(x).transpose();
                z.norm_squared()
            }
            None => (0..n).map(|i| (tf / nf - counts[i]) * s[i]).sum::<f64>().max(0.0),
        };
        trace.push(t, x, 1.0 / tf, w_sq / (tf * tf));
        norms.push(w_sq);
        x = argmax_first(&s);
    }
    let weights = vec![1.0 / t_max as f64; t_max];
    let coreset = Coreset { indices: chosen, weights, source_id: points.id(), n_source: n };
    Ok(HerdRun { coreset, trace, w_norm_sq: norms })
}

/// Frank–Wolfe with exact line search on `f(w) = ||sum_i w_i k(X_i, .) - m_n||^2`
/// over the probability simplex.
///
/// Stops early, successfully, when the line-search denominator vanishes or
/// the duality gap is zero.
pub fn frank_wolfe(kernel: &Kernel, points: &PointSet, t_max: usize) -> Result<(Coreset, CompressionTrace)> {
    frank_wolfe_with(kernel, points, t_max, GramMode::Cached)
}

pub fn frank_wolfe_with(
    kernel: &Kernel,
    points: &PointSet,
    t_max: usize,
    mode: GramMode,
) -> Result<(Coreset, CompressionTrace)> {
    let n = points.len();
    let target = vec![1.0 / n as f64; n];
    let src = Source::new(kernel, points, mode)?;
    let (w, trace) = fw_core(&src, &target, t_max)?;
    Ok((coreset_from_dense(&w, points), trace))
}

/// Frank–Wolfe towards `sum_i target_i k(X_i, .)` on a cached Gram matrix.
pub fn frank_wolfe_weighted(gram: &DMatrix<f64>, target: &[f64], t_max: usize) -> Result<(Vec<f64>, CompressionTrace)> {
    if target.len() != gram.nrows() {
        return Err(Error::Invalid("target length does not match the Gram matrix".into()));
    }
    fw_core(&Source::Cached(gram.clone()), target, t_max)
}

fn coreset_from_dense(w: &[f64], points: &PointSet) -> Coreset {
    let (indices, weights): (Vec<usize>, Vec<f64>) =
        w.iter().enumerate().filter(|(_, &v)| v > 0.0).map(|(i, &v)| (i, v)).unzip();
    Coreset { indices, weights, source_id: points.id(), n_source: points.len() }
}

fn fw_core(src: &Source, target: &[f64], t_max: usize) -> Result<(Vec<f64>, CompressionTrace)> {
    if t_max == 0 {
        return Err(Error::Invalid("T must be at least 1".into()));
    }
    let n = src.n();
    let r = src.apply(target)?;
    let mut w = vec![0.0f64; n];
    let mut kw = vec![0.0f64; n];
    let mut trace = CompressionTrace::default();
    let mut prev = f64::INFINITY;

    for t in 1..=t_max {
        let g: Vec<f64> = (0..n).map(|i| kw[i] - r[i]).collect();
        let x = if t == 1 { argmax_first(&r) } else { argmin_first(&g) };
        let col = src.column(x)?;
        let gamma = if t == 1 {
            1.0
        } else {
            let gap = dot(&w, &g) - g[x];
            let denom = dot(&w, &kw) - 2.0 * kw[x] + col[x];
            if !(gap > 0.0) || !(denom > 0.0) {
                break;
            }
            (gap / denom).clamp(0.0, 1.0)
        };
        for i in 0..n {
            w[i] *= 1.0 - gamma;
            kw[i] = (1.0 - gamma) * kw[i] + gamma * col[i];
        }
        w[x] += gamma;
        let total: f64 = w.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            for v in w.iter_mut() {
                *v /= total;
            }
            kw = src.apply(&w)?;
        }
        let err: f64 = (0..n).map(|i| (w[i] - target[i]) * (kw[i] - r[i])).sum();
        let scale = 1e-12 * (1.0 + dot(target, &r).abs());
        if err > prev + scale {
            return Err(Error::Invariant(format!("Frank-Wolfe error increased at step {t}: {prev:e} -> {err:e}")));
        }
        prev = err.min(prev);
        trace.push(t, x, gamma, err);
    }
    Ok((w, trace))
}

/// Squared RKHS distance between the coreset embedding and the sample mean,
/// computed as `d^T K d` with `d` the weight difference.
pub fn error_sq(kernel: &Kernel, coreset: &Coreset, points: &PointSet) -> Result<f64> {
    if coreset.n_source != points.len() {
        return Err(Error::Invalid("coreset was built on a different sample".into()));
    }
    let n = points.len();
    let mut d = coreset.dense_weights();
    for v in d.iter_mut() {
        *v -= 1.0 / n as f64;
    }
    Ok(quad_form(kernel, points, &d)?.max(0.0))
}

/// `v^T K v` without materializing `K`; deterministic across thread counts.
pub(crate) fn quad_form(kernel: &Kernel, points: &PointSet, v: &[f64]) -> Result<f64> {
    let n = points.len();
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            if v[i] == 0.0 {
                return 0.0;
            }
            let xi = points.row(i);
            v[i] * (0..n).filter(|&j| v[j] != 0.0).map(|j| kernel.eval(xi, points.row(j)) * v[j]).sum::<f64>()
        })
        .collect();
    let s: f64 = rows.iter().sum();
    if !s.is_finite() {
        return Err(Error::Numerical("non-finite quadratic form".into()));
    }
    Ok(s)
}

/// Coreset of epsilon-net centers with snapped masses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsNetCoreset {
    /// Occupied centers, one row each.
    pub centers: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// Center index of every sample point.
    pub assignment: Vec<usize>,
    /// Number of cells of the full net.
    pub n_net: u64,
    pub error_sq: f64,
}

/// Largest net [`epsnet_compress`] will build.
pub const MAX_NET: u64 = 100_000_000;

/// Number of cells `ceil(d^{d/2} / eps^d)` of an epsilon-net of the unit cube.
pub fn net_size(eps: f64, d: usize) -> f64 {
    let df = d as f64;
    (df.powf(df / 2.0) / eps.powf(df)).ceil()
}

/// Snaps every point to the center of its cell in a grid of side
/// `eps / sqrt(d)` over the domain box. Each center lies within `eps / 2` of
/// the points it receives.
pub fn epsnet_compress(points: &PointSet, eps: f64, kernel: &Kernel) -> Result<EpsNetCoreset> {
    if !(eps > 0.0) {
        return Err(Error::Precondition("eps must be positive".into()));
    }
    let bounds = points
        .domain_box()
        .ok_or_else(|| Error::Precondition("epsilon-net needs a domain box".into()))?
        .to_vec();
    let d = bounds.len();
    let diam = bounds.iter().map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt();
    let per_dim: Vec<u64> = if eps >= diam {
        vec![1; d]
    } else {
        bounds.iter().map(|(a, b)| (((b - a) * (d as f64).sqrt() / eps).ceil() as u64).max(1)).collect()
    };
    let total = per_dim.iter().try_fold(1u64, |acc, &m| acc.checked_mul(m)).filter(|&v| v <= MAX_NET);
    let n_net = total.ok_or_else(|| Error::Precondition(format!("epsilon-net with eps = {eps} exceeds {MAX_NET} centers")))?;

    let mut cells: std::collections::BTreeMap<Vec<u64>, usize> = Default::default();
    let mut centers = Vec::new();
    let mut mass = Vec::new();
    let mut assignment = Vec::with_capacity(points.len());
    let unit = 1.0 / points.len() as f64;
    for x in points.rows() {
        let key: Vec<u64> = x
            .iter()
            .zip(&bounds)
            .zip(&per_dim)
            .map(|((&v, &(a, b)), &m)| {
                let side = (b - a) / m as f64;
                let c = if side > 0.0 { ((v - a) / side).floor() } else { 0.0 };
                c.clamp(0.0, (m - 1) as f64) as u64
            })
            .collect();
        let slot = *cells.entry(key.clone()).or_insert_with(|| {
            let center = key
                .iter()
                .zip(&bounds)
                .zip(&per_dim)
                .map(|((&c, &(a, b)), &m)| a + (c as f64 + 0.5) * (b - a) / m as f64)
                .collect();
            centers.push(center);
            mass.push(0.0);
            centers.len() - 1
        });
        mass[slot] += unit;
        assignment.push(slot);
    }
    let total_mass: f64 = mass.iter().sum();
    let weights: Vec<f64> = mass.iter().map(|m| m / total_mass).collect();

    let center_set = PointSet::new(centers.clone())?;
    let kcc = gram(kernel, &center_set)?.entries;
    let cc: f64 = (0..weights.len())
        .map(|i| weights[i] * (0..weights.len()).map(|j| kcc[(i, j)] * weights[j]).sum::<f64>())
        .sum();
    let cross: Vec<f64> = (0..points.len())
        .into_par_iter()
        .map(|i| (0..centers.len()).map(|j| kernel.eval(points.row(i), &centers[j]) * weights[j]).sum())
        .collect();
    let pc: f64 = cross.iter().sum::<f64>() * unit;
    let uniform = vec![unit; points.len()];
    let pp = quad_form(kernel, points, &uniform)?;
    Ok(EpsNetCoreset { centers, weights, assignment, n_net, error_sq: (cc - 2.0 * pc + pp).max(0.0) })
}

/// Indices whose embedding lies within `eps` of the sample mean, for kernels
/// with `k(x, x) = 1`. Any two such points satisfy `k(X_i, X_j) >= 1 - 2 eps^2`,
/// which is verified.
pub fn near_mean_extremes(kernel: &Kernel, points: &PointSet, eps: f64) -> Result<Vec<usize>> {
    if !(eps > 0.0) {
        return Err(Error::Precondition("eps must be positive".into()));
    }
    let g = gram(kernel, points)?.entries;
    let n = points.len();
    if let Some(i) = (0..n).find(|&i| (g[(i, i)] - 1.0).abs() > 1e-9) {
        return Err(Error::Precondition(format!("k(x, x) = {} at point {i}; expected 1", g[(i, i)])));
    }
    let r: Vec<f64> = (0..n).map(|i| g.row(i).sum() / n as f64).collect();
    let mm = r.iter().sum::<f64>() / n as f64;
    let near: Vec<usize> = (0..n).filter(|&i| 1.0 - 2.0 * r[i] + mm < eps * eps).collect();
    for (a, &i) in near.iter().enumerate() {
        for &j in &near[a + 1..] {
            if g[(i, j)] < 1.0 - 2.0 * eps * eps - 1e-12 {
                return Err(Error::Invariant(format!("k(X_{i}, X_{j}) = {} below 1 - 2 eps^2", g[(i, j)])));
            }
        }
    }
    Ok(near)
}
