//! Consumers of coresets: weighted ridge regression, simultaneous
//! compression of the label-weighted mean and covariance targets, and MMD.

use crate::compress::{self, error_sq, frank_wolfe, herd, Coreset, CompressionTrace};
use crate::error::{Error, Result};
use crate::kernel::{cross_gram, gram, Kernel};
use crate::linalg;
use crate::points::PointSet;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Coreset weights at or below this value are dropped before inverting `W`.
pub const WEIGHT_FLOOR: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KrrMode {
    /// `alpha = (K_l + lambda W^{-1})^{-1} y`
    Suboptimal,
    /// `alpha = (K_l + lambda W^{-1})^{-1} (K_l W)^+ K_l W y`
    MinimalNorm,
}

/// Regularizer added to `K_l`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regularizer {
    /// `lambda W^{-1}`
    #[default]
    InverseWeights,
    /// `lambda I`, ignoring the weights.
    Identity,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Regressor {
    pub alpha: Vec<f64>,
    pub support_points: Vec<Vec<f64>>,
    pub support_indices: Vec<usize>,
    pub weights: Vec<f64>,
    pub kernel: String,
    pub lambda: f64,
    pub mode: KrrMode,
    #[serde(default)]
    pub regularizer: Regularizer,
    #[serde(skip)]
    kernel_fn: Option<Kernel>,
}

impl Regressor {
    /// Reattaches the kernel after deserialization.
    pub fn with_kernel(mut self, kernel: Kernel) -> Self {
        self.kernel = kernel.id();
        self.kernel_fn = Some(kernel);
        self
    }

    pub fn kernel_fn(&self) -> Option<&Kernel> {
        self.kernel_fn.as_ref()
    }
}

type SupportSystem = (Coreset, DMatrix<f64>, DMatrix<f64>, DVector<f64>);
type BatchResult = Result<(Vec<usize>, Vec<f64>, f64)>;

fn support_system(
    kernel: &Kernel,
    coreset: &Coreset,
    points: &PointSet,
    y: &[f64],
    lambda: f64,
    reg: Regularizer,
) -> Result<SupportSystem> {
    if !(lambda > 0.0) {
        return Err(Error::Precondition("lambda must be positive".into()));
    }
    if y.len() != points.len() {
        return Err(Error::Invalid(format!("{} targets for {} points", y.len(), points.len())));
    }
    if coreset.n_source != points.len() {
        return Err(Error::Invalid("coreset was built on a different sample".into()));
    }
    let c = coreset.merged(WEIGHT_FLOOR);
    if c.is_empty() {
        return Err(Error::Invalid("no coreset atom has positive weight".into()));
    }
    let support = points.subset(&c.indices)?;
    let kl = gram(kernel, &support)?.entries;
    let l = c.len();
    let reg_diag = DMatrix::from_diagonal(&DVector::from_iterator(
        l,
        c.weights.iter().map(|w| match reg {
            Regularizer::InverseWeights => lambda / w,
            Regularizer::Identity => lambda,
        }),
    ));
    let yl = DVector::from_iterator(l, c.indices.iter().map(|&i| y[i]));
    Ok((c, kl, reg_diag, yl))
}

/// Weighted ridge regression on a coreset. `y` holds one target per source
/// point; repeated coreset indices are merged.
pub fn krr_fit(
    kernel: &Kernel,
    coreset: &Coreset,
    points: &PointSet,
    y: &[f64],
    lambda: f64,
    mode: KrrMode,
) -> Result<Regressor> {
    krr_fit_with(kernel, coreset, points, y, lambda, mode, Regularizer::InverseWeights)
}

pub fn krr_fit_with(
    kernel: &Kernel,
    coreset: &Coreset,
    points: &PointSet,
    y: &[f64],
    lambda: f64,
    mode: KrrMode,
    reg: Regularizer,
) -> Result<Regressor> {
    let (c, kl, reg_diag, yl) = support_system(kernel, coreset, points, y, lambda, reg)?;
    let a = &kl + &reg_diag;
    let rhs = match mode {
        KrrMode::Suboptimal => yl.clone(),
        KrrMode::MinimalNorm => {
            let klw = &kl * DMatrix::from_diagonal(&DVector::from_vec(c.weights.clone()));
            let p = linalg::pinv(&klw, linalg::PINV_RTOL)?;
            &p * (&klw * &yl)
        }
    };
    let alpha = linalg::spd_solve(&a, &rhs).or_else(|_| linalg::lu_solve(&a, &rhs))?;
    if alpha.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("ridge system produced non-finite coefficients".into()));
    }
    let support_points = c.indices.iter().map(|&i| points.row(i).to_vec()).collect();
    Ok(Regressor {
        alpha: alpha.iter().cloned().collect(),
        support_points,
        support_indices: c.indices,
        weights: c.weights,
        kernel: kernel.id(),
        lambda,
        mode,
        regularizer: reg,
        kernel_fn: Some(kernel.clone()),
    })
}

/// `|| K_l W ((K_l + lambda W^{-1}) alpha - (K_l W)^+ K_l W y) ||`, zero for
/// every minimizer of the weighted ridge objective.
pub fn krr_normal_residual(reg: &Regressor, points: &PointSet, y: &[f64]) -> Result<f64> {
    let kernel = reg.kernel_fn.as_ref().ok_or_else(|| Error::Invalid("regressor has no kernel attached".into()))?;
    let support = PointSet::new(reg.support_points.clone())?;
    let kl = gram(kernel, &support)?.entries;
    let l = reg.alpha.len();
    let w = DMatrix::from_diagonal(&DVector::from_vec(reg.weights.clone()));
    let reg_diag = DMatrix::from_diagonal(&DVector::from_iterator(
        l,
        reg.weights.iter().map(|wi| match reg.regularizer {
            Regularizer::InverseWeights => reg.lambda / wi,
            Regularizer::Identity => reg.lambda,
        }),
    ));
    let yl = DVector::from_iterator(l, reg.support_indices.iter().map(|&i| y[i]));
    if reg.support_indices.iter().any(|&i| i >= points.len()) {
        return Err(Error::Invalid("support index out of range".into()));
    }
    let alpha = DVector::from_vec(reg.alpha.clone());
    let klw = &kl * &w;
    let p = linalg::pinv(&klw, linalg::PINV_RTOL)?;
    let inner = (&kl + reg_diag) * alpha - &p * (&klw * &yl);
    Ok((&klw * inner).norm())
}

/// `sum_i alpha_i k(x_i, x)` over the support points.
pub fn krr_predict(reg: &Regressor, x: &[f64]) -> Result<f64> {
    let kernel = reg.kernel_fn.as_ref().ok_or_else(|| Error::Invalid("regressor has no kernel attached".into()))?;
    Ok(reg.alpha.iter().zip(&reg.support_points).map(|(a, s)| a * kernel.eval(s, x)).sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algo {
    Herd,
    FrankWolfe,
}

/// Kernel on `(y, x)` points whose RKHS carries both the covariance target
/// (through `k^2`) and the label-weighted mean (through `y1 y2 k`); with
/// `with_ysq` a third summand `y1 y2` carries the label second moment.
pub fn simultaneous_kernel(kernel: &Kernel, with_ysq: bool) -> Kernel {
    let base = kernel.direct_sum();
    if with_ysq {
        base.sum(&Kernel::constant(1.0).y_weighted())
    } else {
        base
    }
}

/// Compresses labelled points under [`simultaneous_kernel`] on the augmented
/// points `(y_i, x_i)`.
pub fn simultaneous_coreset(
    kernel: &Kernel,
    points: &PointSet,
    t_max: usize,
    algo: Algo,
    with_ysq: bool,
) -> Result<(Coreset, CompressionTrace)> {
    if points.labels().is_none() {
        return Err(Error::Precondition("simultaneous compression needs labels".into()));
    }
    let aug = points.augmented()?;
    let k = simultaneous_kernel(kernel, with_ysq);
    let (mut c, trace) = match algo {
        Algo::Herd => {
            let run = herd(&k, &aug, t_max, 0)?;
            (run.coreset, run.trace)
        }
        Algo::FrankWolfe => frank_wolfe(&k, &aug, t_max)?,
    };
    c.source_id = points.id();
    Ok((c, trace))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MmdMode {
    Exact,
    Compressed,
    Hierarchical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MmdResult {
    pub mmd_sq: f64,
    pub mode: MmdMode,
    pub error_budget: Option<f64>,
}

fn weighted_cross(kernel: &Kernel, a: &PointSet, wa: &[f64], b: &PointSet, wb: &[f64]) -> Result<f64> {
    let k = cross_gram(kernel, a, b)?;
    let rows: Vec<f64> = (0..a.len())
        .into_par_iter()
        .map(|i| wa[i] * (0..b.len()).map(|j| k[(i, j)] * wb[j]).sum::<f64>())
        .collect();
    Ok(rows.iter().sum())
}

fn mmd_weighted(kernel: &Kernel, a: &PointSet, wa: &[f64], b: &PointSet, wb: &[f64]) -> Result<f64> {
    let aa = weighted_cross(kernel, a, wa, a, wa)?;
    let bb = weighted_cross(kernel, b, wb, b, wb)?;
    let ab = weighted_cross(kernel, a, wa, b, wb)?;
    Ok(aa + bb - 2.0 * ab)
}

/// Squared MMD between the empirical embeddings of two samples.
pub fn mmd_sq(kernel: &Kernel, a: &PointSet, b: &PointSet) -> Result<MmdResult> {
    check_dims(a, b)?;
    let wa = vec![1.0 / a.len() as f64; a.len()];
    let wb = vec![1.0 / b.len() as f64; b.len()];
    let v = mmd_weighted(kernel, a, &wa, b, &wb)?;
    Ok(MmdResult { mmd_sq: v.max(0.0), mode: MmdMode::Exact, error_budget: None })
}

fn check_dims(a: &PointSet, b: &PointSet) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Invalid(format!("samples have dimensions {} and {}", a.dim(), b.dim())));
    }
    Ok(())
}

fn coreset_points(c: &Coreset, p: &PointSet) -> Result<(PointSet, Vec<f64>)> {
    let m = c.merged(0.0);
    Ok((p.subset(&m.indices)?, m.weights))
}

/// Squared MMD between two coreset embeddings. The budget
/// `sqrt(err_a) + sqrt(err_b)` bounds the deviation of the root from the
/// exact statistic.
pub fn mmd_sq_compressed(
    kernel: &Kernel,
    coreset_a: &Coreset,
    a: &PointSet,
    coreset_b: &Coreset,
    b: &PointSet,
) -> Result<MmdResult> {
    check_dims(a, b)?;
    let (pa, wa) = coreset_points(coreset_a, a)?;
    let (pb, wb) = coreset_points(coreset_b, b)?;
    let v = mmd_weighted(kernel, &pa, &wa, &pb, &wb)?;
    let budget = error_sq(kernel, coreset_a, a)?.sqrt() + error_sq(kernel, coreset_b, b)?.sqrt();
    Ok(MmdResult { mmd_sq: v.max(0.0), mode: MmdMode::Compressed, error_budget: Some(budget) })
}

/// Two-stage compression: batches are compressed independently, merged with
/// weights proportional to batch sizes, and the merged set is compressed
/// again.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HierarchicalCoreset {
    pub coreset: Coreset,
    pub batch_size: usize,
    pub per_batch_t: usize,
    pub final_t: usize,
    /// `sum_b (n_b / n) ||m_b - m~_b||`
    pub stage1_budget: f64,
    /// `||m_merged - m_final||`
    pub stage2_budget: f64,
}

impl HierarchicalCoreset {
    pub fn total_budget(&self) -> f64 {
        self.stage1_budget + self.stage2_budget
    }
}

/// Defaults `ceil(sqrt(n))` and `ceil(log2(n))`.
pub fn hierarchical_defaults(n: usize) -> (usize, usize) {
    let b = ((n as f64).sqrt().ceil() as usize).max(1);
    let t = ((n as f64).log2().ceil() as usize).max(1);
    (b, t)
}

pub fn hierarchical_compress(
    kernel: &Kernel,
    points: &PointSet,
    batch_size: usize,
    per_batch_t: usize,
    final_t: usize,
) -> Result<HierarchicalCoreset> {
    if batch_size == 0 {
        return Err(Error::Precondition("batch_size must be at least 1".into()));
    }
    let n = points.len();
    let batches: Vec<Vec<usize>> =
        (0..n).step_by(batch_size).map(|s| (s..(s + batch_size).min(n)).collect()).collect();
    let stage1: Vec<BatchResult> = batches
        .par_iter()
        .map(|idx| {
            let sub = points.subset(idx)?;
            let (c, trace) = frank_wolfe(kernel, &sub, per_batch_t)?;
            let share = idx.len() as f64 / n as f64;
            let global: Vec<usize> = c.indices.iter().map(|&i| idx[i]).collect();
            let w: Vec<f64> = c.weights.iter().map(|w| w * share).collect();
            Ok((global, w, share * trace.last_error_sq().max(0.0).sqrt()))
        })
        .collect();
    let mut merged_idx = Vec::new();
    let mut merged_w = Vec::new();
    let mut stage1_budget = 0.0;
    for r in stage1 {
        let (i, w, e) = r?;
        merged_idx.extend(i);
        merged_w.extend(w);
        stage1_budget += e;
    }
    let total: f64 = merged_w.iter().sum();
    for w in merged_w.iter_mut() {
        *w /= total;
    }
    let merged_pts = points.subset(&merged_idx)?;
    let g = gram(kernel, &merged_pts)?.entries;
    let (w, trace) = compress::frank_wolfe_weighted(&g, &merged_w, final_t)?;
    let (indices, weights): (Vec<usize>, Vec<f64>) =
        w.iter().enumerate().filter(|(_, &v)| v > 0.0).map(|(i, &v)| (merged_idx[i], v)).unzip();
    let coreset = Coreset { indices, weights, source_id: points.id(), n_source: n };
    Ok(HierarchicalCoreset {
        coreset,
        batch_size,
        per_batch_t,
        final_t,
        stage1_budget,
        stage2_budget: trace.last_error_sq().max(0.0).sqrt(),
    })
}

/// MMD between hierarchical coresets of both samples with default batch
/// parameters; the budget adds the stage budgets of both sides.
pub fn mmd_sq_hierarchical(kernel: &Kernel, a: &PointSet, b: &PointSet, final_t: usize) -> Result<MmdResult> {
    check_dims(a, b)?;
    let (ba, ta) = hierarchical_defaults(a.len());
    let (bb, tb) = hierarchical_defaults(b.len());
    let ha = hierarchical_compress(kernel, a, ba, ta, final_t)?;
    let hb = hierarchical_compress(kernel, b, bb, tb, final_t)?;
    let (pa, wa) = coreset_points(&ha.coreset, a)?;
    let (pb, wb) = coreset_points(&hb.coreset, b)?;
    let v = mmd_weighted(kernel, &pa, &wa, &pb, &wb)?;
    Ok(MmdResult {
        mmd_sq: v.max(0.0),
        mode: MmdMode::Hierarchical,
        error_budget: Some(ha.total_budget() + hb.total_budget()),
    })
}
