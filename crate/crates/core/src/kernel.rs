//! Kernels, kernel calculus and Gram matrices.

use crate::error::{Error, Result};
use crate::linalg;
use crate::points::PointSet;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::fmt;
use std::sync::Arc;

/// Optional metadata carried alongside a kernel. All fields are advisory.
///
/// `sup_bound` bounds `sqrt(k(x, x))`, so `k(x, x) <= sup_bound^2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KernelMeta {
    pub dim_rkhs: Option<usize>,
    pub sup_bound: Option<f64>,
    pub lipschitz: Option<f64>,
}

/// A single monomial feature `coef * prod_j x_j^{powers_j}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    #[serde(default = "one")]
    pub coef: f64,
    pub powers: Vec<u32>,
}

fn one() -> f64 {
    1.0
}

impl Monomial {
    fn eval(&self, x: &[f64]) -> f64 {
        self.powers
            .iter()
            .zip(x)
            .fold(self.coef, |acc, (&p, &xi)| acc * xi.powi(p as i32))
    }
}

type FeatureFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Constant(f64),
    PolyNoConst(u32),
    Linear,
    Delta,
    Monomials(Vec<Monomial>),
    Custom { name: String, map: FeatureFn },
    PlusConstant(Kernel),
    MinusConstant(Kernel, f64),
    Squared(Kernel),
    YWeighted(Kernel),
    Extended(Kernel),
    Sum(Kernel, Kernel),
}

/// A symmetric positive semi-definite kernel.
///
/// Kernels are cheap to clone and immutable. Label-aware kernels
/// ([`Kernel::y_weighted`], [`Kernel::extended`]) read points as `(y, x)`
/// with the label in the first coordinate.
#[derive(Clone)]
pub struct Kernel {
    kind: Arc<Kind>,
    meta: KernelMeta,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel").field("id", &self.id()).field("meta", &self.meta).finish()
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

impl Kernel {
    fn from_kind(kind: Kind, meta: KernelMeta) -> Self {
        Self { kind: Arc::new(kind), meta }
    }

    /// The constant kernel `k(x, y) = c` with `c >= 0`.
    pub fn constant(c: f64) -> Self {
        let dim = if c > 0.0 { Some(1) } else { Some(0) };
        Self::from_kind(
            Kind::Constant(c),
            KernelMeta { dim_rkhs: dim, sup_bound: Some(c.max(0.0).sqrt()), lipschitz: Some(0.0) },
        )
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// `k_d(x, y) = sum_{u=1}^d <x, y>^u`. On `[-1, 1]` this spans the
    /// monomials `x, ..., x^d` without the constant.
    pub fn poly_no_const(degree: u32) -> Self {
        Self::from_kind(
            Kind::PolyNoConst(degree),
            KernelMeta {
                dim_rkhs: Some(degree as usize),
                sup_bound: Some((degree as f64).sqrt()),
                lipschitz: None,
            },
        )
    }

    pub fn linear() -> Self {
        Self::from_kind(Kind::Linear, KernelMeta::default())
    }

    /// `k(x, y) = 1` if `x == y` coordinatewise, else `0`.
    pub fn delta() -> Self {
        Self::from_kind(Kind::Delta, KernelMeta { dim_rkhs: None, sup_bound: Some(1.0), lipschitz: None })
    }

    /// Explicit polynomial features.
    pub fn monomials(features: Vec<Monomial>) -> Self {
        let d = features.len();
        Self::from_kind(Kind::Monomials(features), KernelMeta { dim_rkhs: Some(d), ..Default::default() })
    }

    /// Explicit feature map `phi: R^l -> R^d`, `k(x, y) = <phi(x), phi(y)>`.
    pub fn feature_map<F>(name: &str, dim: usize, map: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self::from_kind(
            Kind::Custom { name: name.to_string(), map: Arc::new(map) },
            KernelMeta { dim_rkhs: Some(dim), ..Default::default() },
        )
    }

    pub fn with_meta(mut self, meta: KernelMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn meta(&self) -> KernelMeta {
        self.meta
    }

    /// `k + 1`. Set `one_outside` when the constant function is known not to
    /// lie in the RKHS of `k`, so the dimension grows by one.
    pub fn plus_constant(&self, one_outside: bool) -> Self {
        let m = self.meta;
        let meta = KernelMeta {
            dim_rkhs: if one_outside { m.dim_rkhs.map(|d| d + 1) } else { None },
            sup_bound: m.sup_bound.map(|s| (s * s + 1.0).sqrt()),
            lipschitz: m.lipschitz,
        };
        Self::from_kind(Kind::PlusConstant(self.clone()), meta)
    }

    /// `k - c_sq`. Use [`Kernel::minus_constant_checked`] to validate the
    /// result on a grid.
    pub fn minus_constant(&self, c_sq: f64) -> Result<Self> {
        if !(c_sq >= 0.0) || !c_sq.is_finite() {
            return Err(Error::Precondition(format!("c_sq must be a finite non-negative number, got {c_sq}")));
        }
        if c_sq == 0.0 {
            return Ok(self.clone());
        }
        let m = self.meta;
        let meta = KernelMeta { dim_rkhs: m.dim_rkhs.and_then(|d| d.checked_sub(1)), ..m };
        Ok(Self::from_kind(Kind::MinusConstant(self.clone(), c_sq), meta))
    }

    /// `k - c_sq`, rejecting values of `c_sq` for which the Gram matrix on
    /// `grid` is not positive semi-definite up to `1e-8 * trace`.
    pub fn minus_constant_checked(&self, c_sq: f64, grid: &PointSet) -> Result<Self> {
        let k = self.minus_constant(c_sq)?;
        let g = gram(&k, grid)?;
        let min_eig = linalg::sym_eigenvalues(&g.entries).iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -psd_tolerance(&g.entries) {
            return Err(Error::InvalidConstant { c_sq, min_eig });
        }
        Ok(k)
    }

    /// `k^2`.
    pub fn squared(&self) -> Self {
        let m = self.meta;
        let meta = KernelMeta {
            dim_rkhs: None,
            sup_bound: m.sup_bound.map(|s| s * s),
            lipschitz: None,
        };
        Self::from_kind(Kind::Squared(self.clone()), meta)
    }

    /// `((y1, x1), (y2, x2)) -> y1 y2 k(x1, x2)`.
    pub fn y_weighted(&self) -> Self {
        Self::from_kind(Kind::YWeighted(self.clone()), KernelMeta::default())
    }

    /// `((y1, x1), (y2, x2)) -> k(x1, x2)^2`.
    pub fn extended(&self) -> Self {
        let meta = self.squared().meta;
        Self::from_kind(Kind::Extended(self.clone()), meta)
    }

    pub fn sum(&self, other: &Kernel) -> Self {
        let (a, b) = (self.meta, other.meta);
        let meta = KernelMeta {
            dim_rkhs: None,
            sup_bound: a.sup_bound.zip(b.sup_bound).map(|(s, t)| (s * s + t * t).sqrt()),
            lipschitz: a.lipschitz.zip(b.lipschitz).map(|(s, t)| s + t),
        };
        Self::from_kind(Kind::Sum(self.clone(), other.clone()), meta)
    }

    /// The kernel whose RKHS carries the covariance-type target and the
    /// label-weighted mean at once.
    pub fn direct_sum(&self) -> Self {
        self.extended().sum(&self.y_weighted())
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match &*self.kind {
            Kind::Constant(c) => *c,
            Kind::PolyNoConst(d) => {
                let t = dot(x, y);
                let mut p = 1.0;
                let mut s = 0.0;
                for _ in 0..*d {
                    p *= t;
                    s += p;
                }
                s
            }
            Kind::Linear => dot(x, y),
            Kind::Delta => {
                if x == y {
                    1.0
                } else {
                    0.0
                }
            }
            Kind::Monomials(f) => f.iter().map(|m| m.eval(x) * m.eval(y)).sum(),
            Kind::Custom { map, .. } => dot(&map(x), &map(y)),
            Kind::PlusConstant(k) => k.eval(x, y) + 1.0,
            Kind::MinusConstant(k, c) => k.eval(x, y) - c,
            Kind::Squared(k) => {
                let v = k.eval(x, y);
                v * v
            }
            Kind::YWeighted(k) => x[0] * y[0] * k.eval(&x[1..], &y[1..]),
            Kind::Extended(k) => {
                let v = k.eval(&x[1..], &y[1..]);
                v * v
            }
            Kind::Sum(a, b) => a.eval(x, y) + b.eval(x, y),
        }
    }

    /// Short human-readable identifier.
    pub fn id(&self) -> String {
        match &*self.kind {
            Kind::Constant(c) => format!("constant({c})"),
            Kind::PolyNoConst(d) => format!("poly_no_const({d})"),
            Kind::Linear => "linear".into(),
            Kind::Delta => "delta".into(),
            Kind::Monomials(f) => format!("feature_map({})", f.len()),
            Kind::Custom { name, .. } => format!("feature_map({name})"),
            Kind::PlusConstant(k) => format!("plus_constant({})", k.id()),
            Kind::MinusConstant(k, c) => format!("minus_constant({}, {c})", k.id()),
            Kind::Squared(k) => format!("squared({})", k.id()),
            Kind::YWeighted(k) => format!("y_weighted({})", k.id()),
            Kind::Extended(k) => format!("extended({})", k.id()),
            Kind::Sum(a, b) => format!("sum({}, {})", a.id(), b.id()),
        }
    }

    /// JSON configuration `{"kind": ..., "params": {...}}`. Kernels built from
    /// closures have no configuration.
    pub fn config(&self) -> Option<KernelConfig> {
        let (kind, params) = match &*self.kind {
            Kind::Constant(c) => ("constant", json!({ "value": c })),
            Kind::PolyNoConst(d) => ("poly_no_const", json!({ "degree": d })),
            Kind::Linear => ("linear", json!({})),
            Kind::Delta => ("delta", json!({})),
            Kind::Monomials(f) => ("feature_map", json!({ "monomials": f })),
            Kind::Custom { .. } => return None,
            Kind::PlusConstant(k) => ("plus_constant", json!({ "inner": k.config()? })),
            Kind::MinusConstant(k, c) => ("minus_constant", json!({ "inner": k.config()?, "c_sq": c })),
            Kind::Squared(k) => ("squared", json!({ "inner": k.config()? })),
            Kind::YWeighted(k) => ("y_weighted", json!({ "inner": k.config()? })),
            Kind::Extended(k) => ("extended", json!({ "inner": k.config()? })),
            Kind::Sum(a, b) => ("sum", json!({ "left": a.config()?, "right": b.config()? })),
        };
        Some(KernelConfig { kind: kind.to_string(), params })
    }
}

/// Serialized kernel description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub kind: String,
    #[serde(default = "empty_object")]
    pub params: Value,
}

fn empty_object() -> Value {
    json!({})
}

impl KernelConfig {
    pub fn build(&self) -> Result<Kernel> {
        let p = &self.params;
        let inner = |key: &str| -> Result<Kernel> {
            let v = p.get(key).ok_or_else(|| Error::Invalid(format!("kernel {} needs params.{key}", self.kind)))?;
            let c: KernelConfig = serde_json::from_value(v.clone())?;
            c.build()
        };
        let num = |key: &str| -> Result<f64> {
            p.get(key)
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::Invalid(format!("kernel {} needs numeric params.{key}", self.kind)))
        };
        let k = match self.kind.as_str() {
            "constant" => Kernel::constant(num("value")?),
            "poly_no_const" => {
                let d = p.get("degree").and_then(Value::as_u64).unwrap_or(1);
                Kernel::poly_no_const(d as u32)
            }
            "linear" => Kernel::linear(),
            "delta" => Kernel::delta(),
            "feature_map" => {
                let f = p
                    .get("monomials")
                    .ok_or_else(|| Error::Invalid("feature_map needs params.monomials".into()))?;
                Kernel::monomials(serde_json::from_value(f.clone())?)
            }
            "plus_constant" => inner("inner")?.plus_constant(false),
            "minus_constant" => inner("inner")?.minus_constant(num("c_sq")?)?,
            "squared" => inner("inner")?.squared(),
            "y_weighted" => inner("inner")?.y_weighted(),
            "extended" => inner("inner")?.extended(),
            "sum" => inner("left")?.sum(&inner("right")?),
            other => return Err(Error::Invalid(format!("unknown kernel kind {other:?}"))),
        };
        Ok(k)
    }
}

/// A symmetric kernel matrix together with a tag naming its source.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    pub entries: DMatrix<f64>,
    pub source: String,
}

impl GramMatrix {
    pub fn from_matrix(entries: DMatrix<f64>) -> Self {
        Self { entries, source: "matrix".into() }
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }
}

/// `1e-8 * trace(K)`, the slack allowed below zero for PSD checks.
pub fn psd_tolerance(k: &DMatrix<f64>) -> f64 {
    1e-8 * k.trace().abs()
}

/// Gram matrix `K_ij = k(x_i, x_j)`. Rows are assembled in parallel and every
/// entry is evaluated exactly once, so the result does not depend on the
/// thread count.
pub fn gram(kernel: &Kernel, points: &PointSet) -> Result<GramMatrix> {
    let n = points.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (i..n).map(|j| kernel.eval(points.row(i), points.row(j))).collect())
        .collect();
    let mut m = DMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            let j = i + off;
            if !v.is_finite() {
                return Err(Error::NonFinite { i, j });
            }
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(GramMatrix { entries: m, source: format!("{}@{}", kernel.id(), points.id()) })
}

/// Cross kernel matrix `K_ij = k(a_i, b_j)`.
pub fn cross_gram(kernel: &Kernel, a: &PointSet, b: &PointSet) -> Result<DMatrix<f64>> {
    let rows: Vec<Vec<f64>> = (0..a.len())
        .into_par_iter()
        .map(|i| (0..b.len()).map(|j| kernel.eval(a.row(i), b.row(j))).collect())
        .collect();
    let mut m = DMatrix::zeros(a.len(), b.len());
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { i, j });
            }
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

/// `||1||^2` in the RKHS estimated as `1^T K^+ 1` on `grid`.
pub fn estimate_const_norm(kernel: &Kernel, grid: &PointSet) -> Result<f64> {
    let g = gram(kernel, grid)?;
    let ones = DVector::from_element(grid.len(), 1.0);
    let pinv = linalg::pinv(&g.entries, linalg::PINV_RTOL)?;
    let v = &pinv * &ones;
    let residual = (&g.entries * &v - &ones).amax();
    if residual > 1e-6 {
        return Err(Error::ConstantNotRepresentable { residual });
    }
    Ok(ones.dot(&v))
}
