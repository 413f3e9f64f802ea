use crate::error::{Error, Result};
use sha2::{Digest, Sha256};

/// A sample of `n` points in `R^l`, stored row-major, with optional labels.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    data: Vec<f64>,
    n: usize,
    dim: usize,
    labels: Option<Vec<f64>>,
    domain_box: Option<Vec<(f64, f64)>>,
}

impl PointSet {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Invalid("point set must contain at least one point".into()));
        }
        let dim = rows[0].len();
        let mut data = Vec::with_capacity(n * dim);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::Invalid(format!("row {i} has {} coordinates, expected {dim}", r.len())));
            }
            data.extend_from_slice(r);
        }
        Self::from_flat(data, n, dim)
    }

    pub fn from_flat(data: Vec<f64>, n: usize, dim: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("point set must contain at least one point".into()));
        }
        if data.len() != n * dim {
            return Err(Error::Invalid("flat buffer length does not match n * dim".into()));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("row {} contains a non-finite value", i / dim.max(1))));
        }
        Ok(Self { data, n, dim, labels: None, domain_box: None })
    }

    /// One-dimensional points.
    pub fn from_scalars(xs: &[f64]) -> Result<Self> {
        Self::from_flat(xs.to_vec(), xs.len(), 1)
    }

    pub fn with_labels(mut self, labels: Vec<f64>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::Invalid(format!("{} labels for {} points", labels.len(), self.n)));
        }
        if labels.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("labels must be finite".into()));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_domain_box(mut self, bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.len() != self.dim {
            return Err(Error::Invalid("domain box dimension mismatch".into()));
        }
        if bounds.iter().any(|(lo, hi)| !(lo <= hi)) {
            return Err(Error::Invalid("domain box needs lo <= hi".into()));
        }
        self.domain_box = Some(bounds);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim.max(1)).take(self.n)
    }

    pub fn labels(&self) -> Option<&[f64]> {
        self.labels.as_deref()
    }

    pub fn domain_box(&self) -> Option<&[(f64, f64)]> {
        self.domain_box.as_deref()
    }

    /// Bounding box of the sample, used when no domain box was supplied.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        (0..self.dim)
            .map(|c| {
                self.rows().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r[c]), hi.max(r[c])))
            })
            .collect()
    }

    pub fn subset(&self, idx: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            if i >= self.n {
                return Err(Error::Invalid(format!("index {i} out of range for {} points", self.n)));
            }
            data.extend_from_slice(self.row(i));
        }
        let mut out = Self::from_flat(data, idx.len(), self.dim)?;
        if let Some(l) = &self.labels {
            out.labels = Some(idx.iter().map(|&i| l[i]).collect());
        }
        out.domain_box = self.domain_box.clone();
        Ok(out)
    }

    /// Points `(y_i, x_i)` in `R^{1+l}`, the input domain of label-weighted kernels.
    pub fn augmented(&self) -> Result<Self> {
        let labels = self
            .labels
            .as_ref()
            .ok_or_else(|| Error::Invalid("augmented points need labels".into()))?;
        let mut data = Vec::with_capacity(self.n * (self.dim + 1));
        for (i, r) in self.rows().enumerate() {
            data.push(labels[i]);
            data.extend_from_slice(r);
        }
        Self::from_flat(data, self.n, self.dim + 1)
    }

    /// Short content hash used to tag derived objects with their source.
    pub fn id(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.n as u64).to_le_bytes());
        h.update((self.dim as u64).to_le_bytes());
        for v in &self.data {
            h.update(v.to_le_bytes());
        }
        if let Some(l) = &self.labels {
            for v in l {
                h.update(v.to_le_bytes());
            }
        }
        let digest = h.finalize();
        digest[..6].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// `m` equispaced points on `[lo, hi]`, endpoints included.
pub fn linspace(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    match m {
        0 => vec![],
        1 => vec![(lo + hi) / 2.0],
        _ => (0..m).map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64).collect(),
    }
}

/// Tensor grid with `per_dim` equispaced points along each coordinate of `bounds`.
pub fn grid(bounds: &[(f64, f64)], per_dim: usize) -> Result<PointSet> {
    let dim = bounds.len();
    let total = per_dim
        .checked_pow(dim as u32)
        .ok_or_else(|| Error::Invalid("grid too large".into()))?;
    let axes: Vec<Vec<f64>> = bounds.iter().map(|&(lo, hi)| linspace(lo, hi, per_dim)).collect();
    let mut data = Vec::with_capacity(total * dim);
    for k in 0..total {
        let mut rem = k;
        for axis in axes.iter() {
            data.push(axis[rem % per_dim]);
            rem /= per_dim;
        }
    }
    PointSet::from_flat(data, total, dim)
}
