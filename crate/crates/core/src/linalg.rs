//! Dense linear-algebra helpers on top of nalgebra.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Singular values below `PINV_RTOL * sigma_max` are treated as zero.
pub const PINV_RTOL: f64 = 1e-10;

pub fn pinv(m: &DMatrix<f64>, rtol: f64) -> Result<DMatrix<f64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(m.transpose());
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return Ok(DMatrix::zeros(m.ncols(), m.nrows()));
    }
    svd.pseudo_inverse(rtol * smax).map_err(|e| Error::Numerical(e.to_string()))
}

/// Numerical rank with the same threshold as [`pinv`].
pub fn rank(m: &DMatrix<f64>, rtol: f64) -> usize {
    let s = m.clone().singular_values();
    let smax = s.max();
    s.iter().filter(|&&v| v > rtol * smax).count()
}

/// All eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().cloned().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Solves `A x = b` for symmetric positive definite `A`.
pub fn spd_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let chol = a
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("matrix is not positive definite".into()))?;
    Ok(chol.solve(b))
}

/// Solves `A x = b` by LU with partial pivoting.
pub fn lu_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Numerical("singular linear system".into()))
}

/// Greedy pivoted Cholesky factorization `K ~ R R^T`.
///
/// Returns the pivot indices and the `n x r` factor `R`. Stops after
/// `max_rank` pivots or when the largest remaining diagonal drops below
/// `tol * max_diag`.
pub fn pivoted_cholesky(k: &DMatrix<f64>, max_rank: usize, tol: f64) -> (Vec<usize>, DMatrix<f64>) {
    let n = k.nrows();
    let mut diag: Vec<f64> = (0..n).map(|i| k[(i, i)]).collect();
    let scale = diag.iter().cloned().fold(0.0, f64::max);
    let mut pivots = Vec::new();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    while pivots.len() < max_rank.min(n) {
        let (p, &dp) = diag
            .iter()
            .enumerate()
            .fold((0, &f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(dp > tol * scale) || dp <= 0.0 {
            break;
        }
        let s = dp.sqrt();
        let col: Vec<f64> = (0..n)
            .map(|i| {
                let mut v = k[(i, p)];
                for c in &cols {
                    v -= c[i] * c[p];
                }
                v / s
            })
            .collect();
        for i in 0..n {
            diag[i] -= col[i] * col[i];
        }
        diag[p] = 0.0;
        pivots.push(p);
        cols.push(col);
    }
    let r = DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i]);
    (pivots, r)
}
