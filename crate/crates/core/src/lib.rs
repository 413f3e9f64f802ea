//! Compression of kernel mean embeddings.
//!
//! A sample `X_1, ..., X_n` embeds into a reproducing kernel Hilbert space as
//! the mean `m_n = (1/n) sum_i k(X_i, .)`. This crate builds small weighted
//! subsets whose embeddings approximate `m_n` and uses them downstream:
//!
//! - [`kernel`]: kernels, their combinations and Gram matrices.
//! - [`compress`]: kernel herding, Frank-Wolfe and an epsilon-net baseline.
//! - [`spectral`]: lower bounds on the width of the embedded hull and the
//!   deviation bounds that govern how large `n` must be.
//! - [`learn`]: ridge regression on coresets and two-sample MMD.
//! - [`counterexample`]: an explicit space where herding weights diverge.
//! - [`repro`]: named checks that reproduce the reference numbers.
//!
//! ```
//! use rkhs_coreset::{compress::frank_wolfe, kernel::Kernel, points::PointSet};
//!
//! let pts = PointSet::from_scalars(&[0.0, 1.0, 2.0]).unwrap();
//! let (coreset, trace) = frank_wolfe(&Kernel::delta(), &pts, 3).unwrap();
//! assert_eq!(coreset.len(), 3);
//! assert!(trace.last_error_sq() < 1e-20);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod kernel;
pub mod linalg;
pub mod points;
pub mod spectral;
pub mod compress;
pub mod learn;
pub mod counterexample;
pub mod io;
pub mod repro;
pub mod cli;
