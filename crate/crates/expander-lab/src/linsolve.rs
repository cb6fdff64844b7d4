//! Sparse linear solves for the Newton systems, backed by faer's sparse LU.
//!
//! Everything runs sequentially: parallelism is pinned to `Par::Seq` once per
//! process so repeated runs factor and solve in exactly the same order.

use std::sync::Once;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};

use crate::error::{Error, Result};

static SEQ_INIT: Once = Once::new();

fn ensure_sequential() {
    SEQ_INIT.call_once(|| {
        faer::set_global_parallelism(faer::Par::Seq);
    });
}

/// Solves `A x = b` for a square sparse system given as triplets.
pub fn solve_sparse(n: usize, triplets: &[(usize, usize, f64)], b: &[f64]) -> Result<Vec<f64>> {
    ensure_sequential();
    assert_eq!(b.len(), n);
    let entries: Vec<Triplet<usize, usize, f64>> =
        triplets.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &entries)
        .map_err(|e| Error::LinearSolveFailed(format!("assembly: {e:?}")))?;
    let lu = a
        .sp_lu()
        .map_err(|e| Error::LinearSolveFailed(format!("factorization: {e:?}")))?;
    let rhs = faer::Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
    let x = lu.solve(&rhs);
    let out: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::LinearSolveFailed("non-finite solution".into()));
    }
    Ok(out)
}
