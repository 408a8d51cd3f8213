//! Tridiagonal kernels: the Thomas algorithm and Sturm-sequence bisection for
//! the extreme eigenvalue of a symmetric tridiagonal matrix.

use crate::error::{Error, Result};

/// Tridiagonal matrix stored by diagonals.
///
/// Row `i` reads `lower[i]·x[i-1] + diag[i]·x[i] + upper[i]·x[i+1]`;
/// `lower[0]` and `upper[n-1]` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Solves `A x = rhs` in place by forward elimination and back substitution.
    ///
    /// No pivoting; the caller guarantees diagonal dominance.
    pub fn solve_in_place(&self, rhs: &mut [f64]) -> Result<()> {
        let n = self.len();
        if rhs.len() != n {
            return Err(Error::InvalidParameter(format!(
                "rhs length {} does not match matrix size {n}",
                rhs.len()
            )));
        }
        if n == 0 {
            return Ok(());
        }
        let mut c = vec![0.0; n];
        let mut beta = self.diag[0];
        if beta == 0.0 {
            return Err(Error::NonConvergence("zero pivot in tridiagonal solve".into()));
        }
        rhs[0] /= beta;
        for i in 1..n {
            c[i - 1] = self.upper[i - 1] / beta;
            beta = self.diag[i] - self.lower[i] * c[i - 1];
            if beta == 0.0 {
                return Err(Error::NonConvergence("zero pivot in tridiagonal solve".into()));
            }
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) / beta;
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= c[i] * rhs[i + 1];
        }
        Ok(())
    }
}

/// Number of eigenvalues strictly below `x` of the symmetric tridiagonal
/// matrix with diagonal `diag` and off-diagonal `off` (`off.len() == n-1`).
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let e2 = if i > 0 { off[i - 1] * off[i - 1] } else { 0.0 };
        let prev = if q == 0.0 { f64::EPSILON } else { q };
        q = (diag[i] - x) - if i > 0 { e2 / prev } else { 0.0 };
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest eigenvalue of a symmetric tridiagonal matrix by bisection on the
/// Sturm count, to relative tolerance `rel_tol`.
pub fn smallest_eigenvalue(diag: &[f64], off: &[f64], rel_tol: f64) -> f64 {
    let n = diag.len();
    assert!(n > 0 && off.len() + 1 == n, "malformed tridiagonal matrix");
    // Gershgorin bracket
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(diag, off, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= rel_tol * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
    }
    0.5 * (lo + hi)
}
