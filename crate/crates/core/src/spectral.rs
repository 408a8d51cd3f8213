//! Dirichlet eigenpairs of `-∂x²` on `(0, L)` and the subdomain eigenvalue
//! problems behind the interior controller.
//!
//! The basis is analytic: `λ_k = (kπ/L)²` and `w_k(x) = √(2/L)·sin(kπx/L)`.
//! Sampled on a Dirichlet grid with `k < n_cells` the modes stay exactly
//! orthonormal under trapezoid quadrature (discrete sine orthogonality).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{h1_seminorm, l2_inner, l2_norm, BoundaryCondition, Field, Grid1D};
use crate::linalg::smallest_eigenvalue;

/// Upper end of the gain search in [`mu_zero`].
pub const MU_SEARCH_MAX: f64 = 1e6;
/// Relative bracket width at which the gain search stops.
pub const MU_SEARCH_REL_TOL: f64 = 1e-3;
/// Quadrature slack used by [`tail_bound_check`].
pub const TAIL_SLACK: f64 = 1.01;

/// The first `count + 1` Dirichlet eigenpairs on `(0, L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenBasis {
    length: f64,
    count: usize,
}

impl EigenBasis {
    pub fn new(length: f64, count: usize) -> Result<Self> {
        if !(length > 0.0) || count == 0 {
            return Err(Error::InvalidParameter(format!(
                "eigenbasis needs L > 0 and count >= 1 (got L = {length}, count = {count})"
            )));
        }
        Ok(Self { length, count })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// `λ_k = (kπ/L)²`, valid for `k = 1..=count+1`.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        dirichlet_eigenvalue(self.length, k)
    }

    /// `w_k` sampled on a Dirichlet grid of the same length.
    pub fn mode(&self, k: usize, grid: &Grid1D) -> Result<Field> {
        if k == 0 || k > self.count + 1 {
            return Err(Error::OutOfRange { index: k, max: self.count + 1 });
        }
        self.check_grid(grid)?;
        Ok(sine_mode(grid, k))
    }

    fn check_grid(&self, grid: &Grid1D) -> Result<()> {
        if grid.bc() != BoundaryCondition::Dirichlet {
            return Err(Error::BcMismatch("the sine basis lives on Dirichlet grids".into()));
        }
        if (grid.length() - self.length).abs() > 1e-12 * self.length {
            return Err(Error::InvalidParameter(format!(
                "basis length {} differs from grid length {}",
                self.length,
                grid.length()
            )));
        }
        Ok(())
    }
}

/// `(kπ/L)²`
pub fn dirichlet_eigenvalue(length: f64, k: usize) -> f64 {
    let s = k as f64 * PI / length;
    s * s
}

/// `√(2/L)·sin(kπx/L)` sampled on `grid` without any checks.
pub(crate) fn sine_mode(grid: &Grid1D, k: usize) -> Field {
    let l = grid.length();
    let amp = (2.0 / l).sqrt();
    let s = k as f64 * PI / l;
    Field::from_fn(*grid, |x| amp * (s * x).sin())
}

/// Coefficients `(f, w_k)` for `k = 1..=n`.
pub fn project_modes(f: &Field, basis: &EigenBasis, n: usize) -> Result<Vec<f64>> {
    if n == 0 || n > basis.count {
        return Err(Error::OutOfRange { index: n, max: basis.count });
    }
    basis.check_grid(f.grid())?;
    (1..=n).map(|k| l2_inner(f, &sine_mode(f.grid(), k))).collect()
}

/// `Σ coeffs[k-1]·w_k` on `grid`.
pub fn synthesize(grid: &Grid1D, coeffs: &[f64]) -> Field {
    let mut out = Field::zeros(*grid);
    for (i, c) in coeffs.iter().enumerate() {
        if *c != 0.0 {
            out.axpy(*c, &sine_mode(grid, i + 1)).expect("same grid");
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBound {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// Compares `‖f - Σ_{k≤N}(f,w_k)w_k‖²` with `‖∂x f‖²/λ_{N+1}`.
pub fn tail_bound_check(f: &Field, basis: &EigenBasis, n: usize) -> Result<TailBound> {
    let coeffs = project_modes(f, basis, n)?;
    let mut residual = f.clone();
    residual.axpy(-1.0, &synthesize(f.grid(), &coeffs))?;
    let lhs = l2_norm(&residual).powi(2);
    let rhs = h1_seminorm(f).powi(2) / basis.eigenvalue(n + 1);
    Ok(TailBound { lhs, rhs, ok: lhs <= rhs * TAIL_SLACK })
}

/// Open control interval `ω = (lo, hi)` with `0 < lo < hi < L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Subdomain {
    lo: f64,
    hi: f64,
}

impl Subdomain {
    pub fn new(lo: f64, hi: f64, length: f64) -> Result<Self> {
        if !(0.0 < lo && lo < hi && hi < length) {
            return Err(Error::InvalidParameter(format!(
                "subdomain ({lo}, {hi}) must satisfy 0 < lo < hi < L = {length}"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Sharp nodal indicator: inside iff `lo ≤ x < hi`.
    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x < self.hi
    }

    /// `χ_ω` sampled on the nodes of `grid`.
    pub fn indicator(&self, grid: &Grid1D) -> Field {
        Field::from_fn(*grid, |x| if self.contains(x) { 1.0 } else { 0.0 })
    }

    /// Length of the longest component of `(0, L) \ [lo, hi]`.
    pub fn longest_gap(&self, length: f64) -> f64 {
        self.lo.max(length - self.hi)
    }
}

/// Principal Dirichlet eigenvalue of `(0, L) \ closure(ω)`, i.e. `(π/ℓ)²` for
/// the longest component length `ℓ`.
pub fn complement_eigenvalue(length: f64, omega: &Subdomain) -> f64 {
    let l = omega.longest_gap(length);
    (PI / l) * (PI / l)
}

/// Smallest eigenvalue of the discrete operator `-Δ + μχ_ω` on a Dirichlet grid.
pub fn penalized_min_eigenvalue(grid: &Grid1D, omega: &Subdomain, mu: f64) -> Result<f64> {
    if grid.bc() != BoundaryCondition::Dirichlet {
        return Err(Error::BcMismatch("the subdomain eigenproblem is posed with Dirichlet conditions".into()));
    }
    let inv = 1.0 / (grid.dx() * grid.dx());
    let diag: Vec<f64> = grid
        .nodes()
        .into_iter()
        .map(|x| 2.0 * inv + if omega.contains(x) { mu } else { 0.0 })
        .collect();
    let off = vec![-inv; diag.len() - 1];
    Ok(smallest_eigenvalue(&diag, &off, 1e-13))
}

/// Smallest gain `μ` for which `λ_min(-Δ + μχ_ω) ≥ λ₁(Ω_ω) - d` on `grid`.
///
/// Bisection over `[0, MU_SEARCH_MAX]` until the bracket is narrower than
/// `MU_SEARCH_REL_TOL` relative; the returned value is the upper end of the
/// bracket, so it always satisfies the inequality.
pub fn mu_zero(length: f64, omega: &Subdomain, d: f64, grid: &Grid1D) -> Result<f64> {
    let lc = complement_eigenvalue(length, omega);
    if !(d > 0.0 && d < lc) {
        return Err(Error::InvalidParameter(format!("need 0 < d < λ₁(Ω_ω) = {lc}, got d = {d}")));
    }
    if (grid.length() - length).abs() > 1e-12 * length {
        return Err(Error::InvalidParameter("grid length differs from L".into()));
    }
    let target = lc - d;
    let holds = |mu: f64| penalized_min_eigenvalue(grid, omega, mu).map(|l| l >= target);
    if holds(0.0)? {
        return Ok(0.0);
    }
    if !holds(MU_SEARCH_MAX)? {
        return Err(Error::NonConvergence(format!(
            "λ_min(-Δ + μχ_ω) stays below {target} up to μ = {MU_SEARCH_MAX}"
        )));
    }
    let (mut lo, mut hi) = (0.0, MU_SEARCH_MAX);
    while hi - lo > MU_SEARCH_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if holds(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
