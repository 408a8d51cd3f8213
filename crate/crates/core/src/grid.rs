//! Uniform 1-D meshes on `(0, L)`, the second-order finite-difference
//! Laplacian and trapezoid quadrature.
//!
//! Dirichlet grids store only the interior nodes `x_i = i·dx`, `i = 1..n-1`;
//! the boundary values are implicitly zero. Neumann grids store every node
//! `x_i = i·dx`, `i = 0..n`, and the Laplacian uses reflected ghost values.
//!
//! All quadrature is the composite trapezoid rule on nodal values. With this
//! inner product the discrete Laplacian is self-adjoint for both boundary
//! conditions, and `-(Δu, u) = |u|₁²` holds exactly where `|u|₁` is the
//! cell-difference seminorm returned by [`h1_seminorm`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

impl std::fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundaryCondition::Dirichlet => write!(f, "dirichlet"),
            BoundaryCondition::Neumann => write!(f, "neumann"),
        }
    }
}

impl std::str::FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" => Ok(BoundaryCondition::Dirichlet),
            "neumann" => Ok(BoundaryCondition::Neumann),
            other => Err(Error::InvalidParameter(format!("unknown boundary condition '{other}'"))),
        }
    }
}

/// Uniform mesh of `(0, L)` with `n_cells` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    length: f64,
    n_cells: usize,
    bc: BoundaryCondition,
    dx: f64,
}

impl Grid1D {
    pub const MIN_CELLS: usize = 4;

    pub fn new(length: f64, n_cells: usize, bc: BoundaryCondition) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("length must be positive, got {length}")));
        }
        if n_cells < Self::MIN_CELLS {
            return Err(Error::InvalidGrid(format!(
                "need at least {} cells, got {n_cells}",
                Self::MIN_CELLS
            )));
        }
        Ok(Self { length, n_cells, bc, dx: length / n_cells as f64 })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Number of stored nodes.
    pub fn node_count(&self) -> usize {
        match self.bc {
            BoundaryCondition::Dirichlet => self.n_cells - 1,
            BoundaryCondition::Neumann => self.n_cells + 1,
        }
    }

    /// Mesh index (0..=n_cells) of stored node `j`.
    #[inline]
    pub fn mesh_index(&self, j: usize) -> usize {
        match self.bc {
            BoundaryCondition::Dirichlet => j + 1,
            BoundaryCondition::Neumann => j,
        }
    }

    /// Position of stored node `j`.
    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        self.mesh_index(j) as f64 * self.dx
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.node_count()).map(|j| self.node(j)).collect()
    }

    /// Trapezoid weight of stored node `j`.
    #[inline]
    pub fn weight(&self, j: usize) -> f64 {
        match self.bc {
            BoundaryCondition::Dirichlet => self.dx,
            BoundaryCondition::Neumann => {
                if j == 0 || j == self.n_cells {
                    0.5 * self.dx
                } else {
                    self.dx
                }
            }
        }
    }

    /// Stored node closest to `x`, clamped to the stored range.
    pub fn nearest_node(&self, x: f64) -> usize {
        let m = (x / self.dx).round().clamp(0.0, self.n_cells as f64) as usize;
        match self.bc {
            BoundaryCondition::Dirichlet => m.clamp(1, self.n_cells - 1) - 1,
            BoundaryCondition::Neumann => m,
        }
    }
}

/// Nodal values of a function on a [`Grid1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid1D,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::InvalidParameter(format!(
                "field has {} values but the grid stores {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self { grid, values: vec![0.0; grid.node_count()] }
    }

    pub fn constant(grid: Grid1D, c: f64) -> Self {
        Self { grid, values: vec![c; grid.node_count()] }
    }

    /// Samples `f` at every stored node.
    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.node_count()).map(|j| f(grid.node(j))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field { grid: self.grid, values: self.values.iter().map(|&x| f(x)).collect() }
    }

    pub fn scaled(&self, alpha: f64) -> Field {
        self.map(|x| alpha * x)
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &Field) -> Result<()> {
        same_grid(self, other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
        Ok(())
    }

    /// Nodal values on the full mesh `0..=n_cells`, including the implicit
    /// Dirichlet zeros.
    pub fn padded(&self) -> Vec<f64> {
        match self.grid.bc {
            BoundaryCondition::Neumann => self.values.clone(),
            BoundaryCondition::Dirichlet => {
                let mut out = Vec::with_capacity(self.grid.n_cells + 1);
                out.push(0.0);
                out.extend_from_slice(&self.values);
                out.push(0.0);
                out
            }
        }
    }

    /// Piecewise-linear interpolant evaluated at `x ∈ [0, L]`.
    pub fn value_at(&self, x: f64) -> f64 {
        let g = &self.grid;
        let s = (x / g.dx).clamp(0.0, g.n_cells as f64);
        let i = (s.floor() as usize).min(g.n_cells - 1);
        let theta = s - i as f64;
        let left = self.mesh_value(i);
        let right = self.mesh_value(i + 1);
        (1.0 - theta) * left + theta * right
    }

    /// Value at mesh index `m` (0..=n_cells).
    #[inline]
    pub fn mesh_value(&self, m: usize) -> f64 {
        match self.grid.bc {
            BoundaryCondition::Neumann => self.values[m],
            BoundaryCondition::Dirichlet => {
                if m == 0 || m == self.grid.n_cells {
                    0.0
                } else {
                    self.values[m - 1]
                }
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

pub(crate) fn same_grid(f: &Field, g: &Field) -> Result<()> {
    if f.grid == g.grid {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// `(u, ∂t u)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u: Field,
    pub v: Field,
    pub t: f64,
}

impl State {
    pub fn new(u: Field, v: Field, t: f64) -> Result<Self> {
        same_grid(&u, &v)?;
        if !(t >= 0.0) {
            return Err(Error::InvalidParameter(format!("time must be nonnegative, got {t}")));
        }
        Ok(Self { u, v, t })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self { u: Field::zeros(grid), v: Field::zeros(grid), t: 0.0 }
    }

    pub fn grid(&self) -> &Grid1D {
        self.u.grid()
    }
}

pub fn make_grid(length: f64, n_cells: usize, bc: BoundaryCondition) -> Result<Grid1D> {
    Grid1D::new(length, n_cells, bc)
}

/// Second-order central difference `(f_{i-1} - 2f_i + f_{i+1}) / dx²`.
pub fn laplacian_apply(f: &Field) -> Field {
    let g = *f.grid();
    let inv = 1.0 / (g.dx * g.dx);
    let u = f.values();
    let n = u.len();
    let mut out = vec![0.0; n];
    match g.bc {
        BoundaryCondition::Dirichlet => {
            for i in 0..n {
                let left = if i > 0 { u[i - 1] } else { 0.0 };
                let right = if i + 1 < n { u[i + 1] } else { 0.0 };
                out[i] = (left - 2.0 * u[i] + right) * inv;
            }
        }
        BoundaryCondition::Neumann => {
            // ghosts f_{-1} = f_1, f_{n+1} = f_{n-1}
            out[0] = 2.0 * (u[1] - u[0]) * inv;
            out[n - 1] = 2.0 * (u[n - 2] - u[n - 1]) * inv;
            for i in 1..n - 1 {
                out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * inv;
            }
        }
    }
    Field { grid: g, values: out }
}

/// Trapezoid integral of `f` over `(0, L)`.
pub fn integrate(f: &Field) -> f64 {
    let g = f.grid();
    f.values().iter().enumerate().map(|(j, v)| g.weight(j) * v).sum()
}

/// Exact integral over `[a, b] ∩ [0, L]` of the piecewise-linear interpolant of `f`.
pub fn integrate_interval(f: &Field, a: f64, b: f64) -> f64 {
    let g = f.grid();
    let lo = a.max(0.0);
    let hi = b.min(g.length);
    if hi <= lo {
        return 0.0;
    }
    let first = ((lo / g.dx).floor() as usize).min(g.n_cells - 1);
    let last = ((hi / g.dx).ceil() as usize).clamp(first + 1, g.n_cells);
    let mut total = 0.0;
    for cell in first..last {
        let xl = cell as f64 * g.dx;
        let xr = xl + g.dx;
        let s = lo.max(xl);
        let e = hi.min(xr);
        if e <= s {
            continue;
        }
        let fl = f.mesh_value(cell);
        let fr = f.mesh_value(cell + 1);
        let mid = 0.5 * (s + e);
        let theta = (mid - xl) / g.dx;
        total += (e - s) * ((1.0 - theta) * fl + theta * fr);
    }
    total
}

pub fn l2_inner(f: &Field, g: &Field) -> Result<f64> {
    same_grid(f, g)?;
    let grid = f.grid();
    Ok(f.values()
        .iter()
        .zip(g.values())
        .enumerate()
        .map(|(j, (a, b))| grid.weight(j) * a * b)
        .sum())
}

pub fn l2_norm(f: &Field) -> f64 {
    let g = f.grid();
    f.values()
        .iter()
        .enumerate()
        .map(|(j, v)| g.weight(j) * v * v)
        .sum::<f64>()
        .sqrt()
}

/// `‖∂x f‖` from one-sided (cell) differences, including boundary cells.
pub fn h1_seminorm(f: &Field) -> f64 {
    let g = f.grid();
    let n = g.n_cells;
    let mut acc = 0.0;
    let mut prev = f.mesh_value(0);
    for m in 1..=n {
        let cur = f.mesh_value(m);
        let d = cur - prev;
        acc += d * d;
        prev = cur;
    }
    (acc / g.dx).sqrt()
}

/// `(∫|f|^p)^{1/p}` for `p ≥ 2`.
pub fn lp_norm(f: &Field, p: f64) -> Result<f64> {
    Ok(lp_integral(f, p)?.powf(1.0 / p))
}

/// `∫|f|^p` for `p ≥ 2`.
pub fn lp_integral(f: &Field, p: f64) -> Result<f64> {
    if !(p >= 2.0) {
        return Err(Error::InvalidParameter(format!("Lp exponent must be >= 2, got {p}")));
    }
    let g = f.grid();
    Ok(f.values()
        .iter()
        .enumerate()
        .map(|(j, v)| g.weight(j) * v.abs().powf(p))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn dir(l: f64, n: usize) -> Grid1D {
        Grid1D::new(l, n, BoundaryCondition::Dirichlet).unwrap()
    }

    fn neu(l: f64, n: usize) -> Grid1D {
        Grid1D::new(l, n, BoundaryCondition::Neumann).unwrap()
    }

    #[test]
    fn dirichlet_layout() {
        let g = dir(PI, 100);
        assert_eq!(g.node_count(), 99);
        for j in 0..99 {
            assert!((g.node(j) - (j + 1) as f64 * PI / 100.0).abs() < 1e-14);
        }
        assert!(((g.dx() * 100.0) - PI).abs() <= f64::EPSILON * PI);
    }

    #[test]
    fn neumann_layout() {
        let g = neu(1.0, 10);
        let nodes = g.nodes();
        assert_eq!(nodes.len(), 11);
        for (j, x) in nodes.iter().enumerate() {
            assert!((x - j as f64 * 0.1).abs() < 1e-15);
        }
        assert_eq!(nodes[10], 1.0);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(
            Grid1D::new(-1.0, 10, BoundaryCondition::Dirichlet),
            Err(Error::InvalidGrid(_))
        ));
        assert!(Grid1D::new(0.0, 10, BoundaryCondition::Neumann).is_err());
        assert!(Grid1D::new(1.0, 3, BoundaryCondition::Neumann).is_err());
        assert!(Grid1D::new(f64::NAN, 10, BoundaryCondition::Neumann).is_err());
    }

    #[test]
    fn laplacian_of_constant_vanishes_neumann() {
        let g = neu(2.0, 16);
        let lap = laplacian_apply(&Field::constant(g, 3.5));
        assert!(lap.max_abs() < 1e-12);
    }

    #[test]
    fn laplacian_dirichlet_sine() {
        let g = dir(PI, 200);
        let f = Field::from_fn(g, |x| x.sin());
        let lap = laplacian_apply(&f);
        let err = lap
            .values()
            .iter()
            .zip(g.nodes())
            .map(|(l, x)| (l + x.sin()).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-3, "max error {err}");
    }

    #[test]
    fn laplacian_neumann_cosine() {
        let l = 2.0;
        let g = neu(l, 200);
        let k = PI / l;
        let f = Field::from_fn(g, |x| (k * x).cos());
        let lap = laplacian_apply(&f);
        let err = lap
            .values()
            .iter()
            .zip(g.nodes())
            .map(|(v, x)| (v + k * k * (k * x).cos()).abs())
            .fold(0.0, f64::max);
        // O(dx²) with constant k⁴/12
        assert!(err <= k.powi(4) / 12.0 * g.dx().powi(2) * 1.5, "max error {err}");
    }

    #[test]
    fn norms_of_zero() {
        let g = dir(1.0, 8);
        let z = Field::zeros(g);
        assert_eq!(l2_norm(&z), 0.0);
        assert_eq!(h1_seminorm(&z), 0.0);
        assert_eq!(lp_norm(&z, 3.0).unwrap(), 0.0);
        assert_eq!(l2_inner(&z, &z).unwrap(), 0.0);
    }

    #[test]
    fn sine_l2_norm() {
        let g = dir(PI, 400);
        let f = Field::from_fn(g, f64::sin);
        assert!((l2_norm(&f).powi(2) - PI / 2.0).abs() < 1e-4);
    }

    #[test]
    fn linear_function_norms() {
        let g = neu(1.0, 400);
        let f = Field::from_fn(g, |x| x);
        assert!((l2_norm(&f).powi(2) - 1.0 / 3.0).abs() < 1e-3);
        assert!((h1_seminorm(&f).powi(2) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn lp_requires_p_at_least_two() {
        let g = dir(1.0, 8);
        assert!(lp_norm(&Field::zeros(g), 1.5).is_err());
    }

    #[test]
    fn mismatched_grids_error() {
        let a = Field::zeros(dir(1.0, 8));
        let b = Field::zeros(dir(1.0, 16));
        assert_eq!(l2_inner(&a, &b), Err(Error::GridMismatch));
    }

    #[test]
    fn quadrature_matches_trig_monomials() {
        let g = neu(PI, 256);
        let f = Field::from_fn(g, |x| (2.0 * x).cos().powi(2));
        // ∫₀^π cos²(2x) dx = π/2
        assert!((integrate(&f) - PI / 2.0).abs() < 1e-10);
        let h = Field::from_fn(g, f64::sin);
        // ∫₀^π sin x dx = 2, trapezoid error ~ π dx²/12 · max|sin''|
        assert!((integrate(&h) - 2.0).abs() < PI * g.dx().powi(2) / 12.0 * 2.0);
    }

    #[test]
    fn interval_integral_exact_for_linear() {
        let g = neu(1.0, 10);
        let f = Field::from_fn(g, |x| 2.0 * x + 1.0);
        let exact = |a: f64, b: f64| (b * b + b) - (a * a + a);
        for (a, b) in [(0.0, 1.0), (0.13, 0.77), (0.25, 0.5), (0.3, 0.3)] {
            assert!((integrate_interval(&f, a, b) - exact(a, b)).abs() < 1e-13);
        }
        assert!((integrate_interval(&f, 0.0, 1.0) - integrate(&f)).abs() < 1e-13);
    }

    #[test]
    fn energy_identity_is_exact() {
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
            let g = Grid1D::new(1.3, 37, bc).unwrap();
            let f = Field::from_fn(g, |x| (3.0 * x).sin() + x * x);
            let lhs = -l2_inner(&laplacian_apply(&f), &f).unwrap();
            let rhs = h1_seminorm(&f).powi(2);
            assert!((lhs - rhs).abs() < 1e-10 * rhs.max(1.0), "{bc}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn interpolation_hits_nodes() {
        let g = dir(1.0, 10);
        let f = Field::from_fn(g, |x| x * (1.0 - x));
        assert_eq!(f.value_at(0.0), 0.0);
        assert_eq!(f.value_at(1.0), 0.0);
        assert!((f.value_at(0.3) - 0.21).abs() < 1e-14);
        assert!((f.value_at(0.35) - 0.5 * (0.21 + 0.24)).abs() < 1e-14);
    }
}
