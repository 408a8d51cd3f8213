//! Finite-parameter feedback laws and the gain/resolution conditions under
//! which each one is known to stabilize the zero state.
//!
//! Every control term is returned fully signed, ready to be added to the
//! acceleration:
//!
//! - volume elements: `−μ Σ ū_k χ_{J_k}` with `J_k = [(k−1)h, kh)`, `h = L/N`;
//! - Fourier modes: `−μ Σ_{k≤N} (u, w_k) w_k`;
//! - nodal: `−μ Σ h·u(x̄_k)·δ_h(x − x_k)` with a single-node discrete delta;
//! - subdomain: `−μ χ_ω u`.
//!
//! Strict inequalities in the gain conditions are checked strictly and
//! non-strict ones inclusively.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{integrate_interval, l2_inner, BoundaryCondition, Field, Grid1D, State};
use crate::spectral::{complement_eigenvalue, dirichlet_eigenvalue, mu_zero, sine_mode, Subdomain};

#[derive(Debug, Clone, PartialEq)]
pub enum ControllerSpec {
    VolumeElements { n: usize, mu: f64 },
    FourierModes { n: usize, mu: f64 },
    /// One observation point `x̄_k` and one actuation point `x_k` per cell `J_k`.
    Nodal { mu: f64, obs_points: Vec<f64>, act_points: Vec<f64> },
    Subdomain { omega: Subdomain, mu: f64 },
    None,
}

impl ControllerSpec {
    /// Nodal controller observing and actuating at the cell midpoints.
    pub fn nodal_midpoints(n: usize, mu: f64, length: f64) -> Self {
        let h = length / n as f64;
        let mids: Vec<f64> = (0..n).map(|k| (k as f64 + 0.5) * h).collect();
        ControllerSpec::Nodal { mu, obs_points: mids.clone(), act_points: mids }
    }

    pub fn mu(&self) -> f64 {
        match self {
            ControllerSpec::VolumeElements { mu, .. }
            | ControllerSpec::FourierModes { mu, .. }
            | ControllerSpec::Nodal { mu, .. }
            | ControllerSpec::Subdomain { mu, .. } => *mu,
            ControllerSpec::None => 0.0,
        }
    }

    /// Number of observables, `N`.
    pub fn resolution(&self) -> Option<usize> {
        match self {
            ControllerSpec::VolumeElements { n, .. } | ControllerSpec::FourierModes { n, .. } => Some(*n),
            ControllerSpec::Nodal { obs_points, .. } => Some(obs_points.len()),
            _ => None,
        }
    }

    /// Same controller with a different gain.
    pub fn with_mu(&self, new_mu: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            ControllerSpec::VolumeElements { mu, .. }
            | ControllerSpec::FourierModes { mu, .. }
            | ControllerSpec::Nodal { mu, .. }
            | ControllerSpec::Subdomain { mu, .. } => *mu = new_mu,
            ControllerSpec::None => {}
        }
        out
    }

    pub fn name(&self) -> &'static str {
        match self {
            ControllerSpec::VolumeElements { .. } => "volume",
            ControllerSpec::FourierModes { .. } => "fourier",
            ControllerSpec::Nodal { .. } => "nodal",
            ControllerSpec::Subdomain { .. } => "subdomain",
            ControllerSpec::None => "none",
        }
    }

    /// Checks parameters and boundary-condition compatibility against `grid`.
    pub fn validate(&self, grid: &Grid1D) -> Result<()> {
        let mu = self.mu();
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("gain mu must be nonnegative, got {mu}")));
        }
        let required = match self {
            ControllerSpec::VolumeElements { .. } => Some(BoundaryCondition::Neumann),
            ControllerSpec::None => None,
            _ => Some(BoundaryCondition::Dirichlet),
        };
        if let Some(bc) = required {
            if grid.bc() != bc {
                return Err(Error::BcMismatch(format!("the {} controller needs a {bc} grid", self.name())));
            }
        }
        let length = grid.length();
        match self {
            ControllerSpec::VolumeElements { n, .. } | ControllerSpec::FourierModes { n, .. } if *n == 0 => {
                Err(Error::InvalidParameter("N must be at least 1".into()))
            }
            ControllerSpec::FourierModes { n, .. } if *n >= grid.n_cells() => Err(Error::InvalidParameter(
                format!("N = {n} modes cannot be resolved on {} cells", grid.n_cells()),
            )),
            ControllerSpec::Nodal { obs_points, act_points, .. } => {
                let n = obs_points.len();
                if n == 0 || act_points.len() != n {
                    return Err(Error::InvalidParameter(
                        "nodal controller needs N >= 1 observation and actuation points".into(),
                    ));
                }
                let h = length / n as f64;
                let tol = 1e-12 * length;
                for (k, (&ob, &ac)) in obs_points.iter().zip(act_points).enumerate() {
                    let (lo, hi) = (k as f64 * h - tol, (k + 1) as f64 * h + tol);
                    for x in [ob, ac] {
                        if !(lo <= x && x <= hi) {
                            return Err(Error::InvalidParameter(format!(
                                "nodal point {x} lies outside J_{} = [{}, {}]",
                                k + 1,
                                k as f64 * h,
                                (k + 1) as f64 * h
                            )));
                        }
                    }
                }
                Ok(())
            }
            ControllerSpec::Subdomain { omega, .. } => {
                Subdomain::new(omega.lo(), omega.hi(), length).map(|_| ())
            }
            _ => Ok(()),
        }
    }
}

/// Index `k` (0-based) of the cell `J_{k+1}` containing `x`.
#[inline]
fn cell_of(x: f64, h: f64, n: usize) -> usize {
    (((x / h) + 1e-9).floor().max(0.0) as usize).min(n - 1)
}

/// Cell averages `ū_k = |J_k|⁻¹ ∫_{J_k} u` of the piecewise-linear interpolant.
pub fn cell_averages(u: &Field, n: usize) -> Vec<f64> {
    let l = u.grid().length();
    let h = l / n as f64;
    (0..n)
        .map(|k| integrate_interval(u, k as f64 * h, (k + 1) as f64 * h) / h)
        .collect()
}

/// `Σ ū_k χ_{J_k}` sampled at the nodes.
pub fn piecewise_constant(u: &Field, n: usize) -> Field {
    let h = u.grid().length() / n as f64;
    let avg = cell_averages(u, n);
    Field::from_fn(*u.grid(), |x| avg[cell_of(x, h, n)])
}

/// The signed control term for `state`.
pub fn control_field(spec: &ControllerSpec, state: &State) -> Result<Field> {
    spec.validate(state.grid())?;
    Ok(control_of(spec, &state.u))
}

/// Control term as a function of `u` alone; assumes `spec` was validated.
pub(crate) fn control_of(spec: &ControllerSpec, u: &Field) -> Field {
    let grid = *u.grid();
    match spec {
        ControllerSpec::None => Field::zeros(grid),
        _ if spec.mu() == 0.0 => Field::zeros(grid),
        ControllerSpec::VolumeElements { n, mu } => piecewise_constant(u, *n).scaled(-mu),
        ControllerSpec::FourierModes { n, mu } => {
            let mut out = Field::zeros(grid);
            for k in 1..=*n {
                let w = sine_mode(&grid, k);
                let c = l2_inner(u, &w).expect("same grid");
                out.axpy(-mu * c, &w).expect("same grid");
            }
            out
        }
        ControllerSpec::Nodal { mu, obs_points, act_points } => {
            let h = grid.length() / obs_points.len() as f64;
            let mut out = Field::zeros(grid);
            let vals = out.values_mut();
            for (&ob, &ac) in obs_points.iter().zip(act_points) {
                let j = grid.nearest_node(ac);
                vals[j] -= mu * h * u.value_at(ob) / grid.dx();
            }
            out
        }
        ControllerSpec::Subdomain { omega, mu } => {
            let mut out = u.clone();
            for (j, val) in out.values_mut().iter_mut().enumerate() {
                *val = if omega.contains(grid.node(j)) { -mu * *val } else { 0.0 };
            }
            out
        }
    }
}

/// Quadratic energy stored by the feedback term:
/// `(μ/2)hΣū_k²`, `(μ/2)Σ(u,w_k)²`, `(μh/2)Σu(x̄_k)²` or `(μ/2)∫χ_ω u²`.
pub fn controller_energy(spec: &ControllerSpec, u: &Field) -> f64 {
    let grid = *u.grid();
    match spec {
        ControllerSpec::None => 0.0,
        ControllerSpec::VolumeElements { n, mu } => {
            let h = grid.length() / *n as f64;
            0.5 * mu * h * cell_averages(u, *n).iter().map(|x| x * x).sum::<f64>()
        }
        ControllerSpec::FourierModes { n, mu } => {
            0.5 * mu
                * (1..=*n)
                    .map(|k| l2_inner(u, &sine_mode(&grid, k)).expect("same grid").powi(2))
                    .sum::<f64>()
        }
        ControllerSpec::Nodal { mu, obs_points, .. } => {
            let h = grid.length() / obs_points.len() as f64;
            0.5 * mu * h * obs_points.iter().map(|&x| u.value_at(x).powi(2)).sum::<f64>()
        }
        ControllerSpec::Subdomain { omega, mu } => {
            0.5 * mu
                * u.values()
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| omega.contains(grid.node(*j)))
                    .map(|(j, x)| grid.weight(j) * x * x)
                    .sum::<f64>()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Margin {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs − rhs`
    pub slack: f64,
    pub strict: bool,
    pub holds: bool,
}

impl Margin {
    /// `lhs ≥ rhs`
    pub fn at_least(name: &str, lhs: f64, rhs: f64) -> Self {
        Self { name: name.into(), lhs, rhs, slack: lhs - rhs, strict: false, holds: lhs >= rhs }
    }

    /// `lhs > rhs`
    pub fn greater(name: &str, lhs: f64, rhs: f64) -> Self {
        Self { name: name.into(), lhs, rhs, slack: lhs - rhs, strict: true, holds: lhs > rhs }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayLaw {
    /// `‖·‖ ≤ C e^{−rate·t}`
    Exponential,
    /// `‖·‖ ≤ C t^{−exponent}`
    Polynomial,
    /// Exponential with an unspecified rate.
    QualitativeExponential,
}

/// Outcome of checking one controller's gain conditions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainReport {
    pub check: String,
    /// True iff every margin holds.
    pub satisfied: bool,
    /// Decay rate for exponential laws, exponent for the polynomial law.
    pub predicted_rate: Option<f64>,
    pub decay: DecayLaw,
    pub margins: Vec<Margin>,
    pub notes: Vec<String>,
}

impl GainReport {
    fn new(check: &str, decay: DecayLaw, predicted_rate: Option<f64>, margins: Vec<Margin>) -> Self {
        let satisfied = margins.iter().all(|m| m.holds);
        Self { check: check.into(), satisfied, predicted_rate, decay, margins, notes: Vec::new() }
    }

    pub fn margin(&self, name: &str) -> Option<&Margin> {
        self.margins.iter().find(|m| m.name == name)
    }
}

/// `δ₀ = (b/2)·min(1, ν)` for the volume-element controller.
pub fn volume_rate(nu: f64, b: f64) -> f64 {
    0.5 * b * nu.min(1.0)
}

/// `δ₀ = bλ₁ν / (2ν + b²λ₁)` for the strongly damped Fourier controller.
pub fn strong_fourier_rate(length: f64, nu: f64, b: f64) -> f64 {
    let l1 = dirichlet_eigenvalue(length, 1);
    b * l1 * nu / (2.0 * nu + b * b * l1)
}

/// Volume elements, Neumann damped wave: `μ ≥ 2(a + δ₀b/2)` and
/// `N² > L²/(2νπ²)·(a + δ₀b/2)`.
pub fn check_volume_gains(length: f64, nu: f64, a: f64, b: f64, mu: f64, n: usize) -> GainReport {
    let delta0 = volume_rate(nu, b);
    let core = a + delta0 * b / 2.0;
    let n_threshold = length * length / (2.0 * nu * PI * PI) * core;
    let margins = vec![
        Margin::at_least("mu", mu, 2.0 * core),
        Margin::greater("N^2", (n * n) as f64, n_threshold),
    ];
    let mut report = GainReport::new("volume_elements", DecayLaw::Exponential, Some(delta0), margins);
    report.notes.push(format!(
        "with the Poincare-Wirtinger constant (h/pi)^2 in the interpolation lemma the N condition \
         becomes N > {:.6} (twice the stated threshold {:.6})",
        2.0 * n_threshold.sqrt(),
        n_threshold.sqrt()
    ));
    report
}

/// Fourier modes, Dirichlet damped wave: `ν ≥ (2a + 3b²/4)/λ_{N+1}` and `μ ≥ a + 3b²/4`.
pub fn check_fourier_gains(length: f64, nu: f64, a: f64, b: f64, mu: f64, n: usize) -> GainReport {
    let lam = dirichlet_eigenvalue(length, n + 1);
    let margins = vec![
        Margin::at_least("nu", nu, (2.0 * a + 0.75 * b * b) / lam),
        Margin::at_least("mu", mu, a + 0.75 * b * b),
    ];
    GainReport::new("fourier_modes", DecayLaw::Exponential, Some(0.5 * b), margins)
}

/// Fourier modes, nonlinear damping `b|v|^{m−2}v`: `ν > 2a/λ_{N+1}` and `μ > a`;
/// polynomial decay with exponent `(m−1)/m`.
pub fn check_nonlinear_gains(length: f64, nu: f64, a: f64, mu: f64, n: usize, m: f64) -> GainReport {
    let lam = dirichlet_eigenvalue(length, n + 1);
    let margins = vec![Margin::greater("nu", nu, 2.0 * a / lam), Margin::greater("mu", mu, a)];
    GainReport::new("nonlinear_damping_fourier", DecayLaw::Polynomial, Some((m - 1.0) / m), margins)
}

/// Nodal observables, strongly damped wave with unit stiffness.
pub fn check_nodal_gains(length: f64, nu: f64, a: f64, b: f64, mu: f64, n: usize) -> GainReport {
    let l1 = dirichlet_eigenvalue(length, 1);
    let h = length / n as f64;
    let h2 = h * h;
    let margins = vec![
        Margin::greater("sc1", mu, 4.0 * (a + l1 * l1 * b * b / 4.0)),
        Margin::greater("sc2", l1 * b / 2.0 - 2.0 * h2 * (mu / (l1 * b) - a * l1 * b), 0.0),
        Margin::greater("sc2a", b * b * l1 * l1 / 4.0 - a * a * l1 * l1 * b * b * h2 - mu * h2, 0.0),
    ];
    let mut report = GainReport::new("nodal", DecayLaw::QualitativeExponential, None, margins);
    if nu != 1.0 {
        report.notes.push(format!("the nodal conditions are stated for unit stiffness; nu = {nu} is not used"));
    }
    report
}

/// Fourier modes, strongly damped wave: `μ > 2a + δ₀λ₁b/4` and
/// `ν ≥ (2a + bλ₁δ₀/4)/λ_{N+1}` with `δ₀ = bλ₁ν/(2ν + b²λ₁)`.
pub fn check_strong_fourier_gains(length: f64, nu: f64, a: f64, b: f64, mu: f64, n: usize) -> GainReport {
    let l1 = dirichlet_eigenvalue(length, 1);
    let lam = dirichlet_eigenvalue(length, n + 1);
    let delta0 = strong_fourier_rate(length, nu, b);
    let core = 2.0 * a + 0.25 * delta0 * l1 * b;
    let margins = vec![Margin::greater("mu", mu, core), Margin::at_least("nu", nu, core / lam)];
    GainReport::new("strong_fourier_modes", DecayLaw::Exponential, Some(delta0), margins)
}

/// Subdomain actuation: `λ₁(Ω_ω) ≥ 4a + 3b²/2` and `μ > μ₀(λ₁(Ω_ω)/2)`.
pub fn check_subdomain_gains(
    length: f64,
    a: f64,
    b: f64,
    mu: f64,
    omega: &Subdomain,
    grid: &Grid1D,
) -> Result<GainReport> {
    let lc = complement_eigenvalue(length, omega);
    let mu0 = mu_zero(length, omega, 0.5 * lc, grid)?;
    let margins = vec![
        Margin::at_least("complement_eigenvalue", lc, 4.0 * a + 1.5 * b * b),
        Margin::greater("mu", mu, mu0),
    ];
    let mut report = GainReport::new("subdomain", DecayLaw::Exponential, Some(0.5 * b), margins);
    report.notes.push(format!("mu0 = {mu0:.6} computed on {} cells", grid.n_cells()));
    Ok(report)
}
