//! The three wave-equation families and their admissible nonlinearities.
//!
//! Every family is written as `∂t²u = A(u, v) + control` with `v = ∂t u`:
//!
//! | family                   | acceleration                                  |
//! |--------------------------|-----------------------------------------------|
//! | `DampedWave`             | `νΔu − b·v + a·u − f(u)`                      |
//! | `NonlinearDampingWave`   | `νΔu − b·|v|^{m−2}v + a·u − |u|^{p−2}u`       |
//! | `StronglyDampedWave`     | `νΔu + bΔv + a·u − |u|^{p−2}u`                |
//!
//! The `a·u` term is destabilizing; `a = 0` switches it off.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{h1_seminorm, laplacian_apply, l2_norm, same_grid, BoundaryCondition, Field, State};

/// Samples used by [`Nonlinearity::check_condition_f`].
pub const CONDITION_F_SAMPLES: usize = 10_000;
pub const CONDITION_F_RANGE: f64 = 10.0;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied nonlinearity `f` together with its primitive `F(s) = ∫₀ˢ f`.
#[derive(Clone)]
pub struct CustomNonlinearity {
    pub name: String,
    f: ScalarFn,
    primitive: ScalarFn,
}

impl CustomNonlinearity {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        primitive: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), f: Arc::new(f), primitive: Arc::new(primitive) }
    }
}

impl fmt::Debug for CustomNonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomNonlinearity").field("name", &self.name).finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum Nonlinearity {
    Zero,
    /// `f(u) = |u|^{p−2}u`, `F(s) = |s|^p / p`.
    PowerLaw { p: f64 },
    Custom(CustomNonlinearity),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionFReport {
    pub samples: usize,
    /// `min_s f(s)s − F(s)`
    pub min_monotone_gap: f64,
    /// `min_s f′(s)` by central differences
    pub min_derivative: f64,
    pub satisfied: bool,
}

impl Nonlinearity {
    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::PowerLaw { p } => power(s, *p),
            Nonlinearity::Custom(c) => (c.f)(s),
        }
    }

    #[inline]
    pub fn primitive(&self, s: f64) -> f64 {
        match self {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::PowerLaw { p } => s.abs().powf(*p) / p,
            Nonlinearity::Custom(c) => (c.primitive)(s),
        }
    }

    pub fn exponent(&self) -> Option<f64> {
        match self {
            Nonlinearity::PowerLaw { p } => Some(*p),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Nonlinearity::PowerLaw { p } if !(*p >= 2.0 && p.is_finite()) => {
                Err(Error::InvalidParameter(format!("power-law exponent must be >= 2, got {p}")))
            }
            _ => Ok(()),
        }
    }

    /// Samples `f(s)s − F(s) ≥ 0` and `f′(s) ≥ 0` on a uniform grid of
    /// `[−10, 10]` together with `f(0) = 0`.
    pub fn check_condition_f(&self) -> ConditionFReport {
        let n = CONDITION_F_SAMPLES;
        let step = 1e-6;
        let mut min_gap = f64::INFINITY;
        let mut min_der = f64::INFINITY;
        for i in 0..n {
            let s = -CONDITION_F_RANGE + 2.0 * CONDITION_F_RANGE * i as f64 / (n - 1) as f64;
            min_gap = min_gap.min(self.eval(s) * s - self.primitive(s));
            let d = (self.eval(s + step) - self.eval(s - step)) / (2.0 * step);
            min_der = min_der.min(d);
        }
        let satisfied = self.eval(0.0) == 0.0 && min_gap >= -1e-12 && min_der >= -1e-8;
        ConditionFReport { samples: n, min_monotone_gap: min_gap, min_derivative: min_der, satisfied }
    }
}

#[inline]
fn power(s: f64, p: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else if p == 4.0 {
        s * s * s
    } else if p == 3.0 {
        s.abs() * s
    } else if p == 2.0 {
        s
    } else {
        s.abs().powf(p - 2.0) * s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    DampedWave,
    NonlinearDampingWave,
    StronglyDampedWave,
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModelFamily::DampedWave => "damped",
            ModelFamily::NonlinearDampingWave => "nonlinear_damping",
            ModelFamily::StronglyDampedWave => "strongly_damped",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for ModelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "damped" | "damped_wave" => Ok(ModelFamily::DampedWave),
            "nonlinear_damping" | "nonlinear_damping_wave" => Ok(ModelFamily::NonlinearDampingWave),
            "strongly_damped" | "strongly_damped_wave" => Ok(ModelFamily::StronglyDampedWave),
            other => Err(Error::InvalidParameter(format!("unknown model family '{other}'"))),
        }
    }
}

/// PDE family and coefficients.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub family: ModelFamily,
    /// Stiffness `ν > 0`.
    pub nu: f64,
    /// Anti-damping coefficient `a ≥ 0`.
    pub a: f64,
    /// Damping gain `b ≥ 0`; zero gives the undamped equation.
    pub b: f64,
    /// Damping exponent `m > 2`, used only by `NonlinearDampingWave`.
    pub m: f64,
    pub nonlinearity: Nonlinearity,
    pub bc: BoundaryCondition,
}

impl ModelSpec {
    pub fn damped(nu: f64, a: f64, b: f64, nonlinearity: Nonlinearity, bc: BoundaryCondition) -> Self {
        Self { family: ModelFamily::DampedWave, nu, a, b, m: 0.0, nonlinearity, bc }
    }

    pub fn nonlinear_damping(nu: f64, a: f64, b: f64, m: f64, p: f64) -> Self {
        Self {
            family: ModelFamily::NonlinearDampingWave,
            nu,
            a,
            b,
            m,
            nonlinearity: Nonlinearity::PowerLaw { p },
            bc: BoundaryCondition::Dirichlet,
        }
    }

    pub fn strongly_damped(nu: f64, a: f64, b: f64, p: f64) -> Self {
        Self {
            family: ModelFamily::StronglyDampedWave,
            nu,
            a,
            b,
            m: 0.0,
            nonlinearity: Nonlinearity::PowerLaw { p },
            bc: BoundaryCondition::Dirichlet,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return bad(format!("nu must be positive, got {}", self.nu));
        }
        if !(self.a >= 0.0 && self.a.is_finite()) {
            return bad(format!("a must be nonnegative, got {}", self.a));
        }
        if !(self.b >= 0.0 && self.b.is_finite()) {
            return bad(format!("b must be nonnegative, got {}", self.b));
        }
        self.nonlinearity.validate()?;
        match self.family {
            ModelFamily::DampedWave => {}
            ModelFamily::NonlinearDampingWave | ModelFamily::StronglyDampedWave => {
                if self.bc != BoundaryCondition::Dirichlet {
                    return Err(Error::BcMismatch(format!("{} is posed with Dirichlet conditions", self.family)));
                }
                if matches!(self.nonlinearity, Nonlinearity::Custom(_)) {
                    return bad(format!("{} uses the power-law nonlinearity only", self.family));
                }
            }
        }
        if self.family == ModelFamily::NonlinearDampingWave && !(self.m > 2.0 && self.m.is_finite()) {
            return bad(format!("damping exponent m must exceed 2, got {}", self.m));
        }
        Ok(())
    }

    /// Coefficients of the terms treated implicitly: `(β, γ)` in `βΔv − γv`.
    pub(crate) fn implicit_damping(&self) -> (f64, f64) {
        match self.family {
            ModelFamily::DampedWave => (0.0, self.b),
            ModelFamily::NonlinearDampingWave => (0.0, 0.0),
            ModelFamily::StronglyDampedWave => (self.b, 0.0),
        }
    }

    /// Non-stiff part of the acceleration: `a·u − f(u) − b·g(v) + control`,
    /// where `g(v) = |v|^{m−2}v` for the nonlinearly damped family and zero otherwise.
    pub(crate) fn explicit_forcing(&self, u: &Field, v: &Field, control: &Field) -> Field {
        let nl = &self.nonlinearity;
        let nonlinear_damping = self.family == ModelFamily::NonlinearDampingWave;
        let values = u
            .values()
            .iter()
            .zip(v.values())
            .zip(control.values())
            .map(|((&uu, &vv), &c)| {
                let mut acc = self.a * uu - nl.eval(uu) + c;
                if nonlinear_damping {
                    acc -= self.b * power(vv, self.m);
                }
                acc
            })
            .collect();
        Field::new(*u.grid(), values).expect("same layout")
    }

    /// Stiff linear part `νΔu + βΔv − γv`.
    pub(crate) fn stiff_part(&self, u: &Field, v: &Field) -> Field {
        let (beta, gamma) = self.implicit_damping();
        let mut out = laplacian_apply(u).scaled(self.nu);
        if beta != 0.0 {
            out.axpy(beta, &laplacian_apply(v)).expect("same grid");
        }
        if gamma != 0.0 {
            out.axpy(-gamma, v).expect("same grid");
        }
        out
    }
}

/// `∂t²u` for the given state and (already signed) control term.
pub fn acceleration(state: &State, model: &ModelSpec, control: &Field) -> Result<Field> {
    same_grid(&state.u, control)?;
    same_grid(&state.u, &state.v)?;
    let mut out = model.stiff_part(&state.u, &state.v);
    out.axpy(1.0, &model.explicit_forcing(&state.u, &state.v, control))?;
    Ok(out)
}

/// Energy decomposition of a state, recorded along trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyRecord {
    pub t: f64,
    /// `½‖v‖²`
    pub kinetic: f64,
    /// `(ν/2)‖∂x u‖²`
    pub grad: f64,
    /// `−(a/2)‖u‖²`
    pub quadratic: f64,
    /// `∫F(u)`
    pub lp: f64,
    /// Quadratic energy stored by the feedback term.
    pub controller: f64,
    pub total: f64,
    /// `‖v‖² + ‖∂x u‖²`
    pub stab_norm: f64,
    pub lyapunov: Option<f64>,
}

pub fn energy_record(state: &State, model: &ModelSpec, controller_term: f64) -> EnergyRecord {
    let v2 = l2_norm(&state.v).powi(2);
    let du2 = h1_seminorm(&state.u).powi(2);
    let u2 = l2_norm(&state.u).powi(2);
    let grid = state.u.grid();
    let lp: f64 = state
        .u
        .values()
        .iter()
        .enumerate()
        .map(|(j, &x)| grid.weight(j) * model.nonlinearity.primitive(x))
        .sum();
    let kinetic = 0.5 * v2;
    let grad = 0.5 * model.nu * du2;
    let quadratic = -0.5 * model.a * u2;
    EnergyRecord {
        t: state.t,
        kinetic,
        grad,
        quadratic,
        lp,
        controller: controller_term,
        total: kinetic + grad + quadratic + lp + controller_term,
        stab_norm: v2 + du2,
        lyapunov: None,
    }
}
