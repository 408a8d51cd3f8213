//! Perturbed energy functionals whose decay certifies stabilization.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::controllers::{controller_energy, ControllerSpec};
use crate::error::{Error, Result};
use crate::grid::{h1_seminorm, l2_inner, l2_norm, BoundaryCondition, Field, Grid1D, State};
use crate::models::{ModelFamily, ModelSpec};
use crate::spectral::dirichlet_eigenvalue;

/// Coefficient sets of the Dirichlet functional `E_b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EbVariant {
    Subdomain,
    Fourier,
    StrongFourier,
}

impl fmt::Display for EbVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EbVariant::Subdomain => "subdomain",
            EbVariant::Fourier => "fourier",
            EbVariant::StrongFourier => "strong_fourier",
        })
    }
}

impl FromStr for EbVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "subdomain" => Ok(EbVariant::Subdomain),
            "fourier" => Ok(EbVariant::Fourier),
            "strong_fourier" => Ok(EbVariant::StrongFourier),
            other => Err(Error::InvalidParameter(format!("unknown functional variant '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LyapunovSpec {
    Volume { epsilon: f64 },
    Eb(EbVariant),
}

impl LyapunovSpec {
    /// Functional matching a model/controller pair, if one is defined.
    pub fn for_setup(model: &ModelSpec, ctrl: &ControllerSpec) -> Option<Self> {
        match (model.family, ctrl) {
            (ModelFamily::DampedWave, ControllerSpec::VolumeElements { .. }) => {
                Some(LyapunovSpec::Volume { epsilon: 0.5 * model.b })
            }
            (ModelFamily::DampedWave, ControllerSpec::FourierModes { .. }) => Some(LyapunovSpec::Eb(EbVariant::Fourier)),
            (ModelFamily::DampedWave, ControllerSpec::Subdomain { .. }) => Some(LyapunovSpec::Eb(EbVariant::Subdomain)),
            (ModelFamily::StronglyDampedWave, ControllerSpec::FourierModes { .. }) => {
                Some(LyapunovSpec::Eb(EbVariant::StrongFourier))
            }
            _ => None,
        }
    }

    pub fn check_compatible(&self, model: &ModelSpec, ctrl: &ControllerSpec, grid: &Grid1D) -> Result<()> {
        let _ = model;
        match self {
            LyapunovSpec::Volume { epsilon } => {
                if grid.bc() != BoundaryCondition::Neumann {
                    return Err(Error::BcMismatch("the volume-element functional needs a Neumann grid".into()));
                }
                if !matches!(ctrl, ControllerSpec::VolumeElements { .. }) {
                    return Err(Error::InvalidParameter(format!(
                        "the volume-element functional needs volume-element feedback, got {}",
                        ctrl.name()
                    )));
                }
                if !(epsilon.is_finite() && *epsilon > 0.0) {
                    return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
                }
                Ok(())
            }
            LyapunovSpec::Eb(variant) => {
                if grid.bc() != BoundaryCondition::Dirichlet {
                    return Err(Error::BcMismatch(format!("the {variant} functional needs a Dirichlet grid")));
                }
                let ok = match variant {
                    EbVariant::Subdomain => matches!(ctrl, ControllerSpec::Subdomain { .. }),
                    EbVariant::Fourier | EbVariant::StrongFourier => matches!(ctrl, ControllerSpec::FourierModes { .. }),
                };
                if !ok {
                    return Err(Error::InvalidParameter(format!(
                        "the {variant} functional does not apply to {} feedback",
                        ctrl.name()
                    )));
                }
                Ok(())
            }
        }
    }
}

pub fn evaluate(spec: &LyapunovSpec, state: &State, model: &ModelSpec, ctrl: &ControllerSpec) -> Result<f64> {
    match spec {
        LyapunovSpec::Volume { epsilon } => lyapunov_volume(state, model, ctrl, *epsilon),
        LyapunovSpec::Eb(variant) => lyapunov_eb(state, model, ctrl, *variant),
    }
}

fn potential(u: &Field, model: &ModelSpec) -> f64 {
    let grid = u.grid();
    u.values()
        .iter()
        .enumerate()
        .map(|(j, &x)| grid.weight(j) * model.nonlinearity.primitive(x))
        .sum()
}

struct Parts {
    v2: f64,
    du2: f64,
    u2: f64,
    uv: f64,
    f: f64,
    ctrl: f64,
}

fn parts(state: &State, model: &ModelSpec, ctrl: &ControllerSpec) -> Result<Parts> {
    Ok(Parts {
        v2: l2_norm(&state.v).powi(2),
        du2: h1_seminorm(&state.u).powi(2),
        u2: l2_norm(&state.u).powi(2),
        uv: l2_inner(&state.u, &state.v)?,
        f: potential(&state.u, model),
        ctrl: controller_energy(ctrl, &state.u),
    })
}

/// `Φ_ε = ½‖v‖² + (ν/2)‖∂x u‖² + ½(εb − a)‖u‖² + ∫F(u) + ½hμΣū_k² + ε(u, v)`.
pub fn lyapunov_volume(state: &State, model: &ModelSpec, ctrl: &ControllerSpec, epsilon: f64) -> Result<f64> {
    LyapunovSpec::Volume { epsilon }.check_compatible(model, ctrl, state.grid())?;
    let p = parts(state, model, ctrl)?;
    Ok(0.5 * p.v2 + 0.5 * model.nu * p.du2 + 0.5 * (epsilon * model.b - model.a) * p.u2 + p.f + p.ctrl + epsilon * p.uv)
}

/// The Dirichlet functionals. `Subdomain` and `Fourier` share
/// `½‖v‖² + (ν/2)‖∂x u‖² + (b²/4 − a/2)‖u‖² + ∫F(u) + C(u) + (b/2)(u, v)`
/// with `C` the feedback energy; `StrongFourier` uses `ε = bλ₁/2` in
/// `½‖v‖² + ½(ν + εb)‖∂x u‖² − (a/2)‖u‖² + ∫F(u) + C(u) + ε(u, v)`.
pub fn lyapunov_eb(state: &State, model: &ModelSpec, ctrl: &ControllerSpec, variant: EbVariant) -> Result<f64> {
    LyapunovSpec::Eb(variant).check_compatible(model, ctrl, state.grid())?;
    let p = parts(state, model, ctrl)?;
    let b = model.b;
    Ok(match variant {
        EbVariant::Subdomain | EbVariant::Fourier => {
            0.5 * p.v2 + 0.5 * model.nu * p.du2 + (0.25 * b * b - 0.5 * model.a) * p.u2 + p.f + p.ctrl + 0.5 * b * p.uv
        }
        EbVariant::StrongFourier => {
            let eps = 0.5 * b * dirichlet_eigenvalue(state.grid().length(), 1);
            0.5 * p.v2 + 0.5 * (model.nu + eps * b) * p.du2 - 0.5 * model.a * p.u2 + p.f + p.ctrl + eps * p.uv
        }
    })
}

/// `¼‖v‖² + d₀‖∂x u‖²` with `d₀ = δ₀bL²/(4N²νπ²)`, the lower bound for
/// `Φ_{b/2}` under satisfied volume-element gains.
pub fn volume_lower_bound(state: &State, model: &ModelSpec, n: usize) -> f64 {
    let l = state.grid().length();
    let delta0 = crate::controllers::volume_rate(model.nu, model.b);
    let d0 = delta0 * model.b * l * l / (4.0 * (n * n) as f64 * model.nu * std::f64::consts::PI.powi(2));
    0.25 * l2_norm(&state.v).powi(2) + d0 * h1_seminorm(&state.u).powi(2)
}

/// `¼‖v‖² + (ν/4)‖∂x u‖² + ∫F(u)`, the lower bound shared by the `E_b`
/// variants under satisfied gains.
pub fn eb_lower_bound(state: &State, model: &ModelSpec) -> f64 {
    0.25 * l2_norm(&state.v).powi(2) + 0.25 * model.nu * h1_seminorm(&state.u).powi(2) + potential(&state.u, model)
}
