//! Time integration of `∂t²u = νΔu + βΔv − γv + N(u, v)`.
//!
//! [`Scheme::ImexCn`] integrates the stiff linear part (`νΔu`, the strong
//! damping `bΔv`, the linear damping `b·v`) by Crank–Nicolson and the
//! remaining forcing `N` (nonlinearity, `a·u`, nonlinear damping, feedback)
//! explicitly at the half step. Eliminating `u^{n+1}` from the Crank–Nicolson
//! pair leaves one tridiagonal system for `v^{n+1}`:
//!
//! ```text
//! [(1 + γdt/2) − (νdt²/4 + βdt/2)Δ] v^{n+1}
//!     = [(1 − γdt/2) + (νdt²/4 + βdt/2)Δ] v^n + dt·νΔu^n + dt·N^{n+½}
//! u^{n+1} = u^n + dt/2 (v^n + v^{n+1})
//! ```
//!
//! The half-step forcing `N^{n+½}` is evaluated at the average of `(u^n, v^n)`
//! and a predictor obtained with `N^n`, which keeps the step second order.
//! With `N ≡ 0` the step is plain Crank–Nicolson and conserves the discrete
//! energy `½‖v‖² + (ν/2)‖∂x u‖²` when undamped.

use serde::{Deserialize, Serialize};

use crate::controllers::{control_of, controller_energy, ControllerSpec};
use crate::error::{Error, Result};
use crate::grid::{same_grid, BoundaryCondition, Field, Grid1D, State};
use crate::linalg::Tridiagonal;
use crate::lyapunov::{self, LyapunovSpec};
pub use crate::models::EnergyRecord;
use crate::models::{energy_record, ModelFamily, ModelSpec};

/// Norm above which a run is declared blown up.
pub const BLOW_UP_THRESHOLD: f64 = 1e12;
/// Target number of records when `record_every` is derived.
pub const TARGET_RECORDS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    ImexCn,
    ExplicitRk4,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::ImexCn => "imex_cn",
            Scheme::ExplicitRk4 => "explicit_rk4",
        })
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "imex_cn" => Ok(Scheme::ImexCn),
            "explicit_rk4" => Ok(Scheme::ExplicitRk4),
            other => Err(Error::InvalidParameter(format!("unknown scheme '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub t_end: f64,
    pub record_every: usize,
}

impl StepperConfig {
    /// `dt = min(dx/4, 1e-2)` and `record_every` chosen for about
    /// [`TARGET_RECORDS`] records.
    pub fn with_defaults(grid: &Grid1D, t_end: f64, scheme: Scheme) -> Self {
        let dt = default_dt(grid);
        Self { dt, scheme, t_end, record_every: default_record_every(t_end, dt) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!("t_end must be nonnegative, got {}", self.t_end)));
        }
        if self.t_end > 0.0 && self.dt > self.t_end {
            return Err(Error::InvalidParameter(format!("dt = {} exceeds t_end = {}", self.dt, self.t_end)));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter("record_every must be positive".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        ((self.t_end / self.dt) - 1e-9).ceil().max(0.0) as usize
    }
}

pub fn default_dt(grid: &Grid1D) -> f64 {
    (0.25 * grid.dx()).min(1e-2)
}

pub fn default_record_every(t_end: f64, dt: f64) -> usize {
    let steps = (t_end / dt).ceil().max(1.0) as usize;
    (steps / TARGET_RECORDS).max(1)
}

/// Largest RK4 step allowed on `grid`: `0.5·dx/√ν`.
pub fn rk4_budget(grid: &Grid1D, nu: f64) -> f64 {
    0.5 * grid.dx() / nu.sqrt()
}

/// A validated model/controller pair with the step matrix for one `dt`.
#[derive(Debug, Clone)]
pub struct Stepper<'a> {
    model: &'a ModelSpec,
    ctrl: &'a ControllerSpec,
    grid: Grid1D,
    dt: f64,
    scheme: Scheme,
    matrix: Option<Tridiagonal>,
}

impl<'a> Stepper<'a> {
    pub fn new(model: &'a ModelSpec, ctrl: &'a ControllerSpec, grid: Grid1D, dt: f64, scheme: Scheme) -> Result<Self> {
        model.validate()?;
        ctrl.validate(&grid)?;
        if grid.bc() != model.bc {
            return Err(Error::BcMismatch(format!("model expects {} but the grid is {}", model.bc, grid.bc())));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        let matrix = match scheme {
            Scheme::ImexCn => Some(imex_matrix(model, &grid, dt)),
            Scheme::ExplicitRk4 => {
                if model.family == ModelFamily::StronglyDampedWave {
                    return Err(Error::InvalidParameter(
                        "the strongly damped wave needs the IMEX Crank-Nicolson scheme".into(),
                    ));
                }
                let limit = rk4_budget(&grid, model.nu);
                if dt > limit {
                    return Err(Error::StabilityBudget { dt, limit });
                }
                None
            }
        };
        Ok(Self { model, ctrl, grid, dt, scheme, matrix })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn advance(&self, state: &State) -> Result<State> {
        if *state.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        match self.scheme {
            Scheme::ImexCn => self.imex_step(state),
            Scheme::ExplicitRk4 => Ok(self.rk4_step(state)),
        }
    }

    fn forcing(&self, u: &Field, v: &Field) -> Field {
        let control = control_of(self.ctrl, u);
        self.model.explicit_forcing(u, v, &control)
    }

    fn cn_solve(&self, state: &State, forcing: &Field) -> Result<(Field, Field)> {
        let dt = self.dt;
        let (beta, gamma) = self.model.implicit_damping();
        let nu = self.model.nu;
        let c = nu * dt * dt / 4.0 + beta * dt / 2.0;
        let lap_u = crate::grid::laplacian_apply(&state.u);
        let lap_v = crate::grid::laplacian_apply(&state.v);
        let mut rhs: Vec<f64> = state
            .v
            .values()
            .iter()
            .zip(lap_v.values())
            .zip(lap_u.values())
            .zip(forcing.values())
            .map(|(((&v, &lv), &lu), &f)| (1.0 - gamma * dt / 2.0) * v + c * lv + dt * nu * lu + dt * f)
            .collect();
        self.matrix.as_ref().expect("imex matrix").solve_in_place(&mut rhs)?;
        let v_new = Field::new(self.grid, rhs)?;
        let mut u_new = state.u.clone();
        u_new.axpy(0.5 * dt, &state.v)?;
        u_new.axpy(0.5 * dt, &v_new)?;
        Ok((u_new, v_new))
    }

    fn imex_step(&self, state: &State) -> Result<State> {
        let f0 = self.forcing(&state.u, &state.v);
        let (up, vp) = self.cn_solve(state, &f0)?;
        let mid = |a: &Field, b: &Field| {
            let mut m = a.scaled(0.5);
            m.axpy(0.5, b).expect("same grid");
            m
        };
        let f_half = self.forcing(&mid(&state.u, &up), &mid(&state.v, &vp));
        let (u, v) = self.cn_solve(state, &f_half)?;
        Ok(State { u, v, t: state.t + self.dt })
    }

    fn rate(&self, u: &Field, v: &Field) -> (Field, Field) {
        let mut acc = self.model.stiff_part(u, v);
        acc.axpy(1.0, &self.forcing(u, v)).expect("same grid");
        (v.clone(), acc)
    }

    fn rk4_step(&self, state: &State) -> State {
        let dt = self.dt;
        let shift = |base: &Field, k: &Field, h: f64| {
            let mut out = base.clone();
            out.axpy(h, k).expect("same grid");
            out
        };
        let (k1u, k1v) = self.rate(&state.u, &state.v);
        let (k2u, k2v) = self.rate(&shift(&state.u, &k1u, dt / 2.0), &shift(&state.v, &k1v, dt / 2.0));
        let (k3u, k3v) = self.rate(&shift(&state.u, &k2u, dt / 2.0), &shift(&state.v, &k2v, dt / 2.0));
        let (k4u, k4v) = self.rate(&shift(&state.u, &k3u, dt), &shift(&state.v, &k3v, dt));
        let combine = |base: &Field, k1: &Field, k2: &Field, k3: &Field, k4: &Field| {
            let mut out = base.clone();
            for (w, k) in [(1.0, k1), (2.0, k2), (2.0, k3), (1.0, k4)] {
                out.axpy(w * dt / 6.0, k).expect("same grid");
            }
            out
        };
        State {
            u: combine(&state.u, &k1u, &k2u, &k3u, &k4u),
            v: combine(&state.v, &k1v, &k2v, &k3v, &k4v),
            t: state.t + dt,
        }
    }
}

/// `(1 + γdt/2) I − (νdt²/4 + βdt/2) Δ_h`
fn imex_matrix(model: &ModelSpec, grid: &Grid1D, dt: f64) -> Tridiagonal {
    let (beta, gamma) = model.implicit_damping();
    let c = (model.nu * dt * dt / 4.0 + beta * dt / 2.0) / (grid.dx() * grid.dx());
    let n = grid.node_count();
    let mut lower = vec![-c; n];
    let mut upper = vec![-c; n];
    let diag = vec![1.0 + gamma * dt / 2.0 + 2.0 * c; n];
    if grid.bc() == BoundaryCondition::Neumann {
        upper[0] = -2.0 * c;
        lower[n - 1] = -2.0 * c;
    }
    lower[0] = 0.0;
    upper[n - 1] = 0.0;
    Tridiagonal { lower, diag, upper }
}

/// Advances `state` by one step of `cfg.dt`.
pub fn step(state: &State, model: &ModelSpec, ctrl: &ControllerSpec, cfg: &StepperConfig) -> Result<State> {
    Stepper::new(model, ctrl, *state.grid(), cfg.dt, cfg.scheme)?.advance(state)
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Functional recorded in [`EnergyRecord::lyapunov`].
    pub lyapunov: Option<LyapunovSpec>,
    /// Keep a state snapshot at every record.
    pub keep_snapshots: bool,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<EnergyRecord>,
    pub snapshots: Vec<State>,
    /// Time at which a norm first exceeded [`BLOW_UP_THRESHOLD`].
    pub blow_up: Option<f64>,
    pub final_state: State,
}

pub fn run(
    model: &ModelSpec,
    ctrl: &ControllerSpec,
    u0: &Field,
    u1: &Field,
    cfg: &StepperConfig,
) -> Result<Trajectory> {
    run_with(model, ctrl, u0, u1, cfg, &RunOptions::default())
}

pub fn run_with(
    model: &ModelSpec,
    ctrl: &ControllerSpec,
    u0: &Field,
    u1: &Field,
    cfg: &StepperConfig,
    opts: &RunOptions,
) -> Result<Trajectory> {
    same_grid(u0, u1)?;
    cfg.validate()?;
    let grid = *u0.grid();
    let stepper = Stepper::new(model, ctrl, grid, cfg.dt, cfg.scheme)?;
    if let Some(spec) = &opts.lyapunov {
        spec.check_compatible(model, ctrl, &grid)?;
    }

    let record = |s: &State| -> Result<EnergyRecord> {
        let mut r = energy_record(s, model, controller_energy(ctrl, &s.u));
        if let Some(spec) = &opts.lyapunov {
            r.lyapunov = Some(lyapunov::evaluate(spec, s, model, ctrl)?);
        }
        Ok(r)
    };

    let mut state = State::new(u0.clone(), u1.clone(), 0.0)?;
    let mut records = vec![record(&state)?];
    let mut snapshots = Vec::new();
    if opts.keep_snapshots {
        snapshots.push(state.clone());
    }
    let steps = cfg.steps();
    let mut blow_up = None;
    for k in 1..=steps {
        let t_next = (k as f64 * cfg.dt).min(cfg.t_end);
        let h = t_next - state.t;
        let mut next = if (h - cfg.dt).abs() <= 1e-12 * cfg.dt {
            stepper.advance(&state)?
        } else {
            Stepper::new(model, ctrl, grid, h, cfg.scheme)?.advance(&state)?
        };
        next.t = t_next;
        state = next;
        let size = state.u.max_abs().max(state.v.max_abs());
        if !(size <= BLOW_UP_THRESHOLD) {
            blow_up = Some(state.t);
            break;
        }
        if k % cfg.record_every == 0 || k == steps {
            records.push(record(&state)?);
            if opts.keep_snapshots {
                snapshots.push(state.clone());
            }
        }
    }
    Ok(Trajectory { records, snapshots, blow_up, final_state: state })
}
