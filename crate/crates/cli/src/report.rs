//! Simulation driver and the report/CSV formats written by the CLI.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use crate::config::ExperimentConfig;
use wavestab::analysis::{fit_exponential, verify_exponential, verify_polynomial, DecayFit, ExponentialVerdict, PolynomialVerdict, Window};
use wavestab::controllers::{
    check_fourier_gains, check_nodal_gains, check_nonlinear_gains, check_strong_fourier_gains,
    check_subdomain_gains, check_volume_gains, ControllerSpec, DecayLaw, GainReport,
};
use wavestab::integrator::{run_with, EnergyRecord, RunOptions, Trajectory};
use wavestab::lyapunov::LyapunovSpec;
use wavestab::models::ModelFamily;

/// Minimum `r²` for the qualitative exponential verdict.
pub const QUALITATIVE_R2: f64 = 0.95;

/// The gain conditions that apply to the configured model and controller.
pub fn gain_report(cfg: &ExperimentConfig) -> Result<Option<GainReport>, String> {
    let m = &cfg.model;
    let ctrl = cfg.controller_spec().map_err(|e| e.to_string())?;
    let (l, nu, a, b) = (m.length, m.nu, m.a, m.b);
    Ok(match (m.family, &ctrl) {
        (ModelFamily::DampedWave, ControllerSpec::VolumeElements { n, mu }) => Some(check_volume_gains(l, nu, a, b, *mu, *n)),
        (ModelFamily::DampedWave, ControllerSpec::FourierModes { n, mu }) => Some(check_fourier_gains(l, nu, a, b, *mu, *n)),
        (ModelFamily::DampedWave, ControllerSpec::Subdomain { omega, mu }) => {
            let grid = cfg.grid().map_err(|e| e.to_string())?;
            Some(check_subdomain_gains(l, a, b, *mu, omega, &grid).map_err(|e| e.to_string())?)
        }
        (ModelFamily::NonlinearDampingWave, ControllerSpec::FourierModes { n, mu }) => {
            Some(check_nonlinear_gains(l, nu, a, *mu, *n, m.m.unwrap_or(f64::NAN)))
        }
        (ModelFamily::StronglyDampedWave, ControllerSpec::FourierModes { n, mu }) => {
            Some(check_strong_fourier_gains(l, nu, a, b, *mu, *n))
        }
        (ModelFamily::StronglyDampedWave, ControllerSpec::Nodal { mu, obs_points, .. }) => {
            Some(check_nodal_gains(l, nu, a, b, *mu, obs_points.len()))
        }
        _ => None,
    })
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verification {
    Exponential(ExponentialVerdict),
    Polynomial(PolynomialVerdict),
    /// Decay without a quantitative target: positive rate and `r² ≥ 0.95`.
    Qualitative { ok: bool, rate: f64, r_squared: f64 },
}

impl Verification {
    pub fn ok(&self) -> bool {
        match self {
            Verification::Exponential(v) => v.ok,
            Verification::Polynomial(v) => v.ok,
            Verification::Qualitative { ok, .. } => *ok,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub gain_report: Option<GainReport>,
    pub predicted_rate: Option<f64>,
    pub lyapunov: Option<LyapunovSpec>,
    pub fit: Option<DecayFit>,
    pub verification: Option<Verification>,
    pub verified: bool,
    /// Why the fit or verification could not be computed.
    pub analysis_error: Option<String>,
    pub blow_up: Option<f64>,
    pub records: usize,
    pub steps_dt: f64,
    pub wall_time_s: f64,
}

pub struct Outcome {
    pub trajectory: Trajectory,
    pub report: RunReport,
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<Outcome, String> {
    let fail = |e: &dyn std::fmt::Display| e.to_string();
    let model = cfg.model_spec().map_err(|e| fail(&e))?;
    let ctrl = cfg.controller_spec().map_err(|e| fail(&e))?;
    let grid = cfg.grid().map_err(|e| fail(&e))?;
    let stepper = cfg.stepper().map_err(|e| fail(&e))?;
    let window = cfg.window().map_err(|e| fail(&e))?;
    let gains = gain_report(cfg)?;
    let i = &cfg.initial;
    let u0 = i.profile.sample(&grid, i.amplitude).map_err(|e| fail(&e))?;
    let u1 = i.velocity_profile.sample(&grid, i.velocity_amplitude).map_err(|e| fail(&e))?;
    let lyapunov = LyapunovSpec::for_setup(&model, &ctrl);
    let opts = RunOptions { lyapunov, keep_snapshots: false };

    let start = Instant::now();
    let trajectory = run_with(&model, &ctrl, &u0, &u1, &stepper, &opts).map_err(|e| fail(&e))?;
    let wall_time_s = start.elapsed().as_secs_f64();

    let predicted_rate = gains.as_ref().and_then(|g| g.predicted_rate);
    let law = gains.as_ref().map(|g| g.decay);
    let records = &trajectory.records;
    let mut analysis_error = None;
    let fit = match fit_exponential(records, window) {
        Ok(f) => Some(f),
        Err(e) => {
            analysis_error = Some(e.to_string());
            None
        }
    };
    let verification = if trajectory.blow_up.is_some() {
        None
    } else {
        let verdict = match (law, predicted_rate) {
            (Some(DecayLaw::Exponential), Some(delta)) => {
                verify_exponential(records, delta, cfg.analysis.safety, window).map(Verification::Exponential)
            }
            (Some(DecayLaw::Polynomial), Some(alpha)) => Window::new(window.lo.max(1.0), window.hi)
                .and_then(|w| verify_polynomial(records, alpha, w))
                .map(Verification::Polynomial),
            _ => fit_exponential(records, window).map(|f| {
                let rate = f.rate().expect("exponential fit");
                Verification::Qualitative { ok: rate > 0.0 && f.r_squared >= QUALITATIVE_R2, rate, r_squared: f.r_squared }
            }),
        };
        match verdict {
            Ok(v) => Some(v),
            Err(e) => {
                analysis_error.get_or_insert(e.to_string());
                None
            }
        }
    };
    let verified = verification.as_ref().is_some_and(Verification::ok);
    let report = RunReport {
        config: cfg.clone(),
        gain_report: gains,
        predicted_rate,
        lyapunov,
        fit,
        verification,
        verified,
        analysis_error,
        blow_up: trajectory.blow_up,
        records: records.len(),
        steps_dt: stepper.dt,
        wall_time_s,
    };
    Ok(Outcome { trajectory, report })
}

pub const TRAJECTORY_HEADER: &str = "t,kinetic,grad,quadratic,lp,controller,total,stab_norm,lyapunov";

pub fn trajectory_csv(records: &[EnergyRecord]) -> String {
    let mut out = String::with_capacity(128 * (records.len() + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for r in records {
        let _ = write!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},",
            r.t, r.kinetic, r.grad, r.quadratic, r.lp, r.controller, r.total, r.stab_norm
        );
        if let Some(l) = r.lyapunov {
            let _ = write!(out, "{l:e}");
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub gain_satisfied: bool,
    pub fitted_rate: Option<f64>,
    pub verified: bool,
}

pub fn sweep_row(value: f64, cfg: &ExperimentConfig) -> Result<SweepRow, String> {
    let outcome = simulate(cfg)?;
    let r = outcome.report;
    Ok(SweepRow {
        value,
        gain_satisfied: r.gain_report.as_ref().is_some_and(|g| g.satisfied),
        fitted_rate: r.fit.and_then(|f| f.rate()),
        verified: r.verified,
    })
}

pub fn summary_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("value,gain_satisfied,fitted_rate,verified\n");
    for row in rows {
        let rate = row.fitted_rate.map(|r| format!("{r:e}")).unwrap_or_default();
        let _ = writeln!(out, "{},{},{rate},{}", row.value, row.gain_satisfied, row.verified);
    }
    out
}
