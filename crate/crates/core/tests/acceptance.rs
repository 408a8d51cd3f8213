//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wavestab::analysis::{fit_exponential, verify_exponential, verify_polynomial, Window, DEFAULT_SAFETY};
use wavestab::controllers::{
    check_fourier_gains, check_nodal_gains, check_nonlinear_gains, check_strong_fourier_gains,
    check_subdomain_gains, check_volume_gains, ControllerSpec, GainReport,
};
use wavestab::grid::{BoundaryCondition, Field, Grid1D, State};
use wavestab::inequalities::{run_inequality_suite, SuiteConfig};
use wavestab::integrator::{run, run_with, RunOptions, Scheme, StepperConfig, Trajectory};
use wavestab::lyapunov::{self, EbVariant, LyapunovSpec};
use wavestab::models::{ModelSpec, Nonlinearity};
use wavestab::profiles::Profile;
use wavestab::spectral::{complement_eigenvalue, mu_zero, penalized_min_eigenvalue, EigenBasis, Subdomain};

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn require_satisfied(report: &GainReport) -> std::result::Result<(), String> {
    ensure(report.satisfied, format!("gain check not satisfied: {:?}", report.margins))
}

fn simulate(
    model: &ModelSpec,
    ctrl: &ControllerSpec,
    grid: Grid1D,
    u0: Profile,
    t_end: f64,
    lyap: Option<LyapunovSpec>,
) -> Trajectory {
    let u0 = u0.sample(&grid, 1.0).unwrap();
    let cfg = StepperConfig::with_defaults(&grid, t_end, Scheme::ImexCn);
    let opts = RunOptions { lyapunov: lyap, keep_snapshots: false };
    run_with(model, ctrl, &u0, &Field::zeros(grid), &cfg, &opts).unwrap()
}

fn exponential_rate(traj: &Trajectory, t_end: f64, target: f64) -> std::result::Result<(f64, f64), String> {
    ensure(traj.blow_up.is_none(), "run blew up")?;
    let window = Window::default_for(t_end).unwrap();
    let verdict = verify_exponential(&traj.records, target, DEFAULT_SAFETY, window).map_err(|e| e.to_string())?;
    let rate = verdict.fit.rate().unwrap();
    ensure(
        verdict.ok,
        format!("rate {rate:.4} vs target {:.4}, envelope ok = {}", verdict.target_rate, verdict.envelope_ok),
    )?;
    Ok((rate, verdict.fit.r_squared))
}

fn criterion_1() -> Check {
    let (l, nu, a, b, mu, n) = (PI, 1.0, 1.0, 2.0, 4.0, 2);
    let report = check_volume_gains(l, nu, a, b, mu, n);
    require_satisfied(&report)?;
    let delta0 = report.predicted_rate.unwrap();
    let grid = Grid1D::new(l, 256, BoundaryCondition::Neumann).unwrap();
    let model = ModelSpec::damped(nu, a, b, Nonlinearity::Zero, BoundaryCondition::Neumann);
    let bump = Profile::Bump { center: PI / 2.0, width: 0.5 };
    let t_end = 10.0;
    let traj = simulate(&model, &ControllerSpec::VolumeElements { n, mu }, grid, bump, t_end, None);
    let (rate, _) = exponential_rate(&traj, t_end, delta0)?;
    let open = simulate(&model, &ControllerSpec::VolumeElements { n, mu: 0.0 }, grid, bump, t_end, None);
    let open_rate = match open.blow_up {
        Some(_) => f64::NEG_INFINITY,
        None => fit_exponential(&open.records, Window::default_for(t_end).unwrap()).unwrap().rate().unwrap(),
    };
    ensure(open_rate < 0.0, format!("uncontrolled run should grow, fitted rate {open_rate:.4}"))?;
    Ok(format!("rate {rate:.4} >= {:.4}; uncontrolled rate {open_rate:.4} < 0", 0.8 * delta0))
}

fn criterion_2() -> Check {
    let (l, nu, a, b, mu, n) = (PI, 1.0, 1.0, 2.0, 4.0, 2);
    let report = check_fourier_gains(l, nu, a, b, mu, n);
    require_satisfied(&report)?;
    let grid = Grid1D::new(l, 256, BoundaryCondition::Dirichlet).unwrap();
    let model = ModelSpec::damped(nu, a, b, Nonlinearity::PowerLaw { p: 4.0 }, BoundaryCondition::Dirichlet);
    let t_end = 10.0;
    let bump = Profile::Bump { center: PI / 2.0, width: 0.5 };
    let traj = simulate(&model, &ControllerSpec::FourierModes { n, mu }, grid, bump, t_end, None);
    let (rate, _) = exponential_rate(&traj, t_end, 0.5 * b)?;
    Ok(format!("rate {rate:.4} >= {:.4}", 0.4 * b))
}

fn criterion_3() -> Check {
    let (l, a, b) = (1.0, 1.0, 2.0);
    let grid = Grid1D::new(l, 256, BoundaryCondition::Dirichlet).unwrap();
    let omega = Subdomain::new(0.5, 0.9, l).unwrap();
    let lc = complement_eigenvalue(l, &omega);
    let d = 0.5 * lc;
    let mu0 = mu_zero(l, &omega, d, &grid).map_err(|e| e.to_string())?;
    let at = penalized_min_eigenvalue(&grid, &omega, mu0).unwrap();
    let below = penalized_min_eigenvalue(&grid, &omega, 0.9 * mu0).unwrap();
    ensure(at >= lc - d, format!("eigenvalue {at:.4} at mu0 below {:.4}", lc - d))?;
    ensure(below < lc - d, format!("eigenvalue {below:.4} at 0.9 mu0 already reaches {:.4}", lc - d))?;
    let mu = 1.1 * mu0;
    require_satisfied(&check_subdomain_gains(l, a, b, mu, &omega, &grid).unwrap())?;
    let model = ModelSpec::damped(1.0, a, b, Nonlinearity::PowerLaw { p: 4.0 }, BoundaryCondition::Dirichlet);
    let t_end = 10.0;
    let bump = Profile::Bump { center: 0.3, width: 0.2 };
    let traj = simulate(&model, &ControllerSpec::Subdomain { omega, mu }, grid, bump, t_end, None);
    let (rate, _) = exponential_rate(&traj, t_end, 0.5 * b)?;
    Ok(format!("mu0 = {mu0:.4} certified; rate {rate:.4} >= {:.4}", 0.4 * b))
}

fn criterion_4() -> Check {
    let (l, nu, a, b, mu, n, m) = (PI, 1.0, 1.0, 1.0, 2.0, 1, 3.0);
    let report = check_nonlinear_gains(l, nu, a, mu, n, m);
    require_satisfied(&report)?;
    let alpha = report.predicted_rate.unwrap();
    let grid = Grid1D::new(l, 128, BoundaryCondition::Dirichlet).unwrap();
    let model = ModelSpec::nonlinear_damping(nu, a, b, m, 4.0);
    let bump = Profile::Bump { center: PI / 2.0, width: 0.5 };
    let traj = simulate(&model, &ControllerSpec::FourierModes { n, mu }, grid, bump, 50.0, None);
    ensure(traj.blow_up.is_none(), "run blew up")?;
    let verdict = verify_polynomial(&traj.records, alpha, Window::new(5.0, 50.0).unwrap()).map_err(|e| e.to_string())?;
    ensure(verdict.ok, format!("sup ratio {:.4} > 1.1", verdict.sup_ratio))?;
    Ok(format!("sup ratio {:.4} <= 1.1 for alpha = {alpha:.4}", verdict.sup_ratio))
}

fn criterion_5() -> Check {
    let (l, nu, a, b, mu, n) = (PI, 1.0, 1.0, 1.0, 2.5, 1);
    let report = check_strong_fourier_gains(l, nu, a, b, mu, n);
    require_satisfied(&report)?;
    let delta0 = report.predicted_rate.unwrap();
    let grid = Grid1D::new(l, 256, BoundaryCondition::Dirichlet).unwrap();
    let model = ModelSpec::strongly_damped(nu, a, b, 4.0);
    let t_end = 20.0;
    let bump = Profile::Bump { center: PI / 2.0, width: 0.5 };
    let traj = simulate(&model, &ControllerSpec::FourierModes { n, mu }, grid, bump, t_end, None);
    let (rate, _) = exponential_rate(&traj, t_end, delta0)?;
    Ok(format!("rate {rate:.4} >= {:.4}", 0.8 * delta0))
}

fn criterion_6() -> Check {
    let (l, nu, a, b, mu, n) = (PI, 1.0, 1.0, 0.5, 4.3, 27);
    let report = check_nodal_gains(l, nu, a, b, mu, n);
    require_satisfied(&report)?;
    let sc2 = report.margin("sc2").unwrap().slack;
    let sc2a = report.margin("sc2a").unwrap().slack;
    ensure((sc2 - 0.0304).abs() < 5e-4, format!("sc2 slack {sc2:.5}"))?;
    ensure((sc2a - 0.0009).abs() < 5e-4, format!("sc2a slack {sc2a:.5}"))?;
    ensure(!check_nodal_gains(l, nu, a, b, mu, 20).satisfied, "N = 20 should fail")?;
    ensure(!check_nodal_gains(l, nu, a, b, 4.25, n).satisfied, "mu = 4.25 should fail")?;
    // 216 cells put every cell midpoint on a node
    let grid = Grid1D::new(l, 216, BoundaryCondition::Dirichlet).unwrap();
    let model = ModelSpec::strongly_damped(nu, a, b, 4.0);
    let t_end = 30.0;
    let bump = Profile::Bump { center: PI / 2.0, width: 0.5 };
    let traj = simulate(&model, &ControllerSpec::nodal_midpoints(n, mu, l), grid, bump, t_end, None);
    ensure(traj.blow_up.is_none(), "run blew up")?;
    let fit = fit_exponential(&traj.records, Window::default_for(t_end).unwrap()).map_err(|e| e.to_string())?;
    let rate = fit.rate().unwrap();
    ensure(rate > 0.0 && fit.r_squared >= 0.95, format!("rate {rate:.4}, r^2 {:.4}", fit.r_squared))?;
    Ok(format!("margins sc2 {sc2:.4}, sc2a {sc2a:.5}; rate {rate:.4} > 0, r^2 {:.4}", fit.r_squared))
}

fn criterion_7() -> Check {
    let grid = Grid1D::new(1.0, 1024, BoundaryCondition::Neumann).unwrap();
    let reports = run_inequality_suite(2024, 1000, &grid, &SuiteConfig::default()).map_err(|e| e.to_string())?;
    let mut summary = Vec::new();
    for r in &reports {
        if r.name == "p2_printed" {
            ensure(r.violations >= 1, "stated p2 constant should be flagged")?;
            ensure(r.notes.iter().any(|n| n.contains("lhs = 0.333") && n.contains("rhs = 0.275")), format!("{:?}", r.notes))?;
        } else {
            ensure(r.violations == 0, format!("{}: {} violations, worst ratio {:.4}", r.name, r.violations, r.worst_ratio))?;
        }
        summary.push(format!("{} {}/{}", r.name, r.violations, r.samples));
    }
    Ok(summary.join(", "))
}

fn modal_error(dt: f64) -> f64 {
    let g = Grid1D::new(PI, 64, BoundaryCondition::Dirichlet).unwrap();
    let b = 1.0;
    let model = ModelSpec::damped(1.0, 0.0, b, Nonlinearity::Zero, BoundaryCondition::Dirichlet);
    let w1 = EigenBasis::new(PI, 1).unwrap().mode(1, &g).unwrap();
    let cfg = StepperConfig { dt, scheme: Scheme::ImexCn, t_end: 1.0, record_every: 1000 };
    let traj = run(&model, &ControllerSpec::None, &w1, &Field::zeros(g), &cfg).unwrap();
    let dx = g.dx();
    let lam = 4.0 / (dx * dx) * (0.5 * dx).sin().powi(2);
    let w = (lam - 0.25 * b * b).sqrt();
    let amp = (-0.5 * b).exp() * (w.cos() + 0.5 * b / w * w.sin());
    traj.final_state.u.values().iter().zip(w1.values()).map(|(u, w)| (u - amp * w).abs()).fold(0.0, f64::max)
}

fn criterion_8() -> Check {
    let errs: Vec<f64> = [0.04, 0.02, 0.01].into_iter().map(modal_error).collect();
    let orders: Vec<f64> = errs.windows(2).map(|p| (p[0] / p[1]).log2()).collect();
    ensure(orders.iter().all(|o| (o - 2.0).abs() <= 0.2), format!("orders {orders:?}"))?;

    let g = Grid1D::new(PI, 128, BoundaryCondition::Dirichlet).unwrap();
    let wave = ModelSpec::damped(1.0, 0.0, 0.0, Nonlinearity::Zero, BoundaryCondition::Dirichlet);
    let u0 = Profile::Bump { center: 1.0, width: 0.6 }.sample(&g, 1.0).unwrap();
    let v0 = Profile::Random { seed: 3, degree: 8 }.sample(&g, 1.0).unwrap();
    let cfg = StepperConfig { dt: 0.01, scheme: Scheme::ImexCn, t_end: 20.0, record_every: 10 };
    let traj = run(&wave, &ControllerSpec::None, &u0, &v0, &cfg).unwrap();
    let e0 = traj.records[0].total;
    let drift = traj.records.iter().map(|r| (r.total - e0).abs() / e0).fold(0.0, f64::max);
    ensure(drift <= 1e-8, format!("energy drift {drift:e}"))?;

    let model = ModelSpec::damped(1.0, 1.0, 2.0, Nonlinearity::PowerLaw { p: 4.0 }, BoundaryCondition::Dirichlet);
    let ctrl = ControllerSpec::FourierModes { n: 2, mu: 4.0 };
    let cfg = StepperConfig::with_defaults(&g, 3.0, Scheme::ImexCn);
    let a = run(&model, &ctrl, &u0, &v0, &cfg).unwrap();
    let b = run(&model, &ctrl, &u0, &v0, &cfg).unwrap();
    let same = a.records.iter().zip(&b.records).all(|(x, y)| x.total.to_bits() == y.total.to_bits())
        && a.final_state.u.values().iter().zip(b.final_state.u.values()).all(|(x, y)| x.to_bits() == y.to_bits());
    ensure(same && a.records.len() == b.records.len(), "reruns differ")?;
    Ok(format!("orders {:.3}, {:.3}; energy drift {drift:.1e}; reruns bit-identical", orders[0], orders[1]))
}

fn random_state(rng: &mut ChaCha8Rng, grid: Grid1D) -> State {
    let field = |rng: &mut ChaCha8Rng| {
        let profile = Profile::Random { seed: rng.gen(), degree: 12 };
        let amp = 10f64.powf(rng.gen_range(-1.0..1.0));
        profile.sample(&grid, amp).unwrap()
    };
    let u = field(rng);
    let v = field(rng);
    State::new(u, v, 0.0).unwrap()
}

/// Largest ratio `L(t_{k+1}) / L(t_k)` over records with `L` above the floor.
fn worst_step_ratio(traj: &Trajectory) -> f64 {
    let vals: Vec<f64> = traj.records.iter().map(|r| r.lyapunov.unwrap()).collect();
    let floor = 1e-10 * vals[0];
    vals.windows(2).filter(|w| w[0] > floor).map(|w| w[1] / w[0]).fold(0.0, f64::max)
}

fn criterion_9() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let quartic = Nonlinearity::PowerLaw { p: 4.0 };

    // volume elements, Neumann
    let gn = Grid1D::new(PI, 256, BoundaryCondition::Neumann).unwrap();
    let vol_model = ModelSpec::damped(1.0, 1.0, 2.0, quartic.clone(), BoundaryCondition::Neumann);
    let vol = ControllerSpec::VolumeElements { n: 2, mu: 4.0 };
    require_satisfied(&check_volume_gains(PI, 1.0, 1.0, 2.0, 4.0, 2))?;
    let eps = 0.5 * vol_model.b;
    let mut worst_ph = f64::INFINITY;
    for _ in 0..500 {
        let s = random_state(&mut rng, gn);
        let phi = lyapunov::lyapunov_volume(&s, &vol_model, &vol, eps).unwrap();
        let lower = lyapunov::volume_lower_bound(&s, &vol_model, 2);
        worst_ph = worst_ph.min(phi - lower);
    }
    ensure(worst_ph >= 0.0, format!("volume lower bound violated by {worst_ph:e}"))?;

    // Fourier modes and strong damping, Dirichlet
    let gd = Grid1D::new(PI, 256, BoundaryCondition::Dirichlet).unwrap();
    let fo_model = ModelSpec::damped(1.0, 1.0, 2.0, quartic, BoundaryCondition::Dirichlet);
    let fo = ControllerSpec::FourierModes { n: 2, mu: 4.0 };
    require_satisfied(&check_fourier_gains(PI, 1.0, 1.0, 2.0, 4.0, 2))?;
    let st_model = ModelSpec::strongly_damped(1.0, 1.0, 1.0, 4.0);
    let st = ControllerSpec::FourierModes { n: 1, mu: 2.5 };
    require_satisfied(&check_strong_fourier_gains(PI, 1.0, 1.0, 1.0, 2.5, 1))?;
    let mut worst_ph1 = f64::INFINITY;
    let mut worst_eeb = f64::INFINITY;
    for _ in 0..500 {
        let s = random_state(&mut rng, gd);
        let e = lyapunov::lyapunov_eb(&s, &fo_model, &fo, EbVariant::Fourier).unwrap();
        worst_ph1 = worst_ph1.min(e - lyapunov::eb_lower_bound(&s, &fo_model));
        let e = lyapunov::lyapunov_eb(&s, &st_model, &st, EbVariant::StrongFourier).unwrap();
        worst_eeb = worst_eeb.min(e - lyapunov::eb_lower_bound(&s, &st_model));
    }
    ensure(worst_ph1 >= 0.0, format!("Fourier lower bound violated by {worst_ph1:e}"))?;
    ensure(worst_eeb >= 0.0, format!("strong-damping lower bound violated by {worst_eeb:e}"))?;

    // decay along satisfied-gain trajectories
    let bump = Profile::Bump { center: PI / 2.0, width: 0.5 };
    let runs = [
        ("volume", simulate(&vol_model, &vol, gn, bump, 10.0, Some(LyapunovSpec::Volume { epsilon: eps }))),
        ("fourier", simulate(&fo_model, &fo, gd, bump, 10.0, Some(LyapunovSpec::Eb(EbVariant::Fourier)))),
        ("strong", simulate(&st_model, &st, gd, bump, 10.0, Some(LyapunovSpec::Eb(EbVariant::StrongFourier)))),
    ];
    let mut ratios = Vec::new();
    for (name, traj) in &runs {
        let ratio = worst_step_ratio(traj);
        ensure(ratio <= 1.01, format!("{name} functional grew by factor {ratio:.5} in one record interval"))?;
        ratios.push(format!("{name} {ratio:.4}"));
    }
    Ok(format!(
        "lower-bound margins {worst_ph:.2e}, {worst_ph1:.2e}, {worst_eeb:.2e}; worst step ratios {}",
        ratios.join(", ")
    ))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Check); 9] = [
        (1, "volume-element feedback decay", criterion_1),
        (2, "Fourier-mode feedback decay", criterion_2),
        (3, "subdomain feedback decay", criterion_3),
        (4, "nonlinear damping polynomial decay", criterion_4),
        (5, "strongly damped Fourier decay", criterion_5),
        (6, "nodal feedback decay", criterion_6),
        (7, "inequality suite", criterion_7),
        (8, "integrator order, conservation, determinism", criterion_8),
        (9, "Lyapunov bounds and decay", criterion_9),
    ];
    let outcomes: Vec<Check> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|&(_, _, f)| s.spawn(move || catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()))))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut failed = 0;
    for ((id, name, _), outcome) in criteria.iter().zip(outcomes) {
        match outcome {
            Ok(detail) => println!("criterion {id} [{name}]: PASS ({detail})"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id} [{name}]: FAIL ({detail})");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
