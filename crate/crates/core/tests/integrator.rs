use std::f64::consts::PI;

use wavestab::controllers::ControllerSpec;
use wavestab::grid::{BoundaryCondition, Field, Grid1D};
use wavestab::integrator::{run, Scheme, StepperConfig};
use wavestab::models::{ModelSpec, Nonlinearity};
use wavestab::spectral::EigenBasis;

const N_CELLS: usize = 64;

fn grid() -> Grid1D {
    Grid1D::new(PI, N_CELLS, BoundaryCondition::Dirichlet).unwrap()
}

/// Eigenvalue of the three-point Laplacian for the first sine mode on (0, π).
fn discrete_lambda1(g: &Grid1D) -> f64 {
    let dx = g.dx();
    4.0 / (dx * dx) * (0.5 * dx).sin().powi(2)
}

/// `ü = −λu − bů`, `u(0) = 1`, `ů(0) = 0`, underdamped.
fn modal_solution(lambda: f64, b: f64, t: f64) -> f64 {
    let w = (lambda - 0.25 * b * b).sqrt();
    (-0.5 * b * t).exp() * ((w * t).cos() + 0.5 * b / w * (w * t).sin())
}

fn modal_error(dt: f64, scheme: Scheme) -> f64 {
    let g = grid();
    let b = 1.0;
    let model = ModelSpec::damped(1.0, 0.0, b, Nonlinearity::Zero, BoundaryCondition::Dirichlet);
    let w1 = EigenBasis::new(PI, 1).unwrap().mode(1, &g).unwrap();
    let cfg = StepperConfig { dt, scheme, t_end: 1.0, record_every: 1000 };
    let traj = run(&model, &ControllerSpec::None, &w1, &Field::zeros(g), &cfg).unwrap();
    let amp = modal_solution(discrete_lambda1(&g), b, 1.0);
    traj.final_state
        .u
        .values()
        .iter()
        .zip(w1.values())
        .map(|(u, w)| (u - amp * w).abs())
        .fold(0.0, f64::max)
}

#[test]
fn damped_mode_matches_closed_form() {
    let err = modal_error(0.01, Scheme::ImexCn);
    assert!(err < 1e-4, "{err}");
    let err = modal_error(0.01, Scheme::ExplicitRk4);
    assert!(err < 1e-8, "{err}");
}

#[test]
fn imex_is_second_order() {
    let errs: Vec<f64> = [0.04, 0.02, 0.01].iter().map(|&dt| modal_error(dt, Scheme::ImexCn)).collect();
    for pair in errs.windows(2) {
        let order = (pair[0] / pair[1]).log2();
        assert!((order - 2.0).abs() <= 0.2, "order {order} from {errs:?}");
    }
}

#[test]
fn undamped_energy_is_conserved() {
    let g = grid();
    let model = ModelSpec::damped(1.0, 0.0, 0.0, Nonlinearity::Zero, BoundaryCondition::Dirichlet);
    let u0 = Field::from_fn(g, |x| x.sin() + 0.3 * (3.0 * x).sin() - 0.1 * (7.0 * x).sin());
    let v0 = Field::from_fn(g, |x| 0.5 * (2.0 * x).sin());
    let cfg = StepperConfig { dt: 0.01, scheme: Scheme::ImexCn, t_end: 10.0, record_every: 50 };
    let traj = run(&model, &ControllerSpec::None, &u0, &v0, &cfg).unwrap();
    let e0 = traj.records[0].total;
    for r in &traj.records {
        assert!((r.total - e0).abs() <= 1e-8 * e0, "t = {}: {} vs {e0}", r.t, r.total);
    }
}

#[test]
fn reruns_are_bit_identical() {
    let g = grid();
    let model = ModelSpec::damped(1.0, 1.0, 2.0, Nonlinearity::PowerLaw { p: 4.0 }, BoundaryCondition::Dirichlet);
    let ctrl = ControllerSpec::FourierModes { n: 2, mu: 4.0 };
    let u0 = Field::from_fn(g, |x| (x * (PI - x)).powi(2));
    let cfg = StepperConfig::with_defaults(&g, 2.0, Scheme::ImexCn);
    let a = run(&model, &ctrl, &u0, &Field::zeros(g), &cfg).unwrap();
    let b = run(&model, &ctrl, &u0, &Field::zeros(g), &cfg).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.final_state.u, b.final_state.u);
}
