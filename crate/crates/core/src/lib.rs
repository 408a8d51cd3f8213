//! Finite-parameter feedback stabilization of damped nonlinear wave equations
//! on the interval `(0, L)`.
//!
//! The crate is organized bottom-up:
//!
//! - [`grid`]: uniform 1-D meshes, the finite-difference Laplacian, trapezoid
//!   quadrature and the discrete norms every other module is built on.
//! - [`spectral`]: the analytic Dirichlet sine basis, modal projections and the
//!   principal eigenvalue of `-Δ + μχ_ω` used by the subdomain controller.
//! - [`models`]: the three wave-equation families (linearly damped, nonlinearly
//!   damped, strongly damped) and the admissible nonlinearities.
//! - [`controllers`]: the feedback laws (volume elements, Fourier modes, nodal
//!   observables, subdomain actuation) and the gain/resolution checkers.
//! - [`integrator`] and [`lyapunov`]: IMEX Crank–Nicolson / RK4 time stepping and
//!   the Lyapunov functionals evaluated along trajectories.
//! - [`analysis`] and [`inequalities`]: decay-rate fitting, decay-law
//!   verification and the functional-inequality sampling suite.

pub mod analysis;
pub mod controllers;
pub mod error;
pub mod grid;
pub mod inequalities;
pub mod integrator;
pub mod linalg;
pub mod lyapunov;
pub mod models;
pub mod profiles;
pub mod spectral;

pub use error::{Error, Result};
