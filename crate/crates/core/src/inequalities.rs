//! Sampling oracle for the functional inequalities behind the gain conditions.
//!
//! Each check draws random trigonometric polynomials, evaluates both sides on
//! the grid and counts samples with `lhs > slack·rhs`. Every report also
//! carries the empirical best constant, i.e. the largest observed value of
//! the ratio that the inequality bounds by its stated constant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::controllers::cell_averages;
use crate::error::{Error, Result};
use crate::grid::{h1_seminorm, l2_inner, l2_norm, BoundaryCondition, Field, Grid1D};
use crate::spectral::{dirichlet_eigenvalue, sine_mode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub samples: usize,
    pub violations: usize,
    /// `max lhs/rhs` with the stated constant.
    pub worst_ratio: f64,
    pub empirical_best_constant: f64,
    pub stated_constant: f64,
    /// Reported for reference only; does not count as a failure.
    pub informational: bool,
    pub notes: Vec<String>,
}

impl InequalityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    /// Partition sizes `N` for the cell and nodal inequalities.
    pub resolutions: Vec<usize>,
    /// Mode counts `N` for the spectral tail inequality.
    pub tail_modes: Vec<usize>,
    /// Highest frequency in the random trigonometric polynomials.
    pub degree: usize,
    pub slack: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { resolutions: vec![2, 4, 8], tail_modes: (1..=6).collect(), degree: 12, slack: 1.01 }
    }
}

pub const MIN_SAMPLES: usize = 100;

/// Random `φ = c₀ + Σ_k a_k cos(kπx/L) + b_k sin(kπx/L)` (full) or
/// `φ = Σ_k b_k sin(kπx/L)` (sine only), with coefficients uniform in `[−1, 1]`.
fn random_poly(rng: &mut ChaCha8Rng, grid: &Grid1D, degree: usize, full: bool) -> (Field, Vec<f64>, Vec<f64>) {
    let cos: Vec<f64> = if full { (0..=degree).map(|_| rng.gen_range(-1.0..=1.0)).collect() } else { vec![0.0; degree + 1] };
    let sin: Vec<f64> = (0..=degree).map(|k| if k == 0 { 0.0 } else { rng.gen_range(-1.0..=1.0) }).collect();
    let l = grid.length();
    let eval = {
        let (cos, sin) = (cos.clone(), sin.clone());
        move |x: f64| {
            (0..=degree)
                .map(|k| {
                    let w = k as f64 * PI * x / l;
                    cos[k] * w.cos() + sin[k] * w.sin()
                })
                .sum::<f64>()
        }
    };
    (Field::from_fn(*grid, eval), cos, sin)
}

fn poly_value(cos: &[f64], sin: &[f64], l: f64, x: f64) -> f64 {
    cos.iter()
        .zip(sin)
        .enumerate()
        .map(|(k, (c, s))| {
            let w = k as f64 * PI * x / l;
            c * w.cos() + s * w.sin()
        })
        .sum()
}

struct Tally {
    name: &'static str,
    samples: usize,
    violations: usize,
    worst_ratio: f64,
    best_constant: f64,
    stated_constant: f64,
    slack: f64,
    informational: bool,
    notes: Vec<String>,
}

impl Tally {
    fn new(name: &'static str, stated_constant: f64, slack: f64) -> Self {
        Self {
            name,
            samples: 0,
            violations: 0,
            worst_ratio: 0.0,
            best_constant: 0.0,
            stated_constant,
            slack,
            informational: false,
            notes: Vec::new(),
        }
    }

    /// Records one sample of `lhs ≤ rhs`, and `constant` as the value the
    /// stated constant must dominate.
    fn add(&mut self, lhs: f64, rhs: f64, constant: f64) -> bool {
        self.samples += 1;
        let violated = lhs > self.slack * rhs;
        if violated {
            self.violations += 1;
        }
        if rhs > 0.0 {
            self.worst_ratio = self.worst_ratio.max(lhs / rhs);
        }
        if constant.is_finite() {
            self.best_constant = self.best_constant.max(constant);
        }
        violated
    }

    fn finish(self) -> InequalityReport {
        InequalityReport {
            name: self.name.to_string(),
            samples: self.samples,
            violations: self.violations,
            worst_ratio: self.worst_ratio,
            empirical_best_constant: self.best_constant,
            stated_constant: self.stated_constant,
            informational: self.informational,
            notes: self.notes,
        }
    }
}

/// `‖φ‖² − hΣφ̄_k²`, the squared distance to the cell-average interpolant.
fn cell_defect(phi: &Field, n: usize) -> (f64, f64) {
    let h = phi.grid().length() / n as f64;
    let avg = cell_averages(phi, n);
    let mass = h * avg.iter().map(|a| a * a).sum::<f64>();
    (l2_norm(phi).powi(2) - mass, mass)
}

/// Runs every inequality on `samples` random fields.
///
/// Sample `i` uses its own ChaCha8 stream seeded with `seed + i`, so reports
/// are reproducible and independent of evaluation order. The fields live on a
/// grid with the length and cell count of `grid` (Neumann layout for the cell
/// and nodal inequalities, Dirichlet for the spectral ones).
pub fn run_inequality_suite(seed: u64, samples: usize, grid: &Grid1D, config: &SuiteConfig) -> Result<Vec<InequalityReport>> {
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidParameter(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
    }
    if config.resolutions.iter().chain(&config.tail_modes).any(|&n| n == 0) || config.degree == 0 {
        return Err(Error::InvalidParameter("resolutions, mode counts and degree must be positive".into()));
    }
    let l = grid.length();
    let full = Grid1D::new(l, grid.n_cells(), BoundaryCondition::Neumann)?;
    let dir = Grid1D::new(l, grid.n_cells(), BoundaryCondition::Dirichlet)?;
    if let Some(&n) = config.tail_modes.iter().max() {
        if n >= dir.n_cells() {
            return Err(Error::InvalidParameter(format!("mode count {n} too large for the grid")));
        }
    }
    let slack = config.slack;
    let lam1 = dirichlet_eigenvalue(l, 1);

    let mut p1 = Tally::new("p1", 1.0, slack);
    let mut p2_printed = Tally::new("p2_printed", 1.0 / (4.0 * PI * PI), slack);
    let mut p2_corrected = Tally::new("p2_corrected", 1.0 / (PI * PI), slack);
    let mut l1 = Tally::new("L1", 1.0, slack);
    let mut l2 = Tally::new("L2", 2.0, slack);
    let mut qn = Tally::new("QN", 1.0, slack);
    let mut pnk = Tally::new("pnk", 1.0, slack);
    p2_printed.informational = true;

    // the linear function on (0, L) with a single cell
    let line = Field::from_fn(full, |x| x / l);
    let (def, mass) = cell_defect(&line, 1);
    let grad = h1_seminorm(&line).powi(2);
    let lhs = def + mass;
    for tally in [&mut p2_printed, &mut p2_corrected] {
        let c = tally.stated_constant;
        let rhs = mass + c * l * l * grad;
        let violated = tally.add(lhs, rhs, def / (l * l * grad));
        tally.notes.push(format!(
            "phi(x) = x/L with N = 1: lhs = {lhs:.6}, rhs = {rhs:.6} ({})",
            if violated { "violated" } else { "holds" }
        ));
    }

    let modes: Vec<Field> = (1..=config.tail_modes.iter().copied().max().unwrap_or(0)).map(|k| sine_mode(&dir, k)).collect();

    for i in 0..samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
        let (phi, cos, sin) = random_poly(&mut rng, &full, config.degree, true);
        let grad = h1_seminorm(&phi).powi(2);
        let norm2 = l2_norm(&phi).powi(2);
        for &n in &config.resolutions {
            let h = l / n as f64;
            let (def, mass) = cell_defect(&phi, n);
            p1.add(def, h * h * grad, def / (h * h * grad));
            let c = def / (h * h * grad);
            p2_printed.add(norm2, mass + p2_printed.stated_constant * h * h * grad, c);
            p2_corrected.add(norm2, mass + p2_corrected.stated_constant * h * h * grad, c);

            let mut jumps = 0.0;
            let mut point_mass = 0.0;
            for k in 0..n {
                let a = rng.gen_range(k as f64 * h..=(k + 1) as f64 * h);
                let b = rng.gen_range(k as f64 * h..=(k + 1) as f64 * h);
                let (fa, fb) = (poly_value(&cos, &sin, l, a), poly_value(&cos, &sin, l, b));
                jumps += (fa - fb).powi(2);
                point_mass += fa * fa;
            }
            l1.add(jumps, h * grad, jumps / (h * grad));
            let base = h * point_mass + h * h * grad;
            l2.add(norm2, 2.0 * base, norm2 / base);
        }

        let (psi, _, _) = random_poly(&mut rng, &dir, config.degree, false);
        let grad = h1_seminorm(&psi).powi(2);
        let norm2 = l2_norm(&psi).powi(2);
        pnk.add(norm2, grad / lam1, lam1 * norm2 / grad);
        let coeffs: Vec<f64> = modes.iter().map(|w| l2_inner(&psi, w)).collect::<Result<_>>()?;
        for &n in &config.tail_modes {
            let mut tail = psi.clone();
            for (w, c) in modes[..n].iter().zip(&coeffs) {
                tail.axpy(-c, w)?;
            }
            let lam = dirichlet_eigenvalue(l, n + 1);
            let rem = l2_norm(&tail).powi(2);
            qn.add(rem, grad / lam, lam * rem / grad);
        }
    }

    Ok(vec![
        p1.finish(),
        p2_printed.finish(),
        p2_corrected.finish(),
        l1.finish(),
        l2.finish(),
        qn.finish(),
        pnk.finish(),
    ])
}
