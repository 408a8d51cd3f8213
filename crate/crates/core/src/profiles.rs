//! Named initial profiles: `zero`, `mode k`, `bump(c, w)`, `random(seed, degree)`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{BoundaryCondition, Field, Grid1D};
use crate::spectral::sine_mode;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Profile {
    Zero,
    /// Normalized Dirichlet eigenfunction `w_k`, or `cos(kπx/L)` on Neumann grids.
    Mode(usize),
    /// Smooth bump `exp(1 − 1/(1 − r²))`, `r = (x − center)/width`, with peak 1.
    Bump { center: f64, width: f64 },
    /// `Σ_{k≤degree} c_k/k · e_k` with `c_k` uniform in `[−1, 1]` and `e_k` the
    /// unnormalized sine (Dirichlet) or cosine (Neumann, plus a constant) basis.
    Random { seed: u64, degree: usize },
}

impl Profile {
    pub fn sample(&self, grid: &Grid1D, amplitude: f64) -> Result<Field> {
        let l = grid.length();
        let neumann = grid.bc() == BoundaryCondition::Neumann;
        let field = match *self {
            Profile::Zero => Field::zeros(*grid),
            Profile::Mode(k) => {
                if neumann {
                    Field::from_fn(*grid, |x| (k as f64 * PI * x / l).cos())
                } else {
                    if k == 0 || k >= grid.n_cells() {
                        return Err(Error::OutOfRange { index: k, max: grid.n_cells() - 1 });
                    }
                    sine_mode(grid, k)
                }
            }
            Profile::Bump { center, width } => {
                if !(width > 0.0 && width.is_finite() && center.is_finite()) {
                    return Err(Error::InvalidParameter(format!("bump needs a finite center and positive width, got ({center}, {width})")));
                }
                Field::from_fn(*grid, |x| {
                    let r = (x - center) / width;
                    if r.abs() < 1.0 {
                        (1.0 - 1.0 / (1.0 - r * r)).exp()
                    } else {
                        0.0
                    }
                })
            }
            Profile::Random { seed, degree } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let start = if neumann { 0 } else { 1 };
                let coeffs: Vec<(usize, f64)> =
                    (start..=degree).map(|k| (k, rng.gen_range(-1.0..=1.0) / k.max(1) as f64)).collect();
                Field::from_fn(*grid, |x| {
                    coeffs
                        .iter()
                        .map(|&(k, c)| {
                            let w = k as f64 * PI * x / l;
                            c * if neumann { w.cos() } else { w.sin() }
                        })
                        .sum()
                })
            }
        };
        Ok(field.scaled(amplitude))
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Zero => write!(f, "zero"),
            Profile::Mode(k) => write!(f, "mode {k}"),
            Profile::Bump { center, width } => write!(f, "bump({center}, {width})"),
            Profile::Random { seed, degree } => write!(f, "random({seed}, {degree})"),
        }
    }
}

fn call_args<'a>(s: &'a str, name: &str) -> Option<Vec<&'a str>> {
    let rest = s.strip_prefix(name)?.trim_start();
    let inner = rest.strip_prefix('(')?.strip_suffix(')')?;
    Some(inner.split(',').map(str::trim).collect())
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParameter(format!("unrecognized profile '{s}'"));
        if s == "zero" {
            return Ok(Profile::Zero);
        }
        if let Some(k) = s.strip_prefix("mode") {
            return k.trim().parse().map(Profile::Mode).map_err(|_| bad());
        }
        if let Some(args) = call_args(s, "bump") {
            if let [c, w] = args.as_slice() {
                let center = c.parse().map_err(|_| bad())?;
                let width = w.parse().map_err(|_| bad())?;
                return Ok(Profile::Bump { center, width });
            }
        }
        if let Some(args) = call_args(s, "random") {
            if let [sd, d] = args.as_slice() {
                let seed = sd.parse().map_err(|_| bad())?;
                let degree = d.parse().map_err(|_| bad())?;
                return Ok(Profile::Random { seed, degree });
            }
        }
        Err(bad())
    }
}

impl TryFrom<String> for Profile {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Profile> for String {
    fn from(p: Profile) -> String {
        p.to_string()
    }
}
