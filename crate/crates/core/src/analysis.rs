//! Decay-rate fitting and decay-law verification over recorded trajectories.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::EnergyRecord;

/// Records with `stab_norm` at or below this are treated as round-off.
pub const STAB_FLOOR: f64 = 1e-13;
pub const MIN_FIT_RECORDS: usize = 20;
pub const DEFAULT_WINDOW: (f64, f64) = (0.2, 0.9);
pub const DEFAULT_SAFETY: f64 = 0.8;
/// Allowed growth of the running sup in [`verify_polynomial`].
pub const SUP_RATIO_TOLERANCE: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
            return Err(Error::InvalidWindow { lo, hi, reason: "need 0 <= lo < hi".into() });
        }
        Ok(Self { lo, hi })
    }

    /// `[lo·t_end, hi·t_end]`.
    pub fn fractions(t_end: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) {
            return Err(Error::InvalidWindow { lo, hi, reason: "fractions must lie in [0, 1]".into() });
        }
        Self::new(lo * t_end, hi * t_end)
    }

    pub fn default_for(t_end: f64) -> Result<Self> {
        Self::fractions(t_end, DEFAULT_WINDOW.0, DEFAULT_WINDOW.1)
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo && t <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitKind {
    /// `stab_norm ≈ amplitude·e^{−rate·t}`
    Exponential { rate: f64, amplitude: f64 },
    /// `total ≈ amplitude·t^{−exponent}`
    Polynomial { exponent: f64, amplitude: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub kind: FitKind,
    pub r_squared: f64,
    pub window: Window,
    pub samples: usize,
}

impl DecayFit {
    pub fn rate(&self) -> Option<f64> {
        match self.kind {
            FitKind::Exponential { rate, .. } => Some(rate),
            FitKind::Polynomial { .. } => None,
        }
    }

    pub fn exponent(&self) -> Option<f64> {
        match self.kind {
            FitKind::Polynomial { exponent, .. } => Some(exponent),
            FitKind::Exponential { .. } => None,
        }
    }
}

/// Ordinary least squares `y ≈ c0 + c1·x`; returns `(c0, c1, r²)`.
fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let spread = ys.iter().fold(f64::NEG_INFINITY, |m, &y| m.max(y)) - ys.iter().fold(f64::INFINITY, |m, &y| m.min(y));
    // a flat series is fitted exactly by the constant line
    let r2 = if spread <= 1e-12 * my.abs().max(1.0) {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    (intercept, slope, r2)
}

/// Least-squares line through `(t, ln stab_norm)` over `window`.
pub fn fit_exponential(records: &[EnergyRecord], window: Window) -> Result<DecayFit> {
    let (ts, ys): (Vec<f64>, Vec<f64>) = records
        .iter()
        .filter(|r| window.contains(r.t) && r.stab_norm > STAB_FLOOR && r.stab_norm.is_finite())
        .map(|r| (r.t, r.stab_norm.ln()))
        .unzip();
    if ts.len() < MIN_FIT_RECORDS {
        return Err(Error::TooFewRecords { found: ts.len(), needed: MIN_FIT_RECORDS });
    }
    let (c0, c1, r2) = least_squares(&ts, &ys);
    Ok(DecayFit {
        kind: FitKind::Exponential { rate: -c1, amplitude: c0.exp() },
        r_squared: r2,
        window,
        samples: ts.len(),
    })
}

/// Least-squares line through `(ln t, ln total)` over `window` (requires `t > 0`).
pub fn fit_polynomial(records: &[EnergyRecord], window: Window) -> Result<DecayFit> {
    let (ts, ys): (Vec<f64>, Vec<f64>) = records
        .iter()
        .filter(|r| window.contains(r.t) && r.t > 0.0 && r.total > STAB_FLOOR && r.total.is_finite())
        .map(|r| (r.t.ln(), r.total.ln()))
        .unzip();
    if ts.len() < MIN_FIT_RECORDS {
        return Err(Error::TooFewRecords { found: ts.len(), needed: MIN_FIT_RECORDS });
    }
    let (c0, c1, r2) = least_squares(&ts, &ys);
    Ok(DecayFit {
        kind: FitKind::Polynomial { exponent: -c1, amplitude: c0.exp() },
        r_squared: r2,
        window,
        samples: ts.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialVerdict {
    pub ok: bool,
    pub fit: DecayFit,
    /// `safety·δ_target`
    pub target_rate: f64,
    pub rate_ok: bool,
    pub envelope_ok: bool,
    /// Envelope constant `C` in `stab_norm(t) ≤ C·e^{−safety·δ·t}`.
    pub envelope_constant: f64,
}

/// Checks the fitted rate against `safety·δ_target` and the envelope
/// `stab_norm(t) ≤ C·e^{−safety·δ_target·t}` on the window, with `C` taken
/// from the records up to the window start.
pub fn verify_exponential(
    records: &[EnergyRecord],
    delta_target: f64,
    safety: f64,
    window: Window,
) -> Result<ExponentialVerdict> {
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(Error::InvalidParameter(format!("safety must lie in (0, 1], got {safety}")));
    }
    if !(delta_target.is_finite() && delta_target >= 0.0) {
        return Err(Error::InvalidParameter(format!("target rate must be nonnegative, got {delta_target}")));
    }
    let fit = fit_exponential(records, window)?;
    let s = safety * delta_target;
    let rate_ok = fit.rate().expect("exponential fit") >= s;
    let mut head = records.iter().filter(|r| r.t <= window.lo).peekable();
    let envelope_constant = if head.peek().is_some() {
        head.map(|r| r.stab_norm * (s * r.t).exp()).fold(f64::NEG_INFINITY, f64::max)
    } else {
        records.iter().find(|r| window.contains(r.t)).map(|r| r.stab_norm * (s * r.t).exp()).unwrap_or(0.0)
    };
    let envelope_ok = records
        .iter()
        .filter(|r| window.contains(r.t))
        .all(|r| r.stab_norm * (s * r.t).exp() <= envelope_constant * (1.0 + 1e-12));
    Ok(ExponentialVerdict { ok: rate_ok && envelope_ok, fit, target_rate: s, rate_ok, envelope_ok, envelope_constant })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolynomialVerdict {
    pub ok: bool,
    /// Last-quarter sup over first-quarter sup of `total(t)·t^α`.
    pub sup_ratio: f64,
    pub first_sup: f64,
    pub last_sup: f64,
}

/// Checks that `sup total(t)·t^α` over the last quarter of the window is at
/// most [`SUP_RATIO_TOLERANCE`] times the sup over the first quarter.
pub fn verify_polynomial(records: &[EnergyRecord], alpha: f64, window: Window) -> Result<PolynomialVerdict> {
    if window.lo < 1.0 {
        return Err(Error::InvalidWindow { lo: window.lo, hi: window.hi, reason: "polynomial window must start at t >= 1".into() });
    }
    let q = (window.hi - window.lo) / 4.0;
    let sup = |a: f64, b: f64| -> (usize, f64) {
        records
            .iter()
            .filter(|r| r.t >= a && r.t <= b)
            .fold((0, f64::NEG_INFINITY), |(n, m), r| (n + 1, m.max(r.total * r.t.powf(alpha))))
    };
    let (n1, first_sup) = sup(window.lo, window.lo + q);
    let (n2, last_sup) = sup(window.hi - q, window.hi);
    if n1 == 0 || n2 == 0 {
        return Err(Error::TooFewRecords { found: n1.min(n2), needed: 1 });
    }
    let sup_ratio = last_sup / first_sup;
    Ok(PolynomialVerdict { ok: sup_ratio <= SUP_RATIO_TOLERANCE, sup_ratio, first_sup, last_sup })
}
