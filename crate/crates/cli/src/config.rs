//! INI-style experiment configuration.
//!
//! ```text
//! [model]
//! family = damped          # damped | nonlinear_damping | strongly_damped
//! nu = 1
//! a = 1
//! b = 2
//! p = 4                    # omit for f = 0
//! bc = neumann
//! length = pi
//! n_cells = 256
//!
//! [controller]
//! variant = volume_elements  # volume_elements | fourier_modes | nodal | subdomain | none
//! n = 2
//! mu = 4
//!
//! [initial]
//! profile = bump(1.5707963, 0.5)
//!
//! [time]
//! t_end = 10
//! ```

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use wavestab::analysis::{Window, DEFAULT_SAFETY, DEFAULT_WINDOW};
use wavestab::controllers::ControllerSpec;
use wavestab::grid::{BoundaryCondition, Grid1D};
use wavestab::integrator::{default_dt, default_record_every, Scheme, StepperConfig};
use wavestab::models::{ModelFamily, ModelSpec, Nonlinearity};
use wavestab::profiles::Profile;
use wavestab::spectral::Subdomain;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// 1-based line, or 0 when the problem is not tied to a line.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "line {}: {}", self.line, self.message)
        } else {
            f.write_str(&self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError { line, message: message.into() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    VolumeElements,
    FourierModes,
    Nodal,
    Subdomain,
    None,
}

impl ControllerKind {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "volume_elements" => ControllerKind::VolumeElements,
            "fourier_modes" => ControllerKind::FourierModes,
            "nodal" => ControllerKind::Nodal,
            "subdomain" => ControllerKind::Subdomain,
            "none" => ControllerKind::None,
            _ => return None,
        })
    }

    fn as_str(&self) -> &'static str {
        match self {
            ControllerKind::VolumeElements => "volume_elements",
            ControllerKind::FourierModes => "fourier_modes",
            ControllerKind::Nodal => "nodal",
            ControllerKind::Subdomain => "subdomain",
            ControllerKind::None => "none",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSection {
    pub family: ModelFamily,
    pub nu: f64,
    pub a: f64,
    pub b: f64,
    pub m: Option<f64>,
    /// Power-law exponent; `None` means `f = 0`.
    pub p: Option<f64>,
    pub bc: BoundaryCondition,
    pub length: f64,
    pub n_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerSection {
    pub variant: ControllerKind,
    pub n: Option<usize>,
    pub mu: f64,
    pub omega_lo: Option<f64>,
    pub omega_hi: Option<f64>,
    pub obs_points: Option<Vec<f64>>,
    pub act_points: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialSection {
    pub profile: Profile,
    pub amplitude: f64,
    pub velocity_profile: Profile,
    pub velocity_amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSection {
    pub dt: Option<f64>,
    pub t_end: f64,
    pub record_every: Option<usize>,
    pub scheme: Scheme,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSection {
    pub window_lo: f64,
    pub window_hi: f64,
    pub safety: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    pub controller: ControllerSection,
    pub initial: InitialSection,
    pub time: TimeSection,
    pub analysis: AnalysisSection,
}

/// Key/value pairs of one section with their line numbers.
#[derive(Default)]
struct Section {
    line: usize,
    entries: BTreeMap<String, (usize, String)>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn required<T>(&mut self, key: &str, section: &str, parse: impl Fn(&str) -> Option<T>) -> Result<T, ConfigError> {
        match self.take(key) {
            Some((line, raw)) => parse(&raw).map_or_else(|| err(line, format!("invalid value '{raw}' for '{key}'")), Ok),
            None => err(self.line, format!("missing key '{key}' in [{section}]")),
        }
    }

    fn optional<T>(&mut self, key: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Option<T>, ConfigError> {
        match self.take(key) {
            Some((line, raw)) => parse(&raw).map_or_else(|| err(line, format!("invalid value '{raw}' for '{key}'")), |v| Ok(Some(v))),
            None => Ok(None),
        }
    }
}

/// Reals, with `pi` accepted as a factor: `pi`, `2*pi`, `pi/2`, `3*pi/4`.
pub fn parse_real(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().ok()?),
        None => (s, 1.0),
    };
    let coeff = match num.strip_suffix("pi") {
        Some("") => 1.0,
        Some(c) => c.trim().strip_suffix('*')?.trim().parse::<f64>().ok()?,
        None => return None,
    };
    let v = coeff * std::f64::consts::PI / den;
    v.is_finite().then_some(v)
}

fn parse_list(s: &str) -> Option<Vec<f64>> {
    s.split(',').map(parse_real).collect()
}

fn parse_usize(s: &str) -> Option<usize> {
    s.trim().parse().ok()
}

const SECTIONS: [(&str, &[&str]); 5] = [
    ("model", &["family", "nu", "a", "b", "m", "p", "bc", "length", "n_cells"]),
    ("controller", &["variant", "n", "mu", "omega_lo", "omega_hi", "obs_points", "act_points"]),
    ("initial", &["profile", "amplitude", "velocity_profile", "velocity_amplitude"]),
    ("time", &["dt", "t_end", "record_every", "scheme"]),
    ("analysis", &["window_lo", "window_hi", "safety"]),
];

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut sections: BTreeMap<&str, Section> = BTreeMap::new();
        let mut current: Option<&str> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split(['#', ';']).next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                let Some(name) = name.strip_suffix(']') else {
                    return err(line, format!("malformed section header '{content}'"));
                };
                let name = name.trim();
                let Some(&(known, _)) = SECTIONS.iter().find(|(s, _)| *s == name) else {
                    return err(line, format!("unknown section [{name}]"));
                };
                if sections.contains_key(known) {
                    return err(line, format!("duplicate section [{name}]"));
                }
                sections.insert(known, Section { line, entries: BTreeMap::new() });
                current = Some(known);
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return err(line, format!("expected 'key = value', got '{content}'"));
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return err(line, "empty key");
            }
            let Some(sec) = current else {
                return err(line, format!("key '{key}' outside any section"));
            };
            if !SECTIONS.iter().any(|(s, keys)| *s == sec && keys.contains(&key)) {
                return err(line, format!("unknown key '{key}' in [{sec}]"));
            }
            let section = sections.get_mut(sec).expect("current section exists");
            if section.entries.insert(key.to_string(), (line, value.to_string())).is_some() {
                return err(line, format!("duplicate key '{key}' in [{sec}]"));
            }
        }

        let mut take = |name: &str| -> Result<Section, ConfigError> {
            sections.remove(name).map_or_else(|| err(0, format!("missing section [{name}]")), Ok)
        };

        let mut s = take("model")?;
        let model = ModelSection {
            family: s.required("family", "model", |v| v.parse().ok())?,
            nu: s.optional("nu", parse_real)?.unwrap_or(1.0),
            a: s.required("a", "model", parse_real)?,
            b: s.required("b", "model", parse_real)?,
            m: s.optional("m", parse_real)?,
            p: s.optional("p", parse_real)?,
            bc: s.required("bc", "model", |v| v.parse().ok())?,
            length: s.required("length", "model", parse_real)?,
            n_cells: s.required("n_cells", "model", parse_usize)?,
        };
        let model_line = s.line;

        let mut s = take("controller")?;
        let controller = ControllerSection {
            variant: s.required("variant", "controller", ControllerKind::parse)?,
            n: s.optional("n", parse_usize)?,
            mu: s.optional("mu", parse_real)?.unwrap_or(0.0),
            omega_lo: s.optional("omega_lo", parse_real)?,
            omega_hi: s.optional("omega_hi", parse_real)?,
            obs_points: s.optional("obs_points", parse_list)?,
            act_points: s.optional("act_points", parse_list)?,
        };
        let controller_line = s.line;

        let mut s = sections.remove("initial").unwrap_or_default();
        let initial = InitialSection {
            profile: s.required("profile", "initial", |v| v.parse().ok())?,
            amplitude: s.optional("amplitude", parse_real)?.unwrap_or(1.0),
            velocity_profile: s.optional("velocity_profile", |v| v.parse().ok())?.unwrap_or(Profile::Zero),
            velocity_amplitude: s.optional("velocity_amplitude", parse_real)?.unwrap_or(1.0),
        };

        let mut s = sections.remove("time").unwrap_or_default();
        let time = TimeSection {
            dt: s.optional("dt", parse_real)?,
            t_end: s.required("t_end", "time", parse_real)?,
            record_every: s.optional("record_every", parse_usize)?,
            scheme: s.optional("scheme", |v| v.parse().ok())?.unwrap_or_default(),
        };
        let time_line = s.line;

        let mut s = sections.remove("analysis").unwrap_or_default();
        let analysis = AnalysisSection {
            window_lo: s.optional("window_lo", parse_real)?.unwrap_or(DEFAULT_WINDOW.0),
            window_hi: s.optional("window_hi", parse_real)?.unwrap_or(DEFAULT_WINDOW.1),
            safety: s.optional("safety", parse_real)?.unwrap_or(DEFAULT_SAFETY),
        };
        let analysis_line = s.line;

        let config = ExperimentConfig { model, controller, initial, time, analysis };
        let anchor = |e: ConfigError, fallback: usize| ConfigError { line: if e.line == 0 { fallback } else { e.line }, ..e };
        config.model_spec().map_err(|e| anchor(e, model_line))?;
        config.grid().map_err(|e| anchor(e, model_line))?;
        config.controller_spec().map_err(|e| anchor(e, controller_line))?;
        config.stepper().map_err(|e| anchor(e, time_line))?;
        config.window().map_err(|e| anchor(e, analysis_line))?;
        Ok(config)
    }

    pub fn model_spec(&self) -> Result<ModelSpec, ConfigError> {
        let m = &self.model;
        let nonlinearity = match m.p {
            Some(p) => Nonlinearity::PowerLaw { p },
            None => Nonlinearity::Zero,
        };
        let spec = match m.family {
            ModelFamily::DampedWave => ModelSpec::damped(m.nu, m.a, m.b, nonlinearity, m.bc),
            ModelFamily::NonlinearDampingWave | ModelFamily::StronglyDampedWave => {
                if m.bc != BoundaryCondition::Dirichlet {
                    return err(0, format!("family '{}' requires bc = dirichlet", m.family));
                }
                let Some(p) = m.p else {
                    return err(0, format!("family '{}' requires the exponent p", m.family));
                };
                if m.family == ModelFamily::NonlinearDampingWave {
                    let Some(mm) = m.m else {
                        return err(0, "family 'nonlinear_damping' requires the damping exponent m");
                    };
                    ModelSpec::nonlinear_damping(m.nu, m.a, m.b, mm, p)
                } else {
                    ModelSpec::strongly_damped(m.nu, m.a, m.b, p)
                }
            }
        };
        spec.validate().map_err(|e| ConfigError { line: 0, message: e.to_string() })?;
        Ok(spec)
    }

    pub fn grid(&self) -> Result<Grid1D, ConfigError> {
        Grid1D::new(self.model.length, self.model.n_cells, self.model.bc)
            .map_err(|e| ConfigError { line: 0, message: e.to_string() })
    }

    pub fn controller_spec(&self) -> Result<ControllerSpec, ConfigError> {
        let c = &self.controller;
        let l = self.model.length;
        let need_n = || c.n.map_or_else(|| err(0, format!("controller '{}' requires n", c.variant.as_str())), Ok);
        let spec = match c.variant {
            ControllerKind::VolumeElements => ControllerSpec::VolumeElements { n: need_n()?, mu: c.mu },
            ControllerKind::FourierModes => ControllerSpec::FourierModes { n: need_n()?, mu: c.mu },
            ControllerKind::Nodal => match (&c.obs_points, &c.act_points) {
                (None, None) => ControllerSpec::nodal_midpoints(need_n()?, c.mu, l),
                (Some(obs), Some(act)) => {
                    if obs.len() != act.len() || c.n.is_some_and(|n| n != obs.len()) {
                        return err(0, "obs_points and act_points must both have n entries");
                    }
                    ControllerSpec::Nodal { mu: c.mu, obs_points: obs.clone(), act_points: act.clone() }
                }
                _ => return err(0, "give both obs_points and act_points, or neither"),
            },
            ControllerKind::Subdomain => {
                let (Some(lo), Some(hi)) = (c.omega_lo, c.omega_hi) else {
                    return err(0, "controller 'subdomain' requires omega_lo and omega_hi");
                };
                let omega = Subdomain::new(lo, hi, l).map_err(|e| ConfigError { line: 0, message: e.to_string() })?;
                ControllerSpec::Subdomain { omega, mu: c.mu }
            }
            ControllerKind::None => ControllerSpec::None,
        };
        spec.validate(&self.grid()?).map_err(|e| ConfigError { line: 0, message: e.to_string() })?;
        Ok(spec)
    }

    pub fn stepper(&self) -> Result<StepperConfig, ConfigError> {
        let grid = self.grid()?;
        let dt = self.time.dt.unwrap_or_else(|| default_dt(&grid));
        let dt = if self.time.t_end > 0.0 { dt.min(self.time.t_end) } else { dt };
        let cfg = StepperConfig {
            dt,
            scheme: self.time.scheme,
            t_end: self.time.t_end,
            record_every: self.time.record_every.unwrap_or_else(|| default_record_every(self.time.t_end, dt)),
        };
        cfg.validate().map_err(|e| ConfigError { line: 0, message: e.to_string() })?;
        Ok(cfg)
    }

    pub fn window(&self) -> Result<Window, ConfigError> {
        let a = &self.analysis;
        if !(a.safety > 0.0 && a.safety <= 1.0) {
            return err(0, format!("safety must lie in (0, 1], got {}", a.safety));
        }
        if !(0.0..=1.0).contains(&a.window_lo) || !(0.0..=1.0).contains(&a.window_hi) || a.window_lo >= a.window_hi {
            return err(0, format!("window fractions must satisfy 0 <= lo < hi <= 1, got ({}, {})", a.window_lo, a.window_hi));
        }
        Ok(Window { lo: a.window_lo * self.time.t_end, hi: a.window_hi * self.time.t_end })
    }

    /// Copy with the controller gain (`mu`) or resolution (`n`) replaced.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Self, ConfigError> {
        let mut out = self.clone();
        match name {
            "mu" => out.controller.mu = value,
            "n" | "N" => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return err(0, format!("n must be a positive integer, got {value}"));
                }
                if out.controller.obs_points.is_some() {
                    return err(0, "cannot sweep n with explicit nodal points");
                }
                out.controller.n = Some(value as usize);
            }
            other => return err(0, format!("unknown sweep parameter '{other}' (expected mu or n)")),
        }
        out.controller_spec()?;
        Ok(out)
    }

    /// INI text that parses back to `self`.
    #[cfg(test)]
    pub fn to_ini(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        let m = &self.model;
        kv("[model]\nfamily", m.family.to_string());
        kv("nu", format!("{:?}", m.nu));
        kv("a", format!("{:?}", m.a));
        kv("b", format!("{:?}", m.b));
        if let Some(v) = m.m {
            kv("m", format!("{v:?}"));
        }
        if let Some(v) = m.p {
            kv("p", format!("{v:?}"));
        }
        kv("bc", m.bc.to_string());
        kv("length", format!("{:?}", m.length));
        kv("n_cells", m.n_cells.to_string());
        let c = &self.controller;
        kv("\n[controller]\nvariant", c.variant.as_str().to_string());
        if let Some(n) = c.n {
            kv("n", n.to_string());
        }
        kv("mu", format!("{:?}", c.mu));
        if let Some(v) = c.omega_lo {
            kv("omega_lo", format!("{v:?}"));
        }
        if let Some(v) = c.omega_hi {
            kv("omega_hi", format!("{v:?}"));
        }
        if let Some(v) = &c.obs_points {
            kv("obs_points", list(v));
        }
        if let Some(v) = &c.act_points {
            kv("act_points", list(v));
        }
        let i = &self.initial;
        kv("\n[initial]\nprofile", profile_ini(&i.profile));
        kv("amplitude", format!("{:?}", i.amplitude));
        kv("velocity_profile", profile_ini(&i.velocity_profile));
        kv("velocity_amplitude", format!("{:?}", i.velocity_amplitude));
        let t = &self.time;
        if let Some(dt) = t.dt {
            kv("\n[time]\ndt", format!("{dt:?}"));
            kv("t_end", format!("{:?}", t.t_end));
        } else {
            kv("\n[time]\nt_end", format!("{:?}", t.t_end));
        }
        if let Some(r) = t.record_every {
            kv("record_every", r.to_string());
        }
        kv("scheme", t.scheme.to_string());
        let a = &self.analysis;
        kv("\n[analysis]\nwindow_lo", format!("{:?}", a.window_lo));
        kv("window_hi", format!("{:?}", a.window_hi));
        kv("safety", format!("{:?}", a.safety));
        out
    }
}

/// Profile text with full-precision reals.
#[cfg(test)]
fn profile_ini(p: &Profile) -> String {
    match p {
        Profile::Bump { center, width } => format!("bump({center:?}, {width:?})"),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const VOLUME: &str = "
[model]
family = damped
nu = 1
a = 1
b = 2
bc = neumann
length = pi
n_cells = 64

[controller]
variant = volume_elements
n = 2
mu = 4

[initial]
profile = bump(pi_center, 0.5)
";

    fn volume() -> String {
        VOLUME.replace("pi_center", "1.5707963267948966") + "\n[time]\nt_end = 1\n"
    }

    #[test]
    fn parses_a_complete_config() {
        let c = ExperimentConfig::parse(&volume()).unwrap();
        assert_eq!(c.model.family, ModelFamily::DampedWave);
        assert!((c.model.length - std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(c.controller.n, Some(2));
        assert_eq!(c.time.scheme, Scheme::ImexCn);
        assert_eq!(c.analysis.safety, DEFAULT_SAFETY);
        assert!(matches!(c.controller_spec().unwrap(), ControllerSpec::VolumeElements { n: 2, .. }));
    }

    #[test]
    fn pi_expressions() {
        let pi = std::f64::consts::PI;
        assert_eq!(parse_real("pi"), Some(pi));
        assert_eq!(parse_real("2*pi"), Some(2.0 * pi));
        assert_eq!(parse_real("pi/2"), Some(pi / 2.0));
        assert_eq!(parse_real("3 * pi / 4"), Some(3.0 * pi / 4.0));
        assert_eq!(parse_real("1e-3"), Some(1e-3));
        assert_eq!(parse_real("2pi"), None);
        assert_eq!(parse_real("nan"), None);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = volume().replace("mu = 4", "mu = four");
        let e = ExperimentConfig::parse(&text).unwrap_err();
        assert_eq!(e.line, 14);
        assert!(e.message.contains("mu"));

        let text = volume().replace("n = 2", "n = 2\ncolour = blue");
        let e = ExperimentConfig::parse(&text).unwrap_err();
        assert_eq!(e.line, 14);
        assert!(e.to_string().starts_with("line 14: unknown key 'colour'"));

        let e = ExperimentConfig::parse(&volume().replace("bc = neumann", "bc neumann")).unwrap_err();
        assert_eq!(e.line, 7);

        // bc/controller mismatch is reported at the controller header
        let e = ExperimentConfig::parse(&volume().replace("bc = neumann", "bc = dirichlet")).unwrap_err();
        assert_eq!(e.line, 11);
    }

    #[test]
    fn missing_sections_and_keys() {
        let e = ExperimentConfig::parse("[model]\nfamily = damped\n").unwrap_err();
        assert!(e.message.contains("missing key 'a'"));
        let text = volume().replace("[time]\nt_end = 1\n", "");
        let e = ExperimentConfig::parse(&text).unwrap_err();
        assert!(e.message.contains("t_end"));
    }

    #[test]
    fn ini_and_json_round_trip() {
        let c = ExperimentConfig::parse(&volume()).unwrap();
        assert_eq!(ExperimentConfig::parse(&c.to_ini()).unwrap(), c);
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&json).unwrap(), c);
    }

    #[test]
    fn sweep_overrides() {
        let c = ExperimentConfig::parse(&volume()).unwrap();
        assert_eq!(c.with_param("mu", 7.0).unwrap().controller.mu, 7.0);
        assert_eq!(c.with_param("n", 4.0).unwrap().controller.n, Some(4));
        assert!(c.with_param("n", 2.5).is_err());
        assert!(c.with_param("b", 1.0).is_err());
    }
}
