//! Run configuration: defaults, `key = value` files with `[section]`
//! headers, and command-line overrides.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use crate::bath::BathParams;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::models::{ControlField, ModelKind};

/// What a run evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Monte Carlo ensemble average.
    Mc,
    /// Closed-form or deterministic evaluation.
    Analytic,
    /// Both, side by side with a residual.
    Both,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "mc" => Ok(Mode::Mc),
            "analytic" => Ok(Mode::Analytic),
            "both" => Ok(Mode::Both),
            other => Err(format!("unknown mode `{other}` (expected mc, analytic or both)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Mc => "mc",
            Mode::Analytic => "analytic",
            Mode::Both => "both",
        })
    }
}

/// Parameters a sweep axis may scan.
pub const SWEEP_PARAMS: [&str; 8] = ["theta", "gamma", "lambda", "Gamma", "omega0", "omega", "c_x", "Omega_c"];

/// One sweep axis: `points` evenly spaced values on `[min, max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.points - 1) as f64;
        (0..self.points).map(|i| if i + 1 == self.points { self.max } else { self.min + i as f64 * step }).collect()
    }

    fn validate(&self, ctx: &str) -> Result<()> {
        if !SWEEP_PARAMS.contains(&self.name.as_str()) {
            return Err(config(ctx, format!("cannot sweep `{}` (expected one of {})", self.name, SWEEP_PARAMS.join(", "))));
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.max < self.min {
            return Err(config(ctx, format!("axis `{}` needs finite min <= max", self.name)));
        }
        if self.points == 0 {
            return Err(config(ctx, format!("axis `{}` needs at least one point", self.name)));
        }
        Ok(())
    }
}

impl FromStr for Axis {
    type Err = String;

    /// `name:min:max:points`.
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [name, min, max, points] = parts[..] else {
            return Err(format!("axis `{s}` must look like name:min:max:points"));
        };
        Ok(Axis {
            name: name.to_string(),
            min: parse_f64(min)?,
            max: parse_f64(max)?,
            points: points.parse().map_err(|_| format!("`{points}` is not a point count"))?,
        })
    }
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: Option<ModelKind>,
    pub omega: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub big_gamma: f64,
    pub omega0: f64,
    pub theta: f64,
    pub c_x: f64,
    pub omega_c: f64,
    /// `None` picks the model-dependent default.
    pub dt: Option<f64>,
    /// `None` means one system period `2π/ω`.
    pub t_final: Option<f64>,
    pub n_traj: usize,
    pub seed: u64,
    pub threads: Option<usize>,
    pub mode: Mode,
    pub x: Option<Axis>,
    pub y: Option<Axis>,
    pub output: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: None,
            omega: 1.0,
            lambda: 1.0,
            gamma: 1.0,
            big_gamma: 1.0,
            omega0: 0.0,
            theta: 1.0,
            c_x: 10.0,
            omega_c: 50.0,
            dt: None,
            t_final: None,
            n_traj: 10_000,
            seed: 0,
            threads: None,
            mode: Mode::Mc,
            x: None,
            y: None,
            output: None,
        }
    }
}

fn config(context: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config { context: context.into(), message: message.into() }
}

/// Parse a real number; accepts `pi`, `tau` and `k*pi`-style multiples.
pub fn parse_f64(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let named = |t: &str| match t {
        "pi" => Some(PI),
        "tau" | "2pi" => Some(TAU),
        _ => None,
    };
    let v = if let Some(v) = named(s) {
        v
    } else if let Some((a, b)) = s.split_once('*') {
        let a = a.trim().parse::<f64>().map_err(|_| format!("`{s}` is not a number"))?;
        a * named(b.trim()).ok_or_else(|| format!("`{s}` is not a number"))?
    } else if let Some((a, b)) = s.split_once('/') {
        let a = named(a.trim()).or_else(|| a.trim().parse().ok()).ok_or_else(|| format!("`{s}` is not a number"))?;
        a / b.trim().parse::<f64>().map_err(|_| format!("`{s}` is not a number"))?
    } else {
        s.parse::<f64>().map_err(|_| format!("`{s}` is not a number"))?
    };
    if !v.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(v)
}

/// Sections and the keys each accepts. Keys before the first header may be
/// any known key.
const SECTIONS: [(&str, &[&str]); 6] = [
    ("model", &["model", "mode", "output"]),
    ("physics", &["omega", "lambda", "gamma", "Gamma", "omega0", "theta"]),
    ("control", &["c_x", "Omega_c"]),
    ("grid", &["dt", "t_final"]),
    ("ensemble", &["n_traj", "seed", "threads"]),
    ("sweep", &["x", "y"]),
];

impl RunConfig {
    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let f = || parse_f64(value);
        match key {
            "model" => self.model = Some(value.parse()?),
            "mode" => self.mode = value.parse()?,
            "output" => self.output = Some(value.trim().to_string()),
            "omega" => self.omega = f()?,
            "lambda" => self.lambda = f()?,
            "gamma" => self.gamma = f()?,
            "Gamma" => self.big_gamma = f()?,
            "omega0" => self.omega0 = f()?,
            "theta" => self.theta = f()?,
            "c_x" => self.c_x = f()?,
            "Omega_c" => self.omega_c = f()?,
            "dt" => self.dt = Some(f()?),
            "t_final" => self.t_final = Some(f()?),
            "n_traj" => self.n_traj = value.trim().parse().map_err(|_| format!("`{value}` is not a trajectory count"))?,
            "seed" => self.seed = value.trim().parse().map_err(|_| format!("`{value}` is not a 64-bit seed"))?,
            "threads" => self.threads = Some(value.trim().parse().map_err(|_| format!("`{value}` is not a thread count"))?),
            "x" => self.x = Some(value.parse()?),
            "y" => self.y = Some(value.parse()?),
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Apply a configuration file's text; `origin` names it in errors.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<()> {
        let mut section: Option<&str> = None;
        for (i, raw) in text.lines().enumerate() {
            let ctx = || format!("{origin}:{}", i + 1);
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                match SECTIONS.iter().find(|(s, _)| *s == name) {
                    Some((s, _)) => section = Some(s),
                    None => return Err(config(ctx(), format!("unknown section [{name}]"))),
                }
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(config(ctx(), format!("expected `key = value`, got `{line}`")));
            };
            let key = key.trim();
            let known = SECTIONS.iter().any(|(_, keys)| keys.contains(&key));
            if !known {
                return Err(config(ctx(), format!("unknown key `{key}`")));
            }
            if let Some(s) = section {
                let keys = SECTIONS.iter().find(|(n, _)| *n == s).map(|(_, k)| *k).unwrap_or(&[]);
                if !keys.contains(&key) {
                    return Err(config(ctx(), format!("key `{key}` does not belong in [{s}]")));
                }
            }
            self.set(key, value).map_err(|m| config(ctx(), m))?;
        }
        Ok(())
    }

    /// Seed from the `GEODEC_SEED` environment variable, if set.
    pub fn apply_env_seed(&mut self, value: Option<&str>) -> Result<()> {
        if let Some(v) = value {
            self.seed = v.trim().parse().map_err(|_| config("GEODEC_SEED", format!("`{v}` is not a 64-bit seed")))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("omega", self.omega),
            ("lambda", self.lambda),
            ("gamma", self.gamma),
            ("Gamma", self.big_gamma),
            ("omega0", self.omega0),
            ("theta", self.theta),
            ("c_x", self.c_x),
            ("Omega_c", self.omega_c),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(config(name, "must be finite"));
            }
        }
        if !(0.0..=PI).contains(&self.theta) {
            return Err(config("theta", format!("must lie in [0, pi], got {}", self.theta)));
        }
        if self.omega <= 0.0 {
            return Err(config("omega", format!("must be > 0, got {}", self.omega)));
        }
        if self.lambda < 0.0 {
            return Err(config("lambda", format!("must be >= 0, got {}", self.lambda)));
        }
        if self.gamma <= 0.0 {
            return Err(config("gamma", format!("must be > 0, got {}", self.gamma)));
        }
        if self.big_gamma < 0.0 {
            return Err(config("Gamma", format!("must be >= 0, got {}", self.big_gamma)));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(config("dt", format!("must be > 0, got {dt}")));
            }
        }
        if let Some(t) = self.t_final {
            if !(t > 0.0) {
                return Err(config("t_final", format!("must be > 0, got {t}")));
            }
        }
        if self.n_traj < 2 {
            return Err(config("n_traj", format!("need at least 2 trajectories, got {}", self.n_traj)));
        }
        if self.threads == Some(0) {
            return Err(config("threads", "must be >= 1"));
        }
        if let Some(a) = &self.x {
            a.validate("x")?;
        }
        if let Some(a) = &self.y {
            a.validate("y")?;
            if self.x.is_none() {
                return Err(config("y", "a y axis needs an x axis"));
            }
        }
        Ok(())
    }

    pub fn require_model(&self) -> Result<ModelKind> {
        self.model.ok_or_else(|| config("model", "missing required key `model` (dissipative, dephasing or leo)"))
    }

    pub fn bath(&self) -> Result<BathParams> {
        BathParams::new(self.gamma, self.big_gamma, self.omega0)
    }

    pub fn control(&self) -> Option<ControlField> {
        (self.model == Some(ModelKind::Leo3L)).then_some(ControlField { c_x: self.c_x, omega_c: self.omega_c })
    }

    /// Step size: explicit, else `2π/(20000ω)` for the LEO model (resolving
    /// the control oscillation) and `10⁻³·2π/ω` otherwise.
    pub fn resolved_dt(&self) -> f64 {
        self.dt.unwrap_or(match self.model {
            Some(ModelKind::Leo3L) => TAU / (20_000.0 * self.omega),
            _ => 1e-3 * TAU / self.omega,
        })
    }

    pub fn resolved_t_final(&self) -> f64 {
        self.t_final.unwrap_or(TAU / self.omega)
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::covering(self.resolved_t_final(), self.resolved_dt())
    }

    /// Set a sweepable parameter by name.
    pub fn set_param(&mut self, name: &str, v: f64) {
        match name {
            "theta" => self.theta = v,
            "gamma" => self.gamma = v,
            "lambda" => self.lambda = v,
            "Gamma" => self.big_gamma = v,
            "omega0" => self.omega0 = v,
            "omega" => self.omega = v,
            "c_x" => self.c_x = v,
            "Omega_c" => self.omega_c = v,
            _ => unreachable!("axis names are validated"),
        }
    }
}
