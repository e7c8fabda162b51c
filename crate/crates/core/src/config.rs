//! Plain-text experiment configuration.
//!
//! One `section.key = value` per line; `#` starts a comment. Unknown or repeated
//! keys are errors. Every key has a default, so an empty file is valid.
//!
//! ```text
//! run.mode = sweep            # profile | theta | simulate | melnikov | sweep | spectrum | bordered
//! run.output = out/sweep      # relative paths go under $QUENCH_OUTPUT_ROOT when set
//! run.threads = 1
//! model.c_x = 0.5
//! model.alpha = 0
//! model.g_left = 0            # ascending coefficients, e.g. 0,0,0.5 for u^2/2
//! model.g_right = 1
//! profile.half_width = 30
//! profile.h = 0.025
//! grid.half_width = 60
//! grid.h = 0.25
//! solver.dt = 0.5
//! solver.tol = 1e-8
//! solver.theta_tol = 1e-9
//! solver.max_steps = 20000
//! solver.scheme = factored    # factored | factored-linearized | backward-euler
//! measure.window_min = -50
//! measure.window_max = -20
//! sweep.alphas = -0.2,-0.1,0,0.1,0.2
//! farfield.radius = 20
//! farfield.half_width = 40
//! farfield.h = 0.25
//! farfield.dt = 0.5
//! farfield.tol = 1e-6
//! farfield.max_iter = 20000
//! farfield.eta = auto         # or a number in (0, c_x)
//! ```

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::measure::FARFIELD_EDGE;
use crate::model::ModelParams;
use crate::poly::Poly;
use crate::quench2d::Scheme;

/// Environment variable naming the root for relative output directories.
pub const OUTPUT_ROOT_VAR: &str = "QUENCH_OUTPUT_ROOT";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Profile,
    Theta,
    Simulate,
    Melnikov,
    Sweep,
    Spectrum,
    Bordered,
}

impl Mode {
    pub const ALL: [Mode; 7] = [
        Mode::Profile,
        Mode::Theta,
        Mode::Simulate,
        Mode::Melnikov,
        Mode::Sweep,
        Mode::Spectrum,
        Mode::Bordered,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Profile => "profile",
            Mode::Theta => "theta",
            Mode::Simulate => "simulate",
            Mode::Melnikov => "melnikov",
            Mode::Sweep => "sweep",
            Mode::Spectrum => "spectrum",
            Mode::Bordered => "bordered",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown mode {s:?}")))
    }
}

/// 1D profile grid `[-half_width, half_width]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileGrid {
    pub half_width: f64,
    pub h: f64,
}

/// Settings of the comoving-frame runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationSettings {
    pub half_width: f64,
    pub h: f64,
    pub dt: f64,
    pub tol: f64,
    pub theta_tol: f64,
    pub max_steps: usize,
    pub scheme: Scheme,
    pub window: (f64, f64),
}

/// Settings of the farfield-core solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarfieldSettings {
    pub radius: f64,
    pub half_width: f64,
    pub h: f64,
    pub dt: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// `None` means `min(c_x, 1) / 4`.
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub output: PathBuf,
    pub threads: usize,
    pub model: ModelParams,
    pub profile: ProfileGrid,
    pub sim: SimulationSettings,
    pub sweep_alphas: Vec<f64>,
    pub farfield: FarfieldSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: Mode::Melnikov,
            output: PathBuf::from("out"),
            threads: 1,
            model: ModelParams::default(),
            profile: ProfileGrid {
                half_width: 30.0,
                h: 0.025,
            },
            sim: SimulationSettings {
                half_width: 60.0,
                h: 0.25,
                dt: 0.5,
                tol: 1e-8,
                theta_tol: 1e-9,
                max_steps: 20_000,
                scheme: Scheme::Factored,
                window: (-50.0, -20.0),
            },
            sweep_alphas: vec![-0.2, -0.1, 0.0, 0.1, 0.2],
            farfield: FarfieldSettings {
                radius: 20.0,
                half_width: 40.0,
                h: 0.25,
                dt: 0.5,
                tol: 1e-6,
                max_iter: 20_000,
                eta: None,
            },
        }
    }
}

fn num(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|e| Error::Config(format!("{key}: cannot parse {v:?} as a number: {e}")))
}

fn count(key: &str, v: &str) -> Result<usize> {
    v.parse::<usize>()
        .map_err(|e| Error::Config(format!("{key}: cannot parse {v:?} as a count: {e}")))
}

fn list(key: &str, v: &str) -> Result<Vec<f64>> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|t| num(key, t.trim())).collect()
}

impl ExperimentConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "run.mode" => self.mode = v.parse()?,
            "run.output" => self.output = PathBuf::from(v),
            "run.threads" => self.threads = count(key, v)?,
            "model.c_x" => self.model.c_x = num(key, v)?,
            "model.alpha" => self.model.alpha = num(key, v)?,
            "model.g_left" => self.model.g_left = v.parse::<Poly>()?,
            "model.g_right" => self.model.g_right = v.parse::<Poly>()?,
            "profile.half_width" => self.profile.half_width = num(key, v)?,
            "profile.h" => self.profile.h = num(key, v)?,
            "grid.half_width" => self.sim.half_width = num(key, v)?,
            "grid.h" => self.sim.h = num(key, v)?,
            "solver.dt" => self.sim.dt = num(key, v)?,
            "solver.tol" => self.sim.tol = num(key, v)?,
            "solver.theta_tol" => self.sim.theta_tol = num(key, v)?,
            "solver.max_steps" => self.sim.max_steps = count(key, v)?,
            "solver.scheme" => self.sim.scheme = v.parse()?,
            "measure.window_min" => self.sim.window.0 = num(key, v)?,
            "measure.window_max" => self.sim.window.1 = num(key, v)?,
            "sweep.alphas" => self.sweep_alphas = list(key, v)?,
            "farfield.radius" => self.farfield.radius = num(key, v)?,
            "farfield.half_width" => self.farfield.half_width = num(key, v)?,
            "farfield.h" => self.farfield.h = num(key, v)?,
            "farfield.dt" => self.farfield.dt = num(key, v)?,
            "farfield.tol" => self.farfield.tol = num(key, v)?,
            "farfield.max_iter" => self.farfield.max_iter = count(key, v)?,
            "farfield.eta" => {
                self.farfield.eta = if v == "auto" { None } else { Some(num(key, v)?) };
            }
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Parses `section.key = value` lines on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut seen = HashSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`, got {raw:?}", n + 1)))?;
            let k = k.trim();
            if !seen.insert(k.to_string()) {
                return Err(Error::Config(format!("line {}: key {k:?} given twice", n + 1)));
            }
            cfg.set(k, v).map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.model.validate()?;
        if self.threads == 0 {
            return bad("run.threads must be at least 1".into());
        }
        for (k, v) in [
            ("profile.half_width", self.profile.half_width),
            ("profile.h", self.profile.h),
            ("grid.half_width", self.sim.half_width),
            ("grid.h", self.sim.h),
            ("solver.dt", self.sim.dt),
            ("solver.tol", self.sim.tol),
            ("solver.theta_tol", self.sim.theta_tol),
            ("farfield.half_width", self.farfield.half_width),
            ("farfield.h", self.farfield.h),
            ("farfield.dt", self.farfield.dt),
            ("farfield.tol", self.farfield.tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{k} must be positive, got {v}"));
            }
        }
        if self.profile.h >= self.profile.half_width || self.sim.h >= self.sim.half_width {
            return bad("grid spacing must be smaller than the half width".into());
        }
        let (lo, hi) = self.sim.window;
        let measures = matches!(self.mode, Mode::Simulate | Mode::Sweep);
        if !(lo < hi) || hi > FARFIELD_EDGE || (measures && lo < -self.sim.half_width) {
            return bad(format!(
                "measure window [{lo}, {hi}] must be ordered, inside the grid and left of x = {FARFIELD_EDGE}"
            ));
        }
        if !(self.farfield.radius > 2.0) || self.farfield.radius + 1.0 > self.farfield.half_width {
            return bad(format!(
                "farfield.radius must lie in (2, half_width - 1], got {}",
                self.farfield.radius
            ));
        }
        if let Some(eta) = self.farfield.eta {
            if !(eta > 0.0 && eta < self.model.c_x) {
                return bad(format!("farfield.eta must lie in (0, c_x), got {eta}"));
            }
        }
        if self.sweep_alphas.iter().any(|a| !a.is_finite()) {
            return bad("sweep.alphas must be finite".into());
        }
        Ok(())
    }

    /// Canonical text form; parsing it gives back the same configuration.
    pub fn to_text(&self) -> String {
        let f = |v: f64| format!("{v:?}");
        let alphas: Vec<String> = self.sweep_alphas.iter().map(|a| f(*a)).collect();
        let lines = [
            ("run.mode", self.mode.to_string()),
            ("run.output", self.output.display().to_string()),
            ("run.threads", self.threads.to_string()),
            ("model.c_x", f(self.model.c_x)),
            ("model.alpha", f(self.model.alpha)),
            ("model.g_left", self.model.g_left.to_string()),
            ("model.g_right", self.model.g_right.to_string()),
            ("profile.half_width", f(self.profile.half_width)),
            ("profile.h", f(self.profile.h)),
            ("grid.half_width", f(self.sim.half_width)),
            ("grid.h", f(self.sim.h)),
            ("solver.dt", f(self.sim.dt)),
            ("solver.tol", f(self.sim.tol)),
            ("solver.theta_tol", f(self.sim.theta_tol)),
            ("solver.max_steps", self.sim.max_steps.to_string()),
            ("solver.scheme", self.sim.scheme.to_string()),
            ("measure.window_min", f(self.sim.window.0)),
            ("measure.window_max", f(self.sim.window.1)),
            ("sweep.alphas", alphas.join(",")),
            ("farfield.radius", f(self.farfield.radius)),
            ("farfield.half_width", f(self.farfield.half_width)),
            ("farfield.h", f(self.farfield.h)),
            ("farfield.dt", f(self.farfield.dt)),
            ("farfield.tol", f(self.farfield.tol)),
            ("farfield.max_iter", self.farfield.max_iter.to_string()),
            (
                "farfield.eta",
                self.farfield.eta.map_or_else(|| "auto".to_string(), f),
            ),
        ];
        lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// Output directory, placed under `$QUENCH_OUTPUT_ROOT` when relative.
    pub fn resolved_output(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_ROOT_VAR) {
            Some(root) if self.output.is_relative() && !root.is_empty() => PathBuf::from(root).join(&self.output),
            _ => self.output.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(ExperimentConfig::parse("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn roundtrip_text() {
        let mut c = ExperimentConfig::default();
        c.model.g_left = Poly::new(&[0.0, 0.0, 0.5]).unwrap();
        c.sweep_alphas = vec![];
        c.farfield.eta = Some(0.1);
        c.mode = Mode::Bordered;
        assert_eq!(ExperimentConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn rejects_unknown_and_repeated_keys() {
        assert!(matches!(ExperimentConfig::parse("model.cx = 1"), Err(Error::Config(_))));
        assert!(matches!(
            ExperimentConfig::parse("model.c_x = 1\nmodel.c_x = 2"),
            Err(Error::Config(_))
        ));
        assert!(ExperimentConfig::parse("no equals sign").is_err());
        assert!(ExperimentConfig::parse("measure.window_max = 0").is_err());
    }

    #[test]
    fn comments() {
        let c = ExperimentConfig::parse("# header\nmodel.g_right = 1 # constant\nrun.mode = sweep\n").unwrap();
        assert_eq!(c.model.g_right, Poly::constant(1.0));
        assert_eq!(c.mode, Mode::Sweep);
    }
}
