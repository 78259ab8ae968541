use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use tripod_core::calibration::{DEFAULT_GAMMA0, DEFAULT_STEPS};
use tripod_core::fidelity::{uniform_grid, DEFAULT_STATES, MIN_STATES};
use tripod_core::{LoopFamily, Noise, Window};

/// Evenly spaced `Ωτ` values, `START:STOP:POINTS` on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn values(&self) -> tripod_core::Result<Vec<f64>> {
        uniform_grid(self.start, self.stop, self.points)
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            start: 1.0,
            stop: 60.0,
            points: 591,
        }
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, points] = parts.as_slice() else {
            return Err(format!("grid '{s}' must be START:STOP:POINTS"));
        };
        Ok(Self {
            start: start.trim().parse().map_err(|e| format!("grid start '{start}': {e}"))?,
            stop: stop.trim().parse().map_err(|e| format!("grid stop '{stop}': {e}"))?,
            points: points.trim().parse().map_err(|e| format!("grid points '{points}': {e}"))?,
        })
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.points)
    }
}

/// Everything a run needs. Missing keys take defaults; unknown keys are
/// rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    #[serde(rename = "loop")]
    pub loop_family: LoopFamily,
    pub omega: f64,
    pub grid: GridSpec,
    /// Single `Ωτ`; replaces the grid for sweeps and sets the holonomy
    /// propagator time.
    pub tau: Option<f64>,
    /// `None` picks the command's default list.
    pub lambda_sq: Option<Vec<f64>>,
    /// Flat high-temperature rate in units of `Ω`.
    pub gamma0: f64,
    /// Noise model JSON; its `lambda_sq` is replaced per run.
    pub noise_file: Option<PathBuf>,
    pub states: usize,
    pub steps: usize,
    pub out: PathBuf,
    pub calibrate_f2: Option<f64>,
    pub free_intercept: bool,
    /// Optimal-point table consumed by `fit`.
    pub table: Option<PathBuf>,
    pub window: Window,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            loop_family: LoopFamily::Standard,
            omega: 1.0,
            grid: GridSpec::default(),
            tau: None,
            lambda_sq: None,
            gamma0: DEFAULT_GAMMA0,
            noise_file: None,
            states: DEFAULT_STATES,
            steps: DEFAULT_STEPS,
            out: PathBuf::from("out"),
            calibrate_f2: None,
            free_intercept: false,
            table: None,
            window: Window::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            bail!("omega must be positive, got {}", self.omega);
        }
        if self.states < MIN_STATES {
            bail!("states must be at least {MIN_STATES}, got {}", self.states);
        }
        if self.steps == 0 {
            bail!("steps must be at least 1");
        }
        if !(self.gamma0.is_finite() && self.gamma0 >= 0.0) {
            bail!("gamma0 must be non-negative, got {}", self.gamma0);
        }
        if let Some(t) = self.tau {
            if !(t.is_finite() && t > 0.0) {
                bail!("tau must be positive, got {t}");
            }
        }
        if let Some(list) = &self.lambda_sq {
            if let Some(l) = list.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
                bail!("lambda^2 values must be non-negative, got {l}");
            }
        }
        if let Some(f2) = self.calibrate_f2 {
            if !(f2.is_finite() && f2 > 0.0) {
                bail!("calibration target must be positive, got {f2}");
            }
            if self.noise_file.is_some() {
                bail!("calibration applies to the flat-rate model; drop noise_file");
            }
        }
        self.omega_tau_grid()?;
        self.window.validate()?;
        Ok(())
    }

    /// `Ωτ` values for sweeps.
    pub fn omega_tau_grid(&self) -> anyhow::Result<Vec<f64>> {
        match self.tau {
            Some(t) => Ok(vec![t]),
            None => Ok(self.grid.values().with_context(|| format!("grid {}", self.grid))?),
        }
    }

    /// Base noise model with `λ² = 0`.
    pub fn base_noise(&self) -> anyhow::Result<Noise> {
        let noise = match &self.noise_file {
            Some(path) => {
                let text =
                    std::fs::read_to_string(path).with_context(|| format!("reading noise file {}", path.display()))?;
                let n: Noise =
                    serde_json::from_str(&text).with_context(|| format!("parsing noise file {}", path.display()))?;
                n.with_lambda_sq(0.0)
            }
            None => Noise::high_temperature(0.0, self.gamma0),
        };
        noise.validate()?;
        Ok(noise)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g: GridSpec = "1:60:591".parse().unwrap();
        assert_eq!(g, GridSpec::default());
        assert_eq!(g.to_string(), "1:60:591");
        assert!("1:2".parse::<GridSpec>().is_err());
        assert!("a:2:3".parse::<GridSpec>().is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"omega": 1.0, "colour": 3}"#).is_err());
        let c: RunConfig = serde_json::from_str(r#"{"loop": "wedge:2", "states": 20}"#).unwrap();
        assert_eq!(c.loop_family, LoopFamily::Wedge(2));
        assert_eq!(c.steps, DEFAULT_STEPS);
    }

    #[test]
    fn validation() {
        let mut c = RunConfig::default();
        c.validate().unwrap();
        c.states = 3;
        assert!(c.validate().is_err());
        let c = RunConfig {
            grid: GridSpec { start: 5.0, stop: 1.0, points: 4 },
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
        let c = RunConfig {
            calibrate_f2: Some(6.34),
            noise_file: Some("n.json".into()),
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn resolved_config_round_trips() {
        let c = RunConfig {
            lambda_sq: Some(vec![0.0, 0.01]),
            tau: Some(18.0),
            ..RunConfig::default()
        };
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
