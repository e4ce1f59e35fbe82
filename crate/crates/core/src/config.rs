//! Run configuration: a strict JSON document naming a profile, a command and
//! the grids it scans.

use crate::geometry::ProfileDoc;
use crate::kernel::{Band, KernelKind};
use crate::{Error, Result};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Describe,
    Potential,
    Jost,
    Coeffs,
    ValidateLow,
    ValidateHigh,
    Kernel,
    Decay,
    Statphase,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Describe,
        Command::Potential,
        Command::Jost,
        Command::Coeffs,
        Command::ValidateLow,
        Command::ValidateHigh,
        Command::Kernel,
        Command::Decay,
        Command::Statphase,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Describe => "describe",
            Command::Potential => "potential",
            Command::Jost => "jost",
            Command::Coeffs => "coeffs",
            Command::ValidateLow => "validate-low",
            Command::ValidateHigh => "validate-high",
            Command::Kernel => "kernel",
            Command::Decay => "decay",
            Command::Statphase => "statphase",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Command::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown command '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl Grid {
    pub fn new(min: f64, max: f64, count: usize, scale: Scale) -> Result<Self> {
        let g = Grid { min, max, count, scale };
        g.check("grid")?;
        Ok(g)
    }

    pub fn check(&self, name: &str) -> Result<()> {
        if self.count == 0 {
            return Err(Error::Config(format!("{name}: grid must be nonempty")));
        }
        if !(self.min.is_finite() && self.max.is_finite()) || !(self.min < self.max) {
            return Err(Error::Config(format!("{name}: need min < max, got [{}, {}]", self.min, self.max)));
        }
        if self.scale == Scale::Log && !(self.min > 0.0) {
            return Err(Error::Config(format!("{name}: log-scale grid needs min > 0, got {}", self.min)));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        if n == 1 {
            return vec![self.min];
        }
        (0..n)
            .map(|k| {
                let s = k as f64 / (n - 1) as f64;
                let v = match self.scale {
                    Scale::Linear => self.min + (self.max - self.min) * s,
                    Scale::Log => self.min * (self.max / self.min).powf(s),
                };
                if k == n - 1 {
                    self.max
                } else {
                    v
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// absolute target of the λ-quadrature in kernel evaluations
    pub kernel_tol: Option<f64>,
    /// local error target of the Magnus propagator
    pub magnus_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub profile: ProfileDoc,
    #[serde(default)]
    pub command: Option<Command>,
    #[serde(default)]
    pub lambda: Option<Grid>,
    #[serde(default)]
    pub xi: Option<Grid>,
    #[serde(default)]
    pub xi_prime: Option<Grid>,
    #[serde(default)]
    pub t: Option<Grid>,
    #[serde(default)]
    pub kind: Option<KernelKind>,
    #[serde(default)]
    pub band: Option<Band>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<()> {
        for (name, g) in [("lambda", &self.lambda), ("xi", &self.xi), ("xi_prime", &self.xi_prime), ("t", &self.t)] {
            if let Some(g) = g {
                g.check(name)?;
            }
        }
        if let Some(g) = &self.lambda {
            if !(g.min > 0.0) {
                return Err(Error::Config("lambda: grid must be positive".into()));
            }
        }
        for (name, v) in [("kernel_tol", self.tolerances.kernel_tol), ("magnus_tol", self.tolerances.magnus_tol)] {
            if let Some(v) = v {
                if !(v > 0.0 && v < 1.0) {
                    return Err(Error::Config(format!("tolerances.{name} must lie in (0, 1), got {v}")));
                }
            }
        }
        Ok(())
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    RunConfig::from_json(&text).map_err(|e| match e {
        Error::Json(j) => Error::Config(format!("{}: {j}", path.display())),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document() {
        let c = RunConfig::from_json(r#"{"profile":{"kind":"cylinder"},"command":"describe"}"#).unwrap();
        assert_eq!(c.command, Some(Command::Describe));
        assert_eq!(c.profile.d, 1);
        assert!(c.lambda.is_none() && c.out.is_none());
    }

    #[test]
    fn log_grid_values() {
        let c = RunConfig::from_json(
            r#"{"profile":{"kind":"hyperboloid","params":{"a":1}},"command":"validate-low",
                "lambda":{"min":1e-6,"max":1e-3,"count":40,"scale":"log"}}"#,
        )
        .unwrap();
        let v = c.lambda.unwrap().values();
        assert_eq!(v.len(), 40);
        assert_eq!((v[0], v[39]), (1e-6, 1e-3));
        assert!((v[1] / v[0] - 1000f64.powf(1.0 / 39.0)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_documents() {
        for doc in [
            r#"{"profile":{"kind":"cylinder"},"xi":{"min":0,"max":1,"count":3,"scale":"log"}}"#,
            r#"{"profile":{"kind":"cylinder"},"xi":{"min":2,"max":1,"count":3}}"#,
            r#"{"profile":{"kind":"cylinder"},"xi":{"min":0,"max":1,"count":0}}"#,
            r#"{"profile":{"kind":"cylinder"},"comand":"describe"}"#,
            r#"{"profile":{"kind":"cylinder","parms":{}}}"#,
            r#"{"profile":{"kind":"cylinder"},"t":{"min":1,"max":2,"count":2,"step":1}}"#,
            r#"{"profile":{"kind":"cylinder"},"command":"explode"}"#,
        ] {
            assert!(RunConfig::from_json(doc).is_err(), "{doc}");
        }
    }
}
