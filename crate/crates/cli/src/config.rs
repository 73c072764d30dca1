use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::CliError;

/// Settings shared by every subcommand. Flags override the TOML file.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub subcommand: String,
    pub inputs: Vec<PathBuf>,
    pub order: Option<u32>,
    pub step: Option<usize>,
    pub rk4_step: f64,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub jobs: usize,
}

/// Keys accepted in `--config` files.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub order: Option<u32>,
    pub step: Option<usize>,
    pub tol: Option<f64>,
    pub rk4_step: Option<f64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Parse {
            path: path.display().to_string(),
            location: e
                .span()
                .map(|s| {
                    let line = text[..s.start].matches('\n').count() + 1;
                    format!("line {line}")
                })
                .unwrap_or_default(),
            message: e.message().to_string(),
        })
    }
}

/// Flag values as parsed, before merging with a file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub order: Option<u32>,
    pub step: Option<usize>,
    pub tol: Option<f64>,
    pub rk4_step: Option<f64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub config: Option<PathBuf>,
}

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_RK4_STEP: f64 = 1e-3;

impl RunConfig {
    pub fn resolve(subcommand: &str, inputs: Vec<PathBuf>, flags: &Overrides) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let jobs = flags
            .jobs
            .or(file.jobs)
            .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
        let cfg = RunConfig {
            subcommand: subcommand.to_string(),
            inputs,
            order: flags.order.or(file.order),
            step: flags.step.or(file.step),
            rk4_step: flags.rk4_step.or(file.rk4_step).unwrap_or(DEFAULT_RK4_STEP),
            tol: flags.tol.or(file.tol).unwrap_or(DEFAULT_TOL),
            out: flags.out.clone().or(file.out),
            jobs,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.tol > 0.0) {
            return Err(CliError::Usage(format!("tolerance must be positive, got {}", self.tol)));
        }
        if !(self.rk4_step > 0.0) {
            return Err(CliError::Usage(format!("RK4 step must be positive, got {}", self.rk4_step)));
        }
        if self.jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        if let (Some(n), Some(s)) = (self.order, self.step) {
            if (n as usize) < s {
                return Err(CliError::Usage(format!("order {n} is below the step {s}")));
            }
        }
        Ok(())
    }

    /// Order check once the step is known from the frame.
    pub fn check_order(&self, step: u32) -> Result<(), CliError> {
        match self.order {
            Some(n) if n < step => Err(CliError::Usage(format!("order {n} is below the step {step}"))),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.toml");
        std::fs::write(&p, "tol = 1e-4\nrk4-step = 0.01\njobs = 3\norder = 6\n").unwrap();
        let flags = Overrides {
            tol: Some(1e-8),
            config: Some(p),
            ..Default::default()
        };
        let c = RunConfig::resolve("verify", vec![], &flags).unwrap();
        assert_eq!(c.tol, 1e-8);
        assert_eq!(c.rk4_step, 0.01);
        assert_eq!(c.jobs, 3);
        assert_eq!(c.order, Some(6));
    }

    #[test]
    fn rejects_bad_values() {
        let flags = Overrides {
            tol: Some(0.0),
            ..Default::default()
        };
        assert!(matches!(RunConfig::resolve("verify", vec![], &flags), Err(CliError::Usage(_))));
        let flags = Overrides {
            order: Some(2),
            step: Some(3),
            ..Default::default()
        };
        assert!(RunConfig::resolve("verify", vec![], &flags).is_err());
    }

    #[test]
    fn unknown_keys_are_parse_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.toml");
        std::fs::write(&p, "tol = 1e-4\nspeed = 3\n").unwrap();
        let flags = Overrides {
            config: Some(p),
            ..Default::default()
        };
        match RunConfig::resolve("verify", vec![], &flags) {
            Err(CliError::Parse { location, .. }) => assert_eq!(location, "line 2"),
            other => panic!("{other:?}"),
        }
    }
}
