//! Run configuration shared by the command line and the suite.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dini::SamplingSchedule;
use crate::error::{Error, Result};
use crate::rng::DEFAULT_SEED;
use crate::subderiv::DirectionalProbe;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
    Plain,
}

/// Overrides for the step schedule of the radial and Dini quotients.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(rename = "K", alias = "steps", skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturbations: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub schedule: ScheduleOverrides,
    pub probe: ProbeOverrides,
    pub oracle_tol: f64,
    pub sampling_tol: f64,
    pub output: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: DEFAULT_SEED,
            schedule: ScheduleOverrides::default(),
            probe: ProbeOverrides::default(),
            oracle_tol: 1e-6,
            sampling_tol: 1e-3,
            output: OutputFormat::Json,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| Error::InvalidArgument(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        RunConfig::from_toml(&text)
    }

    pub fn schedule(&self) -> Result<SamplingSchedule> {
        let mut s = SamplingSchedule::default();
        let o = &self.schedule;
        if let Some(v) = o.t0 {
            s.t0 = v;
        }
        if let Some(v) = o.rho {
            s.rho = v;
        }
        if let Some(v) = o.steps {
            s.steps = v;
        }
        if let Some(v) = o.tail {
            s.tail = v;
        }
        s.validate()?;
        if s.tail > s.steps {
            return Err(Error::InvalidSchedule("tail longer than the schedule".into()));
        }
        Ok(s)
    }

    pub fn directional_probe(&self) -> Result<DirectionalProbe> {
        let mut p = DirectionalProbe { schedule: self.schedule()?, ..DirectionalProbe::default() };
        if let Some(a) = &self.probe.alphas {
            if a.is_empty() || a.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
                return Err(Error::InvalidArgument("alphas must be finite and nonnegative".into()));
            }
            p.alphas = a.clone();
        }
        if let Some(d) = &self.probe.perturbations {
            if d.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                return Err(Error::InvalidArgument("perturbations must be positive".into()));
            }
            p.dir_perturb = d.clone();
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_overrides() {
        let c = RunConfig::from_toml("seed = 7\n[schedule]\nK = 30\nrho = 0.25\n[probe]\nalphas = [0.0, 1.0]\n").unwrap();
        assert_eq!(c.seed, 7);
        let s = c.schedule().unwrap();
        assert_eq!((s.steps, s.rho), (30, 0.25));
        assert_eq!(c.directional_probe().unwrap().alphas, vec![0.0, 1.0]);
        assert!(RunConfig::from_toml("bogus = 1").is_err());
        assert!(RunConfig::from_toml("[schedule]\nrho = 2.0").unwrap().schedule().is_err());
    }
}
