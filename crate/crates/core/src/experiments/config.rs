//! TOML experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::PhysicalParams;

/// Named initial data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// `ξ₀ = 0`, `P_τv₀ = 0`: only the solenoidal part of the ill-prepared data.
    WellPrepared,
    /// Nonzero `ξ₀` and `P_τv₀`.
    IllPrepared,
    /// Seeded random smooth data with both acoustic and solenoidal parts.
    Random,
}

impl std::str::FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "well" | "well_prepared" => Ok(Preset::WellPrepared),
            "ill" | "ill_prepared" => Ok(Preset::IllPrepared),
            "random" => Ok(Preset::Random),
            _ => Err(Error::Config(format!(
                "unknown preset {s:?}; expected well, ill or random"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialData {
    pub preset: Preset,
    #[serde(default = "one")]
    pub amplitude: f64,
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData {
            preset: Preset::IllPrepared,
            amplitude: 1.0,
        }
    }
}

/// Step size and sampling controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    /// Advective CFL number.
    pub cfl: f64,
    /// Hard cap on every step.
    pub dt_max: f64,
    /// CPE steps are also capped at `eps_dt_factor·ε`.
    pub eps_dt_factor: f64,
    /// Number of output intervals over `[0, t_end]`.
    pub samples: usize,
    /// Worker threads for the ε sweep; 0 uses all cores.
    pub threads: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            cfl: 0.5,
            dt_max: 2e-3,
            eps_dt_factor: 0.05,
            samples: 200,
            threads: 0,
        }
    }
}

fn one() -> f64 {
    1.0
}

fn default_params() -> PhysicalParams {
    PhysicalParams::standard(0.1).expect("standard parameters")
}

fn default_grid() -> Grid {
    Grid::new(32, 32, 16).expect("default grid")
}

fn default_t_end() -> f64 {
    0.5
}

fn default_eps_list() -> Vec<f64> {
    vec![0.1, 0.05, 0.025, 0.0125]
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `eps` here is replaced by each entry of `eps_list`.
    #[serde(default = "default_params")]
    pub params: PhysicalParams,
    #[serde(default = "default_grid")]
    pub grid: Grid,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_eps_list")]
    pub eps_list: Vec<f64>,
    #[serde(default)]
    pub initial_data: InitialData,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// A snapshot every this many output samples; 0 disables snapshots.
    #[serde(default)]
    pub snapshot_cadence: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub numerics: Numerics,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            params: default_params(),
            grid: default_grid(),
            t_end: default_t_end(),
            eps_list: default_eps_list(),
            initial_data: InitialData::default(),
            output_dir: default_output_dir(),
            snapshot_cadence: 0,
            seed: 0,
            numerics: Numerics::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.eps_list.is_empty() {
            return Err(Error::Config("eps_list is empty".into()));
        }
        if let Some(e) = self.eps_list.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            return Err(Error::Config(format!(
                "every eps must lie in (0, 1), got {e}"
            )));
        }
        if self.eps_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config(format!(
                "eps_list must be strictly decreasing, got {:?}",
                self.eps_list
            )));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if !(self.initial_data.amplitude.is_finite()) {
            return Err(Error::Config("initial amplitude must be finite".into()));
        }
        let n = &self.numerics;
        if !(n.cfl > 0.0 && n.dt_max > 0.0 && n.eps_dt_factor > 0.0) {
            return Err(Error::Config(
                "cfl, dt_max and eps_dt_factor must be positive".into(),
            ));
        }
        if n.samples == 0 {
            return Err(Error::Config("samples must be at least 1".into()));
        }
        Ok(())
    }

    pub fn params_for(&self, eps: f64) -> Result<PhysicalParams> {
        self.params.with_eps(eps)
    }

    /// Output times `t_j = j·t_end/samples`, `j = 0..=samples`.
    pub fn sample_times(&self) -> Vec<f64> {
        let n = self.numerics.samples;
        (0..=n)
            .map(|j| {
                if j == n {
                    self.t_end
                } else {
                    self.t_end * j as f64 / n as f64
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        let back = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let c = ExperimentConfig::from_toml(
            "t_end = 0.1\neps_list = [0.2]\n[initial_data]\npreset = \"well_prepared\"\n",
        )
        .unwrap();
        assert_eq!(c.t_end, 0.1);
        assert_eq!(c.initial_data.preset, Preset::WellPrepared);
        assert_eq!(c.initial_data.amplitude, 1.0);
        assert_eq!(c.grid, default_grid());
    }

    #[test]
    fn rejects_bad_eps_lists() {
        assert!(ExperimentConfig::from_toml("eps_list = [0.1, 0.1]").is_err());
        assert!(ExperimentConfig::from_toml("eps_list = [0.05, 0.1]").is_err());
        assert!(ExperimentConfig::from_toml("eps_list = [1.5]").is_err());
        assert!(ExperimentConfig::from_toml("eps_list = []").is_err());
        assert!(ExperimentConfig::from_toml("bogus = 1").is_err());
    }

    #[test]
    fn sample_times_end_exactly() {
        let mut c = ExperimentConfig::default();
        c.t_end = 0.3;
        c.numerics.samples = 7;
        let t = c.sample_times();
        assert_eq!(t.len(), 8);
        assert_eq!(t[0], 0.0);
        assert_eq!(*t.last().unwrap(), 0.3);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn preset_names() {
        assert_eq!("ill".parse::<Preset>().unwrap(), Preset::IllPrepared);
        assert_eq!(
            "well_prepared".parse::<Preset>().unwrap(),
            Preset::WellPrepared
        );
        assert!("neither".parse::<Preset>().is_err());
    }
}
