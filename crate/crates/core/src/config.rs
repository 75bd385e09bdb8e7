//! Run configuration: the model plus per-subcommand parameters, as TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::Policy;
use crate::error::{Error, Result};
use crate::fluid::SweepParams;
use crate::primitives::{DistributionSpec, ModelConfig};
use crate::verify::MatrixParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub simulate: SimulateParams,
    #[serde(default)]
    pub verify: MatrixParams,
    #[serde(default)]
    pub sweep: SweepParams,
    #[serde(default)]
    pub output: OutputParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateParams {
    pub policy: Policy,
    pub r: f64,
    pub replicate: u64,
}

impl Default for SimulateParams {
    fn default() -> Self {
        SimulateParams { policy: Policy::Srpt, r: 1.0, replicate: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputParams {
    pub dir: PathBuf,
    /// Record wall-clock times in the sweep table. Disable for byte-identical
    /// reruns.
    pub timings: bool,
    /// 0 = quiet, 1 = summary lines.
    pub verbosity: u8,
}

impl Default for OutputParams {
    fn default() -> Self {
        OutputParams { dir: PathBuf::from("out"), timings: true, verbosity: 1 }
    }
}

impl RunConfig {
    /// M/M/1 with arrival rate 1 and mean service 0.5, one initial job per
    /// unit of scale with sizes uniform on [0.5, 1.5], horizon 10.
    pub fn canonical() -> Self {
        RunConfig {
            model: ModelConfig {
                interarrival: DistributionSpec::Exponential { rate: 1.0 },
                service: DistributionSpec::Exponential { rate: 2.0 },
                initial_density: 1.0,
                initial_size: DistributionSpec::Uniform { lo: 0.5, hi: 1.5 },
                horizon: 10.0,
                base_seed: 2024,
                first_gap: None,
            },
            simulate: SimulateParams::default(),
            verify: MatrixParams::default(),
            sweep: SweepParams { h: Some(0.02), ..SweepParams::default() },
            output: OutputParams::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.verify.validate()?;
        self.sweep.validate()?;
        if !(self.simulate.r.is_finite() && self.simulate.r >= 1.0) {
            return Err(Error::InvalidConfig(format!("simulate.r must be >= 1, got {}", self.simulate.r)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_round_trips() {
        let cfg = RunConfig::canonical();
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn discrete_law_round_trips() {
        let mut cfg = RunConfig::canonical();
        cfg.model.service = DistributionSpec::DiscreteAtoms { atoms: vec![(0.25, 0.5), (0.75, 0.5)] };
        cfg.model.first_gap = Some(DistributionSpec::Deterministic { value: 0.5 });
        cfg.sweep.delta = Some(0.1);
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn shipped_config_is_canonical() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/canonical.toml");
        let mut cfg = RunConfig::load(&path).unwrap();
        assert_eq!(cfg.sweep.plot_cells.len(), 1);
        cfg.sweep.plot_cells.clear();
        assert_eq!(cfg, RunConfig::canonical());
    }

    #[test]
    fn minimal_document() {
        let text = r#"
            [model]
            interarrival = { kind = "exponential", rate = 1.0 }
            service = { kind = "deterministic", value = 0.5 }
            initial_size = { kind = "uniform", lo = 0.5, hi = 1.5 }
            initial_density = 0.0
            horizon = 5.0
            base_seed = 7
        "#;
        let cfg = RunConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.simulate, SimulateParams::default());
        assert_eq!(cfg.sweep.r_list, vec![10.0, 50.0, 250.0]);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = RunConfig::canonical().to_toml_string().unwrap();
        let bad = text.replace("[model]", "[model]\nhorizn = 3.0");
        assert!(matches!(RunConfig::from_toml_str(&bad), Err(Error::Parse(_))));
        let bad = format!("{text}\n[extra]\nx = 1\n");
        assert!(RunConfig::from_toml_str(&bad).is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        let mut cfg = RunConfig::canonical();
        cfg.model.service = DistributionSpec::Pareto { shape: 0.9, scale: 1.0 };
        let cfg = RunConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
        assert!(matches!(cfg.model.traffic_intensity(), Err(Error::InfiniteMean { .. })));
        let mut cfg = RunConfig::canonical();
        cfg.model.horizon = -1.0;
        assert!(RunConfig::from_toml_str(&cfg.to_toml_string().unwrap()).is_err());
    }
}
