use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sle_lab_core::lattice::{LatticeDomain, LatticePoint};
use sle_lab_core::lerw::DEFAULT_ENUMERATION_BUDGET;

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 1;

/// Configuration file contents. Command-line flags override these fields.
///
/// ```toml
/// experiment = "fomin-exact"
/// seed = 7
/// out = "runs/fomin"
///
/// [params]
/// domain = "domains/square5.txt"
/// ```
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicas: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default)]
    pub params: toml::Table,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Io(e.to_string()))
    }
}

/// A fully resolved run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub experiment: String,
    pub seed: u64,
    pub replicas: Option<usize>,
    pub out: Option<PathBuf>,
    pub budget: usize,
    pub params: toml::Table,
    /// Directory against which relative domain paths resolve.
    pub base_dir: PathBuf,
}

impl RunSpec {
    pub fn resolve(config: ExperimentConfig, base_dir: PathBuf) -> Result<Self, CliError> {
        let experiment = config
            .experiment
            .ok_or_else(|| CliError::Config("no experiment given".into()))?;
        if crate::catalog::find(&experiment).is_none() {
            return Err(CliError::Config(format!(
                "unknown experiment {experiment:?}; `sle-lab list` shows the catalog"
            )));
        }
        if config.replicas == Some(0) {
            return Err(CliError::Config("replicas must be positive".into()));
        }
        Ok(Self {
            experiment,
            seed: config.seed.unwrap_or(DEFAULT_SEED),
            replicas: config.replicas,
            out: config.out,
            budget: config.budget.unwrap_or(DEFAULT_ENUMERATION_BUDGET),
            params: config.params,
            base_dir,
        })
    }

    pub fn to_config(&self) -> ExperimentConfig {
        ExperimentConfig {
            experiment: Some(self.experiment.clone()),
            seed: Some(self.seed),
            replicas: self.replicas,
            out: self.out.clone(),
            budget: Some(self.budget),
            params: self.params.clone(),
        }
    }

    pub fn replicas_or(&self, default: usize) -> usize {
        self.replicas.unwrap_or(default)
    }

    /// Parses the parameter table into `P`, rejecting unknown keys.
    pub fn params<P: DeserializeOwned>(&self) -> Result<P, CliError> {
        toml::Value::Table(self.params.clone())
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(format!("[params] of {}: {}", self.experiment, e.message())))
    }

    pub fn domain(&self, d: &DomainParam) -> Result<LatticeDomain, CliError> {
        d.load(&self.base_dir)
    }

    pub fn default_out(&self) -> PathBuf {
        PathBuf::from("runs").join(format!("{}-{}", self.experiment, self.seed))
    }
}

/// A lattice domain given by a point file, a rectangle `[x0, x1, y0, y1]`,
/// or an explicit point list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainParam {
    File(PathBuf),
    Rectangle([i64; 4]),
    Points(Vec<[i64; 2]>),
}

impl DomainParam {
    pub fn load(&self, base: &Path) -> Result<LatticeDomain, CliError> {
        let domain = match self {
            DomainParam::File(path) => {
                let full = if path.is_absolute() { path.clone() } else { base.join(path) };
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| CliError::Config(format!("domain file {}: {e}", full.display())))?;
                LatticeDomain::from_text(&text).map_err(|e| CliError::Config(format!("domain file {}: {e}", full.display())))?
            }
            DomainParam::Rectangle([x0, x1, y0, y1]) => {
                if x0 > x1 || y0 > y1 {
                    return Err(CliError::Config(format!("empty rectangle {:?}", [x0, x1, y0, y1])));
                }
                LatticeDomain::rectangle(*x0, *x1, *y0, *y1)
            }
            DomainParam::Points(ps) => LatticeDomain::new(ps.iter().map(|&[x, y]| LatticePoint::new(x, y))),
        };
        if domain.is_empty() {
            return Err(CliError::Config("domain has no interior points".into()));
        }
        Ok(domain)
    }
}

pub fn point([x, y]: [i64; 2]) -> LatticePoint {
    LatticePoint::new(x, y)
}
