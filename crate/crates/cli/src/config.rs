use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use itinera_core::datagen::GenParams;
use itinera_core::milp::ModelParams;
use itinera_core::nl::TranslatorBackend;
use itinera_core::solver::SolverConfig;
use itinera_service::ServiceConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServeSection {
    pub bind: String,
    pub port: u16,
    pub dataset_path: Option<PathBuf>,
    pub session_log: Option<PathBuf>,
    pub parallel_modes: bool,
}

impl Default for ServeSection {
    fn default() -> Self {
        let d = ServiceConfig::default();
        ServeSection {
            bind: d.bind,
            port: d.port,
            dataset_path: None,
            session_log: None,
            parallel_modes: d.parallel_modes,
        }
    }
}

/// Settings shared by every subcommand. Defaults, then the config file,
/// then command-line flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlobalConfig {
    /// Seeds generation and corruption; overrides `gen.rng_seed`.
    pub seed: Option<u64>,
    pub model: ModelParams,
    pub solver: SolverConfig,
    pub gen: GenParams,
    pub translator: TranslatorBackend,
    pub serve: ServeSection,
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

impl GlobalConfig {
    pub fn from_toml(text: &str, origin: &str) -> Result<GlobalConfig, ConfigError> {
        let de = toml::Deserializer::parse(text)
            .map_err(|e| ConfigError(format!("{origin}: {}", e.to_string().trim_end())))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner().to_string();
            ConfigError(format!("{origin}: {path}: {}", inner.trim_end()))
        })
    }

    pub fn load(path: &Path) -> Result<GlobalConfig, ConfigError> {
        let shown = path.display().to_string();
        let text =
            std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{shown}: {e}")))?;
        GlobalConfig::from_toml(&text, &shown)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.model
            .validate()
            .map_err(|e| ConfigError(format!("model.{e}")))?;
        if self.solver.time_limit_ms == 0 {
            return Err(ConfigError("solver.time_limit_ms: must be positive".into()));
        }
        self.gen
            .validate()
            .map_err(|e| ConfigError(format!("gen.{e}")))?;
        self.translator
            .validate()
            .map_err(|e| ConfigError(format!("translator: {e}")))?;
        Ok(())
    }

    pub fn gen_params(&self) -> GenParams {
        let mut g = self.gen.clone();
        if let Some(s) = self.seed {
            g.rng_seed = s;
        }
        g
    }

    pub fn service_config(&self) -> ServiceConfig {
        ServiceConfig {
            bind: self.serve.bind.clone(),
            port: self.serve.port,
            dataset_path: self.serve.dataset_path.clone().unwrap_or_default(),
            session_log: self.serve.session_log.clone(),
            parallel_modes: self.serve.parallel_modes,
            translator: self.translator.clone(),
            solver: self.solver.clone(),
            model: self.model.clone(),
        }
    }
}
