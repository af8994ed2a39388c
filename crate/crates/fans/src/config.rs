//! TOML experiment configuration.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use fans_core::graphon::{FeatureSpec, GraphonSpec, Registry};
use fans_core::selection::DEFAULT_LAMBDA_GRID;
use serde::{Deserialize, Serialize};

use crate::error::{FansError, Result};

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "FANS_OUT_DIR";

fn one() -> usize {
    1
}

fn one_f() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("results")
}

fn default_grid() -> Vec<f64> {
    DEFAULT_LAMBDA_GRID.to_vec()
}

fn default_repeats() -> usize {
    10
}

fn default_fraction() -> f64 {
    0.10
}

fn default_threshold() -> f64 {
    0.03
}

fn default_eta() -> f64 {
    0.01
}

fn default_methods() -> Vec<MethodConfig> {
    vec![MethodConfig::Nbs { c0: 1.0 }, MethodConfig::Fans(FansSettings::default())]
}

/// Settings of the full FANS pipeline: screening, λ selection, fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FansSettings {
    #[serde(default = "one_f")]
    pub c0: f64,
    /// Fixed λ; cross-validation picks it from `grid` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default = "default_grid")]
    pub grid: Vec<f64>,
    #[serde(default = "default_repeats")]
    pub cv_repeats: usize,
    #[serde(default = "default_fraction")]
    pub cv_fraction: f64,
    /// Drop features whose Kendall τ falls below `screen_threshold` before fitting.
    #[serde(default = "yes")]
    pub screen: bool,
    #[serde(default = "default_threshold")]
    pub screen_threshold: f64,
    #[serde(default = "yes")]
    pub tie_correction: bool,
}

impl Default for FansSettings {
    fn default() -> Self {
        Self {
            c0: 1.0,
            lambda: None,
            grid: default_grid(),
            cv_repeats: default_repeats(),
            cv_fraction: default_fraction(),
            screen: true,
            screen_threshold: default_threshold(),
            tie_correction: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum MethodConfig {
    Nbs {
        #[serde(default = "one_f")]
        c0: f64,
    },
    Fans(FansSettings),
    Usvt {
        #[serde(default = "default_eta")]
        eta: f64,
    },
    Sas {
        /// Bin count; `⌈n / ⌊ln n⌋⌉` when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bins: Option<usize>,
    },
}

impl MethodConfig {
    pub fn name(&self) -> &'static str {
        match self {
            MethodConfig::Nbs { .. } => "nbs",
            MethodConfig::Fans(_) => "fans",
            MethodConfig::Usvt { .. } => "usvt",
            MethodConfig::Sas { .. } => "sas",
        }
    }

    /// Default settings for a method name.
    pub fn from_name(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "nbs" => Ok(MethodConfig::Nbs { c0: 1.0 }),
            "fans" => Ok(MethodConfig::Fans(FansSettings::default())),
            "usvt" => Ok(MethodConfig::Usvt { eta: default_eta() }),
            "sas" => Ok(MethodConfig::Sas { bins: None }),
            other => Err(FansError::Config(format!("unknown method '{other}' (expected nbs, fans, usvt or sas)"))),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(FansError::Config(format!("method {}: {m}", self.name())));
        match self {
            MethodConfig::Nbs { c0 } if !(*c0 > 0.0) => bad(format!("c0 = {c0} must be positive")),
            MethodConfig::Usvt { eta } if !(*eta > 0.0) => bad(format!("eta = {eta} must be positive")),
            MethodConfig::Sas { bins: Some(0) } => bad("bins must be at least 1".into()),
            MethodConfig::Fans(s) => {
                if !(s.c0 > 0.0) {
                    return bad(format!("c0 = {} must be positive", s.c0));
                }
                if let Some(l) = s.lambda.filter(|l| !(*l >= 0.0 && l.is_finite())) {
                    return bad(format!("lambda = {l} must be a finite value ≥ 0"));
                }
                if s.lambda.is_none() && (s.grid.is_empty() || s.grid.iter().any(|l| !(*l >= 0.0 && l.is_finite()))) {
                    return bad("grid must be a non-empty list of finite values ≥ 0".into());
                }
                if s.cv_repeats == 0 || !(s.cv_fraction > 0.0 && s.cv_fraction < 1.0) {
                    return bad("cv_repeats ≥ 1 and 0 < cv_fraction < 1 required".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Grids for the λ sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub lambdas: Vec<f64>,
    pub sigmas: Vec<f64>,
    #[serde(default = "one_f")]
    pub c0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    pub graphon: GraphonSpec,
    pub features: FeatureSpec,
    #[serde(default = "default_methods")]
    pub methods: Vec<MethodConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| FansError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| FansError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            FansError::Config(m) => FansError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration always serializes")
    }

    /// The graphon with data-dependent parameters fixed for this `n`.
    pub fn resolved_graphon(&self) -> GraphonSpec {
        self.graphon.resolve_for(self.n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(FansError::Config(format!("n = {} but at least 2 nodes are needed", self.n)));
        }
        if self.trials == 0 {
            return Err(FansError::Config("trials must be at least 1".into()));
        }
        let registry = Registry::default();
        self.resolved_graphon().validate(&registry)?;
        self.features.validate(&registry)?;
        if self.methods.is_empty() {
            return Err(FansError::Config("no methods configured".into()));
        }
        let mut seen = BTreeSet::new();
        for m in &self.methods {
            if !seen.insert(m.name()) {
                return Err(FansError::Config(format!("method '{}' listed twice", m.name())));
            }
            m.validate()?;
        }
        if let Some(s) = &self.sweep {
            if s.lambdas.is_empty() || s.sigmas.is_empty() {
                return Err(FansError::Config("sweep needs at least one λ and one σ".into()));
            }
            if s.lambdas.iter().chain(&s.sigmas).any(|v| !(*v >= 0.0 && v.is_finite())) {
                return Err(FansError::Config("sweep values must be finite and ≥ 0".into()));
            }
            if !(s.c0 > 0.0) {
                return Err(FansError::Config("sweep c0 must be positive".into()));
            }
        }
        Ok(())
    }

    /// Output directory after applying the environment override.
    pub fn effective_out_dir(&self) -> PathBuf {
        match std::env::var_os(OUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.out_dir.clone(),
        }
    }

    /// Comment lines embedding the resolved configuration and master seed.
    ///
    /// The output directory is left out so that identical runs written to
    /// different places produce identical files.
    pub fn header(&self) -> Vec<String> {
        let mut resolved = self.clone();
        resolved.graphon = self.resolved_graphon();
        let mut table = toml::Table::try_from(&resolved).expect("configuration always serializes");
        table.remove("out_dir");
        let text = toml::to_string(&table).expect("configuration always serializes");
        let mut lines = vec![format!("master_seed = {}", self.seed), "config:".to_string()];
        lines.extend(text.lines().filter(|l| !l.is_empty()).map(|l| format!("  {l}")));
        lines
    }
}
