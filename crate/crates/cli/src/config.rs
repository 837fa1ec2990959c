use std::path::{Path, PathBuf};
use std::sync::Arc;

use hodge_core::oracle::data::DataSpec;
use hodge_core::oracle::OracleConfig;
use hodge_core::solvers::ProblemKind;
use hodge_core::strip::{NormalRule, StripGrid};
use serde::{Deserialize, Serialize};

/// Invalid configuration; maps to exit code 3.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid config: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DataSource {
    Builtin(DataSpec),
    /// Field dump of the interior datum, plus an optional boundary dump for
    /// scalar problems. Relative paths resolve against the config file.
    Dump {
        dump: PathBuf,
        #[serde(default)]
        boundary: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    #[serde(default)]
    pub degree: usize,
    /// Scalar problem with boundary data (degree 0 only). Absent: the Hodge
    /// problem on `degree`-forms with zero boundary data.
    #[serde(default)]
    pub kind: Option<ProblemKind>,
    pub data: DataSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub zero_mode: f64,
    pub residual: f64,
    /// Boundary-condition mismatch relative to `‖φ‖₂`.
    pub bc: f64,
    pub adjoint: f64,
    pub order: f64,
    pub manufactured: f64,
    /// Upper bound for the estimate-ratio ensemble maximum, if any.
    pub ratio_cap: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            zero_mode: 1e-8,
            residual: 1e-6,
            bc: 1e-6,
            adjoint: 5e-5,
            order: 1.9,
            manufactured: 1e-6,
            ratio_cap: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOptions {
    /// Random cases for the adjoint suite.
    pub cases: usize,
    /// Instances for the estimate suite.
    pub instances: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            cases: 20,
            instances: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: StripGrid,
    pub problem: Problem,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_rule")]
    pub quadrature: NormalRule,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub verify: VerifyOptions,
    /// Output directory; `--out` overrides it.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_rule() -> NormalRule {
    NormalRule::Gregory
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|e| ConfigError(e.to_string()))?;
        if let DataSource::Dump { dump, boundary } = &mut cfg.problem.data {
            let base = path.parent().unwrap_or(Path::new("."));
            *dump = base.join(&*dump);
            if let Some(b) = boundary {
                *b = base.join(&*b);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.grid.validate().map_err(|e| ConfigError(e.to_string()))?;
        if self.problem.degree > self.grid.dim + 1 {
            return Err(ConfigError(format!(
                "degree {} exceeds N + 1 = {}",
                self.problem.degree,
                self.grid.dim + 1
            )));
        }
        if self.problem.kind.is_some() && self.problem.degree != 0 {
            return Err(ConfigError("a scalar problem kind requires degree 0".into()));
        }
        self.oracle.validate().map_err(|e| ConfigError(e.to_string()))?;
        let t = &self.tolerances;
        for (name, v) in [
            ("zero_mode", t.zero_mode),
            ("residual", t.residual),
            ("bc", t.bc),
            ("adjoint", t.adjoint),
            ("manufactured", t.manufactured),
        ] {
            if !(v >= 0.0) {
                return Err(ConfigError(format!("tolerance {name} must be nonnegative")));
            }
        }
        Ok(())
    }

    /// Configuration for suites that need no problem data.
    pub fn symbols_default() -> Self {
        RunConfig {
            grid: StripGrid {
                dim: 1,
                period: 2.0 * std::f64::consts::PI,
                points: 8,
                depth: 12.0,
                nodes: 129,
            },
            problem: Problem {
                degree: 0,
                kind: None,
                data: DataSource::Builtin(DataSpec::Zero),
            },
            tolerances: Tolerances::default(),
            seed: 0,
            quadrature: default_rule(),
            oracle: OracleConfig::default(),
            verify: VerifyOptions::default(),
            output: None,
        }
    }

    pub fn grid(&self) -> Arc<StripGrid> {
        Arc::new(self.grid.clone())
    }
}
