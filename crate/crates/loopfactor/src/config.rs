use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};

/// Environment variable naming a TOML config file.
pub const CONFIG_ENV: &str = "LOOPFACTOR_CONFIG";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub group_n: usize,
    pub cutoff: i64,
    pub grid: usize,
    pub tol_alg: f64,
    pub tol_fd: f64,
    pub tol_trunc: f64,
    pub seed: u64,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { group_n: 2, cutoff: 6, grid: 256, tol_alg: 1e-10, tol_fd: 1e-6, tol_trunc: 1e-10, seed: 20240601, out: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Command-line overrides; `None` keeps the file or default value.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub group_n: Option<usize>,
    pub cutoff: Option<i64>,
    pub grid: Option<usize>,
    pub tol_alg: Option<f64>,
    pub tol_fd: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }

    /// Defaults, then the file named by `LOOPFACTOR_CONFIG` (if set), then flags.
    pub fn resolve(ov: &Overrides) -> Result<Self, ConfigError> {
        let mut cfg = match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => Self::from_file(Path::new(&p))?,
            _ => RunConfig::default(),
        };
        if let Some(v) = ov.group_n {
            cfg.group_n = v;
        }
        if let Some(v) = ov.cutoff {
            cfg.cutoff = v;
        }
        if let Some(v) = ov.grid {
            cfg.grid = v;
        }
        if let Some(v) = ov.tol_alg {
            cfg.tol_alg = v;
        }
        if let Some(v) = ov.tol_fd {
            cfg.tol_fd = v;
        }
        if let Some(v) = ov.seed {
            cfg.seed = v;
        }
        if ov.out.is_some() {
            cfg.out = ov.out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Tolerances may be zero (every check then fails) but not negative or NaN.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.group_n < 2 {
            return Err(ConfigError(format!("group n must be >= 2, got {}", self.group_n)));
        }
        if self.cutoff < 1 {
            return Err(ConfigError(format!("cutoff must be >= 1, got {}", self.cutoff)));
        }
        let min_grid = 4 * self.cutoff as usize + 4;
        if self.grid < min_grid {
            return Err(ConfigError(format!("grid {} below 4N+4 = {min_grid}", self.grid)));
        }
        if !self.grid.is_power_of_two() {
            return Err(ConfigError(format!("grid {} is not a power of two", self.grid)));
        }
        for (name, t) in [("tol-alg", self.tol_alg), ("tol-fd", self.tol_fd), ("tol-trunc", self.tol_trunc)] {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(ConfigError(format!("{name} must be a finite non-negative number, got {t}")));
            }
        }
        Ok(())
    }
}
