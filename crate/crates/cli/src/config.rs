//! Run configuration: one TOML file, unknown keys rejected, every default
//! written back out in the echo.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use nlrd6_core::solver::{DEFAULT_INTERVALS, DEFAULT_MAX_ITER, DEFAULT_RELATIVE_TOL};
use nlrd6_core::certificate::DEFAULT_SAFETY;
use nlrd6_core::problem::DEFAULT_SUPPORT_EPS;

#[derive(Debug)]
pub enum ConfigError {
    Io(PathBuf, std::io::Error),
    /// Malformed file, unknown key or wrong type.
    Parse(String),
    /// A value outside the range its consumer accepts.
    Constraint { key: &'static str, message: String },
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Io(p, e) => write!(f, "cannot read {}: {e}", p.display()),
            ConfigError::Parse(m) => write!(f, "invalid configuration: {m}"),
            ConfigError::Constraint { key, message } => write!(f, "{key}: {message}"),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Half length of the box `[-L, L)`.
    #[serde(rename = "L")]
    pub half_length: f64,
    #[serde(rename = "N")]
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelConfig {
    Gaussian { amplitude: f64, width: f64 },
    Sech { amplitude: f64, width: f64 },
    Bandlimited { amplitude: f64, cutoff: f64 },
    /// Two-column CSV `x,G(x)` on a uniform grid.
    Tabulated { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReactionConfig {
    LinearPlusSource { kappa: f64 },
    Saturating { l: f64 },
    LogisticClip { l: f64, u_max: f64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceConfig {
    #[default]
    Zero,
    Gaussian {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: f64,
    },
    Bandlimited { amplitude: f64, lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearityConfig {
    pub reaction: ReactionConfig,
    #[serde(default)]
    pub source: SourceConfig,
    /// Declared growth constant `k`; analytic value when omitted.
    pub growth: Option<f64>,
    /// Declared Lipschitz constant `l`; analytic value when omitted.
    pub lipschitz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    Gaussian {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: f64,
    },
    /// `amplitude * cos(p x)`.
    Mode { amplitude: f64, p: f64 },
    Zero,
    /// CSV rows `x,u` at the grid points.
    Csv { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub horizon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TolPolicy {
    Relative,
    Absolute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Time intervals per window.
    pub frames: usize,
    pub tol_fix: f64,
    pub tol_policy: TolPolicy,
    pub max_iter: usize,
    pub safety: f64,
    /// Reference integrator substeps per window; `4 * frames` when omitted.
    pub oracle_substeps: Option<usize>,
    pub lipschitz_trials: usize,
    pub seed: u64,
    /// Repeat the run on a doubled grid and gate on the difference.
    pub refine: bool,
    pub eps_supp: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            frames: DEFAULT_INTERVALS,
            tol_fix: DEFAULT_RELATIVE_TOL,
            tol_policy: TolPolicy::Relative,
            max_iter: DEFAULT_MAX_ITER,
            safety: DEFAULT_SAFETY,
            oracle_substeps: None,
            lipschitz_trials: 4096,
            seed: 0,
            refine: false,
            eps_supp: DEFAULT_SUPPORT_EPS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Frame indices into the stitched trajectory; negative counts from the end.
    pub snapshot_frames: Vec<i64>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            snapshot_frames: vec![0, -1],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlagsConfig {
    pub run_oracle: bool,
    pub override_certificate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub model: ModelConfig,
    pub kernel: KernelConfig,
    pub nonlinearity: NonlinearityConfig,
    pub initial: InitialConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub flags: FlagsConfig,
}

fn constraint(key: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Constraint {
        key,
        message: message.into(),
    }
}

fn positive(key: &'static str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(constraint(key, format!("must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Relative paths inside the file are taken relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let KernelConfig::Tabulated { path } = &mut cfg.kernel {
            rebase(path);
        }
        if let InitialConfig::Csv { path } = &mut cfg.initial {
            rebase(path);
        }
        Ok(cfg)
    }

    /// Checks that only need the file itself; model-level assumptions are
    /// checked again by the library when the problem is built.
    pub fn validate(&self) -> Result<(), ConfigError> {
        positive("grid.L", self.grid.half_length)?;
        if self.grid.points < 4 || self.grid.points % 2 != 0 {
            return Err(constraint("grid.N", format!("must be even and at least 4, got {}", self.grid.points)));
        }
        if !(self.model.a >= 0.0) || !self.model.a.is_finite() {
            return Err(constraint("model.a", format!("a >= 0 required, got {}", self.model.a)));
        }
        if !self.model.b.is_finite() {
            return Err(constraint("model.b", format!("must be a finite real number, got {}", self.model.b)));
        }
        positive("time.horizon", self.time.horizon)?;
        if let Some(k) = self.nonlinearity.growth {
            positive("nonlinearity.growth", k)?;
        }
        if let Some(l) = self.nonlinearity.lipschitz {
            positive("nonlinearity.lipschitz", l)?;
        }
        let s = &self.solver;
        if s.frames == 0 {
            return Err(constraint("solver.frames", "must be at least 1"));
        }
        positive("solver.tol_fix", s.tol_fix)?;
        if s.max_iter == 0 {
            return Err(constraint("solver.max_iter", "must be at least 1"));
        }
        if !(s.safety > 0.0 && s.safety < 1.0) {
            return Err(constraint("solver.safety", format!("must lie in (0, 1), got {}", s.safety)));
        }
        if let Some(m) = s.oracle_substeps {
            if m < 4 * s.frames || m % s.frames != 0 {
                return Err(constraint(
                    "solver.oracle_substeps",
                    format!("must be a multiple of frames and at least 4 * frames, got {m}"),
                ));
            }
        }
        if s.lipschitz_trials == 0 {
            return Err(constraint("solver.lipschitz_trials", "must be at least 1"));
        }
        positive("solver.eps_supp", s.eps_supp)?;
        Ok(())
    }

    pub fn oracle_substeps(&self) -> usize {
        self.solver.oracle_substeps.unwrap_or(4 * self.solver.frames)
    }

    /// Echo with every default and derived constant filled in.
    pub fn echo(&self, growth: Option<f64>, lipschitz: Option<f64>) -> String {
        let mut full = self.clone();
        full.solver.oracle_substeps = Some(self.oracle_substeps());
        full.nonlinearity.growth = self.nonlinearity.growth.or(growth);
        full.nonlinearity.lipschitz = self.nonlinearity.lipschitz.or(lipschitz);
        toml::to_string(&full).expect("config serializes")
    }
}
