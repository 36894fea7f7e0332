//! Run configuration: defaults, a TOML file, then command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use conley_core::cubical::{EngineConfig, DEFAULT_BUDGET};
use conley_core::flow::{IntegratorConfig, LorenzParams, Model};

/// Environment variable that overrides the output directory.
pub const OUTPUT_DIR_ENV: &str = "CONLEY_OUTPUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Lorenz,
    NormalForm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelKind,
    pub sigma: f64,
    pub b: f64,
    pub r: f64,
    pub normal_form: NormalFormConfig,
    pub depths: Vec<u32>,
    pub tau: f64,
    pub rk4_step: f64,
    pub bloat_factor: f64,
    pub bloat_floor: f64,
    /// Largest grid allowed, in cubes.
    pub budget: u64,
    /// Explore only the forward closure of the equilibrium cubes.
    pub reachable: bool,
    /// Tolerance of the adaptive integrator.
    pub integrator_tol: f64,
    /// Final bracket width of threshold searches.
    pub threshold_tol: f64,
    pub sweep: SweepConfig,
    pub output_dir: PathBuf,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalFormConfig {
    pub n: usize,
    pub k: usize,
    pub lambda: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub r_start: f64,
    pub r_end: f64,
    pub steps: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let e = EngineConfig::default();
        Self {
            model: ModelKind::Lorenz,
            sigma: LorenzParams::SIGMA,
            b: LorenzParams::B,
            r: 28.0,
            normal_form: NormalFormConfig::default(),
            depths: vec![7, 7, 7],
            tau: e.tau,
            rk4_step: e.rk4_step,
            bloat_factor: e.bloat_factor,
            bloat_floor: e.bloat_floor,
            budget: DEFAULT_BUDGET,
            reachable: false,
            integrator_tol: 1e-12,
            threshold_tol: 1e-3,
            sweep: SweepConfig::default(),
            output_dir: PathBuf::from("conley-out"),
            threads: 0,
            seed: 0,
        }
    }
}

impl Default for NormalFormConfig {
    fn default() -> Self {
        Self { n: 3, k: 2, lambda: 0.25 }
    }
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { r_start: 14.0, r_end: 15.0, steps: 5 }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid configuration: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let c: Self = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !pos(self.sigma) || !pos(self.b) || !self.r.is_finite() || self.r < 0.0 {
            return Err(bad("need sigma > 0, b > 0, r >= 0"));
        }
        if self.depths.is_empty() || self.depths.iter().any(|&d| d > 16) {
            return Err(bad("depths must be a non-empty list of values <= 16"));
        }
        self.engine().validate().map_err(|e| bad(e.to_string()))?;
        if !pos(self.integrator_tol) || !pos(self.threshold_tol) {
            return Err(bad("tolerances must be positive"));
        }
        if self.seed > i64::MAX as u64 || self.budget > i64::MAX as u64 {
            return Err(bad("seed and budget must fit in a signed 64-bit integer"));
        }
        let s = &self.sweep;
        if !(s.r_start <= s.r_end) || s.steps == 0 {
            return Err(bad("sweep needs r_start <= r_end and steps >= 1"));
        }
        let nf = &self.normal_form;
        if nf.n < 2 || nf.k < 1 || nf.k > nf.n || !nf.lambda.is_finite() {
            return Err(bad("normal form needs n >= 2 and 1 <= k <= n"));
        }
        match self.model {
            ModelKind::Lorenz if self.depths.len() != 3 => Err(bad("the Lorenz model needs three depths")),
            ModelKind::NormalForm if self.depths.len() != nf.n => Err(bad("need one depth per normal form coordinate")),
            _ => Ok(()),
        }
    }

    pub fn lorenz(&self) -> LorenzParams {
        LorenzParams { sigma: self.sigma, b: self.b, r: self.r }
    }

    pub fn model(&self) -> Model {
        match self.model {
            ModelKind::Lorenz => Model::Lorenz(self.lorenz()),
            ModelKind::NormalForm => Model::NormalForm(conley_core::flow::NormalFormParams {
                n: self.normal_form.n,
                k: self.normal_form.k,
                lambda: self.normal_form.lambda,
            }),
        }
    }

    pub fn engine(&self) -> EngineConfig {
        EngineConfig { tau: self.tau, rk4_step: self.rk4_step, bloat_factor: self.bloat_factor, bloat_floor: self.bloat_floor }
    }

    pub fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig::adaptive(self.integrator_tol)
    }

    /// Parameter values of the sweep, endpoints included.
    pub fn sweep_values(&self) -> Vec<f64> {
        let s = &self.sweep;
        if s.steps == 1 {
            return vec![s.r_start];
        }
        (0..s.steps).map(|i| s.r_start + (s.r_end - s.r_start) * i as f64 / (s.steps - 1) as f64).collect()
    }
}
