//! Run configuration: a single TOML file covering the problem, the
//! discretization, the embedding constants, the solver knobs, and the output
//! layout. Parsing and re-serialization round-trip field for field.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::{EnergyError, Problem};
use crate::grid::{GridError, QuadratureRule, RadialGrid};
use crate::model::{Annulus, ModelError, Nonlinearity, Weight};
use crate::solvers::SolverOptions;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse config file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub discretization: DiscretizationConfig,
    pub constants: ConstantsConfig,
    pub solver: SolverConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: ProblemConfig::default(),
            discretization: DiscretizationConfig::default(),
            constants: ConstantsConfig::default(),
            solver: SolverConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConfig {
    pub e: f64,
    pub lambda: f64,
    pub lambda_list: Vec<f64>,
    pub nonlinearity: NonlinearityConfig,
    pub weight: WeightConfig,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            e: 1.0,
            lambda: 10.0,
            lambda_list: Vec::new(),
            nonlinearity: NonlinearityConfig::default(),
            weight: WeightConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NonlinearityConfig {
    /// one of: min-abs-powers, min-plus-powers, log-square, custom-table
    pub kind: String,
    pub r: f64,
    pub p: f64,
    /// rows (s, f(s)) for custom-table
    pub table: Vec<[f64; 2]>,
}

impl Default for NonlinearityConfig {
    fn default() -> Self {
        Self {
            kind: "min-abs-powers".into(),
            r: 0.5,
            p: 2.0,
            table: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightConfig {
    /// one of: constant-annulus, gaussian, power-decay, custom-table
    pub kind: String,
    pub alpha0: f64,
    pub r_inner: f64,
    pub r_outer: f64,
    pub q: f64,
    pub beta: f64,
    /// rows (r, α(r)) for custom-table
    pub table: Vec<[f64; 2]>,
}

impl Default for WeightConfig {
    fn default() -> Self {
        Self {
            kind: "constant-annulus".into(),
            alpha0: 1.0,
            r_inner: 0.0,
            r_outer: 1.0,
            q: 0.5,
            beta: 3.0,
            table: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscretizationConfig {
    pub r_max: f64,
    pub n: usize,
    pub quadrature: QuadratureRule,
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        Self {
            r_max: 20.0,
            n: 2000,
            quadrature: QuadratureRule::Trapezoid,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantsConfig {
    /// D^{1,2} ↪ L⁶ constant; estimated from the extremal family when unset.
    pub d_star: Option<f64>,
    /// H¹ ↪ L^{12/5} constant; estimated when unset.
    pub s_12_5: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub tol_residual: f64,
    pub tol_mountain_pass: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub nontrivial_cutoff: f64,
    pub distinct_cutoff: f64,
    pub path_nodes: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolverOptions::default();
        Self {
            tol_residual: d.tol_residual,
            tol_mountain_pass: d.tol_mountain_pass,
            max_iter: d.max_iter,
            seed: d.seed,
            nontrivial_cutoff: d.nontrivial_cutoff,
            distinct_cutoff: d.distinct_cutoff,
            path_nodes: d.path_nodes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
    pub formats: Vec<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: "out".into(),
            formats: vec!["json".into(), "csv".into()],
        }
    }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |msg: String| Err(ConfigError::Invalid(msg));
        if !(self.problem.e > 0.0) || !self.problem.e.is_finite() {
            return invalid(format!("problem.e must be positive, got {}", self.problem.e));
        }
        if !(self.problem.lambda >= 0.0) || !self.problem.lambda.is_finite() {
            return invalid(format!(
                "problem.lambda must be non-negative, got {}",
                self.problem.lambda
            ));
        }
        for &l in &self.problem.lambda_list {
            if !(l >= 0.0) || !l.is_finite() {
                return invalid(format!("lambda_list entries must be non-negative, got {l}"));
            }
        }
        if self.discretization.n < 64 {
            return invalid(format!(
                "discretization.n must be at least 64, got {}",
                self.discretization.n
            ));
        }
        if !(self.discretization.r_max > self.problem.weight.r_outer) {
            return invalid(format!(
                "discretization.r_max = {} must exceed the weight support radius {}",
                self.discretization.r_max, self.problem.weight.r_outer
            ));
        }
        for (name, tol) in [
            ("tol_residual", self.solver.tol_residual),
            ("tol_mountain_pass", self.solver.tol_mountain_pass),
            ("nontrivial_cutoff", self.solver.nontrivial_cutoff),
            ("distinct_cutoff", self.solver.distinct_cutoff),
        ] {
            if !(tol > 0.0) || !tol.is_finite() {
                return invalid(format!("solver.{name} must be positive, got {tol}"));
            }
        }
        Ok(())
    }

    pub fn build_grid(&self) -> Result<Arc<RadialGrid>, ConfigError> {
        Ok(Arc::new(RadialGrid::uniform(
            self.discretization.r_max,
            self.discretization.n,
            self.discretization.quadrature,
        )?))
    }

    pub fn build_nonlinearity(&self) -> Result<Nonlinearity, ConfigError> {
        let c = &self.problem.nonlinearity;
        match c.kind.as_str() {
            "min-abs-powers" => Ok(Nonlinearity::min_abs_powers(c.r, c.p)?),
            "min-plus-powers" => Ok(Nonlinearity::min_plus_powers(c.r, c.p)?),
            "log-square" => Ok(Nonlinearity::log_square()),
            "custom-table" => {
                let (s, f): (Vec<f64>, Vec<f64>) =
                    c.table.iter().map(|row| (row[0], row[1])).unzip();
                Ok(Nonlinearity::from_table(s, f)?)
            }
            other => Err(ConfigError::Invalid(format!(
                "unknown nonlinearity kind '{other}'"
            ))),
        }
    }

    pub fn build_weight(&self) -> Result<Weight, ConfigError> {
        let c = &self.problem.weight;
        match c.kind.as_str() {
            "constant-annulus" => Ok(Weight::constant_annulus(
                c.alpha0, c.r_inner, c.r_outer, c.q,
            )?),
            "gaussian" => Ok(Weight::gaussian(c.r_inner, c.r_outer, c.q)?),
            "power-decay" => Ok(Weight::power_decay(c.beta, c.r_inner, c.r_outer, c.q)?),
            "custom-table" => {
                let (r, a): (Vec<f64>, Vec<f64>) =
                    c.table.iter().map(|row| (row[0], row[1])).unzip();
                let annulus = Annulus {
                    r_inner: c.r_inner,
                    r_outer: c.r_outer,
                    alpha0: c.alpha0,
                };
                Ok(Weight::from_table(r, a, annulus, c.q)?)
            }
            other => Err(ConfigError::Invalid(format!("unknown weight kind '{other}'"))),
        }
    }

    pub fn build_problem(&self, lambda: f64) -> Result<Problem, ConfigError> {
        Ok(Problem::new(
            self.build_grid()?,
            self.problem.e,
            lambda,
            self.build_weight()?,
            self.build_nonlinearity()?,
        )?)
    }

    /// Solver options with the seed possibly overridden by SMVAR_SEED.
    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol_residual: self.solver.tol_residual,
            tol_mountain_pass: self.solver.tol_mountain_pass,
            max_iter: self.solver.max_iter,
            nontrivial_cutoff: self.solver.nontrivial_cutoff,
            distinct_cutoff: self.solver.distinct_cutoff,
            path_nodes: self.solver.path_nodes,
            seed: effective_seed(self.solver.seed),
        }
    }
}

pub fn effective_seed(config_seed: u64) -> u64 {
    match std::env::var("SMVAR_SEED") {
        Ok(v) => v.parse().unwrap_or(config_seed),
        Err(_) => config_seed,
    }
}
