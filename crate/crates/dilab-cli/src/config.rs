//! Experiment configuration: command, seed, dimensions, tolerance overrides
//! and the instance specification. Complex scalars are `[re, im]` pairs and
//! matrices row-major nested lists throughout the file formats.

use serde::{Deserialize, Serialize};

use dilab_core::numeric::matrix::{ComplexMatrix, C64};
use dilab_core::{NumericError, Tolerance};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Charfun,
    Dilate,
    Limit,
    Beurling1,
    Cpcheck,
    Cocycle,
    Thm42,
}

impl Command {
    pub fn parse(name: &str) -> Result<Self, CliError> {
        match name {
            "charfun" => Ok(Command::Charfun),
            "dilate" => Ok(Command::Dilate),
            "limit" => Ok(Command::Limit),
            "beurling1" => Ok(Command::Beurling1),
            "cpcheck" => Ok(Command::Cpcheck),
            "cocycle" => Ok(Command::Cocycle),
            "thm42" => Ok(Command::Thm42),
            other => Err(CliError::invalid(format!(
                "unknown command '{other}' (expected charfun, dilate, limit, beurling1, cpcheck, cocycle or thm42)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Charfun => "charfun",
            Command::Dilate => "dilate",
            Command::Limit => "limit",
            Command::Beurling1 => "beurling1",
            Command::Cpcheck => "cpcheck",
            Command::Cocycle => "cocycle",
            Command::Thm42 => "thm42",
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct Dims {
    #[serde(default = "default_d_h")]
    pub d_h: usize,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_n_slots")]
    pub n_slots: usize,
    #[serde(default = "default_degree")]
    pub degree: usize,
}

fn default_d_h() -> usize {
    2
}
fn default_m() -> usize {
    2
}
fn default_n_slots() -> usize {
    40
}
fn default_degree() -> usize {
    64
}

impl Default for Dims {
    fn default() -> Self {
        Dims {
            d_h: default_d_h(),
            m: default_m(),
            n_slots: default_n_slots(),
            degree: default_degree(),
        }
    }
}

impl Dims {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.d_h == 0 || self.m < 2 || self.n_slots == 0 || self.degree < 2 {
            return Err(CliError::invalid(format!(
                "dims must satisfy d_h >= 1, m >= 2, n_slots >= 1, degree >= 2 (got {self:?})"
            )));
        }
        if self.d_h > 16 || self.m > 8 || self.n_slots > 512 || self.degree > 4096 {
            return Err(CliError::invalid(
                "dims beyond the desk-scale envelope (d_h <= 16, m <= 8, n_slots <= 512, degree <= 4096)",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ToleranceConfig {
    #[serde(default = "default_rank_eps")]
    pub rank_eps: f64,
    #[serde(default = "default_residual_eps")]
    pub residual_eps: f64,
}

fn default_rank_eps() -> f64 {
    1e-9
}
fn default_residual_eps() -> f64 {
    1e-8
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            rank_eps: default_rank_eps(),
            residual_eps: default_residual_eps(),
        }
    }
}

impl ToleranceConfig {
    pub fn to_tolerance(self) -> Result<Tolerance, CliError> {
        Tolerance::new(self.rank_eps, self.residual_eps)
            .map_err(|e: NumericError| CliError::invalid(e.to_string()))
    }
}

/// Row-major matrix with `[re, im]` entries.
pub type MatrixData = Vec<Vec<[f64; 2]>>;

pub fn matrix_from_data(data: &MatrixData) -> Result<ComplexMatrix, CliError> {
    let rows: Vec<Vec<C64>> = data
        .iter()
        .map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect())
        .collect();
    ComplexMatrix::from_rows(&rows).map_err(|e| CliError::invalid(e.to_string()))
}

pub fn matrix_to_data(m: &ComplexMatrix) -> MatrixData {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| [m.at(i, j).re, m.at(i, j).im]).collect())
        .collect()
}

pub fn vector_to_data(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn vector_from_data(v: &[[f64; 2]]) -> Vec<C64> {
    v.iter().map(|&[re, im]| C64::new(re, im)).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceSpec {
    RandomContraction,
    StarStable,
    Unitary,
    AmplitudeDamping {
        #[serde(default = "default_lambda")]
        lambda: f64,
    },
    RandomCocycle {
        #[serde(default)]
        displace: bool,
    },
    NonergodicCocycle,
    Explicit {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<MatrixData>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kraus: Option<Vec<MatrixData>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta: Option<Vec<[f64; 2]>>,
    },
}

fn default_lambda() -> f64 {
    0.75
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curves: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub dims: Dims,
    #[serde(default)]
    pub tolerance: ToleranceConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceSpec>,
    #[serde(default)]
    pub outputs: Outputs,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            command: None,
            seed: 0,
            dims: Dims::default(),
            tolerance: ToleranceConfig::default(),
            instance: None,
            outputs: Outputs::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn default_instance_for(cmd: Command) -> InstanceSpec {
        match cmd {
            Command::Charfun | Command::Limit | Command::Beurling1 => InstanceSpec::StarStable,
            Command::Dilate => InstanceSpec::RandomContraction,
            Command::Cpcheck | Command::Cocycle | Command::Thm42 => {
                InstanceSpec::AmplitudeDamping { lambda: 0.75 }
            }
        }
    }
}
