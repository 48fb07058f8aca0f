use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::bitcodes::{crc_code, ebch_code, load_parity_check, random_linear_code, LinearCode, DEFAULT_CRC8_POLY};
use crate::decoder::{DecodeConfig, DecodeMode, DEFAULT_MAX_QUERIES};
use crate::softoutput::Estimator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeFamily {
    Rlc,
    Crc,
    Ebch,
    /// Parity-check matrix read from `path`.
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSpec {
    pub family: CodeFamily,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_k")]
    pub k: usize,
    /// Seed for random linear codes.
    #[serde(default)]
    pub seed: u64,
    /// CRC generator in full form, leading term included.
    #[serde(default)]
    pub poly: Option<u64>,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

fn default_n() -> usize {
    64
}

fn default_k() -> usize {
    57
}

impl CodeSpec {
    pub fn build(&self) -> Result<LinearCode, SimError> {
        let code = match self.family {
            CodeFamily::Rlc => random_linear_code(self.n, self.k, self.seed)?,
            CodeFamily::Crc => crc_code(self.n, self.k, self.poly.unwrap_or(DEFAULT_CRC8_POLY))?,
            CodeFamily::Ebch => ebch_code(self.n, self.k)?,
            CodeFamily::File => {
                let path = self.path.as_ref().ok_or_else(|| SimError::Config("code.path is required".into()))?;
                load_parity_check(path)?
            }
        };
        Ok(code)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub ebn0_db: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderSpec {
    #[serde(default = "default_list_size")]
    pub list_size: usize,
    #[serde(default = "default_max_queries")]
    pub max_queries: u64,
    #[serde(default)]
    pub mode: DecodeMode,
}

fn default_list_size() -> usize {
    1
}

fn default_max_queries() -> u64 {
    DEFAULT_MAX_QUERIES
}

impl Default for DecoderSpec {
    fn default() -> Self {
        Self { list_size: 1, max_queries: DEFAULT_MAX_QUERIES, mode: DecodeMode::Soft }
    }
}

impl DecoderSpec {
    pub fn decode_config(&self) -> DecodeConfig {
        DecodeConfig { list_size: self.list_size, max_queries: self.max_queries, mode: self.mode }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Calibration,
    Erasure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub trials: u64,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<Estimator>,
    /// Number of uniform calibration bins on [0, 1]; ignored when
    /// `bin_edges` is given.
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default)]
    pub bin_edges: Option<Vec<f64>>,
    #[serde(default = "default_min_bin_count")]
    pub min_bin_count: u64,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    /// Also report detection-only decoding (accept iff the hard decision is
    /// a codeword) in erasure experiments.
    #[serde(default)]
    pub detection_baseline: bool,
}

fn default_estimators() -> Vec<Estimator> {
    vec![Estimator::ApproxSingle]
}

fn default_bins() -> usize {
    20
}

fn default_min_bin_count() -> u64 {
    50
}

fn default_epsilons() -> Vec<f64> {
    vec![0.025, 0.1, 0.5]
}

impl ExperimentSpec {
    pub fn edges(&self) -> Vec<f64> {
        match &self.bin_edges {
            Some(e) => e.clone(),
            None => uniform_edges(self.bins),
        }
    }
}

pub fn uniform_edges(bins: usize) -> Vec<f64> {
    (0..=bins).map(|i| i as f64 / bins as f64).collect()
}

/// A complete experiment description, mirrored one-to-one by the TOML
/// config sections `[code]`, `[channel]`, `[decoder]` and `[experiment]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub code: CodeSpec,
    pub channel: ChannelSpec,
    #[serde(default)]
    pub decoder: DecoderSpec,
    pub experiment: ExperimentSpec,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Worker threads; `None` uses the global pool.
    #[serde(default)]
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        let cfg: Self = toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SimError> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serialisable")
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::Config(m.into()));
        let e = &self.experiment;
        if e.trials < 1 {
            return bad("experiment.trials must be at least 1");
        }
        if self.channel.ebn0_db.is_empty() || self.channel.ebn0_db.iter().any(|x| !x.is_finite()) {
            return bad("channel.ebn0_db must be a non-empty list of finite values");
        }
        if self.decoder.list_size < 1 || self.decoder.max_queries < 1 {
            return bad("decoder.list_size and decoder.max_queries must be at least 1");
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1");
        }
        match e.kind {
            ExperimentKind::Calibration => {
                if e.estimators.is_empty() {
                    return bad("experiment.estimators must not be empty");
                }
                if e.bin_edges.is_none() && e.bins < 1 {
                    return bad("experiment.bins must be at least 1");
                }
                let edges = e.edges();
                if edges.len() < 2
                    || edges.windows(2).any(|w| w[0] >= w[1])
                    || edges[0] < 0.0
                    || edges[edges.len() - 1] > 1.0
                {
                    return bad("bin edges must be strictly increasing within [0, 1]");
                }
            }
            ExperimentKind::Erasure => {
                if e.epsilons.is_empty() && !e.detection_baseline {
                    return bad("experiment.epsilons must not be empty");
                }
                if e.epsilons.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
                    return bad("every epsilon must lie in (0, 1)");
                }
            }
        }
        Ok(())
    }
}
