//! The GRAND query loop.
//!
//! Noise patterns are inverted from the hard decision in guesswork order
//! until `L` codewords are found or the query budget runs out. Every query's
//! probability is accumulated, hits and misses alike, since that running sum
//! is what the soft-output estimators consume.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitcodes::{Codebook, MembershipProbe};
use crate::channel::SoftChannelOutput;
use crate::guesswork::{HardGrand, NoiseModel, Orbgrand, PatternStream};

/// Default abandonment ceiling for length-64 codes.
pub const DEFAULT_MAX_QUERIES: u64 = 1 << 22;

#[derive(Debug, Error, PartialEq)]
pub enum DecodeError {
    #[error("soft input has length {got}, code length is {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("list size must be at least 1")]
    EmptyList,
    #[error("query budget must be at least 1")]
    NoQueries,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DecodeMode {
    /// ORBGRAND logistic-weight order.
    #[default]
    Soft,
    /// Hamming-weight order from hard decisions only.
    Hard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeConfig {
    pub list_size: usize,
    pub max_queries: u64,
    pub mode: DecodeMode,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        Self { list_size: 1, max_queries: DEFAULT_MAX_QUERIES, mode: DecodeMode::Soft }
    }
}

impl DecodeConfig {
    pub fn with_list_size(list_size: usize) -> Self {
        Self { list_size, ..Self::default() }
    }
}

/// One codeword found by the decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoding {
    pub codeword: Vec<u8>,
    /// 1-based query index at which the codeword was found.
    pub q: u64,
    /// `P(N^n = z^{n,q})` for the pattern that produced it.
    pub prob: f64,
    /// `Σ_{j <= q} P(N^n = z^{n,j})`.
    pub cumulative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub found: Vec<Decoding>,
    /// Probability mass of every query made.
    pub cumulative_prob: f64,
    pub queries_used: u64,
    /// The query budget ran out before `L` codewords were found.
    pub abandoned: bool,
}

impl DecodeResult {
    pub fn first(&self) -> Option<&Decoding> {
        self.found.first()
    }

    pub fn contains(&self, word: &[u8]) -> bool {
        self.found.iter().any(|d| d.codeword == word)
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
struct RunningSum {
    sum: f64,
    compensation: f64,
}

impl RunningSum {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

pub fn grand_decode<C: Codebook>(
    code: &C,
    soft: &SoftChannelOutput,
    cfg: &DecodeConfig,
) -> Result<DecodeResult, DecodeError> {
    if soft.len() != code.length() {
        return Err(DecodeError::LengthMismatch { got: soft.len(), expected: code.length() });
    }
    if cfg.list_size == 0 {
        return Err(DecodeError::EmptyList);
    }
    if cfg.max_queries == 0 {
        return Err(DecodeError::NoQueries);
    }
    Ok(match cfg.mode {
        DecodeMode::Soft => run(code, soft, cfg, Orbgrand::from_soft(soft)),
        DecodeMode::Hard => run(code, soft, cfg, HardGrand::new(soft.len())),
    })
}

/// Runs the query loop over an arbitrary pattern stream.
pub fn decode_with_stream<C: Codebook, S: PatternStream>(
    code: &C,
    soft: &SoftChannelOutput,
    cfg: &DecodeConfig,
    stream: S,
) -> Result<DecodeResult, DecodeError> {
    if soft.len() != code.length() || stream.block_len() != code.length() {
        return Err(DecodeError::LengthMismatch { got: stream.block_len(), expected: code.length() });
    }
    if cfg.list_size == 0 {
        return Err(DecodeError::EmptyList);
    }
    if cfg.max_queries == 0 {
        return Err(DecodeError::NoQueries);
    }
    Ok(run(code, soft, cfg, stream))
}

fn run<C: Codebook, S: PatternStream>(
    code: &C,
    soft: &SoftChannelOutput,
    cfg: &DecodeConfig,
    mut stream: S,
) -> DecodeResult {
    let hard = soft.hard();
    let model = NoiseModel::new(soft);
    let mut probe = code.probe(hard);
    let mut mass = RunningSum::default();
    let mut found = Vec::with_capacity(cfg.list_size);
    let mut queries = 0u64;

    while found.len() < cfg.list_size && queries < cfg.max_queries {
        let Some(pattern) = stream.advance() else {
            break;
        };
        queries += 1;
        let prob = model.probability(&pattern.flips);
        mass.add(prob);
        if probe.hits(&pattern.flips) {
            let mut codeword = hard.to_vec();
            for &f in &pattern.flips {
                codeword[f] ^= 1;
            }
            found.push(Decoding { codeword, q: queries, prob, cumulative: mass.value().min(1.0) });
        }
    }

    DecodeResult {
        abandoned: found.len() < cfg.list_size && queries >= cfg.max_queries,
        found,
        cumulative_prob: mass.value().min(1.0),
        queries_used: queries,
    }
}

/// Post-hoc validation: every listed word is a codeword, words are distinct
/// and query indices strictly increase.
pub fn syndrome_decode_check<C: Codebook>(code: &C, result: &DecodeResult) -> bool {
    let members = result.found.iter().all(|d| d.codeword.len() == code.length() && code.contains(&d.codeword));
    let increasing = result.found.windows(2).all(|w| w[0].q < w[1].q);
    let distinct =
        result.found.iter().enumerate().all(|(i, a)| result.found[i + 1..].iter().all(|b| b.codeword != a.codeword));
    members && increasing && distinct
}
