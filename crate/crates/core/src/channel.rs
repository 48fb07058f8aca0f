//! BPSK over AWGN and soft-information extraction.
//!
//! LLR convention: `llr = ln P(bit = 0 | r) / P(bit = 1 | r)`, so positive
//! values favour 0. Bit `b` is sent as the symbol `1 - 2b`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// LLR magnitudes are clamped here so that flip probabilities stay strictly
/// positive in floating point.
pub const LLR_SATURATION: f64 = 40.0;

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("code rate {0} outside (0, 1)")]
    InvalidRate(f64),
    #[error("Eb/N0 must be finite, got {0}")]
    InvalidEbN0(f64),
    #[error("bit position {position} out of range for length {n}")]
    PositionOutOfRange { position: usize, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    pub ebn0_db: f64,
    pub rate: f64,
    pub seed: u64,
}

impl ChannelConfig {
    pub fn new(ebn0_db: f64, rate: f64, seed: u64) -> Result<Self, ChannelError> {
        let cfg = Self { ebn0_db, rate, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        if !(self.rate > 0.0 && self.rate < 1.0) {
            return Err(ChannelError::InvalidRate(self.rate));
        }
        if !self.ebn0_db.is_finite() {
            return Err(ChannelError::InvalidEbN0(self.ebn0_db));
        }
        Ok(())
    }

    /// Noise variance `1 / (2 R Eb/N0)` for unit-energy symbols.
    pub fn noise_variance(&self) -> f64 {
        noise_variance(self.ebn0_db, self.rate)
    }
}

pub fn noise_variance(ebn0_db: f64, rate: f64) -> f64 {
    1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0))
}

/// Soft demodulator output for one block.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftChannelOutput {
    llr: Vec<f64>,
    flip_prob: Vec<f64>,
    hard: Vec<u8>,
}

impl SoftChannelOutput {
    /// Derives flip probabilities and hard decisions from LLRs, saturating
    /// magnitudes at [`LLR_SATURATION`]. A zero LLR decides 0.
    pub fn from_llrs(llr: Vec<f64>) -> Self {
        let llr: Vec<f64> = llr.into_iter().map(|l| l.clamp(-LLR_SATURATION, LLR_SATURATION)).collect();
        let flip_prob = llr.iter().map(|l| 1.0 / (1.0 + l.abs().exp())).collect();
        let hard = llr.iter().map(|&l| (l < 0.0) as u8).collect();
        Self { llr, flip_prob, hard }
    }

    pub fn len(&self) -> usize {
        self.llr.len()
    }

    pub fn is_empty(&self) -> bool {
        self.llr.is_empty()
    }

    pub fn llr(&self) -> &[f64] {
        &self.llr
    }

    /// `P(N_i = 1)`: probability that the hard decision on bit `i` is wrong.
    pub fn flip_prob(&self) -> &[f64] {
        &self.flip_prob
    }

    pub fn hard(&self) -> &[u8] {
        &self.hard
    }

    /// `ln P(N = 0)`, the log-probability that every hard decision is right.
    pub fn ln_prob_no_flips(&self) -> f64 {
        self.flip_prob.iter().map(|p| (-p).ln_1p()).sum()
    }

    /// Log-likelihood of a candidate word, up to a constant shared by all
    /// candidates: `Σ ln P(bit_i = word_i | r_i)`.
    pub fn ln_likelihood(&self, word: &[u8]) -> f64 {
        self.llr
            .iter()
            .zip(word)
            .map(|(&l, &b)| {
                let signed = if b == 0 { l } else { -l };
                -ln_1p_exp(-signed)
            })
            .sum()
    }
}

/// `ln(1 + e^x)` without overflow.
fn ln_1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `P(N^n = z)` for the flip set `pattern`.
pub fn noise_effect_probability(pattern: &[usize], out: &SoftChannelOutput) -> Result<f64, ChannelError> {
    let n = out.len();
    let mut flipped = vec![false; n];
    for &p in pattern {
        if p >= n {
            return Err(ChannelError::PositionOutOfRange { position: p, n });
        }
        flipped[p] = true;
    }
    Ok(out.flip_prob.iter().zip(&flipped).map(|(&p, &f)| if f { p } else { 1.0 - p }).product())
}

/// Modulates `codeword`, adds Gaussian noise drawn from `rng`, and
/// demodulates. Each sample is a standard normal from the ziggurat sampler
/// of `rand_distr`, scaled by the noise standard deviation.
pub fn transmit_with_rng<R: Rng + ?Sized>(codeword: &[u8], variance: f64, rng: &mut R) -> SoftChannelOutput {
    let sigma = variance.sqrt();
    let llr = codeword
        .iter()
        .map(|&b| {
            let symbol = 1.0 - 2.0 * f64::from(b & 1);
            let noise: f64 = rng.sample(StandardNormal);
            let r = symbol + sigma * noise;
            2.0 * r / variance
        })
        .collect();
    SoftChannelOutput::from_llrs(llr)
}

/// Deterministic transmission keyed by `cfg.seed`.
pub fn transmit(codeword: &[u8], cfg: &ChannelConfig) -> Result<SoftChannelOutput, ChannelError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    Ok(transmit_with_rng(codeword, cfg.noise_variance(), &mut rng))
}
