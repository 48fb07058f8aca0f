//! A-posteriori probability that a GRAND decoding, or decoding list, is
//! wrong.
//!
//! Four estimators are provided:
//!
//! * [`exact_list_error_prob`]: the exact posterior for a uniformly random
//!   codebook, combining the guesswork probabilities accumulated during
//!   decoding with the order statistics in [`orderstat`].
//! * [`approx_list_error_prob`]: geometric approximation for lists, using a
//!   constant per-query hit probability `(2^k - 1) / (2^n - 1)`.
//! * [`approx_single_error_prob`]: geometric approximation for a single
//!   decoding with hit probability `(2^k - 1) / (2^n - q_1)`.
//! * [`forney_estimate`]: the list-likelihood ratio baseline.
//!
//! Degenerate inputs, where every term of the denominator vanishes, report
//! `p_error = 1` and set [`SoftOutput::degenerate`] instead of failing.

pub mod orderstat;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::SoftChannelOutput;
use crate::decoder::DecodeResult;

pub use orderstat::{
    ln_order_stat_pmf, ln_order_stat_tail_pmf, order_stat_pmf, order_stat_pmf_exact, order_stat_tail_pmf,
    order_stat_tail_pmf_exact, OrderStatQuery,
};

/// Probabilities may overshoot [0, 1] by accumulated rounding up to this
/// much before being rejected.
const PROB_SLACK: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum SoftOutputError {
    #[error("invalid code dimensions n={n}, k={k}")]
    InvalidDimensions { n: u32, k: u32 },
    #[error("invalid query vector: {0}")]
    InvalidQuery(String),
    #[error("exact rational evaluation is infeasible for n={n}")]
    Infeasible { n: u32 },
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("{got} per-query probabilities for {expected} list entries")]
    LengthMismatch { got: usize, expected: usize },
    #[error("decoding list is empty")]
    EmptyList,
    #[error("likelihoods must be non-negative and not all zero")]
    InvalidLikelihoods,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Exact,
    ApproxList,
    ApproxSingle,
    Forney,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Exact => "exact",
            Estimator::ApproxList => "approx_list",
            Estimator::ApproxSingle => "approx_single",
            Estimator::Forney => "forney",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Estimator::Exact, Estimator::ApproxList, Estimator::ApproxSingle, Estimator::Forney]
            .into_iter()
            .find(|e| e.name() == s)
    }

    /// Whether the estimate refers to the whole list rather than the first
    /// decoding.
    pub fn is_list_estimate(self) -> bool {
        matches!(self, Estimator::Exact | Estimator::ApproxList)
    }
}

/// The values an estimate was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct InputsDigest {
    pub n: u32,
    pub k: u32,
    pub q: Vec<u64>,
    pub query_probs: Vec<f64>,
    pub cumulative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftOutput {
    pub p_error: f64,
    pub estimator: Estimator,
    pub degenerate: bool,
    /// `None` for [`Estimator::Forney`], which works from likelihoods only.
    pub inputs: Option<InputsDigest>,
}

fn check_prob(p: f64) -> Result<f64, SoftOutputError> {
    if !(-PROB_SLACK..=1.0 + PROB_SLACK).contains(&p) {
        return Err(SoftOutputError::InvalidProbability(p));
    }
    Ok(p.clamp(0.0, 1.0))
}

fn check_list(n: u32, k: u32, q: &[u64], probs: &[f64]) -> Result<(), SoftOutputError> {
    orderstat::validate_dims(n, k)?;
    if q.is_empty() {
        return Err(SoftOutputError::EmptyList);
    }
    if probs.len() != q.len() {
        return Err(SoftOutputError::LengthMismatch { got: probs.len(), expected: q.len() });
    }
    if q[0] < 1 || q.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SoftOutputError::InvalidQuery("query indices must be >= 1 and strictly increasing".into()));
    }
    if u128::from(*q.last().unwrap()) > 1u128 << n {
        return Err(SoftOutputError::InvalidQuery("query index exceeds 2^n".into()));
    }
    Ok(())
}

/// Exact probability that the transmitted word is not in a list found at
/// queries `q`, for a uniformly random codebook.
///
/// `g_pmf[i] = P(G(N) = q_i)` and `g_tail = P(G(N) > q_L)`.
pub fn exact_list_error_prob(
    n: u32,
    k: u32,
    q: &[u64],
    g_pmf: &[f64],
    g_tail: f64,
) -> Result<SoftOutput, SoftOutputError> {
    check_list(n, k, q, g_pmf)?;
    let g_pmf: Vec<f64> = g_pmf.iter().map(|&p| check_prob(p)).collect::<Result<_, _>>()?;
    let g_tail = check_prob(g_tail)?;
    let l = q.len() as u64;
    let q_last = *q.last().unwrap();

    // Transmitted word absent: all L hits are erroneous codewords.
    let ln_a = g_tail.ln() + orderstat::ln_pmf_unchecked(n, k, q_last, l);
    // Transmitted word is entry i < L: the other L - 1 hits, re-indexed with
    // the true query removed, end at q_L - 1.
    let ln_b_inner = orderstat::ln_pmf_unchecked(n, k, q_last - 1, l - 1);
    // Transmitted word is the last entry: the L-th erroneous word lies at or
    // beyond q_L.
    let ln_b_last = orderstat::ln_tail_unchecked(n, k, q_last, l);

    let mut terms = Vec::with_capacity(q.len() + 1);
    terms.push(ln_a);
    for &g in &g_pmf[..g_pmf.len() - 1] {
        terms.push(g.ln() + ln_b_inner);
    }
    terms.push(g_pmf[g_pmf.len() - 1].ln() + ln_b_last);

    let ln_total = log_sum_exp(&terms);
    let (p_error, degenerate) =
        if ln_total == f64::NEG_INFINITY { (1.0, true) } else { ((ln_a - ln_total).exp().clamp(0.0, 1.0), false) };
    Ok(SoftOutput {
        p_error,
        estimator: Estimator::Exact,
        degenerate,
        inputs: Some(InputsDigest { n, k, q: q.to_vec(), query_probs: g_pmf, cumulative: 1.0 - g_tail }),
    })
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// `(2^a - 1) / (2^b - c)` without forming the integers.
fn ratio_pow2(a: u32, b: u32, c: u64) -> f64 {
    let num = 2f64.powi(a as i32) - 1.0;
    let den = 2f64.powi(b as i32) - c as f64;
    num / den
}

fn geometric_estimate(estimator: Estimator, query_prob_sum: f64, remaining: f64, hit_prob: f64) -> (f64, bool) {
    let num = remaining * hit_prob;
    let den = query_prob_sum + num;
    if den <= 0.0 {
        (1.0, true)
    } else {
        debug_assert!(matches!(estimator, Estimator::ApproxList | Estimator::ApproxSingle));
        ((num / den).clamp(0.0, 1.0), false)
    }
}

/// List error probability under a geometric model with per-query hit
/// probability `φ = (2^k - 1) / (2^n - 1)`:
///
/// `(1 - S) φ / (Σ_i P(N = z_{q_i}) + (1 - S) φ)`, `S = Σ_{j <= q_L} P(N = z_j)`.
pub fn approx_list_error_prob(
    n: u32,
    k: u32,
    q: &[u64],
    query_probs: &[f64],
    cumulative: f64,
) -> Result<SoftOutput, SoftOutputError> {
    check_list(n, k, q, query_probs)?;
    let probs: Vec<f64> = query_probs.iter().map(|&p| check_prob(p)).collect::<Result<_, _>>()?;
    let cumulative = check_prob(cumulative)?;
    let listed: f64 = probs.iter().sum();
    if listed > cumulative + PROB_SLACK {
        return Err(SoftOutputError::InvalidProbability(cumulative));
    }
    let phi = ratio_pow2(k, n, 1);
    let (p_error, degenerate) = geometric_estimate(Estimator::ApproxList, listed, 1.0 - cumulative, phi);
    Ok(SoftOutput {
        p_error,
        estimator: Estimator::ApproxList,
        degenerate,
        inputs: Some(InputsDigest { n, k, q: q.to_vec(), query_probs: probs, cumulative }),
    })
}

/// Single-decoding error probability with hit probability
/// `(2^k - 1) / (2^n - q_1)` after `q_1 - 1` misses.
pub fn approx_single_error_prob(
    n: u32,
    k: u32,
    q1: u64,
    query_prob: f64,
    cumulative: f64,
) -> Result<SoftOutput, SoftOutputError> {
    check_list(n, k, &[q1], &[query_prob])?;
    if u128::from(q1) >= 1u128 << n {
        return Err(SoftOutputError::InvalidQuery("q_1 must be below 2^n".into()));
    }
    let query_prob = check_prob(query_prob)?;
    let cumulative = check_prob(cumulative)?;
    if query_prob > cumulative + PROB_SLACK {
        return Err(SoftOutputError::InvalidProbability(cumulative));
    }
    let hit = ratio_pow2(k, n, q1);
    let (p_error, degenerate) = geometric_estimate(Estimator::ApproxSingle, query_prob, 1.0 - cumulative, hit);
    Ok(SoftOutput {
        p_error,
        estimator: Estimator::ApproxSingle,
        degenerate,
        inputs: Some(InputsDigest { n, k, q: vec![q1], query_probs: vec![query_prob], cumulative }),
    })
}

/// `1 - max / Σ` over the list likelihoods `P(R = r | X = c)`.
///
/// The result never exceeds `1 - 1/|list|`.
pub fn forney_estimate(list_likelihoods: &[f64]) -> Result<SoftOutput, SoftOutputError> {
    if list_likelihoods.is_empty() {
        return Err(SoftOutputError::EmptyList);
    }
    if list_likelihoods.iter().any(|&l| l.is_nan() || l < 0.0 || !l.is_finite()) {
        return Err(SoftOutputError::InvalidLikelihoods);
    }
    let (best_idx, &best) = list_likelihoods.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty");
    if best == 0.0 {
        return Err(SoftOutputError::InvalidLikelihoods);
    }
    let others: f64 = list_likelihoods.iter().enumerate().filter(|&(i, _)| i != best_idx).map(|(_, l)| l).sum();
    let bound = 1.0 - 1.0 / list_likelihoods.len() as f64;
    // Clamp only absorbs rounding in the sum.
    let p_error = (others / (best + others)).min(bound);
    Ok(SoftOutput { p_error, estimator: Estimator::Forney, degenerate: false, inputs: None })
}

/// Forney estimate for candidate words, with likelihoods taken from the
/// channel LLRs and normalised by the largest before exponentiating.
pub fn forney_from_soft(soft: &SoftChannelOutput, list: &[&[u8]]) -> Result<SoftOutput, SoftOutputError> {
    if list.is_empty() {
        return Err(SoftOutputError::EmptyList);
    }
    let ln: Vec<f64> = list.iter().map(|w| soft.ln_likelihood(w)).collect();
    let max = ln.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let likelihoods: Vec<f64> = ln.iter().map(|l| (l - max).exp()).collect();
    forney_estimate(&likelihoods)
}

impl DecodeResult {
    /// Applies `estimator` to this decoding. Lists shorter than requested
    /// (after abandonment) are evaluated at their actual length; an empty
    /// result predicts certain error.
    pub fn predict(
        &self,
        estimator: Estimator,
        n: u32,
        k: u32,
        soft: &SoftChannelOutput,
    ) -> Result<SoftOutput, SoftOutputError> {
        if self.found.is_empty() {
            return Ok(SoftOutput { p_error: 1.0, estimator, degenerate: true, inputs: None });
        }
        let q: Vec<u64> = self.found.iter().map(|d| d.q).collect();
        let probs: Vec<f64> = self.found.iter().map(|d| d.prob).collect();
        let last = self.found.last().unwrap();
        match estimator {
            Estimator::ApproxSingle => {
                let first = &self.found[0];
                approx_single_error_prob(n, k, first.q, first.prob, first.cumulative)
            }
            Estimator::ApproxList => approx_list_error_prob(n, k, &q, &probs, last.cumulative),
            Estimator::Exact => exact_list_error_prob(n, k, &q, &probs, (1.0 - last.cumulative).max(0.0)),
            Estimator::Forney => {
                let words: Vec<&[u8]> = self.found.iter().map(|d| d.codeword.as_slice()).collect();
                forney_from_soft(soft, &words)
            }
        }
    }
}
