//! Brute-force oracles shared by the integration suites. Nothing here calls
//! into the code under test beyond constructing inputs.

#![allow(dead_code)]

use std::collections::HashSet;

use rand::Rng;
use softgrand::bitcodes::{unpack, LinearCode};
use softgrand::channel::SoftChannelOutput;
use softgrand::decoder::{DecodeResult, Decoding};
use softgrand::guesswork::{HardGrand, Orbgrand, PatternStream, ReliabilityOrder};

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k.min(n - k)).fold(1u64, |acc, j| acc * (n - j) / (j + 1))
}

/// Every codeword, by encoding all `2^k` messages.
pub fn all_codewords(code: &LinearCode) -> Vec<Vec<u8>> {
    (0u64..1 << code.k()).map(|m| code.encode(&unpack(&[m], code.k())).unwrap()).collect()
}

pub fn hamming(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

pub fn flips_between(a: &[u8], b: &[u8]) -> Vec<usize> {
    (0..a.len()).filter(|&i| a[i] != b[i]).collect()
}

/// 1-based position of `flips` in Hamming-weight-then-lexicographic order
/// over subsets of `{0, .., n-1}`.
pub fn hard_query_index(n: usize, flips: &[usize]) -> u64 {
    let w = flips.len();
    let before: u64 = (0..w).map(|j| binomial(n as u64, j as u64)).sum();
    let mut rank = 0u64;
    let mut prev: isize = -1;
    for (i, &a) in flips.iter().enumerate() {
        for v in (prev + 1) as usize..a {
            rank += binomial((n - 1 - v) as u64, (w - 1 - i) as u64);
        }
        prev = a as isize;
    }
    before + rank + 1
}

/// `ln P(R = r | X = c)` up to a word-independent constant: `-Σ |l_i|` over
/// positions where `c` disagrees with the hard decision.
pub fn ln_likelihood_oracle(soft: &SoftChannelOutput, word: &[u8]) -> f64 {
    let hard = soft.hard();
    -(0..word.len()).filter(|&i| word[i] != hard[i]).map(|i| soft.llr()[i].abs()).sum::<f64>()
}

pub fn random_llrs<R: Rng>(n: usize, scale: f64, rng: &mut R) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let v: f64 = rng.random_range(-scale..scale);
            if v == 0.0 {
                1e-3
            } else {
                v
            }
        })
        .collect()
}

#[derive(Debug)]
pub struct StreamAudit {
    pub count: u64,
    pub distinct: usize,
    pub weights_sorted: bool,
    pub weights_consistent: bool,
}

impl StreamAudit {
    pub fn complete(&self, n: usize) -> bool {
        self.count == 1 << n && self.distinct == 1 << n && self.weights_sorted && self.weights_consistent
    }
}

fn audit<S: PatternStream>(mut stream: S, weight_of: impl Fn(&[usize]) -> u64) -> StreamAudit {
    let n = stream.block_len();
    let mut seen = HashSet::new();
    let mut count = 0u64;
    let mut last = 0u64;
    let mut weights_sorted = true;
    let mut weights_consistent = true;
    while let Some(p) = stream.advance() {
        count += 1;
        let mask = p.flips.iter().fold(0u64, |m, &f| m | 1 << f);
        seen.insert(mask);
        weights_sorted &= p.weight >= last;
        weights_consistent &= p.weight == weight_of(&p.flips) && p.flips.iter().all(|&f| f < n);
        last = p.weight;
        if count > 1 << n {
            break;
        }
    }
    StreamAudit { count, distinct: seen.len(), weights_sorted, weights_consistent }
}

/// Audits a full ORBGRAND stream against independently computed logistic
/// weights (sum of 1-based reliability ranks, least reliable first).
pub fn audit_orbgrand(llr: &[f64]) -> StreamAudit {
    let n = llr.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| llr[a].abs().total_cmp(&llr[b].abs()).then(a.cmp(&b)));
    let mut rank = vec![0u64; n];
    for (r, &i) in idx.iter().enumerate() {
        rank[i] = r as u64 + 1;
    }
    audit(Orbgrand::new(ReliabilityOrder::from_llrs(llr)), |f| f.iter().map(|&i| rank[i]).sum())
}

pub fn audit_hard(n: usize) -> StreamAudit {
    audit(HardGrand::new(n), |f| f.len() as u64)
}

/// Structural invariants every decode result must satisfy.
pub fn result_invariants(code: &LinearCode, soft: &SoftChannelOutput, list_size: usize, res: &DecodeResult) -> bool {
    let codebook: Vec<Vec<u8>> = res.found.iter().map(|d| d.codeword.clone()).collect();
    let members = codebook.iter().all(|w| code.syndrome(w).unwrap().iter().all(|&s| s == 0));
    let distinct = codebook.iter().collect::<HashSet<_>>().len() == codebook.len();
    let q_increasing = res.found.windows(2).all(|w| w[0].q < w[1].q);
    let cum_increasing = res.found.windows(2).all(|w| w[0].cumulative <= w[1].cumulative);
    let probs_match = res.found.iter().all(|d: &Decoding| {
        let lp0: f64 = soft.llr().iter().map(|l| -(1.0 + (-l.abs()).exp()).ln()).sum();
        let expect = (lp0 + ln_likelihood_oracle(soft, &d.codeword)).exp();
        (d.prob - expect).abs() <= 1e-12 * expect.max(1e-300) + 1e-300
    });
    members
        && distinct
        && q_increasing
        && cum_increasing
        && probs_match
        && res.found.len() <= list_size
        && res.cumulative_prob <= 1.0 + 1e-12
        && res.found.last().is_none_or(|d| d.q <= res.queries_used)
}
