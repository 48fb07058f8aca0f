//! Noise-effect pattern streams.
//!
//! [`Orbgrand`] yields every subset of bit positions in non-decreasing
//! logistic weight, the sum of the 1-based reliability ranks of the flipped
//! bits. Patterns are built in rank space as integer partitions of the weight
//! into distinct parts no larger than `n`, then mapped to receiver positions.
//! Within one weight, partitions come in increasing number of parts, and for
//! a fixed number of parts in lexicographic order of the ascending part list.
//!
//! [`HardGrand`] yields subsets by Hamming weight, lexicographically within a
//! weight.

use crate::channel::SoftChannelOutput;

/// Positions sorted by ascending reliability `|llr|`, ties broken by index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReliabilityOrder {
    perm: Vec<usize>,
    rank_of: Vec<usize>,
}

impl ReliabilityOrder {
    pub fn from_llrs(llr: &[f64]) -> Self {
        let mut perm: Vec<usize> = (0..llr.len()).collect();
        perm.sort_by(|&a, &b| llr[a].abs().total_cmp(&llr[b].abs()).then(a.cmp(&b)));
        Self::from_perm(perm)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_perm((0..n).collect())
    }

    fn from_perm(perm: Vec<usize>) -> Self {
        let mut rank_of = vec![0; perm.len()];
        for (r, &p) in perm.iter().enumerate() {
            rank_of[p] = r + 1;
        }
        Self { perm, rank_of }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// `perm[r]` is the position with the `(r + 1)`-th smallest reliability.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// 1-based reliability rank of `position`.
    pub fn rank_of(&self, position: usize) -> usize {
        self.rank_of[position]
    }

    pub fn logistic_weight(&self, flips: &[usize]) -> u64 {
        flips.iter().map(|&p| self.rank_of[p] as u64).sum()
    }
}

/// One putative noise effect: the set of flipped positions and its weight
/// in the stream's ordering (logistic weight for ORBGRAND, Hamming weight
/// for hard-detection GRAND).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NoisePattern {
    pub flips: Vec<usize>,
    pub weight: u64,
}

/// A single-consumer source of noise patterns that reuses its buffer.
pub trait PatternStream {
    fn block_len(&self) -> usize;

    /// Moves to the next pattern, or returns `None` once every subset has
    /// been produced.
    fn advance(&mut self) -> Option<&NoisePattern>;
}

/// Basic ORBGRAND pattern generator.
#[derive(Debug, Clone)]
pub struct Orbgrand {
    order: ReliabilityOrder,
    weight: u64,
    max_weight: u64,
    parts: Vec<usize>,
    started: bool,
    done: bool,
    current: NoisePattern,
}

impl Orbgrand {
    pub fn new(order: ReliabilityOrder) -> Self {
        let n = order.len() as u64;
        Self {
            order,
            weight: 0,
            max_weight: n * (n + 1) / 2,
            parts: Vec::new(),
            started: false,
            done: false,
            current: NoisePattern::default(),
        }
    }

    pub fn from_soft(soft: &SoftChannelOutput) -> Self {
        Self::new(ReliabilityOrder::from_llrs(soft.llr()))
    }

    pub fn order(&self) -> &ReliabilityOrder {
        &self.order
    }

    fn emit(&mut self) -> &NoisePattern {
        self.current.flips.clear();
        let perm = &self.order.perm;
        self.current.flips.extend(self.parts.iter().map(|&r| perm[r - 1]));
        self.current.weight = self.weight;
        &self.current
    }

    fn step(&mut self) -> bool {
        let n = self.order.len();
        let w = self.weight as usize;
        if !self.parts.is_empty() && next_distinct_partition(&mut self.parts, n) {
            return true;
        }
        let mut m = self.parts.len();
        let mut w = w;
        loop {
            m += 1;
            if m > n || m * (m + 1) / 2 > w {
                w += 1;
                if w as u64 > self.max_weight {
                    return false;
                }
                m = 0;
                self.parts.clear();
                continue;
            }
            self.parts.resize(m, 0);
            if fill_smallest(&mut self.parts, 0, 1, w, n) {
                self.weight = w as u64;
                return true;
            }
        }
    }
}

/// Writes the lexicographically smallest ascending run of
/// `parts.len() - start` distinct values in `[lo, n]` summing to `sum` into
/// `parts[start..]`. Returns false if none exists.
fn fill_smallest(parts: &mut [usize], start: usize, lo: usize, sum: usize, n: usize) -> bool {
    let mut lo = lo as i64;
    let mut sum = sum as i64;
    let n = n as i64;
    let count = parts.len() - start;
    for i in 0..count {
        let rest = (count - i - 1) as i64;
        let max_rest = rest * n - rest * (rest - 1) / 2;
        let v = lo.max(sum - max_rest);
        if v > n {
            return false;
        }
        let min_rest = rest * (v + 1) + rest * (rest - 1) / 2;
        if sum - v < min_rest || (rest == 0 && sum != v) {
            return false;
        }
        parts[start + i] = v as usize;
        sum -= v;
        lo = v + 1;
    }
    sum == 0
}

/// Advances an ascending distinct-part partition to its lexicographic
/// successor with the same length, sum and part bound.
fn next_distinct_partition(parts: &mut [usize], n: usize) -> bool {
    let m = parts.len();
    if m < 2 {
        return false;
    }
    let total: usize = parts.iter().sum();
    for i in (0..m - 1).rev() {
        let prefix: usize = parts[..i].iter().sum();
        let v = parts[i] + 1;
        if prefix + v > total {
            continue;
        }
        let saved = parts[i];
        parts[i] = v;
        if fill_smallest(parts, i + 1, v + 1, total - prefix - v, n) {
            return true;
        }
        parts[i] = saved;
    }
    false
}

impl PatternStream for Orbgrand {
    fn block_len(&self) -> usize {
        self.order.len()
    }

    fn advance(&mut self) -> Option<&NoisePattern> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.emit());
        }
        if self.step() {
            Some(self.emit())
        } else {
            self.done = true;
            None
        }
    }
}

impl Iterator for Orbgrand {
    type Item = NoisePattern;

    fn next(&mut self) -> Option<NoisePattern> {
        self.advance().cloned()
    }
}

/// Hard-detection GRAND: Hamming weight order, lexicographic within weight.
#[derive(Debug, Clone)]
pub struct HardGrand {
    n: usize,
    started: bool,
    done: bool,
    current: NoisePattern,
}

impl HardGrand {
    pub fn new(n: usize) -> Self {
        Self { n, started: false, done: false, current: NoisePattern::default() }
    }

    fn step(&mut self) -> bool {
        let n = self.n;
        let flips = &mut self.current.flips;
        let h = flips.len();
        // Rightmost position that can still move right.
        if let Some(i) = (0..h).rev().find(|&i| flips[i] < n - h + i) {
            flips[i] += 1;
            for j in i + 1..h {
                flips[j] = flips[j - 1] + 1;
            }
            return true;
        }
        if h == n {
            return false;
        }
        flips.clear();
        flips.extend(0..h + 1);
        self.current.weight = (h + 1) as u64;
        true
    }
}

impl PatternStream for HardGrand {
    fn block_len(&self) -> usize {
        self.n
    }

    fn advance(&mut self) -> Option<&NoisePattern> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.current);
        }
        if self.step() {
            Some(&self.current)
        } else {
            self.done = true;
            None
        }
    }
}

impl Iterator for HardGrand {
    type Item = NoisePattern;

    fn next(&mut self) -> Option<NoisePattern> {
        self.advance().cloned()
    }
}

/// Evaluates `P(N^n = z)` for flip sets against fixed soft information, as
/// `P(N^n = 0) · exp(-Σ |llr_i|)` over flipped positions.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    ln_prob_no_flips: f64,
    abs_llr: Vec<f64>,
}

impl NoiseModel {
    pub fn new(soft: &SoftChannelOutput) -> Self {
        Self { ln_prob_no_flips: soft.ln_prob_no_flips(), abs_llr: soft.llr().iter().map(|l| l.abs()).collect() }
    }

    #[inline]
    pub fn probability(&self, flips: &[usize]) -> f64 {
        let penalty: f64 = flips.iter().map(|&f| self.abs_llr[f]).sum();
        (self.ln_prob_no_flips - penalty).exp()
    }
}

/// One guesswork query.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryRecord {
    /// 1-based query index.
    pub q: u64,
    pub pattern: NoisePattern,
    /// `P(N^n = pattern)`.
    pub prob: f64,
}

/// Decorates a pattern stream with query indices and probabilities.
pub struct QueryRecords<S> {
    stream: S,
    model: NoiseModel,
    q: u64,
}

pub fn query_records<S: PatternStream>(stream: S, soft: &SoftChannelOutput) -> QueryRecords<S> {
    assert_eq!(stream.block_len(), soft.len(), "stream and soft output lengths differ");
    QueryRecords { stream, model: NoiseModel::new(soft), q: 0 }
}

impl<S: PatternStream> Iterator for QueryRecords<S> {
    type Item = QueryRecord;

    fn next(&mut self) -> Option<QueryRecord> {
        let pattern = self.stream.advance()?.clone();
        self.q += 1;
        let prob = self.model.probability(&pattern.flips);
        Some(QueryRecord { q: self.q, pattern, prob })
    }
}
