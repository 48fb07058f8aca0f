//! Binary linear block codes.
//!
//! A [`LinearCode`] is defined by its `(n - k) x n` parity-check matrix. A
//! systematic generator is derived from it by Gaussian elimination, choosing
//! pivots from the rightmost columns so that codes whose trailing `n - k`
//! columns are invertible encode with the message in the first `k` bits.
//!
//! Three families are constructed here: random linear codes, CRC codes and
//! extended BCH codes of length 64. [`RandomCodebook`] is a non-linear
//! codebook of distinct uniformly drawn words, used to check the a-posteriori
//! formulas under the exact assumptions they are derived for.

mod bch;
mod matrix;

use std::collections::HashSet;
use std::fs;
use std::io;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use matrix::{pack, unpack, BitMatrix};

#[derive(Debug, Error)]
pub enum CodeError {
    #[error("invalid code dimensions n={n}, k={k}")]
    InvalidDimensions { n: usize, k: usize },
    #[error("parity-check matrix has rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },
    #[error("word has length {got}, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("word contains a symbol other than 0 or 1")]
    NonBinary,
    #[error("CRC polynomial has degree {degree}, expected n - k = {expected}")]
    DegreeMismatch { degree: usize, expected: usize },
    #[error("CRC polynomial must have a non-zero constant term")]
    ZeroConstantTerm,
    #[error("no extended BCH code with n={n}, k={k}")]
    UnsupportedBch { n: usize, k: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Default CRC-8 generator for CRC(64, 56): x^8 + x^6 + x^3 + x^2 + 1
/// (0xA6 in Koopman notation).
pub const DEFAULT_CRC8_POLY: u64 = 0x14D;

/// Converts a Koopman-notation CRC polynomial (implicit `+1`) into the full
/// form with the leading term present.
pub fn koopman_to_full(koopman: u64) -> u64 {
    (koopman << 1) | 1
}

/// An `(n, k)` binary linear code.
///
/// Immutable after construction and safe to share between threads.
#[derive(Debug, Clone)]
pub struct LinearCode {
    n: usize,
    k: usize,
    parity_check: BitMatrix,
    generator: BitMatrix,
    info_positions: Vec<usize>,
    syndrome_stride: usize,
    packed_columns: Vec<u64>,
}

impl LinearCode {
    /// Builds a code from a full-rank parity-check matrix.
    pub fn from_parity_check(h: BitMatrix) -> Result<Self, CodeError> {
        let n = h.cols();
        let r = h.rows();
        if r >= n {
            return Err(CodeError::InvalidDimensions { n, k: n.saturating_sub(r) });
        }
        let k = n - r;

        // Pivots taken right to left become the parity positions.
        let mut reduced = h.clone();
        let pivots = reduced.reduce_with_order((0..n).rev());
        if pivots.len() != r {
            return Err(CodeError::RankDeficient { rank: pivots.len(), expected: r });
        }
        let mut is_pivot = vec![false; n];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let info_positions: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();

        let mut generator = BitMatrix::zeros(k, n);
        for (row, &info) in info_positions.iter().enumerate() {
            generator.set(row, info, true);
            for (prow, &p) in pivots.iter().enumerate() {
                if reduced.get(prow, info) {
                    generator.set(row, p, true);
                }
            }
        }
        debug_assert!(generator.mul_transpose(&h).is_zero());

        let (syndrome_stride, packed_columns) = h.packed_columns();
        Ok(Self { n, k, parity_check: h, generator, info_positions, syndrome_stride, packed_columns })
    }

    /// Builds a code from a full-rank generator matrix. The stored generator
    /// is re-derived in systematic form from the resulting parity checks.
    pub fn from_generator(g: BitMatrix) -> Result<Self, CodeError> {
        let (n, k) = (g.cols(), g.rows());
        if k == 0 || k >= n {
            return Err(CodeError::InvalidDimensions { n, k });
        }
        let rank = g.rank();
        if rank != k {
            return Err(CodeError::RankDeficient { rank, expected: k });
        }
        let h = g.null_space().ok_or(CodeError::InvalidDimensions { n, k })?;
        Self::from_parity_check(h)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn parity_check(&self) -> &BitMatrix {
        &self.parity_check
    }

    pub fn generator(&self) -> &BitMatrix {
        &self.generator
    }

    /// Codeword positions carrying the message bits, ascending.
    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    fn check_word(&self, word: &[u8], expected: usize) -> Result<(), CodeError> {
        if word.len() != expected {
            return Err(CodeError::LengthMismatch { got: word.len(), expected });
        }
        if word.iter().any(|&b| b > 1) {
            return Err(CodeError::NonBinary);
        }
        Ok(())
    }

    pub fn syndrome(&self, word: &[u8]) -> Result<Vec<u8>, CodeError> {
        self.check_word(word, self.n)?;
        Ok(self.parity_check.mul_vec(word))
    }

    /// True iff `H · word = 0`.
    pub fn is_codeword(&self, word: &[u8]) -> Result<bool, CodeError> {
        Ok(self.syndrome(word)?.iter().all(|&s| s == 0))
    }

    /// Systematic encoding `message · G`.
    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>, CodeError> {
        self.check_word(message, self.k)?;
        Ok(self.generator.vec_mul(message))
    }

    /// Reads the message back out of a codeword's information positions.
    pub fn extract_message(&self, codeword: &[u8]) -> Result<Vec<u8>, CodeError> {
        self.check_word(codeword, self.n)?;
        Ok(self.info_positions.iter().map(|&p| codeword[p]).collect())
    }

    /// Minimum distance by exhaustive enumeration of the codebook.
    ///
    /// # Panics
    ///
    /// Panics for `k > 24`.
    pub fn minimum_distance(&self) -> usize {
        assert!(self.k <= 24, "exhaustive minimum distance needs k <= 24");
        let rows: Vec<Vec<u64>> = (0..self.k).map(|r| self.generator.row_words(r).to_vec()).collect();
        let mut acc = vec![0u64; rows[0].len()];
        let mut best = usize::MAX;
        // Gray-code walk over all non-zero messages.
        for i in 1u64..(1u64 << self.k) {
            let flip = i.trailing_zeros() as usize;
            for (a, w) in acc.iter_mut().zip(&rows[flip]) {
                *a ^= w;
            }
            let weight: u32 = acc.iter().map(|w| w.count_ones()).sum();
            best = best.min(weight as usize);
        }
        best
    }

    /// Writes the parity-check matrix in the plain-text format read by
    /// [`load_parity_check`].
    pub fn save_parity_check(&self, path: impl AsRef<Path>) -> Result<(), CodeError> {
        fs::write(path, self.parity_check_text())?;
        Ok(())
    }

    /// First line `n k`, then `n - k` lines of `n` characters `0`/`1`.
    pub fn parity_check_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.k);
        for r in 0..self.parity_check.rows() {
            out.extend(self.parity_check.row(r).iter().map(|&b| if b == 1 { '1' } else { '0' }));
            out.push('\n');
        }
        out
    }
}

/// Random linear code: a uniformly drawn `(n - k) x n` parity-check matrix,
/// redrawn until it has full rank. Deterministic in `seed`.
pub fn random_linear_code(n: usize, k: usize, seed: u64) -> Result<LinearCode, CodeError> {
    if k == 0 || k >= n {
        return Err(CodeError::InvalidDimensions { n, k });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut h = BitMatrix::zeros(n - k, n);
        for r in 0..n - k {
            for c in 0..n {
                if rng.random::<bool>() {
                    h.set(r, c, true);
                }
            }
        }
        match LinearCode::from_parity_check(h) {
            Ok(code) => return Ok(code),
            Err(CodeError::RankDeficient { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
}

/// Systematic CRC code: the last `n - k` bits are the remainder of
/// `M(x) x^(n-k)` modulo `poly`, where the first message bit is the highest
/// degree coefficient of `M(x)`. `poly` is given in full form, leading term
/// included (e.g. `0x107` for x^8 + x^2 + x + 1).
pub fn crc_code(n: usize, k: usize, poly: u64) -> Result<LinearCode, CodeError> {
    if k == 0 || k >= n {
        return Err(CodeError::InvalidDimensions { n, k });
    }
    let r = n - k;
    if poly == 0 {
        return Err(CodeError::DegreeMismatch { degree: 0, expected: r });
    }
    let degree = 63 - poly.leading_zeros() as usize;
    if degree != r {
        return Err(CodeError::DegreeMismatch { degree, expected: r });
    }
    if poly & 1 == 0 {
        return Err(CodeError::ZeroConstantTerm);
    }

    // x^e mod poly, for e = r .. r + k - 1, as r-bit values.
    let top = 1u64 << (r - 1);
    let low_mask = if r == 64 { u64::MAX } else { (1u64 << r) - 1 };
    let mut remainders = Vec::with_capacity(k);
    let mut rem = poly & low_mask; // x^r mod poly
    for _ in 0..k {
        remainders.push(rem);
        let carry = rem & top != 0;
        rem = (rem << 1) & low_mask;
        if carry {
            rem ^= poly & low_mask;
        }
    }

    let mut h = BitMatrix::zeros(r, n);
    for j in 0..k {
        // Message bit j multiplies x^(k - 1 - j + r).
        let rem = remainders[k - 1 - j];
        for i in 0..r {
            // Row i checks the coefficient of x^(r - 1 - i).
            if (rem >> (r - 1 - i)) & 1 == 1 {
                h.set(i, j, true);
            }
        }
    }
    for i in 0..r {
        h.set(i, k + i, true);
    }
    LinearCode::from_parity_check(h)
}

/// Extended BCH code of length 64: a narrow-sense BCH code of length 63 over
/// GF(2^6) (primitive polynomial x^6 + x + 1) with an overall parity bit
/// appended. Supported dimensions are those reachable by some designed
/// distance, including 57 and 51.
pub fn ebch_code(n: usize, k: usize) -> Result<LinearCode, CodeError> {
    if n != 64 {
        return Err(CodeError::UnsupportedBch { n, k });
    }
    let g = bch::generator_polynomial(k).ok_or(CodeError::UnsupportedBch { n, k })?;
    let mut gen = BitMatrix::zeros(k, n);
    for row in 0..k {
        let mut parity = false;
        for (d, &c) in g.iter().enumerate() {
            if c == 1 {
                gen.set(row, row + d, true);
                parity = !parity;
            }
        }
        gen.set(row, 63, parity);
    }
    LinearCode::from_generator(gen)
}

/// Reads a parity-check matrix in the format written by
/// [`LinearCode::save_parity_check`].
pub fn load_parity_check(path: impl AsRef<Path>) -> Result<LinearCode, CodeError> {
    parse_parity_check(&fs::read_to_string(path)?)
}

pub fn parse_parity_check(text: &str) -> Result<LinearCode, CodeError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(CodeError::Parse { line: 1, msg: "empty file".into() })?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| CodeError::Parse { line: 1, msg: format!("bad header: {e}") })?;
    let [n, k] = dims[..] else {
        return Err(CodeError::Parse { line: 1, msg: "header must be `n k`".into() });
    };
    if k == 0 || k >= n {
        return Err(CodeError::InvalidDimensions { n, k });
    }
    let mut rows = Vec::with_capacity(n - k);
    for (idx, line) in lines {
        let line = line.trim();
        let row: Vec<u8> = line
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(CodeError::Parse { line: idx + 1, msg: format!("unexpected character {other:?}") }),
            })
            .collect::<Result<_, _>>()?;
        if row.len() != n {
            return Err(CodeError::Parse {
                line: idx + 1,
                msg: format!("row has {} entries, expected {n}", row.len()),
            });
        }
        rows.push(row);
    }
    if rows.len() != n - k {
        return Err(CodeError::Parse {
            line: text.lines().count(),
            msg: format!("found {} rows, expected {}", rows.len(), n - k),
        });
    }
    let h = BitMatrix::from_rows(&rows).expect("rows validated above");
    LinearCode::from_parity_check(h)
}

/// Incremental membership test against a fixed hard-decision word: asks
/// whether `hard ⊕ pattern` is a codeword.
pub trait MembershipProbe {
    fn hits(&mut self, flips: &[usize]) -> bool;
}

/// Anything a GRAND decoder can query for membership.
pub trait Codebook: Sync {
    type Probe<'a>: MembershipProbe
    where
        Self: 'a;

    fn length(&self) -> usize;
    fn dimension(&self) -> usize;
    fn contains(&self, word: &[u8]) -> bool;
    fn probe(&self, hard: &[u8]) -> Self::Probe<'_>;
}

/// Syndrome-update probe for linear codes.
pub struct SyndromeProbe<'a> {
    stride: usize,
    columns: &'a [u64],
    target: Vec<u64>,
    scratch: Vec<u64>,
}

impl MembershipProbe for SyndromeProbe<'_> {
    #[inline]
    fn hits(&mut self, flips: &[usize]) -> bool {
        if self.stride == 1 {
            let s = flips.iter().fold(self.target[0], |s, &f| s ^ self.columns[f]);
            return s == 0;
        }
        self.scratch.copy_from_slice(&self.target);
        for &f in flips {
            let col = &self.columns[f * self.stride..(f + 1) * self.stride];
            for (s, c) in self.scratch.iter_mut().zip(col) {
                *s ^= c;
            }
        }
        self.scratch.iter().all(|&w| w == 0)
    }
}

impl Codebook for LinearCode {
    type Probe<'a> = SyndromeProbe<'a>;

    fn length(&self) -> usize {
        self.n
    }

    fn dimension(&self) -> usize {
        self.k
    }

    fn contains(&self, word: &[u8]) -> bool {
        self.is_codeword(word).unwrap_or(false)
    }

    fn probe(&self, hard: &[u8]) -> SyndromeProbe<'_> {
        assert_eq!(hard.len(), self.n, "hard decision length mismatch");
        let mut target = vec![0u64; self.syndrome_stride];
        for (c, &b) in hard.iter().enumerate() {
            if b & 1 == 1 {
                let col = &self.packed_columns[c * self.syndrome_stride..(c + 1) * self.syndrome_stride];
                for (t, w) in target.iter_mut().zip(col) {
                    *t ^= w;
                }
            }
        }
        SyndromeProbe { stride: self.syndrome_stride, columns: &self.packed_columns, scratch: target.clone(), target }
    }
}

/// `2^k` distinct words drawn uniformly from `{0,1}^n`, for `n <= 64`.
#[derive(Debug, Clone)]
pub struct RandomCodebook {
    n: usize,
    k: usize,
    words: Vec<u64>,
    lookup: HashSet<u64>,
}

impl RandomCodebook {
    pub fn draw<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Self, CodeError> {
        if n == 0 || n > 64 || k >= n {
            return Err(CodeError::InvalidDimensions { n, k });
        }
        let size = 1usize << k;
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let mut lookup = HashSet::with_capacity(size);
        let mut words = Vec::with_capacity(size);
        while words.len() < size {
            let w = rng.random::<u64>() & mask;
            if lookup.insert(w) {
                words.push(w);
            }
        }
        Ok(Self { n, k, words, lookup })
    }

    pub fn size(&self) -> usize {
        self.words.len()
    }

    pub fn word(&self, index: usize) -> Vec<u8> {
        unpack(&[self.words[index]], self.n)
    }
}

pub struct SetProbe<'a> {
    hard: u64,
    lookup: &'a HashSet<u64>,
}

impl MembershipProbe for SetProbe<'_> {
    fn hits(&mut self, flips: &[usize]) -> bool {
        let w = flips.iter().fold(self.hard, |w, &f| w ^ (1u64 << f));
        self.lookup.contains(&w)
    }
}

impl Codebook for RandomCodebook {
    type Probe<'a> = SetProbe<'a>;

    fn length(&self) -> usize {
        self.n
    }

    fn dimension(&self) -> usize {
        self.k
    }

    fn contains(&self, word: &[u8]) -> bool {
        word.len() == self.n && self.lookup.contains(&pack(word)[0])
    }

    fn probe(&self, hard: &[u8]) -> SetProbe<'_> {
        assert_eq!(hard.len(), self.n, "hard decision length mismatch");
        SetProbe { hard: pack(hard)[0], lookup: &self.lookup }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_messages(k: usize) -> impl Iterator<Item = Vec<u8>> {
        (0u64..1 << k).map(move |m| unpack(&[m], k))
    }

    #[test]
    fn tiny_random_code_has_nonzero_check() {
        for seed in 0..20 {
            let code = random_linear_code(2, 1, seed).unwrap();
            assert_eq!(code.parity_check().rows(), 1);
            assert_ne!(code.parity_check().row(0), vec![0, 0]);
        }
    }

    #[test]
    fn random_code_64_57_full_rank() {
        let code = random_linear_code(64, 57, 7).unwrap();
        assert_eq!(code.parity_check().rank(), 7);
        assert_eq!(code.generator().rank(), 57);
        assert!(code.generator().mul_transpose(code.parity_check()).is_zero());
    }

    #[test]
    fn random_code_is_deterministic() {
        let a = random_linear_code(20, 11, 99).unwrap();
        let b = random_linear_code(20, 11, 99).unwrap();
        assert_eq!(a.parity_check(), b.parity_check());
        let c = random_linear_code(20, 11, 100).unwrap();
        assert_ne!(a.parity_check(), c.parity_check());
    }

    #[test]
    fn random_code_8_4_codebook_enumeration() {
        let code = random_linear_code(8, 4, 3).unwrap();
        let words: HashSet<Vec<u8>> = all_messages(4).map(|m| code.encode(&m).unwrap()).collect();
        assert_eq!(words.len(), 16);
        assert!(words.iter().all(|w| code.is_codeword(w).unwrap()));
    }

    #[test]
    fn invalid_dimensions_rejected() {
        assert!(matches!(random_linear_code(4, 4, 0), Err(CodeError::InvalidDimensions { .. })));
        assert!(matches!(random_linear_code(4, 0, 0), Err(CodeError::InvalidDimensions { .. })));
        assert!(matches!(crc_code(4, 4, 0b11), Err(CodeError::InvalidDimensions { .. })));
    }

    #[test]
    fn parity_crc_is_even_weight_code() {
        let code = crc_code(4, 3, 0b11).unwrap();
        for w in 0u64..16 {
            let word = unpack(&[w], 4);
            assert_eq!(code.is_codeword(&word).unwrap(), w.count_ones() % 2 == 0);
        }
    }

    #[test]
    fn crc_polynomial_validation() {
        assert!(matches!(crc_code(64, 56, 0x107 >> 1), Err(CodeError::DegreeMismatch { degree: 7, .. })));
        assert!(matches!(crc_code(64, 56, 0x106), Err(CodeError::ZeroConstantTerm)));
        assert_eq!(koopman_to_full(0xA6), DEFAULT_CRC8_POLY);
    }

    #[test]
    fn crc_64_56_all_encodings_pass() {
        let code = crc_code(64, 56, DEFAULT_CRC8_POLY).unwrap();
        assert_eq!(code.info_positions(), &(0..56).collect::<Vec<_>>()[..]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let m: Vec<u8> = (0..56).map(|_| rng.random::<bool>() as u8).collect();
            let c = code.encode(&m).unwrap();
            assert_eq!(&c[..56], &m[..]);
            assert!(code.is_codeword(&c).unwrap());
        }
    }

    #[test]
    fn ebch_dimensions() {
        let c57 = ebch_code(64, 57).unwrap();
        assert_eq!(c57.parity_check().rank(), 7);
        let c51 = ebch_code(64, 51).unwrap();
        assert_eq!(c51.parity_check().rank(), 13);
        for code in [&c57, &c51] {
            assert!(code.generator().mul_transpose(code.parity_check()).is_zero());
        }
        assert!(matches!(ebch_code(64, 56), Err(CodeError::UnsupportedBch { .. })));
        assert!(matches!(ebch_code(32, 26), Err(CodeError::UnsupportedBch { .. })));
    }

    #[test]
    fn codeword_checks() {
        let code = random_linear_code(12, 6, 5).unwrap();
        assert!(code.is_codeword(&[0; 12]).unwrap());
        assert!(matches!(code.is_codeword(&[0; 11]), Err(CodeError::LengthMismatch { got: 11, expected: 12 })));
        assert!(matches!(code.is_codeword(&[2; 12]), Err(CodeError::NonBinary)));
        assert!(matches!(code.encode(&[0; 5]), Err(CodeError::LengthMismatch { .. })));
        assert_eq!(code.encode(&[0; 6]).unwrap(), vec![0; 12]);
    }

    #[test]
    fn single_flip_detected_when_dmin_at_least_two() {
        let code = random_linear_code(10, 5, 11).unwrap();
        if code.minimum_distance() < 2 {
            return;
        }
        // Exhaustive codebook as the oracle.
        let book: HashSet<Vec<u8>> = all_messages(5).map(|m| code.encode(&m).unwrap()).collect();
        for cw in &book {
            for i in 0..10 {
                let mut w = cw.clone();
                w[i] ^= 1;
                assert!(!book.contains(&w));
                assert!(!code.is_codeword(&w).unwrap());
            }
        }
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_parity_check(""), Err(CodeError::Parse { .. })));
        assert!(matches!(parse_parity_check("4 2\n1100\n"), Err(CodeError::Parse { .. })));
        assert!(matches!(parse_parity_check("4 2\n1100\n01x1\n"), Err(CodeError::Parse { line: 3, .. })));
        assert!(matches!(parse_parity_check("4 2\n1100\n011\n"), Err(CodeError::Parse { .. })));
        assert!(matches!(parse_parity_check("4\n1100\n"), Err(CodeError::Parse { line: 1, .. })));
        assert!(matches!(
            parse_parity_check("4 2\n1101\n1101\n"),
            Err(CodeError::RankDeficient { rank: 1, expected: 2 })
        ));
    }

    #[test]
    fn probes_agree_with_contains() {
        let code = random_linear_code(70, 60, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m: Vec<u8> = (0..60).map(|_| rng.random::<bool>() as u8).collect();
        let c = code.encode(&m).unwrap();
        let mut hard = c.clone();
        hard[3] ^= 1;
        hard[65] ^= 1;
        let mut probe = code.probe(&hard);
        assert!(!probe.hits(&[]));
        assert!(!probe.hits(&[3]));
        assert!(probe.hits(&[3, 65]));

        let book = RandomCodebook::draw(10, 3, &mut rng).unwrap();
        assert_eq!(book.size(), 8);
        let w = book.word(5);
        assert!(book.contains(&w));
        let mut hard = w.clone();
        hard[0] ^= 1;
        let mut probe = book.probe(&hard);
        assert!(probe.hits(&[0]));
    }
}
