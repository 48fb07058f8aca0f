//! Order statistics of `2^k - 1` draws without replacement from
//! `{1, ..., 2^n - 1}`.
//!
//! With `N = 2^n - 1` and `M = 2^k - 1` draws, the smallest `L` draws equal
//! `q_1 < ... < q_L` exactly when the other `M - L` draws all land above
//! `q_L`, so
//!
//! ```text
//! P(W_(1..L) = q)                    = C(N - q_L, M - L) / C(N, M)
//! P(W_(1..L-1) = q_(1..L-1), W_(L) >= q_L) = C(N - q_L + 1, M - L + 1) / C(N, M)
//! ```
//!
//! Neither depends on `q_1 .. q_(L-1)` beyond their validity. Both are
//! provided exactly over the rationals for small `n`, and in log space for
//! `n` up to 64, where the binomials themselves are far outside any float
//! range but their ratios are not.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use statrs::function::gamma::ln_gamma;

use super::SoftOutputError;

/// Largest `n` accepted by the exact rational routines.
pub const MAX_EXACT_N: u32 = 12;

/// A candidate list position vector for the order statistics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderStatQuery {
    pub n: u32,
    pub k: u32,
    pub q: Vec<u64>,
}

impl OrderStatQuery {
    pub fn new(n: u32, k: u32, q: Vec<u64>) -> Result<Self, SoftOutputError> {
        let query = Self { n, k, q };
        query.validate()?;
        Ok(query)
    }

    pub fn list_len(&self) -> usize {
        self.q.len()
    }

    pub fn last(&self) -> u64 {
        *self.q.last().expect("validated non-empty")
    }

    pub fn validate(&self) -> Result<(), SoftOutputError> {
        validate_dims(self.n, self.k)?;
        let invalid = |msg: String| Err(SoftOutputError::InvalidQuery(msg));
        if self.q.is_empty() {
            return invalid("empty query list".into());
        }
        if self.q[0] < 1 {
            return invalid("query indices start at 1".into());
        }
        if self.q.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("query indices must be strictly increasing".into());
        }
        let big_n = (1u128 << self.n) - 1;
        if u128::from(self.last()) > big_n {
            return invalid(format!("q_L = {} exceeds 2^n - 1", self.last()));
        }
        let big_m = (1u128 << self.k) - 1;
        if self.q.len() as u128 > big_m {
            return invalid(format!("list length {} exceeds 2^k - 1", self.q.len()));
        }
        Ok(())
    }
}

pub(crate) fn validate_dims(n: u32, k: u32) -> Result<(), SoftOutputError> {
    if n == 0 || n > 64 || k == 0 || k >= n {
        return Err(SoftOutputError::InvalidDimensions { n, k });
    }
    Ok(())
}

fn binomial(a: u64, b: u64) -> BigUint {
    if b > a {
        return BigUint::zero();
    }
    let b = b.min(a - b);
    let mut acc = BigUint::one();
    for j in 0..b {
        acc *= a - j;
        acc /= j + 1;
    }
    acc
}

fn exact_ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(num.into(), den.into())
}

fn check_exact(query: &OrderStatQuery) -> Result<(u64, u64), SoftOutputError> {
    query.validate()?;
    if query.n > MAX_EXACT_N {
        return Err(SoftOutputError::Infeasible { n: query.n });
    }
    Ok(((1u64 << query.n) - 1, (1u64 << query.k) - 1))
}

/// `P(W_(1..L) = q)` as an exact rational.
pub fn order_stat_pmf_exact(query: &OrderStatQuery) -> Result<BigRational, SoftOutputError> {
    let (big_n, big_m) = check_exact(query)?;
    let (q_last, l) = (query.last(), query.list_len() as u64);
    Ok(exact_ratio(binomial(big_n - q_last, big_m - l), binomial(big_n, big_m)))
}

/// `P(W_(1..L-1) = q_(1..L-1), W_(L) >= q_L)` as an exact rational.
pub fn order_stat_tail_pmf_exact(query: &OrderStatQuery) -> Result<BigRational, SoftOutputError> {
    let (big_n, big_m) = check_exact(query)?;
    let (q_last, l) = (query.last(), query.list_len() as u64);
    Ok(exact_ratio(binomial(big_n - q_last + 1, big_m - l + 1), binomial(big_n, big_m)))
}

/// `ln P(W_(1..L) = q)`.
pub fn ln_order_stat_pmf(query: &OrderStatQuery) -> Result<f64, SoftOutputError> {
    query.validate()?;
    Ok(ln_pmf_unchecked(query.n, query.k, query.last(), query.list_len() as u64))
}

/// `ln P(W_(1..L-1) = q_(1..L-1), W_(L) >= q_L)`.
pub fn ln_order_stat_tail_pmf(query: &OrderStatQuery) -> Result<f64, SoftOutputError> {
    query.validate()?;
    Ok(ln_tail_unchecked(query.n, query.k, query.last(), query.list_len() as u64))
}

pub fn order_stat_pmf(query: &OrderStatQuery) -> Result<f64, SoftOutputError> {
    ln_order_stat_pmf(query).map(f64::exp)
}

pub fn order_stat_tail_pmf(query: &OrderStatQuery) -> Result<f64, SoftOutputError> {
    ln_order_stat_tail_pmf(query).map(f64::exp)
}

fn pow2(e: u32) -> f64 {
    2f64.powi(e as i32)
}

/// `ln [C(N - q, M - l) / C(N, M)]`, `-inf` outside the support.
///
/// Expanded as `M^(l) (N - M)^(q - l) / N^(q)` with falling factorials, so
/// no astronomically large intermediate is formed.
pub(crate) fn ln_pmf_unchecked(n: u32, k: u32, q_last: u64, l: u64) -> f64 {
    let big_n = (1u128 << n) - 1;
    let big_m = (1u128 << k) - 1;
    let (q, l128) = (u128::from(q_last), u128::from(l));
    if l128 > big_m || q > big_n || q < l128 || q - l128 > big_n - big_m {
        return f64::NEG_INFINITY;
    }
    let m_f = pow2(k) - 1.0;
    let n_f = pow2(n) - 1.0;
    let gap = pow2(n) - pow2(k);
    ln_falling(m_f, l as f64) + ln_falling(gap, (q_last - l) as f64) - ln_falling(n_f, q_last as f64)
}

pub(crate) fn ln_tail_unchecked(n: u32, k: u32, q_last: u64, l: u64) -> f64 {
    if q_last == 0 || l == 0 {
        return f64::NEG_INFINITY;
    }
    ln_pmf_unchecked(n, k, q_last - 1, l - 1)
}

/// `ln [a (a - 1) ... (a - m + 1)]` for integer-valued `m >= 0`, `a >= m - 1`.
pub fn ln_falling(a: f64, m: f64) -> f64 {
    if m <= 0.0 {
        return 0.0;
    }
    if m <= 2048.0 {
        let steps = m as u64;
        return (0..steps).map(|j| (a - j as f64).ln()).sum();
    }
    let b = a - m;
    if b + 1.0 >= 1e6 {
        stirling_ln_gamma_diff(b + 1.0, m)
    } else {
        ln_gamma(a + 1.0) - ln_gamma(b + 1.0)
    }
}

/// `lnΓ(x + d) - lnΓ(x)` for large `x`, grouping the Stirling series so the
/// large leading terms cancel analytically. `d` is passed separately since
/// `x + d` may not be representable.
fn stirling_ln_gamma_diff(x: f64, d: f64) -> f64 {
    let growth = (d / x).ln_1p();
    let x1 = x + d;
    let lead = (x - 0.5) * growth + d * (x.ln() + growth) - d;
    let series = |x: f64| 1.0 / (12.0 * x) - 1.0 / (360.0 * x * x * x);
    lead + series(x1) - series(x)
}
