mod common;

use common::*;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use softgrand::bitcodes::{random_linear_code, Codebook, RandomCodebook};
use softgrand::channel::{noise_variance, transmit_with_rng, SoftChannelOutput};
use softgrand::decoder::{grand_decode, DecodeConfig, DecodeResult};
use softgrand::softoutput::{
    approx_single_error_prob, exact_list_error_prob, order_stat_pmf, order_stat_pmf_exact, order_stat_tail_pmf,
    order_stat_tail_pmf_exact, Estimator, OrderStatQuery,
};

/// One transmission over a freshly drawn random codebook.
fn random_codebook_trial(
    n: usize,
    k: usize,
    ebn0_db: f64,
    list_size: usize,
    rng: &mut ChaCha8Rng,
) -> (DecodeResult, SoftChannelOutput, Vec<u8>) {
    let book = RandomCodebook::draw(n, k, rng).unwrap();
    let sent = book.word(rng.random_range(0..book.size()));
    let soft = transmit_with_rng(&sent, noise_variance(ebn0_db, k as f64 / n as f64), rng);
    let res = grand_decode(&book, &soft, &DecodeConfig::with_list_size(list_size)).unwrap();
    (res, soft, sent)
}

#[test]
fn log_space_order_statistics_match_rationals() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..2000 {
        let n = rng.random_range(2..=12u32);
        let k = rng.random_range(1..n);
        let big_n = (1u64 << n) - 1;
        let l = rng.random_range(1..=((1u64 << k) - 1).min(4)) as usize;
        let mut q: Vec<u64> = Vec::new();
        while q.len() < l {
            let v = rng.random_range(1..=big_n);
            if !q.contains(&v) {
                q.push(v);
            }
        }
        q.sort_unstable();
        let query = OrderStatQuery::new(n, k, q).unwrap();
        let exact = order_stat_pmf_exact(&query).unwrap().to_f64().unwrap();
        let approx = order_stat_pmf(&query).unwrap();
        assert!((approx - exact).abs() <= 1e-10 * exact, "{query:?}: {approx} vs {exact}");
        let exact = order_stat_tail_pmf_exact(&query).unwrap().to_f64().unwrap();
        let approx = order_stat_tail_pmf(&query).unwrap();
        assert!((approx - exact).abs() <= 1e-10 * exact, "{query:?}: {approx} vs {exact}");
    }
}

#[test]
fn exact_formula_with_one_decoding_is_the_single_estimate() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..5000 {
        let (n, k) = (64, rng.random_range(40..63));
        let q1 = rng.random_range(1..100_000u64);
        let p = rng.random_range(1e-9..0.3f64);
        let cumulative = rng.random_range(p..1.0);
        let single = approx_single_error_prob(n, k, q1, p, cumulative).unwrap().p_error;
        let exact = exact_list_error_prob(n, k, &[q1], &[p], 1.0 - cumulative).unwrap().p_error;
        assert!((single - exact).abs() < 1e-9, "{single} vs {exact}");
    }
}

/// Mean prediction and error rate agree in every populated bin.
fn assert_calibrated(pairs: &[(f64, bool)], bins: usize, min_count: usize, sigmas: f64) {
    let mut acc = vec![(0.0f64, 0usize, 0usize); bins];
    for &(p, err) in pairs {
        let b = ((p * bins as f64) as usize).min(bins - 1);
        acc[b].0 += p;
        acc[b].1 += err as usize;
        acc[b].2 += 1;
    }
    for (b, &(sum, errors, count)) in acc.iter().enumerate() {
        if count < min_count {
            continue;
        }
        let mean = sum / count as f64;
        let emp = errors as f64 / count as f64;
        let se = (mean * (1.0 - mean) / count as f64).sqrt().max(1.0 / count as f64);
        assert!((emp - mean).abs() <= sigmas * se, "bin {b}: predicted {mean}, empirical {emp}, n = {count}");
    }
}

#[test]
fn exact_list_formula_is_calibrated_on_random_codebooks() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let mut pairs = Vec::new();
    for t in 0..40_000 {
        let ebn0 = [-1.0, 1.0, 3.0][t % 3];
        let (res, soft, sent) = random_codebook_trial(6, 3, ebn0, 2, &mut rng);
        let p = res.predict(Estimator::Exact, 6, 3, &soft).unwrap().p_error;
        pairs.push((p, !res.contains(&sent)));
    }
    assert_calibrated(&pairs, 5, 200, 4.0);
}

#[test]
fn approximate_list_formula_tracks_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    let mut worst = 0.0f64;
    for t in 0..5_000 {
        let ebn0 = [0.0, 2.0, 4.0][t % 3];
        let (res, soft, _) = random_codebook_trial(10, 4, ebn0, 2, &mut rng);
        let exact = res.predict(Estimator::Exact, 10, 4, &soft).unwrap().p_error;
        let approx = res.predict(Estimator::ApproxList, 10, 4, &soft).unwrap().p_error;
        worst = worst.max((approx - exact).abs());
    }
    assert!(worst <= 0.1, "largest absolute gap {worst}");
}

#[test]
fn first_decoding_is_usually_maximum_likelihood() {
    let code = random_linear_code(16, 8, 21).unwrap();
    let book = all_codewords(&code);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let variance = noise_variance(2.0, 0.5);
    let trials = 2000;
    let mut ml_hits = 0;
    for _ in 0..trials {
        let sent = &book[rng.random_range(0..book.len())];
        let soft = transmit_with_rng(sent, variance, &mut rng);
        let res = grand_decode(&code, &soft, &DecodeConfig::default()).unwrap();
        let ml = book.iter().max_by(|a, b| ln_likelihood_oracle(&soft, a).total_cmp(&ln_likelihood_oracle(&soft, b)));
        ml_hits += (Some(&res.found[0].codeword) == ml) as usize;
        assert!(code.contains(&res.found[0].codeword));
    }
    assert!(ml_hits as f64 >= 0.95 * trials as f64, "{ml_hits} / {trials}");
}

#[test]
fn forney_never_exceeds_its_bound() {
    let code = random_linear_code(24, 16, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for t in 0..3000 {
        let l = 1 + t % 4;
        let sent = code.encode(&(0..16).map(|_| rng.random::<bool>() as u8).collect::<Vec<_>>()).unwrap();
        let soft = transmit_with_rng(&sent, noise_variance(1.0, 2.0 / 3.0), &mut rng);
        let res = grand_decode(&code, &soft, &DecodeConfig::with_list_size(l)).unwrap();
        let p = res.predict(Estimator::Forney, 24, 16, &soft).unwrap().p_error;
        assert!((0.0..=1.0 - 1.0 / res.found.len() as f64).contains(&p));
    }
}
