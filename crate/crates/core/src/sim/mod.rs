//! Monte Carlo experiments: soft-output calibration and threshold-based
//! erasure decisions.
//!
//! Every trial draws a uniformly random message, encodes it, passes it
//! through BPSK/AWGN and decodes it. Each trial owns its RNG stream, keyed by
//! the channel seed, the Eb/N0 point index and the trial index, so results
//! do not depend on how trials are scheduled across threads. Aggregation
//! runs over trial records in index order.

mod config;
mod csv_out;

use std::io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::bitcodes::{CodeError, LinearCode};
use crate::channel::{noise_variance, transmit_with_rng};
use crate::decoder::{grand_decode, DecodeConfig, DecodeError};
use crate::softoutput::{Estimator, SoftOutputError};

pub use config::{
    uniform_edges, ChannelSpec, CodeFamily, CodeSpec, DecoderSpec, ExperimentConfig, ExperimentKind, ExperimentSpec,
};
pub use csv_out::{
    emit_calibration_csv, emit_erasure_csv, format_sig6, write_calibration_csv, write_erasure_csv, CALIBRATION_HEADER,
    ERASURE_HEADER,
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    SoftOutput(#[from] SoftOutputError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// What happened to the first decoding of a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Correct,
    Incorrect,
    /// Nothing was accepted: the decoder was abandoned without a hit, or the
    /// decoding was rejected by an erasure threshold.
    Erased,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: u64,
    pub ebn0_db: f64,
    /// One prediction per configured estimator, in configuration order.
    pub predictions: Vec<(Estimator, f64)>,
    pub outcome: Outcome,
    /// Whether the transmitted codeword is in the decoding list.
    pub in_list: bool,
    pub queries_used: u64,
}

impl TrialRecord {
    /// Whether the event an estimator predicts actually happened: a list
    /// error for list estimators, a wrong first decoding otherwise.
    pub fn error_for(&self, estimator: Estimator) -> bool {
        if estimator.is_list_estimate() {
            !self.in_list
        } else {
            self.outcome != Outcome::Correct
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationBin {
    pub ebn0_db: f64,
    pub estimator: Estimator,
    pub list_size: usize,
    pub lo: f64,
    pub hi: f64,
    pub mean_predicted: f64,
    pub empirical_error: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CalibrationReport {
    pub bins: Vec<CalibrationBin>,
    /// Non-empty bins withheld for having fewer than the minimum count.
    pub suppressed: usize,
}

/// Accumulates (prediction, outcome) pairs into bins `[lo, hi)`; the last
/// bin is closed on the right.
#[derive(Debug, Clone)]
pub struct CalibrationAccumulator {
    edges: Vec<f64>,
    sum_predicted: Vec<f64>,
    errors: Vec<u64>,
    counts: Vec<u64>,
}

impl CalibrationAccumulator {
    pub fn new(edges: Vec<f64>) -> Self {
        let bins = edges.len() - 1;
        Self { edges, sum_predicted: vec![0.0; bins], errors: vec![0; bins], counts: vec![0; bins] }
    }

    pub fn bin_of(&self, p: f64) -> Option<usize> {
        let last = self.edges.len() - 1;
        if p < self.edges[0] || p > self.edges[last] {
            return None;
        }
        if p == self.edges[last] {
            return Some(last - 1);
        }
        Some(self.edges.partition_point(|&e| e <= p) - 1)
    }

    pub fn add(&mut self, predicted: f64, error: bool) {
        if let Some(b) = self.bin_of(predicted) {
            self.sum_predicted[b] += predicted;
            self.errors[b] += error as u64;
            self.counts[b] += 1;
        }
    }

    /// `(lo, hi, mean_predicted, empirical_error, count)` for every
    /// non-empty bin.
    pub fn summary(&self) -> Vec<(f64, f64, f64, f64, u64)> {
        (0..self.counts.len())
            .filter(|&b| self.counts[b] > 0)
            .map(|b| {
                let c = self.counts[b] as f64;
                (self.edges[b], self.edges[b + 1], self.sum_predicted[b] / c, self.errors[b] as f64 / c, self.counts[b])
            })
            .collect()
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// RNG for one trial at one Eb/N0 point.
pub fn trial_rng(seed: u64, point: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(point)));
    rng.set_stream(trial);
    rng
}

fn random_message<R: Rng>(k: usize, rng: &mut R) -> Vec<u8> {
    (0..k).map(|_| rng.random::<bool>() as u8).collect()
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, SimError> {
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| SimError::ThreadPool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Simulates `trials` transmissions at one Eb/N0 point and applies every
/// estimator to each decoding.
pub fn calibration_trials(
    code: &LinearCode,
    decode: &DecodeConfig,
    estimators: &[Estimator],
    ebn0_db: f64,
    seed: u64,
    point: u64,
    trials: u64,
) -> Result<Vec<TrialRecord>, SimError> {
    let variance = noise_variance(ebn0_db, code.rate());
    let (n, k) = (code.n() as u32, code.k() as u32);
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, point, trial);
            let message = random_message(code.k(), &mut rng);
            let sent = code.encode(&message)?;
            let soft = transmit_with_rng(&sent, variance, &mut rng);
            let result = grand_decode(code, &soft, decode)?;
            let predictions = estimators
                .iter()
                .map(|&e| result.predict(e, n, k, &soft).map(|o| (e, o.p_error)))
                .collect::<Result<Vec<_>, _>>()?;
            let outcome = match result.first() {
                None => Outcome::Erased,
                Some(d) if d.codeword == sent => Outcome::Correct,
                Some(_) => Outcome::Incorrect,
            };
            Ok(TrialRecord {
                trial,
                ebn0_db,
                predictions,
                outcome,
                in_list: result.contains(&sent),
                queries_used: result.queries_used,
            })
        })
        .collect()
}

/// Bins predicted error probabilities against observed errors for every
/// configured Eb/N0 point and estimator.
pub fn run_calibration(cfg: &ExperimentConfig) -> Result<CalibrationReport, SimError> {
    cfg.validate()?;
    if cfg.experiment.kind != ExperimentKind::Calibration {
        return Err(SimError::Config("experiment.kind must be calibration".into()));
    }
    let code = cfg.code.build()?;
    let decode = cfg.decoder.decode_config();
    let exp = &cfg.experiment;
    let edges = exp.edges();
    let mut report = CalibrationReport::default();

    for (point, &ebn0_db) in cfg.channel.ebn0_db.iter().enumerate() {
        let records = with_pool(cfg.threads, || {
            calibration_trials(&code, &decode, &exp.estimators, ebn0_db, cfg.channel.seed, point as u64, exp.trials)
        })??;
        for (slot, &estimator) in exp.estimators.iter().enumerate() {
            let mut acc = CalibrationAccumulator::new(edges.clone());
            for r in &records {
                acc.add(r.predictions[slot].1, r.error_for(estimator));
            }
            for (lo, hi, mean_predicted, empirical_error, count) in acc.summary() {
                if count < exp.min_bin_count {
                    report.suppressed += 1;
                    continue;
                }
                report.bins.push(CalibrationBin {
                    ebn0_db,
                    estimator,
                    list_size: decode.list_size,
                    lo,
                    hi,
                    mean_predicted,
                    empirical_error,
                    count,
                });
            }
        }
    }
    Ok(report)
}

/// Per-trial facts needed to evaluate any erasure threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErasureTrial {
    /// Single-decoding error estimate; 1 when nothing was found.
    pub p_error: f64,
    /// `None` when the decoder found nothing.
    pub decoded_correct: Option<bool>,
    /// Detection-only decoding: `None` when the hard decision fails the
    /// parity checks, otherwise whether it equals the transmitted word.
    pub detection_correct: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErasurePoint {
    pub ebn0_db: f64,
    /// `None` for the detection-only baseline.
    pub epsilon: Option<f64>,
    pub trials: u64,
    pub erased: u64,
    pub undetected: u64,
    pub correct: u64,
}

impl ErasurePoint {
    /// Erased plus undetected-wrong blocks, as a fraction of all trials.
    pub fn bler(&self) -> f64 {
        (self.erased + self.undetected) as f64 / self.trials as f64
    }

    pub fn uer(&self) -> f64 {
        self.undetected as f64 / self.trials as f64
    }

    pub fn erasure_rate(&self) -> f64 {
        self.erased as f64 / self.trials as f64
    }

    fn tally(ebn0_db: f64, epsilon: Option<f64>, decisions: impl Iterator<Item = Outcome>) -> Self {
        let mut point = Self { ebn0_db, epsilon, trials: 0, erased: 0, undetected: 0, correct: 0 };
        for d in decisions {
            point.trials += 1;
            match d {
                Outcome::Erased => point.erased += 1,
                Outcome::Incorrect => point.undetected += 1,
                Outcome::Correct => point.correct += 1,
            }
        }
        point
    }
}

/// Decision for a single trial under threshold `epsilon`.
pub fn threshold_decision(t: &ErasureTrial, epsilon: f64) -> Outcome {
    match t.decoded_correct {
        None => Outcome::Erased,
        Some(_) if t.p_error > epsilon => Outcome::Erased,
        Some(true) => Outcome::Correct,
        Some(false) => Outcome::Incorrect,
    }
}

pub fn detection_decision(t: &ErasureTrial) -> Outcome {
    match t.detection_correct {
        None => Outcome::Erased,
        Some(true) => Outcome::Correct,
        Some(false) => Outcome::Incorrect,
    }
}

/// Single-decoding trials for erasure experiments. The list size in
/// `decode` is ignored; erasure decisions always use `L = 1`.
pub fn erasure_trials(
    code: &LinearCode,
    decode: &DecodeConfig,
    ebn0_db: f64,
    seed: u64,
    point: u64,
    trials: u64,
) -> Result<Vec<ErasureTrial>, SimError> {
    let variance = noise_variance(ebn0_db, code.rate());
    let (n, k) = (code.n() as u32, code.k() as u32);
    let decode = DecodeConfig { list_size: 1, ..*decode };
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, point, trial);
            let message = random_message(code.k(), &mut rng);
            let sent = code.encode(&message)?;
            let soft = transmit_with_rng(&sent, variance, &mut rng);
            let result = grand_decode(code, &soft, &decode)?;
            let p_error = result.predict(Estimator::ApproxSingle, n, k, &soft)?.p_error;
            let detection_correct = if code.is_codeword(soft.hard())? { Some(soft.hard() == sent) } else { None };
            Ok(ErasureTrial { p_error, decoded_correct: result.first().map(|d| d.codeword == sent), detection_correct })
        })
        .collect()
}

/// Block and undetected error rates for every (Eb/N0, ε) pair, plus the
/// detection-only baseline when configured.
pub fn run_erasure(cfg: &ExperimentConfig) -> Result<Vec<ErasurePoint>, SimError> {
    cfg.validate()?;
    if cfg.experiment.kind != ExperimentKind::Erasure {
        return Err(SimError::Config("experiment.kind must be erasure".into()));
    }
    let code = cfg.code.build()?;
    let decode = cfg.decoder.decode_config();
    let exp = &cfg.experiment;
    let mut points = Vec::new();
    for (point, &ebn0_db) in cfg.channel.ebn0_db.iter().enumerate() {
        let trials = with_pool(cfg.threads, || {
            erasure_trials(&code, &decode, ebn0_db, cfg.channel.seed, point as u64, exp.trials)
        })??;
        if exp.detection_baseline {
            points.push(ErasurePoint::tally(ebn0_db, None, trials.iter().map(detection_decision)));
        }
        for &eps in &exp.epsilons {
            points.push(ErasurePoint::tally(ebn0_db, Some(eps), trials.iter().map(|t| threshold_decision(t, eps))));
        }
    }
    Ok(points)
}

/// Runs the configured experiment and writes its CSV to `cfg.output`, or to
/// `fallback` when the config names no output.
pub fn run_to_csv(cfg: &ExperimentConfig, fallback: &mut dyn io::Write) -> Result<(), SimError> {
    match cfg.experiment.kind {
        ExperimentKind::Calibration => {
            let report = run_calibration(cfg)?;
            match &cfg.output {
                Some(path) => emit_calibration_csv(&report.bins, path),
                None => write_calibration_csv(&report.bins, fallback),
            }
        }
        ExperimentKind::Erasure => {
            let points = run_erasure(cfg)?;
            match &cfg.output {
                Some(path) => emit_erasure_csv(&points, path),
                None => write_erasure_csv(&points, fallback),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config(kind: ExperimentKind) -> ExperimentConfig {
        ExperimentConfig {
            code: CodeSpec { family: CodeFamily::Rlc, n: 24, k: 18, seed: 3, poly: None, path: None },
            channel: ChannelSpec { ebn0_db: vec![2.0, 4.0], seed: 11 },
            decoder: DecoderSpec { list_size: 2, max_queries: 1 << 16, ..Default::default() },
            experiment: ExperimentSpec {
                kind,
                trials: 400,
                estimators: vec![Estimator::ApproxSingle, Estimator::ApproxList, Estimator::Forney],
                bins: 10,
                bin_edges: None,
                min_bin_count: 1,
                epsilons: vec![0.05, 0.2, 0.6],
                detection_baseline: true,
            },
            output: None,
            threads: None,
        }
    }

    #[test]
    fn accumulator_binning() {
        let mut acc = CalibrationAccumulator::new(uniform_edges(4));
        assert_eq!(acc.bin_of(0.0), Some(0));
        assert_eq!(acc.bin_of(0.25), Some(1));
        assert_eq!(acc.bin_of(1.0), Some(3));
        assert_eq!(acc.bin_of(1.5), None);
        acc.add(0.1, true);
        acc.add(0.2, false);
        acc.add(1.0, true);
        let s = acc.summary();
        assert_eq!(s.len(), 2);
        assert!((s[0].2 - 0.15).abs() < 1e-15);
        assert_eq!(s[0].3, 0.5);
        assert_eq!(s[1].4, 1);
    }

    #[test]
    fn calibration_runs_and_counts_add_up() {
        let cfg = small_config(ExperimentKind::Calibration);
        let report = run_calibration(&cfg).unwrap();
        for &ebn0 in &cfg.channel.ebn0_db {
            for est in &cfg.experiment.estimators {
                let total: u64 =
                    report.bins.iter().filter(|b| b.ebn0_db == ebn0 && b.estimator == *est).map(|b| b.count).sum();
                assert_eq!(total, 400);
            }
        }
        assert!(report
            .bins
            .iter()
            .filter(|b| b.estimator == Estimator::Forney)
            .all(|b| b.mean_predicted <= 0.5 + 1e-12));
    }

    #[test]
    fn erasure_accounting_and_threshold_monotonicity() {
        let cfg = small_config(ExperimentKind::Erasure);
        let points = run_erasure(&cfg).unwrap();
        assert_eq!(points.len(), 2 * 4);
        for p in &points {
            assert_eq!(p.erased + p.undetected + p.correct, p.trials);
        }
        for chunk in points.chunks(4) {
            let thr = &chunk[1..];
            for w in thr.windows(2) {
                // Larger epsilon accepts more.
                assert!(w[0].uer() <= w[1].uer());
                assert!(w[0].erasure_rate() >= w[1].erasure_rate());
            }
        }
    }

    #[test]
    fn wrong_kind_rejected() {
        let cfg = small_config(ExperimentKind::Erasure);
        assert!(matches!(run_calibration(&cfg), Err(SimError::Config(_))));
    }

    #[test]
    fn trial_streams_differ() {
        let a: u64 = trial_rng(1, 0, 0).random();
        let b: u64 = trial_rng(1, 0, 1).random();
        let c: u64 = trial_rng(1, 1, 0).random();
        assert!(a != b && a != c && b != c);
        let again: u64 = trial_rng(1, 0, 0).random();
        assert_eq!(a, again);
    }
}
