//! GRAND decoding with a-posteriori soft output.
//!
//! Guessing Random Additive Noise Decoding inverts putative noise effects
//! from a received hard decision, most likely first, and stops at the first
//! (or first `L`) codebook members. While querying it accumulates the
//! probability of every noise effect it has tried; together with the code
//! dimensions that is enough to estimate how likely the decoding, or the
//! decoding list, is to be wrong.
//!
//! * [`bitcodes`]: GF(2) matrices and the RLC, CRC and extended BCH families.
//! * [`channel`]: BPSK over AWGN, LLRs and per-bit flip probabilities.
//! * [`guesswork`]: ORBGRAND and hard-detection pattern streams.
//! * [`decoder`]: the query loop and list decoding.
//! * [`softoutput`]: exact and approximate error-probability estimates.
//! * [`sim`]: Monte Carlo calibration and erasure experiments.

pub mod bitcodes;
pub mod channel;
pub mod decoder;
pub mod guesswork;
pub mod sim;
pub mod softoutput;
