//! Finite-blocklength decoding error for the AWGN channel (normal
//! approximation), with the Gaussian tail function, capacity, and
//! dispersion it is built from.
//!
//! A length-`N_c` complex-AWGN codeword at SNR `P` is treated as a
//! length-`2N_c` real-AWGN codeword at the same SNR, so capacity and
//! dispersion below are per *real* channel use.

use std::f64::consts::{LN_2, LOG2_E, SQRT_2};

use crate::error::{Error, Result};

/// Codeword length in complex channel uses plus the payload size it carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodingSpec {
    pub codeword_length: usize,
    pub payload_bits: usize,
}

impl CodingSpec {
    pub fn new(codeword_length: usize, payload_bits: usize) -> Result<Self> {
        if codeword_length == 0 {
            return Err(Error::InvalidCodingSpec(
                "codeword length must be at least 1".into(),
            ));
        }
        if payload_bits == 0 {
            return Err(Error::InvalidCodingSpec(
                "payload must carry at least 1 bit".into(),
            ));
        }
        Ok(Self {
            codeword_length,
            payload_bits,
        })
    }
}

/// Gaussian tail probability `Q(x) = erfc(x / sqrt(2)) / 2`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// AWGN capacity in bits per real channel use, `C(P) = log2(1 + P) / 2`.
pub fn capacity(p: f64) -> Result<f64> {
    if !p.is_finite() || p < 0.0 {
        return Err(Error::InvalidSnr(p));
    }
    Ok(0.5 * p.ln_1p() / LN_2)
}

/// AWGN dispersion in squared bits per real channel use,
/// `V(P) = P(P+2) / (2(P+1)^2) * log2(e)^2`.
pub fn dispersion(p: f64) -> Result<f64> {
    if !p.is_finite() || p < 0.0 {
        return Err(Error::InvalidSnr(p));
    }
    Ok(p * (p + 2.0) / (2.0 * (p + 1.0) * (p + 1.0)) * LOG2_E * LOG2_E)
}

/// Argument of the Q-function inside [`decoding_error`]; exposed so callers
/// can inspect the margin even where the probability itself underflows.
pub fn decoding_error_argument(spec: &CodingSpec, p: f64) -> Result<f64> {
    let two_nc = 2.0 * spec.codeword_length as f64;
    let c = capacity(p)?;
    let v = dispersion(p)?;
    if v == 0.0 {
        // Zero capacity with a nonzero payload: infinitely negative margin.
        return Ok(f64::NEG_INFINITY);
    }
    Ok((two_nc * c - spec.payload_bits as f64 + 0.5 * two_nc.log2()) / (two_nc * v).sqrt())
}

/// Decoding error probability of the normal approximation,
/// `Q((2N_c C(P) - b + log2(2N_c)/2) / sqrt(2N_c V(P)))`.
///
/// `P = 0` is a degenerate input (any payload exceeds zero capacity); it
/// returns 1 and logs a warning rather than failing, so sweeps that brush
/// the origin keep going.
pub fn decoding_error(spec: &CodingSpec, p: f64) -> Result<f64> {
    if !p.is_finite() || p < 0.0 {
        return Err(Error::InvalidSnr(p));
    }
    if p == 0.0 {
        log::warn!(
            "decoding_error at zero SNR with {} payload bits: returning 1",
            spec.payload_bits
        );
        return Ok(1.0);
    }
    Ok(q_function(decoding_error_argument(spec, p)?))
}
