//! The physical experiment parameters and the error-probability breakdown
//! shared by both packet structures.

use crate::error::{Error, Result};

/// Which packet structure carries the detection sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Structure {
    /// Time-multiplexed preamble followed by the codeword.
    Preamble,
    /// Detection sequence superimposed on the codeword over all N uses.
    Superimposed,
}

impl Structure {
    pub fn as_str(&self) -> &'static str {
        match self {
            Structure::Preamble => "preamble",
            Structure::Superimposed => "superimposed",
        }
    }
}

/// One experiment: packet length `N`, payload bits `b`, linear SNR `P`, and
/// the recovery time `t_r` the receiver is blind for after a false alarm.
///
/// The interesting regime has `t_r >= N`, but nothing here requires it; the
/// false-alarm window just gets shorter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    n: usize,
    bits: usize,
    snr: f64,
    recovery: usize,
}

impl Scenario {
    pub fn new(n: usize, bits: usize, snr: f64, recovery: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidScenario("packet length must be positive".into()));
        }
        if bits == 0 {
            return Err(Error::InvalidScenario("payload must carry at least 1 bit".into()));
        }
        if !snr.is_finite() || snr < 0.0 {
            return Err(Error::InvalidSnr(snr));
        }
        if recovery == 0 {
            return Err(Error::InvalidScenario("recovery time must be positive".into()));
        }
        Ok(Self { n, bits, snr, recovery })
    }

    /// Total channel uses for detection sequence plus codeword.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Payload size in bits.
    pub fn bits(&self) -> usize {
        self.bits
    }

    /// Linear SNR `P`.
    pub fn snr(&self) -> f64 {
        self.snr
    }

    /// Recovery time `t_r` in channel uses.
    pub fn recovery(&self) -> usize {
        self.recovery
    }

    /// Same geometry at a different SNR; used by sweeps.
    pub fn with_snr(&self, snr: f64) -> Result<Self> {
        Self::new(self.n, self.bits, snr, self.recovery)
    }
}

/// False alarm, misdetection, and decoding error probabilities together
/// with their (clamped) sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBreakdown {
    pub p_fa: f64,
    pub p_md: f64,
    pub eps_d: f64,
    pub per: f64,
}

impl ErrorBreakdown {
    /// Combines already-clamped components into a breakdown with
    /// `per = min(1, p_fa + p_md + eps_d)`.
    pub fn from_components(p_fa: f64, p_md: f64, eps_d: f64) -> Self {
        Self {
            p_fa,
            p_md,
            eps_d,
            per: (p_fa + p_md + eps_d).min(1.0),
        }
    }
}

pub fn snr_db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_snr_db(p: f64) -> f64 {
    10.0 * p.log10()
}
