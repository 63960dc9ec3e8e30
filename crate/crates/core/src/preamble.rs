//! Analytic error probabilities for the time-multiplexed preamble
//! structure.
//!
//! The correlator statistic at every pre-arrival lag is exactly Gaussian
//! with variance `N_p/2`; its mean is the scaled partial correlation of the
//! preamble with itself while the lag still overlaps the preamble, and zero
//! once only noise is in view. The packet error bound is the union bound
//! over false-alarm lags plus misdetection plus the finite-blocklength
//! decoding term evaluated on the remaining `N - N_p` channel uses.

use crate::error::{Error, Result};
use crate::fbl::{self, CodingSpec};
use crate::scenario::{ErrorBreakdown, Scenario};
use crate::zc::{PartialCorrelationProfile, ZadoffChuSequence};

/// Preamble detection design: the sequence (its length is the overhead
/// `N_p`), its precomputed correlation profile, and the threshold.
#[derive(Debug, Clone)]
pub struct PreambleDesign {
    sequence: ZadoffChuSequence,
    profile: PartialCorrelationProfile,
    delta: f64,
}

impl PreambleDesign {
    pub fn new(sequence: ZadoffChuSequence, delta: f64) -> Result<Self> {
        if !delta.is_finite() || delta < 0.0 {
            return Err(Error::InvalidDelta(delta));
        }
        let profile = sequence.correlation_profile();
        Ok(Self { sequence, profile, delta })
    }

    /// Detection overhead `N_p` in channel uses.
    pub fn np(&self) -> usize {
        self.sequence.len()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Moves the threshold without recomputing the correlation profile.
    /// Negative test-only thresholds are allowed here so the simulator can
    /// force the always-fire corner; the analytic formulas do not care.
    pub fn set_delta(&mut self, delta: f64) {
        self.delta = delta;
    }

    pub fn sequence(&self) -> &ZadoffChuSequence {
        &self.sequence
    }

    pub fn profile(&self) -> &PartialCorrelationProfile {
        &self.profile
    }

    /// Standard deviation of the correlator statistic, `sqrt(N_p / 2)`.
    pub fn sigma(&self) -> f64 {
        (self.np() as f64 / 2.0).sqrt()
    }
}

/// Probability that the correlator fires at lag `k` before the arrival:
/// `Q((delta - mu(k)) / sigma)` with `mu(k) = sqrt(P) R_p(k)` while the lag
/// overlaps the preamble and zero beyond it.
pub fn fa_offset_probability(design: &PreambleDesign, scenario: &Scenario, k: usize) -> f64 {
    debug_assert!(k >= 1 && k < scenario.recovery());
    let mu = if k < design.np() {
        scenario.snr().sqrt() * design.profile().at(k)
    } else {
        0.0
    };
    fbl::q_function((design.delta() - mu) / design.sigma())
}

/// Union bound on the false-alarm probability over all lags
/// `1..t_r-1`, clamped to 1. Lags at or beyond `N_p` share one zero-mean
/// term, so the tail is a single multiply.
pub fn fa_union_bound(design: &PreambleDesign, scenario: &Scenario) -> f64 {
    let lags = scenario.recovery() - 1;
    let overlap = lags.min(design.np() - 1);
    let sigma = design.sigma();
    let sqrt_p = scenario.snr().sqrt();
    let mut total = 0.0;
    for k in 1..=overlap {
        let mu = sqrt_p * design.profile().at(k);
        total += fbl::q_function((design.delta() - mu) / sigma);
    }
    let tail = (lags - overlap) as f64;
    total += tail * fbl::q_function(design.delta() / sigma);
    total.min(1.0)
}

/// Misdetection probability at the arrival instant,
/// `Q((sqrt(P) N_p - delta) / sqrt(N_p / 2))`.
pub fn md_probability(design: &PreambleDesign, scenario: &Scenario) -> f64 {
    let mu = scenario.snr().sqrt() * design.np() as f64;
    fbl::q_function((mu - design.delta()) / design.sigma())
}

/// Packet error upper bound: false-alarm union bound plus misdetection plus
/// the decoding error on the `N - N_p` codeword uses.
pub fn per_upper_bound(design: &PreambleDesign, scenario: &Scenario) -> Result<ErrorBreakdown> {
    if design.np() >= scenario.n() {
        return Err(Error::PreambleTooLong {
            np: design.np(),
            n: scenario.n(),
        });
    }
    let coding = CodingSpec::new(scenario.n() - design.np(), scenario.bits())?;
    let eps_d = fbl::decoding_error(&coding, scenario.snr())?;
    let p_fa = fa_union_bound(design, scenario);
    let p_md = md_probability(design, scenario);
    Ok(ErrorBreakdown::from_components(p_fa, p_md, eps_d))
}
