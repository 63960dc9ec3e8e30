//! Analytic error probabilities for the superimposed structure.
//!
//! With the detection sequence riding on top of the codeword, the correlator
//! sees the data symbols as extra (asymptotically Gaussian) self-noise at
//! every lag that overlaps the packet, so false alarms split into a noise-only
//! kind beyond the packet and a partial-correlation kind inside it. The
//! decoder subtracts the known sequence before decoding, so the decoding term
//! runs over all `N` uses at power `(1 - alpha) P` with no interference
//! penalty.

use crate::error::{Error, Result};
use crate::fbl::{self, CodingSpec};
use crate::scenario::{ErrorBreakdown, Scenario};
use crate::zc::{PartialCorrelationProfile, ZadoffChuSequence};

/// Superimposed detection design: the power split `alpha`, the threshold,
/// and the full-length detection sequence with its correlation profile.
#[derive(Debug, Clone)]
pub struct SuperimposedDesign {
    alpha: f64,
    delta: f64,
    sequence: ZadoffChuSequence,
    profile: PartialCorrelationProfile,
}

impl SuperimposedDesign {
    pub fn new(sequence: ZadoffChuSequence, alpha: f64, delta: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 || alpha >= 1.0 {
            return Err(Error::InvalidAlpha(alpha));
        }
        if !delta.is_finite() || delta < 0.0 {
            return Err(Error::InvalidDelta(delta));
        }
        let profile = sequence.correlation_profile();
        Ok(Self { alpha, delta, sequence, profile })
    }

    /// Fraction of the transmit power spent on detection.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn set_delta(&mut self, delta: f64) {
        self.delta = delta;
    }

    /// Moves the power split; the correlation profile only depends on the
    /// sequence, so this is cheap.
    pub fn set_alpha(&mut self, alpha: f64) -> Result<()> {
        if !alpha.is_finite() || alpha <= 0.0 || alpha >= 1.0 {
            return Err(Error::InvalidAlpha(alpha));
        }
        self.alpha = alpha;
        Ok(())
    }

    pub fn sequence(&self) -> &ZadoffChuSequence {
        &self.sequence
    }

    pub fn profile(&self) -> &PartialCorrelationProfile {
        &self.profile
    }

    fn check_length(&self, scenario: &Scenario) -> Result<()> {
        if self.sequence.len() != scenario.n() {
            return Err(Error::SequenceLengthMismatch {
                got: self.sequence.len(),
                expected: scenario.n(),
            });
        }
        Ok(())
    }
}

/// Correlator mean and variance at one lag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatorStats {
    pub mean: f64,
    pub variance: f64,
}

/// Noise-only false alarms, lags `N..t_r-1`:
/// `(t_r - N) Q(delta / sqrt(N/2))`, clamped to [0, 1].
pub fn fa1_bound(design: &SuperimposedDesign, scenario: &Scenario) -> f64 {
    let n = scenario.n();
    let count = scenario.recovery().saturating_sub(n) as f64;
    let sigma = (n as f64 / 2.0).sqrt();
    (count * fbl::q_function(design.delta() / sigma)).min(1.0)
}

/// Correlator statistics at a packet-overlapping lag `1 <= k <= N-1`:
/// mean `sqrt(alpha P) R_p(k)`, variance `N/2 + (1-alpha)(N-k)P/2` (the
/// second term is the Gaussian-limit data self-noise).
pub fn fa2_offset_stats(
    design: &SuperimposedDesign,
    scenario: &Scenario,
    k: usize,
) -> CorrelatorStats {
    debug_assert!(k >= 1 && k < scenario.n());
    let n = scenario.n() as f64;
    let p = scenario.snr();
    CorrelatorStats {
        mean: (design.alpha() * p).sqrt() * design.profile().at(k),
        variance: n / 2.0 + 0.5 * (1.0 - design.alpha()) * (n - k as f64) * p,
    }
}

/// Union bound over the packet-overlapping lags, clamped to 1.
pub fn fa2_bound(design: &SuperimposedDesign, scenario: &Scenario) -> f64 {
    let mut total = 0.0;
    for k in 1..scenario.n() {
        let stats = fa2_offset_stats(design, scenario, k);
        total += fbl::q_function((design.delta() - stats.mean) / stats.variance.sqrt());
    }
    total.min(1.0)
}

/// Misdetection probability at the arrival instant:
/// `Q((sqrt(alpha P) N - delta) / sqrt(N/2 + (1-alpha) P N / 2))`.
pub fn md_probability(design: &SuperimposedDesign, scenario: &Scenario) -> f64 {
    let n = scenario.n() as f64;
    let p = scenario.snr();
    let mu = (design.alpha() * p).sqrt() * n;
    let sigma = (n / 2.0 + 0.5 * (1.0 - design.alpha()) * p * n).sqrt();
    fbl::q_function((mu - design.delta()) / sigma)
}

/// Packet error approximation: both false-alarm kinds plus misdetection plus
/// the decoding error over all `N` uses at the data power `(1 - alpha) P`.
pub fn per_approximation(
    design: &SuperimposedDesign,
    scenario: &Scenario,
) -> Result<ErrorBreakdown> {
    design.check_length(scenario)?;
    let coding = CodingSpec::new(scenario.n(), scenario.bits())?;
    let eps_d = fbl::decoding_error(&coding, (1.0 - design.alpha()) * scenario.snr())?;
    let fa1 = fa1_bound(design, scenario);
    let fa2 = fa2_bound(design, scenario);
    let p_md = md_probability(design, scenario);
    Ok(ErrorBreakdown::from_components((fa1 + fa2).min(1.0), p_md, eps_d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbl::q_function;

    fn design(n: usize, alpha: f64, delta: f64) -> SuperimposedDesign {
        let seq = ZadoffChuSequence::generate(1, n).unwrap();
        SuperimposedDesign::new(seq, alpha, delta).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        let seq = ZadoffChuSequence::generate(1, 257).unwrap();
        assert!(matches!(
            SuperimposedDesign::new(seq.clone(), 0.0, 1.0),
            Err(Error::InvalidAlpha(_))
        ));
        assert!(matches!(
            SuperimposedDesign::new(seq.clone(), 1.0, 1.0),
            Err(Error::InvalidAlpha(_))
        ));
        assert!(matches!(
            SuperimposedDesign::new(seq, 0.5, -2.0),
            Err(Error::InvalidDelta(_))
        ));
    }

    #[test]
    fn fa1_no_noise_only_lags() {
        let scenario = Scenario::new(257, 128, 1.0, 257).unwrap();
        assert_eq!(fa1_bound(&design(257, 0.3, 5.0), &scenario), 0.0);
        // t_r < N behaves the same way.
        let short = Scenario::new(257, 128, 1.0, 100).unwrap();
        assert_eq!(fa1_bound(&design(257, 0.3, 5.0), &short), 0.0);
    }

    #[test]
    fn fa1_zero_threshold_counts_half_per_lag() {
        let scenario = Scenario::new(257, 128, 1.0, 283).unwrap();
        let got = fa1_bound(&design(257, 0.3, 0.0), &scenario);
        assert!((got - 1.0f64.min(26.0 * 0.5)).abs() < 1e-15);
        let near = Scenario::new(257, 128, 1.0, 258).unwrap();
        assert!((fa1_bound(&design(257, 0.3, 0.0), &near) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fa2_stats_reference_points() {
        let scenario = Scenario::new(257, 128, 1.585, 283).unwrap();
        // alpha -> 1 limit: data power vanishes from the variance.
        let nearly_all = design(257, 1.0 - 1e-12, 10.0);
        let s = fa2_offset_stats(&nearly_all, &scenario, 100);
        assert!((s.variance - 257.0 / 2.0).abs() < 1e-6);
        // k = N-1: exactly one overlapping data symbol.
        let d = design(257, 0.3, 10.0);
        let s = fa2_offset_stats(&d, &scenario, 256);
        assert!((s.variance - (257.0 / 2.0 + 0.5 * 0.7 * 1.585)).abs() < 1e-12);
    }

    #[test]
    fn fa2_stats_monotonicity() {
        let base = Scenario::new(257, 128, 1.585, 283).unwrap();
        let d = design(257, 0.3, 10.0);
        // Strictly decreasing in k.
        let mut prev = f64::INFINITY;
        for k in 1..257 {
            let v = fa2_offset_stats(&d, &base, k).variance;
            assert!(v < prev && v > 0.0);
            prev = v;
        }
        // Strictly increasing in P, strictly decreasing in alpha.
        let hi_p = base.with_snr(2.0).unwrap();
        assert!(
            fa2_offset_stats(&d, &hi_p, 64).variance > fa2_offset_stats(&d, &base, 64).variance
        );
        let hi_a = design(257, 0.6, 10.0);
        assert!(
            fa2_offset_stats(&hi_a, &base, 64).variance < fa2_offset_stats(&d, &base, 64).variance
        );
    }

    #[test]
    fn fa2_vanishes_for_huge_threshold() {
        let scenario = Scenario::new(257, 128, 1.0, 283).unwrap();
        assert_eq!(fa2_bound(&design(257, 0.3, 1e9), &scenario), 0.0);
    }

    #[test]
    fn fa2_degenerate_single_use_packet() {
        // N = 1: no overlapping lags, empty sum.
        let scenario = Scenario::new(1, 1, 1.0, 5).unwrap();
        assert_eq!(fa2_bound(&design(1, 0.3, 1.0), &scenario), 0.0);
    }

    #[test]
    fn md_reference_points() {
        let scenario = Scenario::new(257, 128, 1.585, 283).unwrap();
        let alpha = 0.3;
        let mu = (alpha * scenario.snr()).sqrt() * 257.0;
        let at_mean = design(257, alpha, mu);
        assert!((md_probability(&at_mean, &scenario) - 0.5).abs() < 1e-15);
        // alpha -> 1 with zero threshold tends to Q(sqrt(2 P N)).
        let all_detect = design(257, 1.0 - 1e-13, 0.0);
        let expected = q_function((2.0 * scenario.snr() * 257.0).sqrt());
        let got = md_probability(&all_detect, &scenario);
        assert!((got - expected).abs() < 1e-3 * expected.max(1e-300) + 1e-30);
    }

    #[test]
    fn md_near_zero_alpha_is_a_coin_flip() {
        let scenario = Scenario::new(257, 128, 1.0, 283).unwrap();
        let d = design(257, 1e-6, 10.0);
        assert!(md_probability(&d, &scenario) > 0.49);
    }

    #[test]
    fn per_tends_to_one_when_all_power_detects() {
        let scenario = Scenario::new(257, 128, 1.0, 283).unwrap();
        let d = design(257, 1.0 - 1e-9, 50.0);
        let b = per_approximation(&d, &scenario).unwrap();
        assert!(b.eps_d > 0.999);
        assert_eq!(b.per, 1.0);
    }

    #[test]
    fn per_components_match_exported_bounds() {
        let scenario = Scenario::new(257, 128, 1.585, 283).unwrap();
        let d = design(257, 0.404, 106.4074);
        let b = per_approximation(&d, &scenario).unwrap();
        let fa1 = fa1_bound(&d, &scenario);
        let fa2 = fa2_bound(&d, &scenario);
        assert_eq!(b.p_fa, (fa1 + fa2).min(1.0));
        assert_eq!(b.p_md, md_probability(&d, &scenario));
        assert!((b.per - (fa1 + fa2 + b.p_md + b.eps_d).min(1.0)).abs() < 1e-15);
    }

    #[test]
    fn per_rejects_length_mismatch() {
        let scenario = Scenario::new(257, 128, 1.0, 283).unwrap();
        let d = design(255, 0.3, 10.0);
        assert!(matches!(
            per_approximation(&d, &scenario),
            Err(Error::SequenceLengthMismatch { .. })
        ));
    }

    #[test]
    fn md_increasing_in_delta_decreasing_in_alpha() {
        let scenario = Scenario::new(257, 128, 1.0, 283).unwrap();
        let mut prev = -1.0;
        let mut d = design(257, 0.3, 0.0);
        for i in 0..40 {
            d.set_delta(5.0 * i as f64);
            let md = md_probability(&d, &scenario);
            assert!(md >= prev);
            prev = md;
        }
        // Below the detection mean, more detection power helps.
        let lo = design(257, 0.2, 40.0);
        let hi = design(257, 0.5, 40.0);
        assert!(md_probability(&hi, &scenario) < md_probability(&lo, &scenario));
    }
}
