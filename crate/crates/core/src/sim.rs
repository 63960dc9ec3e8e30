//! Seeded Monte Carlo validation: sliding-correlator detection over the
//! recovery window, misdetection at the arrival instant, and a semi-analytic
//! decode stage.
//!
//! The decode stage draws a Bernoulli with the finite-blocklength error
//! probability instead of running an actual decoder; the correlator stages
//! are simulated faithfully, including the shared noise between overlapping
//! lags. Every trial's randomness is a pure function of `(seed, trial
//! index)` (one ChaCha12 stream per trial), and aggregation is integer
//! counting, so estimates are bit-identical for any thread count or
//! execution order.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fbl::{self, CodingSpec};
use crate::optimize::DetectionDesign;
use crate::scenario::Scenario;
use crate::zc::{select_root_cached, ZadoffChuSequence};

/// Generator identity recorded alongside estimates, for reproducibility.
pub const RNG_ID: &str = "chacha12";

/// 95% two-sided normal quantile used by the Wilson interval.
const Z_95: f64 = 1.959963984540054;

/// What happened in one trial. A false alarm costs the packet outright, so
/// misdetection and decoding are only evaluated when no false alarm fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub false_alarm: bool,
    pub misdetection: bool,
    pub decode_error: bool,
    pub packet_error: bool,
}

/// Aggregated Monte Carlo estimate with a 95% Wilson confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub trials: u64,
    pub errors: u64,
    pub false_alarms: u64,
    pub misdetections: u64,
    pub decode_errors: u64,
    pub per_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

/// The per-trial generator: one ChaCha12 stream per `(seed, trial)`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn standard_cscg(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * FRAC_1_SQRT_2
}

/// Draws a codeword uniformly on the shell of radius `sqrt(N_c)`: a standard
/// complex Gaussian vector scaled to squared norm exactly `N_c`.
pub fn sample_shell_codeword(n_c: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    let mut v = Vec::with_capacity(n_c);
    fill_shell_codeword(n_c, rng, &mut v);
    v
}

fn fill_shell_codeword(n_c: usize, rng: &mut impl Rng, out: &mut Vec<Complex64>) {
    out.clear();
    out.extend((0..n_c).map(|_| standard_cscg(rng)));
    let norm_sq: f64 = out.iter().map(|z| z.norm_sqr()).sum();
    let scale = (n_c as f64 / norm_sq).sqrt();
    for z in out {
        *z *= scale;
    }
}

/// Noise-free transmitted packet (length `N`) for a given codeword.
///
/// The codeword length must match the design: `N - N_p` for a preamble,
/// `N` for a superimposed design. Passing an all-zero "codeword" isolates
/// the detection-sequence part, which the moment tests use.
pub fn tx_packet(
    design: &DetectionDesign,
    scenario: &Scenario,
    codeword: &[Complex64],
) -> Vec<Complex64> {
    let sqrt_p = scenario.snr().sqrt();
    match design {
        DetectionDesign::Preamble(d) => {
            assert_eq!(codeword.len(), scenario.n() - d.np(), "codeword length");
            let mut packet = Vec::with_capacity(scenario.n());
            packet.extend(d.sequence().symbols().iter().map(|p| p * sqrt_p));
            packet.extend(codeword.iter().map(|c| c * sqrt_p));
            packet
        }
        DetectionDesign::Superimposed(d) => {
            assert_eq!(codeword.len(), scenario.n(), "codeword length");
            assert_eq!(d.sequence().len(), scenario.n(), "sequence length");
            let a_seq = (d.alpha()).sqrt();
            let a_data = (1.0 - d.alpha()).sqrt();
            d.sequence()
                .symbols()
                .iter()
                .zip(codeword)
                .map(|(p, c)| (p * a_seq + c * a_data) * sqrt_p)
                .collect()
        }
    }
}

fn codeword_len(design: &DetectionDesign, scenario: &Scenario) -> usize {
    match design {
        DetectionDesign::Preamble(d) => scenario.n() - d.np(),
        DetectionDesign::Superimposed(_) => scenario.n(),
    }
}

/// Received window of length `(t_r - 1) + N`: pre-arrival slots carry pure
/// noise, the packet (drawn with a fresh shell codeword) sits at the end,
/// and unit-variance complex noise covers everything. The codeword is drawn
/// before the noise, in index order.
pub fn build_tx_window(
    design: &DetectionDesign,
    scenario: &Scenario,
    rng: &mut impl Rng,
) -> Vec<Complex64> {
    let arrival = scenario.recovery() - 1;
    let codeword = sample_shell_codeword(codeword_len(design, scenario), rng);
    let packet = tx_packet(design, scenario, &codeword);
    let mut window = Vec::with_capacity(arrival + scenario.n());
    for _ in 0..arrival {
        window.push(standard_cscg(rng));
    }
    for x in packet {
        window.push(x + standard_cscg(rng));
    }
    window
}

/// Hot-path state reused across trials.
struct TrialContext {
    tpl_re: Vec<f64>,
    tpl_im: Vec<f64>,
    arrival: usize,
    packet_len: usize,
    codeword_len: usize,
    delta: f64,
    eps_d: f64,
    sqrt_p: f64,
    packet: PacketShape,
}

enum PacketShape {
    Preamble,
    Superimposed { seq_scale: f64, data_scale: f64 },
}

struct TrialScratch {
    win_re: Vec<f64>,
    win_im: Vec<f64>,
    codeword: Vec<Complex64>,
}

impl TrialContext {
    fn new(design: &DetectionDesign, scenario: &Scenario) -> Result<Self> {
        let (symbols, eps_d, packet) = match design {
            DetectionDesign::Preamble(d) => {
                if d.np() >= scenario.n() {
                    return Err(Error::PreambleTooLong { np: d.np(), n: scenario.n() });
                }
                let coding = CodingSpec::new(scenario.n() - d.np(), scenario.bits())?;
                (
                    d.sequence().symbols(),
                    fbl::decoding_error(&coding, scenario.snr())?,
                    PacketShape::Preamble,
                )
            }
            DetectionDesign::Superimposed(d) => {
                if d.sequence().len() != scenario.n() {
                    return Err(Error::SequenceLengthMismatch {
                        got: d.sequence().len(),
                        expected: scenario.n(),
                    });
                }
                let coding = CodingSpec::new(scenario.n(), scenario.bits())?;
                (
                    d.sequence().symbols(),
                    fbl::decoding_error(&coding, (1.0 - d.alpha()) * scenario.snr())?,
                    PacketShape::Superimposed {
                        seq_scale: d.alpha().sqrt(),
                        data_scale: (1.0 - d.alpha()).sqrt(),
                    },
                )
            }
        };
        Ok(Self {
            tpl_re: symbols.iter().map(|z| z.re).collect(),
            tpl_im: symbols.iter().map(|z| z.im).collect(),
            arrival: scenario.recovery() - 1,
            packet_len: scenario.n(),
            codeword_len: codeword_len(design, scenario),
            delta: design.delta(),
            eps_d,
            sqrt_p: scenario.snr().sqrt(),
            packet,
        })
    }

    fn window_len(&self) -> usize {
        self.arrival + self.packet_len
    }

    /// Fills the scratch window (split into real and imaginary planes) with
    /// the same draws, in the same order, as [`build_tx_window`].
    fn fill_window(&self, rng: &mut impl Rng, scratch: &mut TrialScratch) {
        scratch.win_re.clear();
        scratch.win_im.clear();
        fill_shell_codeword(self.codeword_len, rng, &mut scratch.codeword);
        for _ in 0..self.arrival {
            let z = standard_cscg(rng);
            scratch.win_re.push(z.re);
            scratch.win_im.push(z.im);
        }
        match self.packet {
            PacketShape::Preamble => {
                for (pr, pi) in self.tpl_re.iter().zip(&self.tpl_im) {
                    let z = standard_cscg(rng);
                    scratch.win_re.push(self.sqrt_p * pr + z.re);
                    scratch.win_im.push(self.sqrt_p * pi + z.im);
                }
                for c in &scratch.codeword {
                    let z = standard_cscg(rng);
                    scratch.win_re.push(self.sqrt_p * c.re + z.re);
                    scratch.win_im.push(self.sqrt_p * c.im + z.im);
                }
            }
            PacketShape::Superimposed { seq_scale, data_scale } => {
                for ((pr, pi), c) in self.tpl_re.iter().zip(&self.tpl_im).zip(&scratch.codeword) {
                    let z = standard_cscg(rng);
                    let sig_re = self.sqrt_p * (seq_scale * pr + data_scale * c.re);
                    let sig_im = self.sqrt_p * (seq_scale * pi + data_scale * c.im);
                    scratch.win_re.push(sig_re + z.re);
                    scratch.win_im.push(sig_im + z.im);
                }
            }
        }
        debug_assert_eq!(scratch.win_re.len(), self.window_len());
    }

    /// Correlator output `Re[sum_j conj(p_j) y_{start+j}]`.
    fn statistic(&self, scratch: &TrialScratch, start: usize) -> f64 {
        let len = self.tpl_re.len();
        let wr = &scratch.win_re[start..start + len];
        let wi = &scratch.win_im[start..start + len];
        let mut acc = 0.0;
        for j in 0..len {
            acc += self.tpl_re[j] * wr[j] + self.tpl_im[j] * wi[j];
        }
        acc
    }

    fn run(&self, rng: &mut impl Rng, scratch: &mut TrialScratch) -> TrialOutcome {
        self.fill_window(rng, scratch);
        // False alarms first: any pre-arrival lag k in {1..t_r-1} firing
        // loses the packet and nothing else is evaluated.
        for start in (0..self.arrival).rev() {
            if self.statistic(scratch, start) > self.delta {
                return TrialOutcome {
                    false_alarm: true,
                    misdetection: false,
                    decode_error: false,
                    packet_error: true,
                };
            }
        }
        if self.statistic(scratch, self.arrival) <= self.delta {
            return TrialOutcome {
                false_alarm: false,
                misdetection: true,
                decode_error: false,
                packet_error: true,
            };
        }
        let decode_error = rng.gen::<f64>() < self.eps_d;
        TrialOutcome {
            false_alarm: false,
            misdetection: false,
            decode_error,
            packet_error: decode_error,
        }
    }
}

impl TrialScratch {
    fn for_context(ctx: &TrialContext) -> Self {
        Self {
            win_re: Vec::with_capacity(ctx.window_len()),
            win_im: Vec::with_capacity(ctx.window_len()),
            codeword: Vec::with_capacity(ctx.codeword_len),
        }
    }
}

/// Runs one trial: sliding correlation over every pre-arrival lag, the
/// arrival test, then the semi-analytic decode stage.
pub fn run_trial(
    design: &DetectionDesign,
    scenario: &Scenario,
    rng: &mut impl Rng,
) -> Result<TrialOutcome> {
    let ctx = TrialContext::new(design, scenario)?;
    let mut scratch = TrialScratch::for_context(&ctx);
    Ok(ctx.run(rng, &mut scratch))
}

/// Estimates the PER over `trials` independent trials. Trial `t` uses the
/// stream `(seed, t)`, so parallel and serial execution count identically.
pub fn estimate_per(
    design: &DetectionDesign,
    scenario: &Scenario,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    let ctx = TrialContext::new(design, scenario)?;
    let (fa, md, de, err) = (0..trials)
        .into_par_iter()
        .map_init(
            || TrialScratch::for_context(&ctx),
            |scratch, t| {
                let mut rng = trial_rng(seed, t);
                let o = ctx.run(&mut rng, scratch);
                (
                    o.false_alarm as u64,
                    o.misdetection as u64,
                    o.decode_error as u64,
                    o.packet_error as u64,
                )
            },
        )
        .reduce(
            || (0, 0, 0, 0),
            |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3),
        );
    let (ci_low, ci_high) = wilson_interval(err, trials);
    Ok(McEstimate {
        trials,
        errors: err,
        false_alarms: fa,
        misdetections: md,
        decode_errors: de,
        per_hat: err as f64 / trials as f64,
        ci_low,
        ci_high,
        seed,
    })
}

/// 95% Wilson score interval for a binomial proportion.
fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // Rounding can push the bounds a hair past the exact endpoints.
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo.min(p), hi.max(p))
}

/// Samples of the correlation between the detection sequence and a fresh
/// shell codeword, `Re[sqrt(P) p^H D]`, for distribution tests. Sample `i`
/// uses stream `(seed, i)`.
pub fn empirical_rd_samples(n: usize, p: f64, count: usize, seed: u64) -> Result<Vec<f64>> {
    if !p.is_finite() || p < 0.0 {
        return Err(Error::InvalidSnr(p));
    }
    let root = select_root_cached(n)?;
    let seq = ZadoffChuSequence::generate(root, n)?;
    let sqrt_p = p.sqrt();
    Ok((0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let d = sample_shell_codeword(n, &mut rng);
            let dot: f64 = seq
                .symbols()
                .iter()
                .zip(&d)
                .map(|(pj, dj)| (pj.conj() * dj).re)
                .sum();
            sqrt_p * dot
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preamble::PreambleDesign;
    use crate::superimposed::SuperimposedDesign;

    fn preamble_design(np: usize, delta: f64) -> DetectionDesign {
        let root = if np >= 3 { select_root_cached(np).unwrap() } else { 1 };
        let seq = ZadoffChuSequence::generate(root, np).unwrap();
        DetectionDesign::Preamble(PreambleDesign::new(seq, delta).unwrap())
    }

    fn si_design(n: usize, alpha: f64, delta: f64) -> DetectionDesign {
        let seq = ZadoffChuSequence::generate(1, n).unwrap();
        DetectionDesign::Superimposed(SuperimposedDesign::new(seq, alpha, delta).unwrap())
    }

    #[test]
    fn shell_codeword_norm_is_exact() {
        let mut rng = trial_rng(7, 0);
        for &n in &[1usize, 2, 64, 257] {
            let d = sample_shell_codeword(n, &mut rng);
            let norm_sq: f64 = d.iter().map(|z| z.norm_sqr()).sum();
            assert!((norm_sq - n as f64).abs() < 1e-9 * n as f64);
        }
    }

    #[test]
    fn window_shape_and_zero_snr() {
        let scenario = Scenario::new(31, 16, 0.0, 40).unwrap();
        let design = preamble_design(7, 3.0);
        let mut rng = trial_rng(3, 0);
        let w = build_tx_window(&design, &scenario, &mut rng);
        assert_eq!(w.len(), 39 + 31);
        // P = 0: everything is unit-variance noise.
        let power: f64 = w.iter().map(|z| z.norm_sqr()).sum::<f64>() / w.len() as f64;
        assert!((power - 1.0).abs() < 0.5, "mean power {power}");
    }

    #[test]
    fn superimposed_sequence_power_with_zeroed_data() {
        // Zero codeword isolates the detection part: power alpha * P.
        let n = 257;
        let alpha = 0.3;
        let p = 1.585;
        let scenario = Scenario::new(n, 128, p, 283).unwrap();
        let design = si_design(n, alpha, 10.0);
        let zeros = vec![Complex64::new(0.0, 0.0); n];
        let packet = tx_packet(&design, &scenario, &zeros);
        for x in &packet {
            assert!((x.norm_sqr() - alpha * p).abs() < 1e-12);
        }
    }

    #[test]
    fn run_trial_huge_threshold_always_misdetects() {
        let scenario = Scenario::new(31, 16, 1.0, 40).unwrap();
        let design = preamble_design(7, 1e9);
        for t in 0..1000 {
            let mut rng = trial_rng(11, t);
            let o = run_trial(&design, &scenario, &mut rng).unwrap();
            assert!(o.misdetection && o.packet_error && !o.false_alarm);
        }
    }

    #[test]
    fn run_trial_negative_threshold_always_fires_early() {
        let scenario = Scenario::new(31, 16, 1.0, 40).unwrap();
        let mut inner = match preamble_design(7, 0.0) {
            DetectionDesign::Preamble(d) => d,
            _ => unreachable!(),
        };
        inner.set_delta(-1.0);
        let design = DetectionDesign::Preamble(inner);
        for t in 0..1000 {
            let mut rng = trial_rng(13, t);
            let o = run_trial(&design, &scenario, &mut rng).unwrap();
            assert!(o.false_alarm && o.packet_error && !o.misdetection);
        }
    }

    #[test]
    fn outcome_flags_are_consistent() {
        let scenario = Scenario::new(31, 16, 0.5, 40).unwrap();
        let design = preamble_design(7, 4.0);
        for t in 0..2000 {
            let mut rng = trial_rng(17, t);
            let o = run_trial(&design, &scenario, &mut rng).unwrap();
            assert_eq!(
                o.packet_error,
                o.false_alarm || o.misdetection || o.decode_error
            );
            assert!(!(o.false_alarm && (o.misdetection || o.decode_error)));
        }
    }

    #[test]
    fn estimate_rejects_zero_trials() {
        let scenario = Scenario::new(31, 16, 1.0, 40).unwrap();
        assert!(matches!(
            estimate_per(&preamble_design(7, 3.0), &scenario, 0, 1),
            Err(Error::NoTrials)
        ));
    }

    #[test]
    fn estimate_is_deterministic_and_seed_sensitive() {
        let scenario = Scenario::new(31, 16, 1.0, 40).unwrap();
        let design = preamble_design(7, 4.0);
        let a = estimate_per(&design, &scenario, 4000, 42).unwrap();
        let b = estimate_per(&design, &scenario, 4000, 42).unwrap();
        assert_eq!(a, b);
        // Different seeds draw different windows.
        let w42 = build_tx_window(&design, &scenario, &mut trial_rng(42, 0));
        let w43 = build_tx_window(&design, &scenario, &mut trial_rng(43, 0));
        assert_ne!(w42[0], w43[0]);
    }

    #[test]
    fn all_error_configuration_pins_interval_near_one() {
        let scenario = Scenario::new(31, 16, 1.0, 40).unwrap();
        let est = estimate_per(&preamble_design(7, 1e9), &scenario, 1000, 5).unwrap();
        assert_eq!(est.per_hat, 1.0);
        assert!(est.ci_low > 0.9);
        assert_eq!(est.ci_high, 1.0);
    }

    #[test]
    fn wilson_interval_brackets_the_estimate() {
        for &(e, n) in &[(0u64, 100u64), (1, 100), (50, 100), (100, 100), (3, 1_000_000)] {
            let (lo, hi) = wilson_interval(e, n);
            let p = e as f64 / n as f64;
            assert!(lo <= p && p <= hi);
            assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        }
    }

    #[test]
    fn rd_samples_are_reproducible() {
        let a = empirical_rd_samples(257, 1.0, 100, 9).unwrap();
        let b = empirical_rd_samples(257, 1.0, 100, 9).unwrap();
        assert_eq!(a, b);
        // sqrt(P) scaling.
        let c = empirical_rd_samples(257, 4.0, 100, 9).unwrap();
        for (x, y) in a.iter().zip(&c) {
            assert!((y - 2.0 * x).abs() < 1e-12);
        }
    }
}
