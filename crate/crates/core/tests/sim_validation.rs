//! Statistical validation of the simulator against the analytic formulas.
//! All tests run on pinned seeds, so they are deterministic; tolerances are
//! set from the binomial / chi-square standard errors with margin.

use num_complex::Complex64;
use shortpkt_core::fbl::q_function;
use shortpkt_core::optimize::DetectionDesign;
use shortpkt_core::preamble::{self, PreambleDesign};
use shortpkt_core::sim::{
    build_tx_window, empirical_rd_samples, estimate_per, sample_shell_codeword, trial_rng,
};
use shortpkt_core::superimposed::{self, SuperimposedDesign};
use shortpkt_core::zc::ZadoffChuSequence;
use shortpkt_core::{snr_db_to_linear, Scenario};

/// Kolmogorov-Smirnov distance between samples and a zero-mean normal CDF
/// with the given standard deviation.
fn ks_distance_normal(samples: &mut [f64], sigma: f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut worst = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let cdf = q_function(-x / sigma);
        let hi = (i + 1) as f64 / n - cdf;
        let lo = cdf - i as f64 / n;
        worst = worst.max(hi.max(lo));
    }
    worst
}

fn ks_distance_uniform(samples: &mut [f64], width: f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut worst = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let cdf = x / width;
        worst = worst.max(((i + 1) as f64 / n - cdf).max(cdf - i as f64 / n));
    }
    worst
}

#[test]
fn shell_codeword_phase_is_uniform_at_length_one() {
    let mut rng = trial_rng(101, 0);
    let mut phases: Vec<f64> = (0..100_000)
        .map(|_| {
            let z = sample_shell_codeword(1, &mut rng)[0];
            assert!((z.norm() - 1.0).abs() < 1e-9);
            z.arg() + std::f64::consts::PI
        })
        .collect();
    let d = ks_distance_uniform(&mut phases, 2.0 * std::f64::consts::PI);
    assert!(d < 0.02, "KS distance {d}");
}

#[test]
fn shell_codeword_entries_have_unit_variance() {
    // Pooled over 10^5 draws at N_c = 64; spherical symmetry gives exactly
    // unit variance per complex entry.
    let mut rng = trial_rng(102, 0);
    let mut sum_sq = 0.0;
    let mut count = 0u64;
    for _ in 0..100_000 {
        for z in sample_shell_codeword(64, &mut rng) {
            sum_sq += z.norm_sqr();
            count += 1;
        }
    }
    let var = sum_sq / count as f64;
    assert!((var - 1.0).abs() < 0.05, "per-entry variance {var}");
}

#[test]
fn gaussian_limit_of_sequence_codeword_correlation() {
    // Re[sqrt(P) p^H D] at N = 257 against N(0, P*N/2): the testable form
    // of the large-N limit. 10^5 samples keep the KS noise near 0.004.
    let p = 1.0;
    let mut samples = empirical_rd_samples(257, p, 100_000, 7).unwrap();
    let d = ks_distance_normal(&mut samples, (p * 257.0 / 2.0).sqrt());
    assert!(d < 0.02, "KS distance {d}");
}

#[test]
fn preamble_window_power_matches_signal_plus_noise() {
    let p = 1.585;
    let scenario = Scenario::new(257, 128, p, 283).unwrap();
    let seq = ZadoffChuSequence::generate(1, 31).unwrap();
    let design = DetectionDesign::Preamble(PreambleDesign::new(seq, 10.0).unwrap());
    let mut rng = trial_rng(103, 0);
    let mut pre = (0.0, 0u64);
    let mut packet = (0.0, 0u64);
    for _ in 0..400 {
        let w = build_tx_window(&design, &scenario, &mut rng);
        for (i, z) in w.iter().enumerate() {
            if i < 282 {
                pre.0 += z.norm_sqr();
                pre.1 += 1;
            } else {
                packet.0 += z.norm_sqr();
                packet.1 += 1;
            }
        }
    }
    // Pre-arrival: pure noise, mean power 1, per-sample variance 1.
    let pre_mean = pre.0 / pre.1 as f64;
    let tol_pre = 3.0 / (pre.1 as f64).sqrt();
    assert!((pre_mean - 1.0).abs() < tol_pre, "pre-arrival power {pre_mean}");
    // Packet: signal plus noise, mean power P + 1, per-sample variance
    // roughly 2P + 1.
    let pkt_mean = packet.0 / packet.1 as f64;
    let tol_pkt = 3.0 * (2.0 * p + 1.0f64).sqrt() / (packet.1 as f64).sqrt();
    assert!(
        (pkt_mean - (p + 1.0)).abs() < tol_pkt,
        "packet power {pkt_mean} vs {}",
        p + 1.0
    );
}

#[test]
fn superimposed_window_power_matches_signal_plus_noise() {
    let p = 1.585;
    let scenario = Scenario::new(257, 128, p, 283).unwrap();
    let seq = ZadoffChuSequence::generate(1, 257).unwrap();
    let design =
        DetectionDesign::Superimposed(SuperimposedDesign::new(seq, 0.3, 10.0).unwrap());
    let mut rng = trial_rng(104, 0);
    let mut sum = 0.0;
    let mut count = 0u64;
    for _ in 0..400 {
        let w = build_tx_window(&design, &scenario, &mut rng);
        for z in w.iter().skip(282) {
            sum += z.norm_sqr();
            count += 1;
        }
    }
    let mean = sum / count as f64;
    let tol = 3.5 * (2.0 * p + 1.0f64).sqrt() / (count as f64).sqrt();
    assert!((mean - (p + 1.0)).abs() < tol, "packet power {mean}");
}

#[test]
fn preamble_bound_dominates_simulation() {
    // 10^5-trial smoke version of the acceptance gate, at the -1.5 dB
    // operating point where the PER bound sits in the simulable range.
    let p = snr_db_to_linear(-1.5);
    let scenario = Scenario::new(257, 128, p, 283).unwrap();
    let seq = ZadoffChuSequence::generate(1, 39).unwrap();
    let pre = PreambleDesign::new(seq, 19.828374863841656).unwrap();
    let analytic = preamble::per_upper_bound(&pre, &scenario).unwrap();
    let design = DetectionDesign::Preamble(pre);
    let trials = 100_000;
    let est = estimate_per(&design, &scenario, trials, 2024).unwrap();

    let stderr = |p: f64| (p.max(1e-12) * (1.0 - p) / trials as f64).sqrt();
    let fa_hat = est.false_alarms as f64 / trials as f64;
    let md_hat = est.misdetections as f64 / trials as f64;
    assert!(
        fa_hat <= analytic.p_fa + 3.0 * stderr(analytic.p_fa),
        "fa {fa_hat} vs bound {}",
        analytic.p_fa
    );
    assert!(
        (md_hat - analytic.p_md).abs() <= 4.0 * stderr(analytic.p_md),
        "md {md_hat} vs {}",
        analytic.p_md
    );
    assert!(
        est.per_hat <= analytic.per + 3.0 * stderr(analytic.per),
        "per {} vs bound {}",
        est.per_hat,
        analytic.per
    );
    assert!(est.ci_low <= est.per_hat && est.per_hat <= est.ci_high);
}

#[test]
fn superimposed_approximation_tracks_simulation() {
    let p = snr_db_to_linear(-1.5);
    let scenario = Scenario::new(257, 128, p, 283).unwrap();
    let seq = ZadoffChuSequence::generate(1, 257).unwrap();
    let si = SuperimposedDesign::new(seq, 0.1960773337767847, 56.86870309337525).unwrap();
    let analytic = superimposed::per_approximation(&si, &scenario).unwrap();
    let design = DetectionDesign::Superimposed(si);
    let est = estimate_per(&design, &scenario, 100_000, 2025).unwrap();
    let rel = (est.per_hat - analytic.per).abs() / analytic.per;
    assert!(rel < 0.3, "simulated {} vs approximation {} (rel {rel:.3})", est.per_hat, analytic.per);
}

#[test]
fn zero_snr_window_is_pure_noise() {
    let scenario = Scenario::new(31, 16, 0.0, 40).unwrap();
    let seq = ZadoffChuSequence::generate(1, 7).unwrap();
    let design = DetectionDesign::Preamble(PreambleDesign::new(seq, 3.0).unwrap());
    let mut rng = trial_rng(105, 0);
    let mut sum = 0.0;
    let mut count = 0u64;
    for _ in 0..2000 {
        for z in build_tx_window(&design, &scenario, &mut rng) {
            sum += z.norm_sqr();
            count += 1;
        }
    }
    let mean = sum / count as f64;
    assert!((mean - 1.0).abs() < 3.0 / (count as f64).sqrt(), "noise power {mean}");
}

#[test]
fn window_equals_packet_plus_noise_shape() {
    // The deterministic packet part of the window matches tx_packet when
    // the same codeword draw is replayed.
    let p = 2.0;
    let scenario = Scenario::new(31, 16, p, 40).unwrap();
    let seq = ZadoffChuSequence::generate(1, 7).unwrap();
    let design = DetectionDesign::Preamble(PreambleDesign::new(seq, 3.0).unwrap());
    let window = build_tx_window(&design, &scenario, &mut trial_rng(106, 1));
    // Replay the stream: codeword first, then per-slot noise.
    let mut replay = trial_rng(106, 1);
    let codeword = sample_shell_codeword(24, &mut replay);
    let packet = shortpkt_core::sim::tx_packet(&design, &scenario, &codeword);
    let noise: Vec<Complex64> = (0..window.len())
        .map(|_| {
            let re: f64 = rand::Rng::sample(&mut replay, rand_distr::StandardNormal);
            let im: f64 = rand::Rng::sample(&mut replay, rand_distr::StandardNormal);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        })
        .collect();
    for i in 0..window.len() {
        let expected = if i < 39 {
            noise[i]
        } else {
            packet[i - 39] + noise[i]
        };
        assert!((window[i] - expected).norm() < 1e-12, "slot {i}");
    }
}
