//! Threshold and overhead optimization for both packet structures, plus the
//! adaptive-coding-rate scheme that fixes one codebook per 1 dB interval.
//!
//! The packet error objective is cheap and not provably quasi-convex in the
//! threshold, so every 1-D search runs a coarse grid first and refines the
//! best cell by golden section; the reported optimum never exceeds any point
//! actually evaluated. Grid reductions are sequential over sorted candidate
//! lists, so results are deterministic no matter how the evaluations were
//! parallelized, with ties going to the smaller overhead and then the
//! smaller threshold.

use std::cell::RefCell;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fbl::CodingSpec;
use crate::preamble::{self, PreambleDesign};
use crate::scenario::{snr_db_to_linear, ErrorBreakdown, Scenario, Structure};
use crate::superimposed::{self, SuperimposedDesign};
use crate::zc::{select_root_cached, ZadoffChuSequence};

/// Points in the coarse threshold grid (inclusive of both bracket ends).
const THRESHOLD_GRID_POINTS: usize = 129;
/// Golden-section stops when the bracket shrinks below this fraction of the
/// original one.
const THRESHOLD_RELATIVE_WIDTH: f64 = 1e-6;
/// Coarse power-split grid: alpha in {0.005, 0.010, ..., 0.995}.
const ALPHA_GRID_STEP: f64 = 0.005;
/// Absolute width to which the power split is refined. The PER is locally
/// flat in alpha, so this buys roughly squared relative accuracy in the
/// reported optimum.
const ALPHA_REFINE_WIDTH: f64 = 1e-6;
/// Thresholds are bracketed by [0, mu_detection + this many sigmas].
const BRACKET_SIGMAS: f64 = 10.0;

const INV_GOLDEN_RATIO: f64 = 0.618_033_988_749_894_9;

/// A detection design for either structure.
#[derive(Debug, Clone)]
pub enum DetectionDesign {
    Preamble(PreambleDesign),
    Superimposed(SuperimposedDesign),
}

impl DetectionDesign {
    pub fn structure(&self) -> Structure {
        match self {
            DetectionDesign::Preamble(_) => Structure::Preamble,
            DetectionDesign::Superimposed(_) => Structure::Superimposed,
        }
    }

    pub fn delta(&self) -> f64 {
        match self {
            DetectionDesign::Preamble(d) => d.delta(),
            DetectionDesign::Superimposed(d) => d.delta(),
        }
    }

    /// Detection overhead: `N_p / N` for a preamble, `alpha` for a
    /// superimposed design. The two live on different axes; they are only
    /// comparable as fractions of the packet resources.
    pub fn overhead_ratio(&self, n: usize) -> f64 {
        match self {
            DetectionDesign::Preamble(d) => d.np() as f64 / n as f64,
            DetectionDesign::Superimposed(d) => d.alpha(),
        }
    }

    /// Analytic packet error breakdown at this design.
    pub fn evaluate(&self, scenario: &Scenario) -> Result<ErrorBreakdown> {
        match self {
            DetectionDesign::Preamble(d) => preamble::per_upper_bound(d, scenario),
            DetectionDesign::Superimposed(d) => superimposed::per_approximation(d, scenario),
        }
    }
}

/// Outcome of a single-variable threshold search.
#[derive(Debug, Clone, Copy)]
pub struct ThresholdOptimum {
    pub delta: f64,
    pub per: f64,
    pub evaluations: u64,
}

/// Best design found for one scenario, with its re-evaluated breakdown and
/// the number of objective evaluations spent.
#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub design: DetectionDesign,
    pub per: f64,
    pub breakdown: ErrorBreakdown,
    pub evaluations: u64,
}

/// Minimizes `objective` over `[lo, hi]`: 129-point grid, then golden
/// section inside the best grid cell down to a relative width of 1e-6.
/// The returned value is the smallest objective seen anywhere, so it is
/// never worse than any grid point.
pub fn optimize_threshold(
    objective: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
) -> Result<ThresholdOptimum> {
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Error::InvalidBracket { lo, hi });
    }
    let mut evaluations = 0u64;
    let mut eval = |x: f64| -> Result<f64> {
        evaluations += 1;
        let v = objective(x);
        if !v.is_finite() {
            return Err(Error::NonFiniteObjective { delta: x, value: v });
        }
        Ok(v)
    };

    let step = (hi - lo) / (THRESHOLD_GRID_POINTS - 1) as f64;
    let mut best_x = lo;
    let mut best_f = f64::INFINITY;
    let mut best_idx = 0usize;
    for i in 0..THRESHOLD_GRID_POINTS {
        let x = if i + 1 == THRESHOLD_GRID_POINTS { hi } else { lo + step * i as f64 };
        let f = eval(x)?;
        if f < best_f {
            best_x = x;
            best_f = f;
            best_idx = i;
        }
    }

    // Refine inside the cell pair around the best grid point.
    let mut a = lo + step * best_idx.saturating_sub(1) as f64;
    let mut b = (lo + step * (best_idx + 1) as f64).min(hi);
    let tol = THRESHOLD_RELATIVE_WIDTH * (hi - lo);
    let mut x1 = b - INV_GOLDEN_RATIO * (b - a);
    let mut x2 = a + INV_GOLDEN_RATIO * (b - a);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_GOLDEN_RATIO * (b - a);
            f1 = eval(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_GOLDEN_RATIO * (b - a);
            f2 = eval(x2)?;
        }
        let (xc, fc) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
        if fc < best_f || (fc == best_f && xc < best_x) {
            best_x = xc;
            best_f = fc;
        }
    }

    Ok(ThresholdOptimum { delta: best_x, per: best_f, evaluations })
}

fn preamble_bracket_hi(np: usize, snr: f64) -> f64 {
    snr.sqrt() * np as f64 + BRACKET_SIGMAS * (np as f64 / 2.0).sqrt()
}

fn superimposed_bracket_hi(n: usize, alpha: f64, snr: f64) -> f64 {
    let nf = n as f64;
    (alpha * snr).sqrt() * nf + BRACKET_SIGMAS * (nf / 2.0 + 0.5 * (1.0 - alpha) * snr * nf).sqrt()
}

/// Best threshold for one fixed preamble length.
fn optimize_preamble_at(np: usize, scenario: &Scenario) -> Result<(ThresholdOptimum, PreambleDesign)> {
    let root = if np >= 3 { select_root_cached(np)? } else { 1 };
    let sequence = ZadoffChuSequence::generate(root, np)?;
    let design = RefCell::new(PreambleDesign::new(sequence, 0.0)?);
    let objective = |delta: f64| {
        let mut d = design.borrow_mut();
        d.set_delta(delta);
        preamble::per_upper_bound(&d, scenario)
            .map(|b| b.per)
            .unwrap_or(f64::NAN)
    };
    let best = optimize_threshold(objective, 0.0, preamble_bracket_hi(np, scenario.snr()))?;
    let mut design = design.into_inner();
    design.set_delta(best.delta);
    Ok((best, design))
}

/// Minimizes the preamble PER bound over every odd `N_p < N` (with the
/// min-max root re-selected per length) and the threshold.
pub fn optimize_preamble(scenario: &Scenario) -> Result<OptimizationResult> {
    let candidates: Vec<usize> = (1..scenario.n()).step_by(2).collect();
    if candidates.is_empty() {
        return Err(Error::EmptyDesignGrid);
    }
    let per_np: Vec<Result<(ThresholdOptimum, PreambleDesign)>> = candidates
        .par_iter()
        .map(|&np| optimize_preamble_at(np, scenario))
        .collect();

    let mut evaluations = 0u64;
    let mut best: Option<(ThresholdOptimum, PreambleDesign)> = None;
    // Candidates ascend in N_p, so strict improvement keeps the smallest
    // overhead on ties; equal PER at equal N_p keeps the smaller delta via
    // optimize_threshold's own tie rule.
    for entry in per_np {
        let (opt, design) = entry?;
        evaluations += opt.evaluations;
        let better = match &best {
            None => true,
            Some((cur, _)) => opt.per < cur.per,
        };
        if better {
            best = Some((opt, design));
        }
    }
    let (opt, design) = best.expect("non-empty candidate grid");
    let breakdown = preamble::per_upper_bound(&design, scenario)?;
    Ok(OptimizationResult {
        design: DetectionDesign::Preamble(design),
        per: opt.per,
        breakdown,
        evaluations,
    })
}

/// Best threshold for one fixed power split.
fn optimize_superimposed_at(
    design: &RefCell<SuperimposedDesign>,
    alpha: f64,
    scenario: &Scenario,
) -> Result<ThresholdOptimum> {
    design.borrow_mut().set_alpha(alpha)?;
    let objective = |delta: f64| {
        let mut d = design.borrow_mut();
        d.set_delta(delta);
        superimposed::per_approximation(&d, scenario)
            .map(|b| b.per)
            .unwrap_or(f64::NAN)
    };
    optimize_threshold(
        objective,
        0.0,
        superimposed_bracket_hi(scenario.n(), alpha, scenario.snr()),
    )
}

/// Minimizes the superimposed PER approximation over the power split
/// `alpha` and the threshold: coarse 0.005-step grid, then golden-section
/// refinement of `alpha` to 1e-4 around the best cell.
pub fn optimize_alpha(scenario: &Scenario) -> Result<OptimizationResult> {
    let n = scenario.n();
    let root = select_root_cached(n)?;
    let sequence = ZadoffChuSequence::generate(root, n)?;

    let grid: Vec<f64> = (1..200).map(|i| i as f64 * ALPHA_GRID_STEP).collect();
    let coarse: Vec<Result<ThresholdOptimum>> = grid
        .par_iter()
        .map_init(
            || RefCell::new(SuperimposedDesign::new(sequence.clone(), 0.5, 0.0).expect("valid seed design")),
            |design, &alpha| optimize_superimposed_at(design, alpha, scenario),
        )
        .collect();

    let mut evaluations = 0u64;
    let mut best_alpha = grid[0];
    let mut best = ThresholdOptimum { delta: 0.0, per: f64::INFINITY, evaluations: 0 };
    for (&alpha, entry) in grid.iter().zip(coarse) {
        let opt = entry?;
        evaluations += opt.evaluations;
        if opt.per < best.per {
            best = opt;
            best_alpha = alpha;
        }
    }

    // Golden-section refinement of alpha around the winning grid cell; each
    // probe re-optimizes the threshold.
    let design = RefCell::new(SuperimposedDesign::new(sequence, best_alpha, best.delta)?);
    let mut a = (best_alpha - ALPHA_GRID_STEP).max(ALPHA_GRID_STEP / 64.0);
    let mut b = (best_alpha + ALPHA_GRID_STEP).min(1.0 - ALPHA_GRID_STEP / 64.0);
    let mut probe = |alpha: f64, evals: &mut u64| -> Result<f64> {
        let opt = optimize_superimposed_at(&design, alpha, scenario)?;
        *evals += opt.evaluations;
        if opt.per < best.per || (opt.per == best.per && alpha < best_alpha) {
            best = opt;
            best_alpha = alpha;
        }
        Ok(opt.per)
    };
    let mut x1 = b - INV_GOLDEN_RATIO * (b - a);
    let mut x2 = a + INV_GOLDEN_RATIO * (b - a);
    let mut f1 = probe(x1, &mut evaluations)?;
    let mut f2 = probe(x2, &mut evaluations)?;
    while b - a > ALPHA_REFINE_WIDTH {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_GOLDEN_RATIO * (b - a);
            f1 = probe(x1, &mut evaluations)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_GOLDEN_RATIO * (b - a);
            f2 = probe(x2, &mut evaluations)?;
        }
    }

    let mut final_design = design.into_inner();
    final_design.set_alpha(best_alpha)?;
    final_design.set_delta(best.delta);
    let breakdown = superimposed::per_approximation(&final_design, scenario)?;
    Ok(OptimizationResult {
        design: DetectionDesign::Superimposed(final_design),
        per: best.per,
        breakdown,
        evaluations,
    })
}

/// One anchor of the adaptive-rate scheme: the codebook (rate) and preamble
/// length frozen at the optimum of an integer SNR point, plus the threshold
/// that was optimal there.
#[derive(Debug, Clone)]
pub struct PragmaticAnchor {
    pub snr_db: f64,
    pub coding: CodingSpec,
    pub np: usize,
    pub delta: f64,
}

/// Anchors covering an SNR range at 1 dB spacing.
#[derive(Debug, Clone)]
pub struct PragmaticSchedule {
    pub interval_width_db: f64,
    pub anchors: Vec<PragmaticAnchor>,
}

impl PragmaticSchedule {
    /// Optimizes the preamble design at every integer dB whose 1 dB interval
    /// intersects `[db_lo, db_hi]` and freezes those designs as anchors.
    pub fn build(base: &Scenario, db_lo: f64, db_hi: f64) -> Result<Self> {
        if !(db_lo <= db_hi) {
            return Err(Error::InvalidBracket { lo: db_lo, hi: db_hi });
        }
        let c_lo = db_lo.round() as i64;
        let c_hi = db_hi.round() as i64;
        let anchors = (c_lo..=c_hi)
            .map(|c| {
                let snr_db = c as f64;
                let scenario = base.with_snr(snr_db_to_linear(snr_db))?;
                let opt = optimize_preamble(&scenario)?;
                let np = match &opt.design {
                    DetectionDesign::Preamble(d) => d.np(),
                    DetectionDesign::Superimposed(_) => unreachable!(),
                };
                Ok(PragmaticAnchor {
                    snr_db,
                    coding: CodingSpec::new(base.n() - np, base.bits())?,
                    np,
                    delta: opt.design.delta(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { interval_width_db: 1.0, anchors })
    }

    /// Anchor owning `snr_db`: intervals are `[c - 0.5, c + 0.5)`.
    pub fn anchor_for(&self, snr_db: f64) -> Option<&PragmaticAnchor> {
        let first = self.anchors.first()?.snr_db;
        let idx = (snr_db - first + 0.5).floor();
        if idx < 0.0 || idx as usize >= self.anchors.len() {
            return None;
        }
        Some(&self.anchors[idx as usize])
    }
}

/// One point of the adaptive-rate curve.
#[derive(Debug, Clone)]
pub struct PragmaticPoint {
    pub snr_db: f64,
    pub np: usize,
    pub delta: f64,
    pub breakdown: ErrorBreakdown,
}

/// Evaluates the adaptive-rate scheme on an SNR grid: within each anchor's
/// interval the preamble length (hence the coding rate) stays frozen, and
/// the receiver threshold is re-optimized per point unless `freeze_delta`
/// keeps the anchor's threshold.
pub fn pragmatic_sweep(
    base: &Scenario,
    schedule: &PragmaticSchedule,
    grid_db: &[f64],
    freeze_delta: bool,
) -> Result<Vec<PragmaticPoint>> {
    grid_db
        .par_iter()
        .map(|&db| {
            let anchor = schedule.anchor_for(db).ok_or(Error::InvalidBracket {
                lo: schedule.anchors.first().map(|a| a.snr_db).unwrap_or(f64::NAN),
                hi: schedule.anchors.last().map(|a| a.snr_db).unwrap_or(f64::NAN),
            })?;
            let scenario = base.with_snr(snr_db_to_linear(db))?;
            let root = if anchor.np >= 3 { select_root_cached(anchor.np)? } else { 1 };
            let sequence = ZadoffChuSequence::generate(root, anchor.np)?;
            let mut design = PreambleDesign::new(sequence, anchor.delta)?;
            if !freeze_delta {
                let cell = RefCell::new(design.clone());
                let objective = |delta: f64| {
                    let mut d = cell.borrow_mut();
                    d.set_delta(delta);
                    preamble::per_upper_bound(&d, &scenario)
                        .map(|b| b.per)
                        .unwrap_or(f64::NAN)
                };
                let opt = optimize_threshold(
                    objective,
                    0.0,
                    preamble_bracket_hi(anchor.np, scenario.snr()),
                )?;
                design.set_delta(opt.delta);
            }
            let breakdown = preamble::per_upper_bound(&design, &scenario)?;
            Ok(PragmaticPoint {
                snr_db: db,
                np: anchor.np,
                delta: design.delta(),
                breakdown,
            })
        })
        .collect()
}

/// One SNR point of an optimized sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub snr_db: f64,
    pub result: OptimizationResult,
}

/// Runs the per-SNR optimizer for one structure over a dB grid. Grid points
/// are independent and evaluated in parallel; output order follows the
/// input grid.
pub fn snr_sweep(
    base: &Scenario,
    structure: Structure,
    grid_db: &[f64],
) -> Result<Vec<SweepPoint>> {
    grid_db
        .par_iter()
        .map(|&db| {
            let scenario = base.with_snr(snr_db_to_linear(db))?;
            let result = match structure {
                Structure::Preamble => optimize_preamble(&scenario)?,
                Structure::Superimposed => optimize_alpha(&scenario)?,
            };
            Ok(SweepPoint { snr_db: db, result })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbl::q_function;

    #[test]
    fn threshold_finds_symmetric_crossover() {
        // Q(x/s) + Q((m-x)/s) with equal spreads is minimized at m/2.
        let m = 12.0;
        let s = 2.0;
        let opt = optimize_threshold(|x| q_function(x / s) + q_function((m - x) / s), 0.0, m)
            .unwrap();
        assert!((opt.delta - m / 2.0).abs() < 1e-4 * m, "delta = {}", opt.delta);
    }

    #[test]
    fn threshold_handles_flat_objective() {
        let eps = 3.25e-9;
        let opt = optimize_threshold(|_| eps, 0.0, 50.0).unwrap();
        assert!((opt.per - eps).abs() < 1e-12 * eps);
    }

    #[test]
    fn threshold_never_worse_than_grid() {
        // A deliberately wiggly objective.
        let f = |x: f64| (x * 1.7).sin() * 0.3 + 0.02 * (x - 4.0) * (x - 4.0);
        let opt = optimize_threshold(f, 0.0, 10.0).unwrap();
        for i in 0..=128 {
            let x = 10.0 * i as f64 / 128.0;
            assert!(opt.per <= f(x) + 1e-15);
        }
    }

    #[test]
    fn threshold_rejects_bad_inputs() {
        assert!(matches!(
            optimize_threshold(|x| x, 5.0, 1.0),
            Err(Error::InvalidBracket { .. })
        ));
        assert!(matches!(
            optimize_threshold(|_| f64::NAN, 0.0, 1.0),
            Err(Error::NonFiniteObjective { .. })
        ));
    }

    #[test]
    fn preamble_detection_becomes_free_at_huge_snr() {
        let scenario = Scenario::new(257, 128, 1e4, 283).unwrap();
        let opt = optimize_preamble(&scenario).unwrap();
        let np = match &opt.design {
            DetectionDesign::Preamble(d) => d.np(),
            _ => unreachable!(),
        };
        assert!(np <= 3, "N_p* = {np}");
    }

    #[test]
    fn infeasible_payload_is_flagged_by_high_per() {
        // b far above 2 (N-1) C(P): decoding dominates everywhere.
        let scenario = Scenario::new(65, 1000, 1.0, 72).unwrap();
        let pre = optimize_preamble(&scenario).unwrap();
        assert!(pre.per > 0.5);
        let si = optimize_alpha(&scenario).unwrap();
        assert!(si.per > 0.5);
    }

    #[test]
    fn optimizers_are_self_consistent() {
        let scenario = Scenario::new(65, 32, snr_db_to_linear(1.0), 72).unwrap();
        let pre = optimize_preamble(&scenario).unwrap();
        let re = pre.design.evaluate(&scenario).unwrap();
        assert!((re.per - pre.per).abs() <= 1e-12 * pre.per.max(1e-300));
        assert_eq!(pre.breakdown.per, re.per);
        let si = optimize_alpha(&scenario).unwrap();
        let re = si.design.evaluate(&scenario).unwrap();
        assert!((re.per - si.per).abs() <= 1e-12 * si.per.max(1e-300));
    }

    #[test]
    fn alpha_optimum_beats_grid_ends() {
        let scenario = Scenario::new(65, 32, 1.0, 72).unwrap();
        let si = optimize_alpha(&scenario).unwrap();
        let seq = ZadoffChuSequence::generate(select_root_cached(65).unwrap(), 65).unwrap();
        for alpha in [0.005, 0.995] {
            let design = RefCell::new(SuperimposedDesign::new(seq.clone(), alpha, 0.0).unwrap());
            let end = optimize_superimposed_at(&design, alpha, &scenario).unwrap();
            assert!(si.per <= end.per);
        }
    }

    #[test]
    fn schedule_covers_range_without_gaps() {
        let base = Scenario::new(65, 32, 1.0, 72).unwrap();
        let schedule = PragmaticSchedule::build(&base, 0.0, 3.0).unwrap();
        assert_eq!(schedule.anchors.len(), 4);
        let mut db = 0.0;
        while db <= 3.0 {
            let anchor = schedule.anchor_for(db).unwrap();
            assert!((db - anchor.snr_db).abs() <= 0.5 + 1e-12);
            db += 0.1;
        }
        assert!(schedule.anchor_for(4.2).is_none());
    }

    #[test]
    fn pragmatic_matches_ideal_at_anchor_and_dominates_off_anchor() {
        let base = Scenario::new(65, 32, 1.0, 72).unwrap();
        let schedule = PragmaticSchedule::build(&base, 1.0, 2.0).unwrap();
        let grid = [1.0, 1.3, 1.5, 2.0];
        let curve = pragmatic_sweep(&base, &schedule, &grid, false).unwrap();
        for point in &curve {
            let scenario = base.with_snr(snr_db_to_linear(point.snr_db)).unwrap();
            let ideal = optimize_preamble(&scenario).unwrap();
            assert!(
                point.breakdown.per >= ideal.per - 1e-12 * ideal.per,
                "pragmatic beats ideal at {} dB",
                point.snr_db
            );
            if point.snr_db.fract() == 0.0 {
                let rel = (point.breakdown.per - ideal.per).abs() / ideal.per.max(1e-300);
                assert!(rel <= 1e-9, "anchor mismatch at {} dB: {rel}", point.snr_db);
            }
        }
    }

    #[test]
    fn frozen_delta_keeps_anchor_threshold() {
        let base = Scenario::new(65, 32, 1.0, 72).unwrap();
        let schedule = PragmaticSchedule::build(&base, 1.0, 1.0).unwrap();
        let curve = pragmatic_sweep(&base, &schedule, &[0.7, 1.0, 1.4], true).unwrap();
        for point in &curve {
            assert_eq!(point.delta, schedule.anchors[0].delta);
        }
    }

    #[test]
    fn sweep_preserves_grid_order() {
        let base = Scenario::new(65, 32, 1.0, 72).unwrap();
        let grid = [2.0, 0.0, 1.0];
        let out = snr_sweep(&base, Structure::Preamble, &grid).unwrap();
        let dbs: Vec<f64> = out.iter().map(|p| p.snr_db).collect();
        assert_eq!(dbs, grid);
    }
}
