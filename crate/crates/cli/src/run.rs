//! Command execution and CSV emission.
//!
//! One output schema serves all subcommands; fields that do not apply to a
//! row stay empty. Rows are sorted by (structure, snr_db, overhead) so the
//! output is independent of evaluation order, and all floats are printed
//! with shortest round-trip formatting, so reruns are byte-identical.

use std::fmt::Write as _;

use rayon::prelude::*;

use shortpkt_core::optimize::{
    optimize_alpha, optimize_preamble, optimize_threshold, DetectionDesign, PragmaticSchedule,
};
use shortpkt_core::preamble::{self, PreambleDesign};
use shortpkt_core::sim::{estimate_per, McEstimate, RNG_ID};
use shortpkt_core::superimposed::{self, SuperimposedDesign};
use shortpkt_core::zc::{select_root_cached, ZadoffChuSequence};
use shortpkt_core::{snr_db_to_linear, ErrorBreakdown, Scenario, Structure};

use crate::config::{CommandKind, DeltaSpec, OverheadSpec, RunConfig};

pub const CSV_HEADER: &str = "structure,snr_db,n,bits,recovery,np,alpha,delta,p_fa,p_fa1,p_fa2,p_md,eps_d,per_analytic,per_mc,ci_low,ci_high,trials,seed";

#[derive(Debug)]
pub enum RunError {
    Numeric(shortpkt_core::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Numeric(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<shortpkt_core::Error> for RunError {
    fn from(e: shortpkt_core::Error) -> Self {
        RunError::Numeric(e)
    }
}

type Result<T> = std::result::Result<T, RunError>;

/// One output row; `None` renders as an empty field.
#[derive(Debug, Clone)]
struct Row {
    structure: Structure,
    snr_db: f64,
    np: Option<usize>,
    alpha: Option<f64>,
    delta: f64,
    p_fa: f64,
    p_fa1: Option<f64>,
    p_fa2: Option<f64>,
    p_md: f64,
    eps_d: f64,
    per_analytic: f64,
    mc: Option<McEstimate>,
}

impl Row {
    fn overhead_key(&self) -> f64 {
        self.np.map(|v| v as f64).or(self.alpha).unwrap_or(0.0)
    }
}

/// Shortest round-trip decimal for in-range magnitudes, scientific form for
/// extreme ones; both are deterministic.
fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let a = x.abs();
    if (1e-4..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn fmt_opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

fn preamble_design(np: usize, delta: f64) -> Result<PreambleDesign> {
    let root = if np >= 3 { select_root_cached(np)? } else { 1 };
    let seq = ZadoffChuSequence::generate(root, np)?;
    Ok(PreambleDesign::new(seq, delta)?)
}

fn superimposed_design(n: usize, alpha: f64, delta: f64) -> Result<SuperimposedDesign> {
    let seq = ZadoffChuSequence::generate(select_root_cached(n)?, n)?;
    Ok(SuperimposedDesign::new(seq, alpha, delta)?)
}

fn breakdown_row(
    design: &DetectionDesign,
    scenario: &Scenario,
    snr_db: f64,
    mc: Option<McEstimate>,
) -> Result<Row> {
    let breakdown: ErrorBreakdown = design.evaluate(scenario)?;
    let (np, alpha, fa1, fa2) = match design {
        DetectionDesign::Preamble(d) => (Some(d.np()), None, None, None),
        DetectionDesign::Superimposed(d) => (
            None,
            Some(d.alpha()),
            Some(superimposed::fa1_bound(d, scenario)),
            Some(superimposed::fa2_bound(d, scenario)),
        ),
    };
    Ok(Row {
        structure: design.structure(),
        snr_db,
        np,
        alpha,
        delta: design.delta(),
        p_fa: breakdown.p_fa,
        p_fa1: fa1,
        p_fa2: fa2,
        p_md: breakdown.p_md,
        eps_d: breakdown.eps_d,
        per_analytic: breakdown.per,
        mc,
    })
}

/// Resolves the threshold per the policy: fixed value or re-optimized for
/// this design and scenario.
fn resolve_delta_preamble(
    design: &mut PreambleDesign,
    scenario: &Scenario,
    policy: DeltaSpec,
) -> Result<()> {
    match policy {
        DeltaSpec::Fixed(d) => design.set_delta(d),
        DeltaSpec::Optimize => {
            let np = design.np();
            let hi = scenario.snr().sqrt() * np as f64 + 10.0 * (np as f64 / 2.0).sqrt();
            let cell = std::cell::RefCell::new(design.clone());
            let opt = optimize_threshold(
                |delta| {
                    let mut d = cell.borrow_mut();
                    d.set_delta(delta);
                    preamble::per_upper_bound(&d, scenario)
                        .map(|b| b.per)
                        .unwrap_or(f64::NAN)
                },
                0.0,
                hi,
            )?;
            design.set_delta(opt.delta);
        }
    }
    Ok(())
}

fn resolve_delta_superimposed(
    design: &mut SuperimposedDesign,
    scenario: &Scenario,
    policy: DeltaSpec,
) -> Result<()> {
    match policy {
        DeltaSpec::Fixed(d) => design.set_delta(d),
        DeltaSpec::Optimize => {
            let n = scenario.n() as f64;
            let mu = (design.alpha() * scenario.snr()).sqrt() * n;
            let sigma =
                (n / 2.0 + 0.5 * (1.0 - design.alpha()) * scenario.snr() * n).sqrt();
            let cell = std::cell::RefCell::new(design.clone());
            let opt = optimize_threshold(
                |delta| {
                    let mut d = cell.borrow_mut();
                    d.set_delta(delta);
                    superimposed::per_approximation(&d, scenario)
                        .map(|b| b.per)
                        .unwrap_or(f64::NAN)
                },
                0.0,
                mu + 10.0 * sigma,
            )?;
            design.set_delta(opt.delta);
        }
    }
    Ok(())
}

/// A design fixed by the config or chosen by the optimizer.
fn resolve_design(cfg: &RunConfig, scenario: &Scenario) -> Result<DetectionDesign> {
    match (cfg.structure, cfg.overhead) {
        (Structure::Preamble, OverheadSpec::Np(np)) => {
            let mut d = preamble_design(np, 0.0)?;
            resolve_delta_preamble(&mut d, scenario, cfg.delta)?;
            Ok(DetectionDesign::Preamble(d))
        }
        (Structure::Superimposed, OverheadSpec::Alpha(alpha)) => {
            let mut d = superimposed_design(scenario.n(), alpha, 0.0)?;
            resolve_delta_superimposed(&mut d, scenario, cfg.delta)?;
            Ok(DetectionDesign::Superimposed(d))
        }
        (Structure::Preamble, OverheadSpec::Optimize) => {
            Ok(optimize_preamble(scenario)?.design)
        }
        (Structure::Superimposed, OverheadSpec::Optimize) => {
            Ok(optimize_alpha(scenario)?.design)
        }
        _ => unreachable!("config validation fixes the overhead policy"),
    }
}

fn cmd_analyze(cfg: &RunConfig) -> Result<Vec<Row>> {
    let base = Scenario::new(cfg.n, cfg.bits, 1.0, cfg.recovery)?;
    let mut tasks: Vec<(f64, OverheadSpec)> = Vec::new();
    for &db in &cfg.snr_db {
        match cfg.overhead {
            OverheadSpec::Sweep => match cfg.structure {
                Structure::Preamble => {
                    for np in (1..cfg.n).step_by(2) {
                        tasks.push((db, OverheadSpec::Np(np)));
                    }
                }
                Structure::Superimposed => {
                    for i in 1..200 {
                        tasks.push((db, OverheadSpec::Alpha(i as f64 * 0.005)));
                    }
                }
            },
            fixed => tasks.push((db, fixed)),
        }
    }
    tasks
        .par_iter()
        .map(|&(db, overhead)| {
            let scenario = base.with_snr(snr_db_to_linear(db))?;
            let point = RunConfig { overhead, ..cfg.clone() };
            let design = resolve_design(&point, &scenario)?;
            breakdown_row(&design, &scenario, db, None)
        })
        .collect()
}

fn cmd_optimize(cfg: &RunConfig) -> Result<Vec<Row>> {
    let base = Scenario::new(cfg.n, cfg.bits, 1.0, cfg.recovery)?;
    cfg.snr_db
        .par_iter()
        .map(|&db| {
            let scenario = base.with_snr(snr_db_to_linear(db))?;
            let result = match cfg.structure {
                Structure::Preamble => optimize_preamble(&scenario)?,
                Structure::Superimposed => optimize_alpha(&scenario)?,
            };
            breakdown_row(&result.design, &scenario, db, None)
        })
        .collect()
}

fn cmd_simulate(cfg: &RunConfig) -> Result<Vec<Row>> {
    let base = Scenario::new(cfg.n, cfg.bits, 1.0, cfg.recovery)?;
    let trials = cfg.trials.expect("validated");
    cfg.snr_db
        .par_iter()
        .map(|&db| {
            let scenario = base.with_snr(snr_db_to_linear(db))?;
            let design = resolve_design(cfg, &scenario)?;
            let est = estimate_per(&design, &scenario, trials, cfg.seed)?;
            breakdown_row(&design, &scenario, db, Some(est))
        })
        .collect()
}

fn cmd_pragmatic(cfg: &RunConfig) -> Result<Vec<Row>> {
    let base = Scenario::new(cfg.n, cfg.bits, 1.0, cfg.recovery)?;
    let lo = cfg.snr_db.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = cfg.snr_db.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let schedule = PragmaticSchedule::build(&base, lo, hi)?;
    let points =
        shortpkt_core::optimize::pragmatic_sweep(&base, &schedule, &cfg.snr_db, cfg.freeze_delta)?;
    points
        .into_iter()
        .map(|p| {
            Ok(Row {
                structure: Structure::Preamble,
                snr_db: p.snr_db,
                np: Some(p.np),
                alpha: None,
                delta: p.delta,
                p_fa: p.breakdown.p_fa,
                p_fa1: None,
                p_fa2: None,
                p_md: p.breakdown.p_md,
                eps_d: p.breakdown.eps_d,
                per_analytic: p.breakdown.per,
                mc: None,
            })
        })
        .collect()
}

/// Canonical echo of the effective configuration (minus `out`, which does
/// not affect the rows). Stripping the `# ` prefix of these lines yields a
/// config file that reproduces the run.
fn metadata_block(cfg: &RunConfig) -> String {
    let mut meta = String::new();
    let _ = writeln!(meta, "# shortpkt {} v{}", cfg.command.as_str(), env!("CARGO_PKG_VERSION"));
    let _ = writeln!(meta, "# rng: {RNG_ID}");
    if cfg.freeze_delta {
        let _ = writeln!(meta, "# thresholds frozen at anchor values (--freeze-delta)");
    }
    let _ = writeln!(meta, "# structure = {}", cfg.structure.as_str());
    let _ = writeln!(meta, "# n = {}", cfg.n);
    let _ = writeln!(meta, "# bits = {}", cfg.bits);
    let _ = writeln!(meta, "# recovery = {}", cfg.recovery);
    let grid: Vec<String> = cfg.snr_db.iter().map(|&v| fmt_f64(v)).collect();
    let _ = writeln!(meta, "# snr_db = {}", grid.join(","));
    match cfg.overhead {
        OverheadSpec::Np(v) => { let _ = writeln!(meta, "# np = {v}"); }
        OverheadSpec::Alpha(v) => { let _ = writeln!(meta, "# alpha = {}", fmt_f64(v)); }
        OverheadSpec::Sweep => {
            let key = if cfg.structure == Structure::Preamble { "np" } else { "alpha" };
            let _ = writeln!(meta, "# {key} = sweep");
        }
        OverheadSpec::Optimize => {
            let key = if cfg.structure == Structure::Preamble { "np" } else { "alpha" };
            let _ = writeln!(meta, "# {key} = optimize");
        }
    }
    match cfg.delta {
        DeltaSpec::Fixed(v) => { let _ = writeln!(meta, "# delta = {}", fmt_f64(v)); }
        DeltaSpec::Optimize => { let _ = writeln!(meta, "# delta = optimize"); }
    }
    if let Some(trials) = cfg.trials {
        let _ = writeln!(meta, "# trials = {trials}");
        let _ = writeln!(meta, "# seed = {}", cfg.seed);
    }
    meta
}

/// Runs the command and renders the full output (metadata, header, rows).
pub fn execute(cfg: &RunConfig) -> Result<String> {
    let mut rows = match cfg.command {
        CommandKind::Analyze => cmd_analyze(cfg)?,
        CommandKind::Optimize => cmd_optimize(cfg)?,
        CommandKind::Simulate => cmd_simulate(cfg)?,
        CommandKind::Pragmatic => cmd_pragmatic(cfg)?,
    };
    rows.sort_by(|a, b| {
        (a.structure.as_str(), a.snr_db, a.overhead_key())
            .partial_cmp(&(b.structure.as_str(), b.snr_db, b.overhead_key()))
            .expect("finite sort keys")
    });

    let mut out = metadata_block(cfg);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &rows {
        let mc_cols = match &r.mc {
            Some(est) => format!(
                "{},{},{},{},{}",
                fmt_f64(est.per_hat),
                fmt_f64(est.ci_low),
                fmt_f64(est.ci_high),
                est.trials,
                est.seed
            ),
            None => ",,,,".to_string(),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.structure.as_str(),
            fmt_f64(r.snr_db),
            cfg.n,
            cfg.bits,
            cfg.recovery,
            fmt_opt(&r.np),
            r.alpha.map(fmt_f64).unwrap_or_default(),
            fmt_f64(r.delta),
            fmt_f64(r.p_fa),
            r.p_fa1.map(fmt_f64).unwrap_or_default(),
            r.p_fa2.map(fmt_f64).unwrap_or_default(),
            fmt_f64(r.p_md),
            fmt_f64(r.eps_d),
            fmt_f64(r.per_analytic),
            mc_cols,
        );
    }
    Ok(out)
}
