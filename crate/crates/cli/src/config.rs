//! Configuration ingestion: flat `key = value` files, flag overrides, and
//! per-command validation.
//!
//! Recognized keys: `structure`, `n`, `bits`, `recovery`, `snr_db`, `np`,
//! `alpha`, `delta`, `trials`, `seed`, `out`. The same names are echoed into
//! the output metadata block, so a previous run's metadata (stripped of the
//! leading `# `) is itself a valid config file.

use std::collections::HashMap;
use std::fmt;

use shortpkt_core::Structure;

pub const CONFIG_KEYS: [&str; 11] = [
    "structure", "n", "bits", "recovery", "snr_db", "np", "alpha", "delta", "trials", "seed",
    "out",
];

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Detection overhead policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OverheadSpec {
    /// Fixed preamble length.
    Np(usize),
    /// Fixed power split.
    Alpha(f64),
    /// Scan the full overhead grid (analyze).
    Sweep,
    /// Let the optimizer choose (optimize / simulate).
    Optimize,
}

/// Threshold policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaSpec {
    Fixed(f64),
    Optimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Analyze,
    Optimize,
    Simulate,
    Pragmatic,
}

impl CommandKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CommandKind::Analyze => "analyze",
            CommandKind::Optimize => "optimize",
            CommandKind::Simulate => "simulate",
            CommandKind::Pragmatic => "pragmatic",
        }
    }
}

/// Fully validated run description.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub structure: Structure,
    pub n: usize,
    pub bits: usize,
    pub recovery: usize,
    pub snr_db: Vec<f64>,
    pub overhead: OverheadSpec,
    pub delta: DeltaSpec,
    pub trials: Option<u64>,
    pub seed: u64,
    pub out: String,
    pub freeze_delta: bool,
}

/// Parses a flat config file: blank lines and `#` comments are skipped,
/// everything else must be `key = value` with a known key.
pub fn parse_file(text: &str) -> Result<HashMap<String, String>, ConfigError> {
    let mut map = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return err(format!("line {}: expected `key = value`, got `{line}`", lineno + 1));
        };
        let key = key.trim();
        let value = value.trim();
        if !CONFIG_KEYS.contains(&key) {
            return err(format!("line {}: unknown key `{key}`", lineno + 1));
        }
        if map.insert(key.to_string(), value.to_string()).is_some() {
            return err(format!("line {}: duplicate key `{key}`", lineno + 1));
        }
    }
    Ok(map)
}

/// `2` -> [2.0]; `0,2,4` -> list; `0:0.5:8` -> inclusive range.
pub fn parse_snr_grid(spec: &str) -> Result<Vec<f64>, ConfigError> {
    let parse_one = |tok: &str| -> Result<f64, ConfigError> {
        let v: f64 = tok
            .trim()
            .parse()
            .map_err(|_| ConfigError(format!("invalid value `{tok}` for key `snr_db`")))?;
        if !v.is_finite() {
            return err(format!("snr_db value `{tok}` is not finite"));
        }
        Ok(v)
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let grid = match parts.len() {
        3 => {
            let (start, step, stop) = (parse_one(parts[0])?, parse_one(parts[1])?, parse_one(parts[2])?);
            if step <= 0.0 || stop < start {
                return err(format!("invalid snr_db range `{spec}` (need start <= stop, step > 0)"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|i| start + step * i as f64).collect()
        }
        1 => spec.split(',').map(parse_one).collect::<Result<Vec<_>, _>>()?,
        _ => return err(format!("invalid snr_db spec `{spec}`")),
    };
    if grid.is_empty() {
        return err("snr_db grid is empty");
    }
    Ok(grid)
}

fn get_required<'a>(
    map: &'a HashMap<String, String>,
    key: &str,
) -> Result<&'a str, ConfigError> {
    map.get(key)
        .map(|s| s.as_str())
        .ok_or_else(|| ConfigError(format!("missing required key `{key}`")))
}

fn parse_int(key: &str, value: &str) -> Result<u64, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError(format!("invalid value `{value}` for key `{key}` (expected a nonnegative integer)")))
}

/// Validates the merged key/value view into a [`RunConfig`].
pub fn resolve(
    command: CommandKind,
    map: &HashMap<String, String>,
    freeze_delta: bool,
) -> Result<RunConfig, ConfigError> {
    let structure = match map.get("structure").map(|s| s.as_str()) {
        Some("preamble") => Structure::Preamble,
        Some("superimposed") => Structure::Superimposed,
        Some(other) => {
            return err(format!(
                "invalid value `{other}` for key `structure` (expected `preamble` or `superimposed`)"
            ))
        }
        None if command == CommandKind::Pragmatic => Structure::Preamble,
        None => return err("missing required key `structure`"),
    };

    let n = parse_int("n", get_required(map, "n")?)? as usize;
    let bits = parse_int("bits", get_required(map, "bits")?)? as usize;
    let recovery = parse_int("recovery", get_required(map, "recovery")?)? as usize;
    let snr_db = parse_snr_grid(get_required(map, "snr_db")?)?;

    if n == 0 {
        return err("key `n` must be positive");
    }
    if bits == 0 {
        return err("key `bits` must be positive");
    }
    if recovery < 2 {
        return err("key `recovery` must be at least 2");
    }
    if structure == Structure::Superimposed && n % 2 == 0 {
        return err(format!(
            "superimposed requires odd n (the detection sequence spans the whole packet), got {n}"
        ));
    }

    let np = map.get("np").map(|s| s.as_str());
    let alpha = map.get("alpha").map(|s| s.as_str());
    if np.is_some() && structure == Structure::Superimposed {
        return err("key `np` applies to the preamble structure; use `alpha`");
    }
    if alpha.is_some() && structure == Structure::Preamble {
        return err("key `alpha` applies to the superimposed structure; use `np`");
    }

    let overhead_raw = np.or(alpha);
    let overhead = match overhead_raw {
        None => match command {
            CommandKind::Analyze => OverheadSpec::Sweep,
            _ => OverheadSpec::Optimize,
        },
        Some("sweep") => OverheadSpec::Sweep,
        Some("optimize") => OverheadSpec::Optimize,
        Some(value) if structure == Structure::Preamble => {
            let v = parse_int("np", value)? as usize;
            if v % 2 == 0 {
                return err(format!("key `np` must be odd (Zadoff-Chu length), got {v}"));
            }
            if v >= n {
                return err(format!("key `np` must be smaller than n = {n}, got {v}"));
            }
            OverheadSpec::Np(v)
        }
        Some(value) => {
            let v: f64 = value.parse().map_err(|_| {
                ConfigError(format!("invalid value `{value}` for key `alpha`"))
            })?;
            if !v.is_finite() || v <= 0.0 || v >= 1.0 {
                return err(format!("key `alpha` must lie strictly inside (0, 1), got {value}"));
            }
            OverheadSpec::Alpha(v)
        }
    };

    let delta = match map.get("delta").map(|s| s.as_str()) {
        None | Some("optimize") => DeltaSpec::Optimize,
        Some(value) => {
            let v: f64 = value.parse().map_err(|_| {
                ConfigError(format!("invalid value `{value}` for key `delta`"))
            })?;
            if !v.is_finite() || v < 0.0 {
                return err(format!("key `delta` must be finite and nonnegative, got {value}"));
            }
            DeltaSpec::Fixed(v)
        }
    };

    let trials = map
        .get("trials")
        .map(|v| parse_int("trials", v))
        .transpose()?;
    let seed = map.get("seed").map(|v| parse_int("seed", v)).transpose()?.unwrap_or(0);

    // Per-command constraints.
    match command {
        CommandKind::Analyze => {
            if trials.is_some() {
                return err("key `trials` only applies to the simulate command");
            }
        }
        CommandKind::Optimize => {
            if !matches!(overhead, OverheadSpec::Optimize) {
                return err("optimize chooses np/alpha itself; remove the fixed overhead key");
            }
            if !matches!(delta, DeltaSpec::Optimize) {
                return err("optimize chooses delta itself; remove the fixed `delta` key");
            }
            if trials.is_some() {
                return err("key `trials` only applies to the simulate command");
            }
        }
        CommandKind::Simulate => {
            match trials {
                None => return err("missing required key `trials`"),
                Some(0) => return err("key `trials` must be at least 1"),
                _ => {}
            }
            if matches!(overhead, OverheadSpec::Sweep) {
                return err("simulate needs a fixed or optimized design, not an overhead sweep");
            }
        }
        CommandKind::Pragmatic => {
            if structure == Structure::Superimposed {
                return err(
                    "the pragmatic scheme fixes a preamble codebook per interval; structure must be `preamble`",
                );
            }
            if trials.is_some() {
                return err("key `trials` only applies to the simulate command");
            }
            if !matches!(overhead, OverheadSpec::Optimize) {
                return err("pragmatic optimizes np per anchor; remove the fixed overhead key");
            }
        }
    }
    if freeze_delta && command != CommandKind::Pragmatic {
        return err("--freeze-delta only applies to the pragmatic command");
    }

    Ok(RunConfig {
        command,
        structure,
        n,
        bits,
        recovery,
        snr_db,
        overhead,
        delta,
        trials,
        seed,
        out: map.get("out").cloned().unwrap_or_else(|| "-".to_string()),
        freeze_delta,
    })
}
