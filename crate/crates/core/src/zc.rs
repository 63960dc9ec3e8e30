//! Zadoff-Chu detection sequences and their partial-period correlations.
//!
//! Sequences use the odd-length construction `p_j = exp(-i*pi*u*j*(j+1)/L)`
//! with root `u` coprime to the length `L`. The detector works with the
//! aperiodic partial-period correlation (the real part of the overlap sum at
//! a given lag), which is what drives the false-alarm analysis; the classic
//! zero cyclic autocorrelation of these sequences is a different quantity
//! and is only used as a sanity check in tests.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{OnceLock, RwLock};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Roots whose worst-case partial correlations differ by less than this are
/// treated as ties (conjugate roots `u` and `L-u` are exact mathematical
/// ties that float rounding would otherwise split arbitrarily).
const ROOT_TIE_TOLERANCE: f64 = 1e-9;

/// A unit-power detection sequence of odd length.
#[derive(Debug, Clone)]
pub struct ZadoffChuSequence {
    root: usize,
    symbols: Vec<Complex64>,
}

impl ZadoffChuSequence {
    /// Generates the sequence for a given root and odd length.
    ///
    /// The phase exponent `u*j*(j+1)` is reduced modulo `2L` in integer
    /// arithmetic before the trig evaluation, so symbols stay accurate for
    /// large lengths.
    pub fn generate(root: usize, length: usize) -> Result<Self> {
        if length == 0 {
            return Err(Error::LengthTooShort { got: length, min: 1 });
        }
        if length % 2 == 0 {
            return Err(Error::EvenLength(length));
        }
        if root == 0 || (length > 1 && root >= length) {
            return Err(Error::RootOutOfRange { root, length });
        }
        if gcd(root, length) != 1 {
            return Err(Error::RootNotCoprime { root, length });
        }
        let modulus = 2 * length as u128;
        let symbols = (0..length)
            .map(|j| {
                let j = j as u128;
                let m = (root as u128 * j * (j + 1)) % modulus;
                let phase = -PI * m as f64 / length as f64;
                Complex64::new(phase.cos(), phase.sin())
            })
            .collect();
        Ok(Self { root, symbols })
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Complex64] {
        &self.symbols
    }

    /// Aperiodic partial-period correlation at lag `k`:
    /// `Re[sum_{j=k}^{L-1} conj(p_j) p_{j-k}]`. Returns `L` at lag 0 and 0
    /// for any lag at or beyond the length (empty overlap).
    pub fn partial_correlation(&self, k: usize) -> f64 {
        let l = self.symbols.len();
        if k >= l {
            return 0.0;
        }
        (k..l)
            .map(|j| (self.symbols[j].conj() * self.symbols[j - k]).re)
            .sum()
    }

    /// Partial correlations at every lag `0..L-1`.
    pub fn correlation_profile(&self) -> PartialCorrelationProfile {
        let values = (0..self.symbols.len())
            .map(|k| self.partial_correlation(k))
            .collect();
        PartialCorrelationProfile { values }
    }

    /// Full-period cyclic autocorrelation at lag `k` (complex). Zero for
    /// every nonzero lag by the CAZAC property.
    pub fn cyclic_autocorrelation(&self, k: usize) -> Complex64 {
        let l = self.symbols.len();
        (0..l)
            .map(|j| self.symbols[j].conj() * self.symbols[(j + k) % l])
            .sum()
    }
}

/// Real partial-period correlations of a sequence, indexed by lag.
#[derive(Debug, Clone)]
pub struct PartialCorrelationProfile {
    values: Vec<f64>,
}

impl PartialCorrelationProfile {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Correlation at lag `k`; zero beyond the sequence length.
    pub fn at(&self, k: usize) -> f64 {
        self.values.get(k).copied().unwrap_or(0.0)
    }

    /// Largest `|R_p(k)|` over the nonzero lags `1..L-1`.
    pub fn worst_sidelobe(&self) -> f64 {
        self.values[1..]
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
    }
}

/// Exhaustive min-max root search: over all roots coprime with `length`,
/// picks the one minimizing the worst `|R_p(k)|`, `k = 1..L-1`. Ties (within
/// [`ROOT_TIE_TOLERANCE`]) go to the smallest root, so the result is
/// deterministic.
pub fn select_root(length: usize) -> Result<usize> {
    if length < 3 {
        return Err(Error::LengthTooShort { got: length, min: 3 });
    }
    if length % 2 == 0 {
        return Err(Error::EvenLength(length));
    }
    let mut candidates: Vec<(usize, f64)> = (1..length)
        .into_par_iter()
        .filter(|&u| gcd(u, length) == 1)
        .map(|u| {
            let seq = ZadoffChuSequence::generate(u, length)
                .expect("coprime root in range is always valid");
            (u, seq.correlation_profile().worst_sidelobe())
        })
        .collect();
    candidates.sort_by_key(|&(u, _)| u);
    let mut best = candidates[0];
    for &(u, worst) in &candidates[1..] {
        if worst < best.1 - ROOT_TIE_TOLERANCE {
            best = (u, worst);
        }
    }
    Ok(best.0)
}

/// [`select_root`] with a process-wide memo. The search is deterministic,
/// so caching is observationally pure; overhead sweeps re-select roots for
/// the same lengths thousands of times.
pub fn select_root_cached(length: usize) -> Result<usize> {
    static CACHE: OnceLock<RwLock<HashMap<usize, usize>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(&root) = cache.read().expect("root cache poisoned").get(&length) {
        return Ok(root);
    }
    let root = select_root(length)?;
    cache.write().expect("root cache poisoned").insert(length, root);
    Ok(root)
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        let t = b;
        b = a % b;
        a = t;
    }
    a
}
