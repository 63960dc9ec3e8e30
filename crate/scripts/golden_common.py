"""Shared reference implementations used by the golden-value generators.

Everything here is written independently of the Rust crate: sequences are
evaluated with exact integer phase reduction, probabilities with numpy/mpmath.
"""

import math

import numpy as np
from mpmath import mp, mpf, erfc, log, sqrt as mpsqrt

mp.dps = 60


def zc_sequence(root: int, length: int) -> np.ndarray:
    """p_j = exp(-i*pi*root*j*(j+1)/length), phase reduced mod 2*length."""
    j = np.arange(length, dtype=object)
    m = [(root * int(x) * (int(x) + 1)) % (2 * length) for x in j]
    return np.exp(-1j * math.pi * np.array(m, dtype=float) / length)


def partial_correlation(seq: np.ndarray, k: int) -> float:
    """Re[sum_{j=k}^{L-1} conj(p_j) * p_{j-k}] by direct double-index summation."""
    length = len(seq)
    if k >= length:
        return 0.0
    acc = 0.0 + 0.0j
    for j in range(k, length):
        acc += np.conj(seq[j]) * seq[j - k]
    return float(acc.real)


def correlation_profile(seq: np.ndarray) -> np.ndarray:
    """Per-lag vectorized evaluation of the partial correlation."""
    length = len(seq)
    out = np.empty(length)
    for k in range(length):
        out[k] = np.sum(np.conj(seq[k:]) * seq[: length - k]).real
    return out


def profile_closed_form(root: int, length: int) -> np.ndarray:
    """Geometric-sum route for R_p(k); independent cross-check of the direct sum.

    conj(p_j) p_{j-k} = exp(-i*pi*u*k*(k-1)/L) * exp(i*2*pi*u*j*k/L), summed
    over j = k..L-1.
    """
    u, L = root, length
    k = np.arange(1, L)
    ratio = np.exp(2j * math.pi * u * k / L)
    first = np.exp(2j * math.pi * u * k * k / L)
    geom = first * (np.exp(2j * math.pi * u * k * (L - k) / L) - 1.0) / (ratio - 1.0)
    vals = (np.exp(-1j * math.pi * u * k * (k - 1) / L) * geom).real
    return np.concatenate([[float(L)], vals])


def select_root(length: int) -> int:
    """Exhaustive min-max search: root minimizing max_k |R_p(k)|, k=1..L-1."""
    best_root, best_val = None, None
    for u in range(1, length):
        if math.gcd(u, length) != 1:
            continue
        prof = correlation_profile(zc_sequence(u, length))
        worst = np.max(np.abs(prof[1:]))
        if best_val is None or worst < best_val - 1e-12:
            best_root, best_val = u, worst
    return best_root


def q_mp(x):
    """Q-function at arbitrary precision."""
    return erfc(mpf(x) / mpsqrt(2)) / 2


def q_np(x):
    """Vectorized double-precision Q-function (scipy erfc)."""
    from scipy.special import erfc as erfc_np

    return 0.5 * erfc_np(np.asarray(x, dtype=float) / math.sqrt(2.0))


LOG2E = mpf(1) / log(2)


def capacity_mp(p):
    return log(1 + mpf(p)) / (2 * log(2))


def dispersion_mp(p):
    p = mpf(p)
    return p * (p + 2) / (2 * (p + 1) ** 2) * LOG2E**2


def decoding_error_mp(n_c: int, b: int, p) -> mpf:
    n_c = mpf(n_c)
    arg = (2 * n_c * capacity_mp(p) - b + log(2 * n_c) / (2 * log(2))) / mpsqrt(
        2 * n_c * dispersion_mp(p)
    )
    return q_mp(arg)


def decoding_error_np(n_c, b, p):
    n_c = np.asarray(n_c, dtype=float)
    p = np.asarray(p, dtype=float)
    cap = 0.5 * np.log2(1.0 + p)
    disp = p * (p + 2.0) / (2.0 * (p + 1.0) ** 2) * (1.0 / math.log(2.0)) ** 2
    arg = (2.0 * n_c * cap - b + 0.5 * np.log2(2.0 * n_c)) / np.sqrt(2.0 * n_c * disp)
    return q_np(arg)


# ---------------------------------------------------------------------------
# Preamble-structure analytics (vectorized over a threshold grid)
# ---------------------------------------------------------------------------


def preamble_per_curve(profile: np.ndarray, n: int, bits: int, p: float, t_r: int,
                       deltas: np.ndarray):
    """PER upper bound versus threshold for a fixed preamble design."""
    n_p = len(profile)
    sigma = math.sqrt(n_p / 2.0)
    n_lags = t_r - 1
    n_corr = min(n_p - 1, n_lags)
    fa = np.zeros_like(deltas)
    for k in range(1, n_corr + 1):
        mu = math.sqrt(p) * profile[k]
        fa += q_np((deltas - mu) / sigma)
    tail = n_lags - n_corr
    if tail > 0:
        fa += tail * q_np(deltas / sigma)
    fa = np.minimum(fa, 1.0)
    md = q_np((math.sqrt(p) * n_p - deltas) / sigma)
    eps = float(decoding_error_np(n - n_p, bits, p))
    return np.minimum(fa + md + eps, 1.0), fa, md, eps


def superimposed_per_curve(profile: np.ndarray, n: int, bits: int, p: float,
                           t_r: int, alpha: float, deltas: np.ndarray):
    """PER approximation versus threshold for a fixed power split."""
    sig1 = math.sqrt(n / 2.0)
    fa1 = np.minimum(max(t_r - n, 0) * q_np(deltas / sig1), 1.0)
    fa2 = np.zeros_like(deltas)
    for k in range(1, n):
        mu = math.sqrt(alpha * p) * profile[k]
        sig = math.sqrt(n / 2.0 + 0.5 * (1.0 - alpha) * (n - k) * p)
        fa2 += q_np((deltas - mu) / sig)
    fa2 = np.minimum(fa2, 1.0)
    sig_md = math.sqrt(n / 2.0 + 0.5 * (1.0 - alpha) * p * n)
    md = q_np((math.sqrt(alpha * p) * n - deltas) / sig_md)
    eps = float(decoding_error_np(n, bits, (1.0 - alpha) * p))
    return np.minimum(fa1 + fa2 + md + eps, 1.0), fa1, fa2, md, eps


def snr_db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)
