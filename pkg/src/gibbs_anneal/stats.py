"""Small statistics helpers for correlated Monte Carlo output."""

from __future__ import annotations

import math

import numpy as np
from scipy import stats as _st


def batch_means(x, n_batches: int = 20) -> tuple[float, float]:
    """Mean and batch-means standard error of a (possibly correlated) series."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or len(x) == 0:
        raise ValueError("need a non-empty 1D series")
    if len(x) < 2 * n_batches:
        se = x.std(ddof=1) / math.sqrt(len(x)) if len(x) > 1 else 0.0
        return float(x.mean()), float(se)
    size = len(x) // n_batches
    b = x[: size * n_batches].reshape(n_batches, size).mean(axis=1)
    return float(x.mean()), float(b.std(ddof=1) / math.sqrt(n_batches))


def batch_means_columns(x, n_batches: int = 20) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    if len(x) < 2 * n_batches:
        se = x.std(axis=0, ddof=1) / math.sqrt(len(x)) if len(x) > 1 else np.zeros(x.shape[1:])
        return x.mean(axis=0), se
    size = len(x) // n_batches
    b = x[: size * n_batches].reshape(n_batches, size, *x.shape[1:]).mean(axis=1)
    return x.mean(axis=0), b.std(axis=0, ddof=1) / math.sqrt(n_batches)


def weighted_slope(xs, ys, ses) -> tuple[float, float]:
    """Weighted least-squares slope of ``ys`` on ``xs`` and its standard error."""
    xs, ys, ses = (np.asarray(v, dtype=float) for v in (xs, ys, ses))
    wts = 1.0 / np.maximum(ses, 1e-12) ** 2
    xbar = np.sum(wts * xs) / wts.sum()
    sxx = np.sum(wts * (xs - xbar) ** 2)
    slope = np.sum(wts * (xs - xbar) * ys) / sxx
    return float(slope), float(math.sqrt(1.0 / sxx))


def two_proportion_pvalue(k_hi: int, n_hi: int, k_lo: int, n_lo: int) -> float:
    """One-sided p-value for ``P(hi) > P(lo)`` (Fisher's exact test)."""
    table = [[k_hi, n_hi - k_hi], [k_lo, n_lo - k_lo]]
    return float(_st.fisher_exact(table, alternative="greater").pvalue)
