"""MCMC diagnostics: effective sample size, split R-hat, kernel densities.

ESS uses Geyer's initial monotone positive sequence truncation of the
autocorrelations (computed with FFT autocovariance) on a single chain,
matching a per-chain reporting convention.  ``split_rhat`` is the classic
split-chain potential scale reduction factor.  ``kde`` is a plain Gaussian
kernel density estimate with Silverman's bandwidth rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "ChainSummary",
    "ess",
    "ess_flagged",
    "min_ess_over_params",
    "split_rhat",
    "kde",
]

# ESS above 1.5 * N (possible for antithetic chains) is capped at report
# time; raw values are preserved internally.
ESS_CAP_FACTOR = 1.5


@dataclass(frozen=True)
class ChainSummary:
    """Per-chain scalar summaries used in the experiment report."""

    mean_log_summary: float
    min_ess: float
    rhat_max: float
    divergences: int
    wall_time: float


def _autocovariance(x: np.ndarray) -> np.ndarray:
    """Biased autocovariance at all lags via FFT."""
    n = x.size
    xc = x - x.mean()
    nfft = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(xc, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[:n].real
    return acov / n


def ess_flagged(x) -> tuple[float, bool]:
    """Effective sample size of one series, plus a degeneracy flag.

    Returns ``N / (1 + 2 * sum(rho_t))`` with the autocorrelation sum
    truncated by Geyer's initial positive sequence and forced monotone.
    A constant series is degenerate: the estimator returns ``(0.0, True)``.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 10:
        raise ValueError("need a 1-D series of length >= 10")
    if not np.all(np.isfinite(x)):
        raise ValueError("series contains non-finite values")
    n = x.size
    if np.ptp(x) == 0.0:
        return 0.0, True
    acov = _autocovariance(x)
    rho = acov / acov[0]
    # Geyer: sums of adjacent autocorrelation pairs are positive and
    # decreasing for a reversible chain; truncate at the first violation.
    npairs = n // 2
    pair = rho[0 : 2 * npairs : 2] + rho[1 : 2 * npairs : 2]
    tail = np.nonzero(pair <= 0.0)[0]
    k = tail[0] if tail.size else npairs
    pair = np.minimum.accumulate(pair[:k])
    tau = max(-1.0 + 2.0 * float(np.sum(pair)), np.finfo(float).tiny)
    return n / tau, False


def ess(x) -> float:
    """Effective sample size (0.0 for a degenerate constant series)."""
    return ess_flagged(x)[0]


def min_ess_over_params(draws: np.ndarray, cap: bool = False) -> float:
    """Minimum ESS over the columns of a draws matrix (one chain).

    ``cap=True`` applies the reporting cap of ``1.5 * N``; raw values are
    the default.  Degenerate columns drive the minimum to zero.
    """
    draws = np.asarray(draws, dtype=float)
    if draws.ndim != 2 or draws.shape[0] < 10 or draws.shape[1] < 1:
        raise ValueError("need a draws matrix with >= 10 rows")
    values = [ess(draws[:, j]) for j in range(draws.shape[1])]
    out = min(values)
    if cap:
        out = min(out, ESS_CAP_FACTOR * draws.shape[0])
    return out


def split_rhat(chains: Sequence[np.ndarray]) -> float:
    """Split-chain potential scale reduction factor for one parameter.

    Each chain is halved and the halves treated as separate chains; returns
    ``sqrt(((n-1)/n + B/(n W)))`` in the usual notation.  Degenerate input
    (all values identical) is flagged by returning NaN.
    """
    arrays = [np.asarray(c, dtype=float) for c in chains]
    if len(arrays) < 2:
        raise ValueError("need at least 2 chains")
    length = arrays[0].size
    if length < 4 or any(a.shape != (length,) for a in arrays):
        raise ValueError("chains must share one length >= 4")
    half = length // 2
    split = np.vstack([a[:half] for a in arrays] + [a[-half:] for a in arrays])
    within = np.mean(np.var(split, axis=1, ddof=1))
    if within == 0.0:
        return math.nan
    nhalf = split.shape[1]
    between = nhalf * np.var(np.mean(split, axis=1), ddof=1)
    var_plus = (nhalf - 1.0) / nhalf * within + between / nhalf
    return float(np.sqrt(var_plus / within))


def kde(values, grid: int = 512) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian kernel density estimate with Silverman's bandwidth.

    Bandwidth is ``0.9 * min(sd, IQR/1.34) * N**(-1/5)`` (falling back to
    the standard deviation when the IQR collapses); the evaluation grid is
    ``grid`` evenly spaced points spanning the data range extended by three
    bandwidths on each side.

    Returns
    -------
    (grid_points, density) : tuple of ndarray
    """
    x = np.asarray(values, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("need at least 2 values")
    sd = float(np.std(x))
    if sd == 0.0:
        raise ValueError("zero-spread input")
    q75, q25 = np.percentile(x, [75, 25])
    iqr = q75 - q25
    spread = min(sd, iqr / 1.34) if iqr > 0 else sd
    bw = 0.9 * spread * x.size ** (-0.2)
    pts = np.linspace(x.min() - 3.0 * bw, x.max() + 3.0 * bw, grid)
    u = (pts[:, None] - x[None, :]) / bw
    dens = np.exp(-0.5 * u * u).sum(axis=1) / (x.size * bw * math.sqrt(2.0 * math.pi))
    return pts, dens
