"""Bartlett-kernel long-run covariance (Newey-West)."""

from __future__ import annotations

import math

import numpy as np

from .exceptions import ParameterError

__all__ = ["auto_bandwidth", "bartlett_weights", "newey_west"]


def auto_bandwidth(t_len: int) -> int:
    """floor(4 (T / 100) ** (2/9)), the usual automatic lag truncation."""
    return int(math.floor(4.0 * (t_len / 100.0) ** (2.0 / 9.0)))


def bartlett_weights(bandwidth: int) -> np.ndarray:
    j = np.arange(1, bandwidth + 1)
    return 1.0 - j / (bandwidth + 1.0)


def newey_west(moments, bandwidth: int | None = None, center: bool = True) -> np.ndarray:
    """Long-run covariance of a (T, L) array of per-period moments.

    S = Gamma_0 + sum_{j=1}^{bw} w_j (Gamma_j + Gamma_j'), with
    Gamma_j = (1/T) sum_t g_t g_{t-j}' and Bartlett weights
    w_j = 1 - j / (bw + 1). With ``center`` the moments are demeaned first,
    so ``bandwidth=0`` returns the (biased, 1/T) sample covariance.

    ``bandwidth=None`` uses :func:`auto_bandwidth`.
    """
    g = np.asarray(moments, dtype=float)
    if g.ndim == 1:
        g = g[:, None]
    t_len = g.shape[0]
    if bandwidth is None:
        bandwidth = auto_bandwidth(t_len)
    if int(bandwidth) != bandwidth or bandwidth < 0:
        raise ParameterError(f"bandwidth must be a non-negative integer, got {bandwidth!r}")
    bandwidth = int(bandwidth)
    if bandwidth >= t_len:
        raise ParameterError(f"bandwidth {bandwidth} must be smaller than the sample size {t_len}")
    if center:
        g = g - g.mean(axis=0)
    s = g.T @ g / t_len
    for j, w in enumerate(bartlett_weights(bandwidth), start=1):
        gamma = g[j:].T @ g[:-j] / t_len
        s += w * (gamma + gamma.T)
    return 0.5 * (s + s.T)
