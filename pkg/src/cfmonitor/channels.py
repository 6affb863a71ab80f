"""Small-scale fading samplers and effective-channel constructors.

Complex Gaussians are drawn as ``sqrt(var/2) * (x + 1j*y)`` with ``x, y``
independent standard normals.  Every sampler accepts a leading ``size`` so
the Monte-Carlo code can draw whole batches at once.
"""

from __future__ import annotations

import numpy as np


def crandn(rng: np.random.Generator, shape, var=1.0) -> np.ndarray:
    shape = tuple(np.atleast_1d(shape)) if not isinstance(shape, tuple) else shape
    z = rng.standard_normal(shape + (2,))
    return np.sqrt(np.asarray(var, float) / 2) * (z[..., 0] + 1j * z[..., 1])


def sample_rayleigh_vector(beta: float, n: int, rng: np.random.Generator, size=()) -> np.ndarray:
    """i.i.d. CN(0, beta) entries; trailing axis has length ``n``."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    size = (size,) if np.isscalar(size) else tuple(size)
    return crandn(rng, size + (n,), beta)


def sample_self_interference(sigma_si: float, n_pm: int, rng: np.random.Generator, size=()) -> np.ndarray:
    if sigma_si < 0:
        raise ValueError("sigma_si must be >= 0")
    size = (size,) if np.isscalar(size) else tuple(size)
    return crandn(rng, size + (n_pm, n_pm), sigma_si)


def steering_vector(azimuth: float, elevation: float, n: int) -> np.ndarray:
    # half-wavelength ULA
    i = np.arange(n)
    return np.exp(1j * np.pi * i * np.sin(azimuth) * np.cos(elevation))


def los_channel(zeta: float, steering: np.ndarray) -> np.ndarray:
    return np.sqrt(zeta) * np.asarray(steering)


def _check(a, b):
    if np.shape(a)[-1] != np.shape(b)[-1]:
        raise ValueError(f"dimension mismatch: {np.shape(a)} vs {np.shape(b)}")


def effective_sap_ue_channel(direct, h_t_k, h_mt, alpha: float) -> np.ndarray:
    """Direct row channel plus the path bounced off the target.

    ``direct`` is g (length N), ``h_t_k`` the scalar target->UE gain and
    ``h_mt`` the AP->target LoS vector.  Used for both S-AP->UE and
    monitor->UE links.
    """
    _check(direct, h_mt)
    return np.asarray(direct) + np.sqrt(alpha) * np.asarray(h_t_k)[..., None] * np.asarray(h_mt)


effective_monitor_ue_channel = effective_sap_ue_channel


def effective_matrix_channel(direct_t, h_rx, h_tx, alpha: float) -> np.ndarray:
    """``G^T + sqrt(alpha) h_rx h_tx^T`` with ``direct_t`` already transposed.

    Covers S-AP->monitor, monitor->monitor (self-interference) and
    monitor->receive-S-AP links.  ``direct_t`` has shape (..., n_rx, n_tx).
    """
    direct_t = np.asarray(direct_t)
    if direct_t.shape[-2:] != (len(h_rx), len(h_tx)):
        raise ValueError(f"dimension mismatch: {direct_t.shape} vs ({len(h_rx)}, {len(h_tx)})")
    return direct_t + np.sqrt(alpha) * np.outer(h_rx, h_tx)


def reflected_matrix_channel(h_rx, h_tx, alpha: float) -> np.ndarray:
    """Pure target-reflected S-AP to S-AP channel ``sqrt(alpha) h_rx h_tx^T``."""
    return np.sqrt(alpha) * np.outer(h_rx, h_tx)
