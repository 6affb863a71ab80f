"""Uplink training under pilot spoofing and MMSE estimate statistics.

UE index 0 is the monitored UE whose pilot the monitor replays from all
``n_pm`` transmit antennas.  Pilots are orthogonal, so everything is written
directly in terms of the despread observation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import crandn
from .scenario import NetworkRealization, SystemParams


@dataclass(frozen=True)
class EstimationStats:
    gamma: np.ndarray      # (m_c, K) per-entry variance of the estimate
    gain: np.ndarray       # (m_c, K) scalar MMSE gain applied to the despread pilot
    spoof_power: np.ndarray  # (m_c,) tau_p * rho_p_pm * beta_{m,pm} * n_pm


def _denominator(beta, spoof, tau_rho_p):
    return tau_rho_p * beta + spoof + 1.0


def estimation_stats(realization: NetworkRealization, params: SystemParams | None = None) -> EstimationStats:
    p = params or realization.params
    beta = realization.beta_c_ue
    tau_rho_p = p.tau_p * p.rho_p
    spoof = p.tau_p * p.rho_p_pm * realization.beta_c_pm * p.n_pm
    spoof_mat = np.zeros_like(beta)
    spoof_mat[:, 0] = spoof
    den = _denominator(beta, spoof_mat, tau_rho_p)
    gamma = tau_rho_p * beta**2 / den
    gain = np.sqrt(tau_rho_p) * beta / den
    return EstimationStats(gamma=gamma, gain=gain, spoof_power=spoof)


def gamma_coefficient(m: int, k: int, realization: NetworkRealization, params: SystemParams | None = None) -> float:
    return float(estimation_stats(realization, params).gamma[m, k])


def sample_mmse_estimate(m, k, realization, params=None, rng=None, size=(), g=None, g_spoof=None):
    """Draw (estimate, error) for the C-AP ``m`` / UE ``k`` link.

    ``g`` (true channel) and ``g_spoof`` (monitor transmit array -> AP ``m``,
    shape (..., N, n_pm)) may be passed in when the caller needs them
    elsewhere; otherwise they are drawn here.
    """
    p = params or realization.params
    rng = rng if rng is not None else np.random.default_rng()
    size = (size,) if np.isscalar(size) else tuple(size)
    n = p.n_ap
    beta = realization.beta_c_ue[m, k]
    if g is None:
        g = crandn(rng, size + (n,), beta)
    tau_rho_p = p.tau_p * p.rho_p
    y = np.sqrt(tau_rho_p) * g + crandn(rng, g.shape, 1.0)
    spoof = 0.0
    if k == 0:
        if g_spoof is None:
            # G u with u all-ones: each entry CN(0, n_pm * beta_{m,pm})
            y = y + np.sqrt(p.tau_p * p.rho_p_pm) * crandn(rng, g.shape, p.n_pm * realization.beta_c_pm[m])
        else:
            y = y + np.sqrt(p.tau_p * p.rho_p_pm) * g_spoof.sum(axis=-1)
        spoof = p.tau_p * p.rho_p_pm * realization.beta_c_pm[m] * p.n_pm
    c = np.sqrt(tau_rho_p) * beta / _denominator(beta, spoof, tau_rho_p)
    g_hat = c * y
    return g_hat, g - g_hat
