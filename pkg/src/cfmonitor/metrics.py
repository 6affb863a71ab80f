"""Ensemble statistics: detection/monitoring probabilities, CDFs, lifetime."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def db(x):
    return 10 * np.log10(x)


def from_db(x):
    return 10 ** (np.asarray(x, float) / 10)


@dataclass(frozen=True)
class EnsembleRecord:
    sinr_ue1: np.ndarray
    sinr_monitor: np.ndarray
    sinr_cpu: np.ndarray
    theta_t: np.ndarray = field(default=None)
    theta_1: np.ndarray = field(default=None)
    status: tuple = ()

    def __post_init__(self):
        n = len(self.sinr_cpu)
        for name in ("sinr_ue1", "sinr_monitor", "sinr_cpu", "theta_t", "theta_1"):
            v = getattr(self, name)
            if v is None:
                v = np.zeros(n)
            v = np.asarray(v, dtype=float)
            object.__setattr__(self, name, v)
            if len(v) != n:
                raise ValueError(f"{name} has length {len(v)}, expected {n}")
            if np.isnan(v).any():
                raise ValueError(f"{name} contains NaN")
        status = tuple(self.status) or ("optimal",) * n
        if len(status) != n:
            raise ValueError("status length mismatch")
        object.__setattr__(self, "status", status)

    def __len__(self):
        return len(self.sinr_cpu)

    @property
    def n_infeasible(self) -> int:
        return sum(s == "infeasible" for s in self.status)


def _nonempty(records: EnsembleRecord):
    if len(records) == 0:
        raise ValueError("empty ensemble")


def sdp(records: EnsembleRecord, kappa: float) -> float:
    """Fraction of realizations whose sensing SINR reaches ``kappa`` (linear)."""
    _nonempty(records)
    return float(np.mean(records.sinr_cpu >= kappa))


def msp(records: EnsembleRecord) -> float:
    _nonempty(records)
    return float(np.mean(records.sinr_monitor >= records.sinr_ue1))


def proportion_se(p: float, n: int) -> float:
    return float(np.sqrt(p * (1 - p) / n)) if n else float("nan")


class EmpiricalCDF:
    """Right-continuous step CDF of a sample."""

    def __init__(self, samples):
        x = np.sort(np.asarray(samples, dtype=float).ravel())
        if x.size == 0:
            raise ValueError("no samples")
        self.support = x
        self.n = x.size

    def __call__(self, points):
        idx = np.searchsorted(self.support, points, side="right")
        return idx / self.n

    @property
    def levels(self):
        return np.arange(1, self.n + 1) / self.n

    def quantile(self, p):
        i = np.clip(np.ceil(np.asarray(p) * self.n).astype(int) - 1, 0, self.n - 1)
        return self.support[i]


def empirical_cdf(samples) -> EmpiricalCDF:
    return EmpiricalCDF(samples)


def operational_lifetime(e_max: float, p_sta: float, theta_sum: float, p_pm: float, eta_amp: float) -> float:
    if not 0 < eta_amp <= 1:
        raise ValueError("eta_amp must be in (0, 1]")
    if e_max <= 0 or theta_sum < 0 or p_pm < 0:
        raise ValueError("e_max must be > 0, theta_sum and p_pm >= 0")
    denom = p_sta + theta_sum * p_pm / eta_amp
    if denom <= 0:
        raise ValueError("power draw must be > 0")
    return e_max / denom
