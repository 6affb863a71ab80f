"""Closed-form SINRs for the malicious UE, the proactive monitor and the
sensing CPU, plus the q-coefficients that make both power-allocation
problems linear in the monitor's jamming shares.

All terms are linear powers.  UE index 0 is the monitored UE.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .estimation import EstimationStats
from .scenario import NetworkRealization


@dataclass(frozen=True)
class PowerAllocation:
    """Jamming shares of the monitor.

    ``theta_t = n_pm * eta_pm_t * zeta_pm_t`` (toward the target) and
    ``theta_1 = n_pm * eta_pm_1 * beta_pm_1`` (toward the monitored UE).
    """

    theta_t: float
    theta_1: float
    rho_pm: float

    def __post_init__(self):
        if self.theta_t < 0 or self.theta_1 < 0:
            raise ValueError("jamming shares must be >= 0")
        if self.theta_t + self.theta_1 > 1 + 1e-9:
            raise ValueError(f"shares sum to {self.theta_t + self.theta_1} > 1")
        if self.rho_pm < 0:
            raise ValueError("rho_pm must be >= 0")

    @property
    def total(self) -> float:
        return self.theta_t + self.theta_1

    def eta_pm_t(self, n_pm: int, zeta_pm_t: float) -> float:
        return self.theta_t / (n_pm * zeta_pm_t)

    def eta_pm_1(self, n_pm: int, beta_pm_1: float) -> float:
        return self.theta_1 / (n_pm * beta_pm_1)

    @classmethod
    def from_eta(cls, eta_t, eta_1, n_pm, zeta_pm_t, beta_pm_1, rho_pm):
        return cls(n_pm * eta_t * zeta_pm_t, n_pm * eta_1 * beta_pm_1, rho_pm)

    @classmethod
    def passive(cls, rho_pm: float = 0.0) -> "PowerAllocation":
        return cls(0.0, 0.0, rho_pm)


@dataclass(frozen=True)
class SinrBreakdown:
    ds: float
    bu: float
    iu: float
    is_: float
    js_s: float
    js_c: float
    noise: float

    TERMS = ("ds", "bu", "iu", "is_", "js_s", "js_c", "noise")

    @property
    def interference(self) -> float:
        return self.bu + self.iu + self.is_ + self.js_s + self.js_c + self.noise

    @property
    def sinr(self) -> float:
        return self.ds / self.interference

    def as_dict(self) -> dict:
        d = {t: getattr(self, t) for t in self.TERMS}
        d["sinr"] = self.sinr
        return d


@dataclass(frozen=True)
class Eta:
    c: np.ndarray   # (m_c, K)
    s: np.ndarray   # (m_st,)


def default_ap_power_control(realization: NetworkRealization, stats: EstimationStats) -> Eta:
    n = realization.params.n_ap
    eta_c = np.broadcast_to(1.0 / (n * stats.gamma.sum(axis=1, keepdims=True)), stats.gamma.shape).copy()
    eta_s = 1.0 / (n * realization.zeta_st)
    return Eta(eta_c, eta_s)


def _a_sum(r: NetworkRealization, eta: Eta) -> float:
    # sum_{m'} sqrt(eta_{m',t}) zeta_{m',t}
    return float(np.sum(np.sqrt(eta.s) * r.zeta_st))


def sinr_ue(k: int, r: NetworkRealization, stats: EstimationStats, alloc: PowerAllocation, eta: Eta) -> SinrBreakdown:
    p = r.params
    n, n_pm, a = p.n_ap, p.n_pm, r.alpha
    g, b = stats.gamma, r.beta_c_ue
    ds = np.sum(np.sqrt(eta.c[:, k] * p.rho_c) * n * g[:, k])
    bu = p.rho_c * n * np.sum(eta.c[:, k] * g[:, k] * b[:, k])
    others = [kk for kk in range(p.k_ues) if kk != k]
    iu = sum(p.rho_c * n * np.sum(eta.c[:, kk] * g[:, kk] * b[:, k]) for kk in others)
    A = _a_sum(r, eta)
    is_ = (p.rho_s * n * np.sum(eta.s * r.beta_st_ue[:, k] * r.zeta_st)
           + p.rho_s * a * r.zeta_ue[k] * n**2 * A**2)
    rho = alloc.rho_pm
    js_s = alloc.theta_t * rho * (r.beta_pm_ue[k] + a * r.zeta_ue[k] * n_pm * r.zeta_pm)
    if k == 0:
        js_c = alloc.theta_1 * rho * ((n_pm + 1) * r.beta_pm_ue[0] + a * r.zeta_ue[0] * r.zeta_pm)
    else:
        js_c = alloc.theta_1 * rho * (r.beta_pm_ue[k] + a * r.zeta_ue[k] * r.zeta_pm)
    return SinrBreakdown(float(ds**2), float(bu), float(iu), float(is_), float(js_s), float(js_c), 1.0)


def _monitor_s0(r: NetworkRealization, stats: EstimationStats, eta: Eta) -> float:
    p = r.params
    return float(np.sum(eta.c[:, 0] * p.rho_c * r.beta_c_pm * p.n_ap * stats.gamma[:, 0]))


def sinr_monitor(r: NetworkRealization, stats: EstimationStats, alloc: PowerAllocation, eta: Eta) -> SinrBreakdown:
    p = r.params
    n, n_pm, a = p.n_ap, p.n_pm, r.alpha
    g, bpm = stats.gamma, r.beta_c_pm
    s0 = _monitor_s0(r, stats, eta)
    ds = n_pm * s0
    # Gaussian approximation of the beamforming-uncertainty variance
    bu = s0**2 * n_pm
    own = eta.c[:, 0] * n * g[:, 0] * bpm           # per-AP share of s0 / rho_c
    iu = 0.0
    for kk in range(1, p.k_ues):
        lead = eta.c[:, kk] * p.rho_c**2 * n_pm * n * g[:, kk] * bpm
        bracket = eta.c[:, 0] * (n_pm + n) * bpm * g[:, 0] + (own.sum() - own)
        iu += float(np.sum(lead * bracket))
    A = _a_sum(r, eta)
    is_ = s0 * p.rho_s * n_pm * n * (np.sum(eta.s * r.zeta_st * r.beta_st_pm) + n * r.zeta_pm * a * A**2)
    si = r.beta_pm_pm
    js_s = alloc.theta_t * alloc.rho_pm * s0 * n_pm * (si + a * n_pm * r.zeta_pm**2)
    js_c = alloc.theta_1 * alloc.rho_pm * s0 * n_pm * (si + a * r.zeta_pm**2)
    noise = n_pm * s0
    return SinrBreakdown(float(ds**2), float(bu), float(iu), float(is_), float(js_s), float(js_c), float(noise))


def _cpu_parts(r: NetworkRealization, eta: Eta):
    p = r.params
    n, a = p.n_ap, r.alpha
    A = _a_sum(r, eta)
    zr = float(np.sum(r.zeta_sr))
    zb = float(np.sum(r.zeta_sr * r.beta_pm_sr))
    amp = p.rho_s * a * n**3 * A**2          # DS_cpu / sum(zeta_sr) and n_cpu / sum(zeta_sr)
    return A, zr, zb, amp


def sinr_cpu(r: NetworkRealization, stats: EstimationStats, alloc: PowerAllocation, eta: Eta) -> SinrBreakdown:
    p = r.params
    n, n_pm, a = p.n_ap, p.n_pm, r.alpha
    A, zr, zb, amp = _cpu_parts(r, eta)
    ds = amp * zr
    # sum_k sum_m'' sum_m eta rho_c rho_s alpha N^4 A^2 zeta_m'' beta_{m,m''} gamma_mk
    w = (eta.c * stats.gamma).sum(axis=1)                  # (m_c,)
    iu = p.rho_c * amp * n * float(w @ r.beta_c_sr @ r.zeta_sr)
    rho = alloc.rho_pm
    js_s = alloc.theta_t * rho * amp * (zb + a * n * n_pm * r.zeta_pm * zr**2)
    # second part carries rho_c as written in the closed form (equal to rho_s when P_c = P_s)
    js_c = alloc.theta_1 * rho * a * n**3 * A**2 * (p.rho_s * zb + p.rho_c * a * n * r.zeta_pm * zr**2)
    noise = amp * zr
    return SinrBreakdown(float(ds**2), 0.0, float(iu), 0.0, float(js_s), float(js_c), float(noise))


@dataclass(frozen=True)
class QCoefficients:
    q1: float
    q2: float
    q3: float
    q4: float
    q5: float
    q6: float
    q7: float
    q8: float
    q9: float
    q10: float
    q11: float
    q12: float
    rho_pm: float = 1.0

    def __post_init__(self):
        for name, v in self.as_dict().items():
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")

    def as_dict(self) -> dict:
        return {f"q{i}": getattr(self, f"q{i}") for i in range(1, 13)}

    def primed(self) -> "QCoefficients":
        """Coefficients per unit of absolute jamming power (divide by rho_pm)."""
        r = self.rho_pm
        return dataclasses.replace(self, q2=self.q2 / r, q3=self.q3 / r, q6=self.q6 / r,
                                   q7=self.q7 / r, q10=self.q10 / r, q11=self.q11 / r, rho_pm=1.0)

    # linear forms -------------------------------------------------------
    def sinr_cpu(self, theta_t, theta_1):
        return self.q9 / (self.q10 * theta_t + self.q11 * theta_1 + self.q12)

    def sinr_monitor(self, theta_t, theta_1):
        return self.q1 / (self.q2 * theta_t + self.q3 * theta_1 + self.q4)

    def sinr_ue1(self, theta_t, theta_1):
        return self.q5 / (self.q6 * theta_t + self.q7 * theta_1 + self.q8)

    def monitoring_coeffs(self):
        """(a, b, c) with monitoring success iff a*theta_t + b*theta_1 >= c."""
        return (self.q1 * self.q6 - self.q2 * self.q5,
                self.q1 * self.q7 - self.q3 * self.q5,
                self.q4 * self.q5 - self.q1 * self.q8)

    def monitoring_margin(self, theta_t, theta_1):
        a, b, c = self.monitoring_coeffs()
        return a * theta_t + b * theta_1 - c


def q_coefficients(r: NetworkRealization, stats: EstimationStats, eta: Eta, rho_pm: float) -> QCoefficients:
    p = r.params
    n, n_pm, a = p.n_ap, p.n_pm, r.alpha
    unit = PowerAllocation(0.0, 0.0, rho_pm)
    mon = sinr_monitor(r, stats, unit, eta)
    ue = sinr_ue(0, r, stats, unit, eta)
    cpu = sinr_cpu(r, stats, unit, eta)
    s0 = _monitor_s0(r, stats, eta)
    si = r.beta_pm_pm
    A, zr, zb, amp = _cpu_parts(r, eta)
    b1, zt1 = r.beta_pm_ue[0], r.zeta_ue[0]
    return QCoefficients(
        q1=mon.ds,
        q2=rho_pm * s0 * n_pm * (si + a * n_pm * r.zeta_pm**2),
        q3=rho_pm * s0 * n_pm * (si + a * r.zeta_pm**2),
        q4=mon.bu + mon.iu + mon.is_ + mon.noise,
        q5=ue.ds,
        q6=rho_pm * (b1 + a * zt1 * n_pm * r.zeta_pm),
        q7=rho_pm * ((n_pm + 1) * b1 + a * zt1 * r.zeta_pm),
        q8=ue.bu + ue.iu + ue.is_ + ue.noise,
        q9=cpu.ds,
        q10=rho_pm * amp * (zb + a * n * n_pm * r.zeta_pm * zr**2),
        q11=rho_pm * a * n**3 * A**2 * (p.rho_s * zb + p.rho_c * a * n * r.zeta_pm * zr**2),
        q12=cpu.iu + cpu.noise,
        rho_pm=rho_pm,
    )


# large-array limits with rho_pm = P_pm / n_pm and equal shares -----------

def _p_norm(r: NetworkRealization, p_pm_watts: float) -> float:
    return p_pm_watts / r.params.noise_power


def asymptotic_sinr_cpu_limit(r: NetworkRealization, stats: EstimationStats, eta: Eta, p_pm_fixed: float) -> float:
    p = r.params
    P = _p_norm(r, p_pm_fixed)
    A, zr, _, _ = _cpu_parts(r, eta)
    base = sinr_cpu(r, stats, PowerAllocation.passive(), eta)
    js_s = 0.5 * P * p.rho_s * r.zeta_pm * p.n_ap**4 * r.alpha**2 * (A * zr) ** 2
    return base.ds / (base.iu + base.noise + js_s)


def asymptotic_sinr_ue_limit(k: int, r: NetworkRealization, stats: EstimationStats, eta: Eta, p_pm_fixed: float) -> float:
    P = _p_norm(r, p_pm_fixed)
    base = sinr_ue(k, r, stats, PowerAllocation.passive(), eta)
    js_s = 0.5 * P * r.alpha * r.zeta_ue[k] * r.zeta_pm
    js_c = 0.5 * P * r.beta_pm_ue[0] if k == 0 else 0.0
    return base.ds / (base.bu + base.iu + base.is_ + base.noise + js_s + js_c)


def asymptotic_sinr_monitor_limit(r: NetworkRealization, stats: EstimationStats, eta: Eta) -> float:
    p = r.params
    g, bpm = stats.gamma, r.beta_c_pm
    num = np.sum(eta.c[:, 0] * bpm * p.n_ap * g[:, 0]) ** 2
    den = sum(np.sum(eta.c[:, kk] * eta.c[:, 0] * p.n_ap * g[:, kk] * bpm**2 * g[:, 0])
              for kk in range(1, p.k_ues))
    return float(num / den) if den > 0 else float("inf")
