"""Network geometry and large-scale propagation.

Everything here is deterministic given ``(seed, realization_index)``; the
small-scale fading lives in :mod:`cfmonitor.channels`.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

BOLTZMANN = 1.380649e-23
T0_KELVIN = 290.0
SPEED_OF_LIGHT = 299_792_458.0
BETA_FLOOR = 1e-30


class ConfigError(ValueError):
    """Bad or unknown configuration key/value."""


@dataclass(frozen=True)
class SystemParams:
    m_c: int = 32
    m_st: int = 4
    m_sr: int = 4
    k_ues: int = 5
    n_ap: int = 4
    n_pm: int = 32

    area_side: float = 2000.0
    target_height: float = 500.0
    monitor_radius: float = 300.0

    p_c: float = 1.0
    p_s: float = 1.0
    p_p: float = 0.2
    p_p_pm: float = 0.2
    p_pm: float = 3.0

    noise_figure: float = 8.0
    bandwidth: float = 20e6
    carrier_freq: float = 1.9e9

    tau_p: int | None = None  # None -> k_ues
    sigma_sh: float = 9.0
    d0: float = 10.0
    d1: float = 50.0
    # 140.7 dB is the usual constant for distances in km; the same model with
    # distances in meters needs 140.7 - 3.5 * 30 = 35.7 dB.
    pl_const: float = 35.7

    sigma_rcs: float = 1.0
    fsl_exponent: float = 2.0
    sigma_si: float = 1.0

    seed: int = 0

    def __post_init__(self):
        if self.tau_p is None:
            object.__setattr__(self, "tau_p", self.k_ues)
        for name in ("m_c", "m_st", "m_sr", "k_ues", "n_ap", "n_pm", "tau_p"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
                raise ConfigError(f"{name} must be an integer >= 1, got {v!r}")
        if self.tau_p < self.k_ues:
            raise ConfigError("tau_p must be >= k_ues (orthogonal pilots)")
        for name in ("area_side", "target_height", "p_c", "p_s", "p_p", "p_p_pm",
                     "p_pm", "bandwidth", "carrier_freq", "d0", "d1", "sigma_rcs",
                     "fsl_exponent"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be finite and > 0, got {v!r}")
        for name in ("monitor_radius", "sigma_sh", "sigma_si"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ConfigError(f"{name} must be finite and >= 0, got {v!r}")
        if self.d1 < self.d0:
            raise ConfigError("d1 must be >= d0")
        if not math.isfinite(self.noise_figure) or not math.isfinite(self.pl_const):
            raise ConfigError("noise_figure and pl_const must be finite")

    # derived quantities -------------------------------------------------
    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq

    @property
    def noise_power(self) -> float:
        return BOLTZMANN * T0_KELVIN * self.bandwidth * 10 ** (self.noise_figure / 10)

    @property
    def alpha(self) -> float:
        return 4 * math.pi * self.sigma_rcs / self.wavelength**2

    @property
    def rho_c(self) -> float:
        return self.p_c / self.noise_power

    @property
    def rho_s(self) -> float:
        return self.p_s / self.noise_power

    @property
    def rho_p(self) -> float:
        return self.p_p / self.noise_power

    @property
    def rho_p_pm(self) -> float:
        return self.p_p_pm / self.noise_power

    @property
    def rho_pm(self) -> float:
        return self.p_pm / self.noise_power

    def replace(self, **changes) -> "SystemParams":
        if "k_ues" in changes and "tau_p" not in changes and self.tau_p == self.k_ues:
            changes["tau_p"] = None
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_dict(cls, data: dict) -> "SystemParams":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:  # wrong value types slip through as TypeError
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path: str | Path) -> "SystemParams":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a flat JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def reduced_params(**overrides) -> SystemParams:
    """Small network used for Monte-Carlo validation."""
    base = dict(m_c=8, m_st=2, m_sr=2, k_ues=3, n_ap=2, n_pm=8)
    base.update(overrides)
    return SystemParams(**base)


@dataclass(frozen=True)
class NetworkRealization:
    """One placement draw with every large-scale quantity the closed forms use.

    Index conventions: C-AP ``m`` in ``range(m_c)``, transmit S-AP ``m'`` in
    ``range(m_st)``, receive S-AP ``m''`` in ``range(m_sr)``, UE ``k`` in
    ``range(k_ues)`` with UE 0 the monitored (malicious) UE.
    """

    params: SystemParams
    index: int
    ap_c: np.ndarray
    ap_st: np.ndarray
    ap_sr: np.ndarray
    ue: np.ndarray
    monitor: np.ndarray
    target: np.ndarray

    beta_c_ue: np.ndarray    # (m_c, K)
    beta_c_pm: np.ndarray    # (m_c,)
    beta_st_ue: np.ndarray   # (m_st, K)
    beta_st_pm: np.ndarray   # (m_st,)
    beta_pm_ue: np.ndarray   # (K,)
    beta_c_sr: np.ndarray    # (m_c, m_sr)
    beta_pm_sr: np.ndarray   # (m_sr,)

    zeta_st: np.ndarray      # (m_st,)
    zeta_sr: np.ndarray      # (m_sr,)
    zeta_ue: np.ndarray      # (K,)
    zeta_pm: float

    az_st: np.ndarray
    el_st: np.ndarray
    az_sr: np.ndarray
    el_sr: np.ndarray
    az_pm: float
    el_pm: float

    alpha: float

    @property
    def beta_pm_pm(self) -> float:
        # residual self-interference gain of the full-duplex monitor
        return self.params.sigma_si


def _wrap_delta(delta: np.ndarray, side: float) -> np.ndarray:
    return (delta + side / 2) % side - side / 2


def wrapped_distance(a, b, area_side: float):
    """Toroidal distance between 2-D points (broadcasts over leading axes)."""
    d = _wrap_delta(np.asarray(b, float) - np.asarray(a, float), area_side)
    out = np.hypot(d[..., 0], d[..., 1])
    return float(out) if out.ndim == 0 else out


def path_loss_db(d, params: SystemParams):
    """Three-slope path loss in dB (negative numbers)."""
    d_arr = np.asarray(d, dtype=float)
    if np.any(~(d_arr > 0)):
        raise ValueError("distance must be > 0")
    L, d0, d1 = params.pl_const, params.d0, params.d1
    out = np.where(
        d_arr <= d0,
        -L - 15 * np.log10(d1) - 20 * np.log10(d0),
        np.where(
            d_arr <= d1,
            -L - 15 * np.log10(d1) - 20 * np.log10(d_arr),
            -L - 35 * np.log10(d_arr),
        ),
    )
    return float(out) if out.ndim == 0 else out


def large_scale_coefficient(pl_db, shadow_draw, sigma_sh):
    return 10 ** (np.asarray(pl_db) / 10) * 10 ** (sigma_sh * np.asarray(shadow_draw) / 10)


def _beta(d, params: SystemParams, rng: np.random.Generator) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    z = rng.standard_normal(d.shape)
    z = np.where(d > params.d1, z, 0.0)  # no shadowing on the short slopes
    beta = np.asarray(large_scale_coefficient(path_loss_db(d, params), z, params.sigma_sh))
    if np.any(beta < BETA_FLOOR):
        log.warning("clamping %d large-scale coefficients at %g", int(np.sum(beta < BETA_FLOOR)), BETA_FLOOR)
        beta = np.maximum(beta, BETA_FLOOR)
    return beta


def realization_rng(seed: int, index: int) -> np.random.Generator:
    # counter-based substream: independent of evaluation order
    return np.random.default_rng([int(seed), int(index)])


def fsl_gain(d3, params: SystemParams):
    return (params.wavelength / (4 * math.pi * np.asarray(d3, float))) ** params.fsl_exponent


def _target_geometry(points, centre, params: SystemParams):
    delta = _wrap_delta(centre[None, :] - points, params.area_side)
    ground = np.hypot(delta[:, 0], delta[:, 1])
    az = np.arctan2(delta[:, 1], delta[:, 0])
    el = np.arctan2(params.target_height, ground)
    d3 = np.hypot(ground, params.target_height)
    return fsl_gain(d3, params), az, el


def generate_realization(params: SystemParams, realization_index: int) -> NetworkRealization:
    rng = realization_rng(params.seed, realization_index)
    side = params.area_side
    n_ap = params.m_c + params.m_st + params.m_sr
    aps = rng.uniform(0, side, size=(n_ap, 2))

    def draw_clear_point():
        while True:
            p = rng.uniform(0, side, size=2)
            if np.all(wrapped_distance(aps, p, side) > 0):
                return p

    ue = np.array([draw_clear_point() for _ in range(params.k_ues)])

    centre = np.array([side / 2, side / 2])
    while True:
        rad = params.monitor_radius * math.sqrt(rng.uniform())
        ang = rng.uniform(0, 2 * math.pi)
        monitor = (centre + rad * np.array([math.cos(ang), math.sin(ang)])) % side
        if np.all(wrapped_distance(np.vstack([aps, ue]), monitor, side) > 0):
            break
    target = np.array([centre[0], centre[1], params.target_height])

    ap_c = aps[: params.m_c]
    ap_st = aps[params.m_c: params.m_c + params.m_st]
    ap_sr = aps[params.m_c + params.m_st:]

    def dist(a, b):
        return wrapped_distance(a[:, None, :], b[None, :, :], side)

    beta_c_ue = _beta(dist(ap_c, ue), params, rng)
    beta_c_pm = _beta(wrapped_distance(ap_c, monitor, side), params, rng)
    beta_st_ue = _beta(dist(ap_st, ue), params, rng)
    beta_st_pm = _beta(wrapped_distance(ap_st, monitor, side), params, rng)
    beta_pm_ue = _beta(wrapped_distance(ue, monitor, side), params, rng)
    beta_c_sr = _beta(dist(ap_c, ap_sr), params, rng)
    beta_pm_sr = _beta(wrapped_distance(ap_sr, monitor, side), params, rng)

    zeta_st, az_st, el_st = _target_geometry(ap_st, centre, params)
    zeta_sr, az_sr, el_sr = _target_geometry(ap_sr, centre, params)
    zeta_ue, _, _ = _target_geometry(ue, centre, params)
    zeta_pm, az_pm, el_pm = _target_geometry(monitor[None, :], centre, params)

    return NetworkRealization(
        params=params, index=int(realization_index),
        ap_c=ap_c, ap_st=ap_st, ap_sr=ap_sr, ue=ue, monitor=monitor, target=target,
        beta_c_ue=beta_c_ue, beta_c_pm=beta_c_pm, beta_st_ue=beta_st_ue,
        beta_st_pm=beta_st_pm, beta_pm_ue=beta_pm_ue, beta_c_sr=beta_c_sr,
        beta_pm_sr=beta_pm_sr,
        zeta_st=zeta_st, zeta_sr=zeta_sr, zeta_ue=zeta_ue, zeta_pm=float(zeta_pm[0]),
        az_st=az_st, el_st=el_st, az_sr=az_sr, el_sr=el_sr,
        az_pm=float(az_pm[0]), el_pm=float(el_pm[0]),
        alpha=params.alpha,
    )
