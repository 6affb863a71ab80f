"""Monte-Carlo oracle for the closed-form SINR terms.

Channels are drawn from the signal model in batches and every term of the
use-and-then-forget decomposition is averaged directly.  The same draws are
reused for every jamming allocation: jamming terms are stored per unit of
``eta * rho_pm`` and rescaled, so comparisons across allocations share
their randomness.

Receiver noise is integrated out analytically (``E|w^H n|^2 = ||w||^2``),
which removes one source of variance without changing any expectation.

Monitor arrays: the full-duplex monitor transmits (pilot spoofing, jamming)
from one ``n_pm`` array and listens on a second ``n_pm`` array; the two see
independent small-scale fading to a given AP.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import crandn, steering_vector
from .estimation import estimation_stats
from .scenario import NetworkRealization
from .sinr import Eta, PowerAllocation, SinrBreakdown

DEFAULT_BATCH = 4000


class _Acc:
    """Streaming first/second moments of complex or real samples."""

    def __init__(self):
        self.n = 0
        self.s1 = 0.0
        self.s2 = 0.0
        self.p2 = 0.0   # sum |x|^4 for standard errors of power terms

    def add(self, x):
        x = np.asarray(x)
        self.n += x.shape[0]
        self.s1 = self.s1 + x.sum(axis=0)
        a2 = np.abs(x) ** 2
        self.s2 = self.s2 + a2.sum(axis=0)
        self.p2 = self.p2 + (a2**2).sum(axis=0)

    @property
    def mean(self):
        return self.s1 / self.n

    @property
    def power(self):
        return self.s2 / self.n

    @property
    def variance(self):
        return self.power - np.abs(self.mean) ** 2

    @property
    def power_se(self):
        return np.sqrt(np.maximum(self.p2 / self.n - self.power**2, 0) / self.n)


@dataclass
class MonteCarloTerms:
    """Raw empirical moments for one realization, reusable across allocations."""

    realization: NetworkRealization
    eta: Eta
    n_draws: int
    ue: dict = field(default_factory=dict)
    monitor: dict = field(default_factory=dict)
    cpu: dict = field(default_factory=dict)

    # -- assembly -------------------------------------------------------
    def _jam_scales(self, alloc: PowerAllocation):
        r = self.realization
        n_pm = r.params.n_pm
        s_t = alloc.eta_pm_t(n_pm, r.zeta_pm) * alloc.rho_pm
        s_1 = alloc.eta_pm_1(n_pm, r.beta_pm_ue[0]) * alloc.rho_pm
        return s_t, s_1

    def breakdown_ue(self, k: int, alloc: PowerAllocation) -> SinrBreakdown:
        t = self.ue[k]
        s_t, s_1 = self._jam_scales(alloc)
        return SinrBreakdown(
            ds=float(abs(t["ds"].mean) ** 2), bu=float(t["ds"].variance),
            iu=float(sum(a.power for a in t["iu"])), is_=float(t["is"].power),
            js_s=float(s_t * t["js_s"].power), js_c=float(s_1 * t["js_c"].power), noise=1.0)

    def breakdown_monitor(self, alloc: PowerAllocation) -> SinrBreakdown:
        t = self.monitor
        s_t, s_1 = self._jam_scales(alloc)
        return SinrBreakdown(
            ds=float(abs(t["ds"].mean) ** 2), bu=float(t["ds"].variance),
            iu=float(sum(a.power for a in t["iu"])), is_=float(t["is"].power),
            js_s=float(s_t * t["js_s"].power), js_c=float(s_1 * t["js_c"].power),
            noise=float(t["ds"].mean.real))

    def breakdown_cpu(self, alloc: PowerAllocation) -> SinrBreakdown:
        t = self.cpu
        s_t, s_1 = self._jam_scales(alloc)
        return SinrBreakdown(
            ds=float(abs(t["ds"]) ** 2), bu=0.0,
            iu=float(sum(a.power for a in t["iu"])), is_=0.0,
            js_s=float(s_t * t["js_s"].power), js_c=float(s_1 * t["js_c"].power),
            noise=float(t["noise"]))

    def relative_se(self, receiver: str, k: int = 0) -> dict:
        """Approximate relative standard error of each averaged power term."""
        t = {"ue": lambda: self.ue[k], "monitor": lambda: self.monitor, "cpu": lambda: self.cpu}[receiver]()
        out = {}
        for name in ("is", "js_s", "js_c"):
            if name in t and t[name].power > 0:
                out[name] = float(t[name].power_se / t[name].power)
        iu = t.get("iu", [])
        tot = sum(a.power for a in iu)
        if tot > 0:
            out["iu"] = float(np.sqrt(sum(a.power_se**2 for a in iu)) / tot)
        return out


def simulate(realization: NetworkRealization, eta: Eta, n_draws: int, rng: np.random.Generator,
             batch: int = DEFAULT_BATCH, receivers=("ue", "monitor", "cpu")) -> MonteCarloTerms:
    if n_draws < 1:
        raise ValueError("n_draws must be >= 1")
    r = realization
    p = r.params
    K, N, Npm = p.k_ues, p.n_ap, p.n_pm
    Mc, Mst, Msr = p.m_c, p.m_st, p.m_sr
    alpha = r.alpha
    stats = estimation_stats(r)

    # deterministic LoS vectors
    h_st = np.sqrt(r.zeta_st)[:, None] * np.array([steering_vector(a, e, N) for a, e in zip(r.az_st, r.el_st)])
    h_sr = np.sqrt(r.zeta_sr)[:, None] * np.array([steering_vector(a, e, N) for a, e in zip(r.az_sr, r.el_sr)])
    h_pm = np.sqrt(r.zeta_pm) * steering_vector(r.az_pm, r.el_pm, Npm)   # both monitor arrays
    h_tk = np.sqrt(r.zeta_ue)                                            # target -> single-antenna UE

    sq_c = np.sqrt(eta.c * p.rho_c)       # (Mc, K)
    sq_s = np.sqrt(eta.s * p.rho_s)       # (Mst,)
    # S-AP probing seen through the target: sum_m' sqrt(eta rho_s) h_{m',t}^T h*_{m',t}
    probe = np.sum(sq_s * np.sum(np.abs(h_st) ** 2, axis=1))

    # CPU combiner and desired term are deterministic
    c_sr = np.sqrt(alpha) * h_sr * probe          # sum_m' sqrt(eta rho_s) H_{m',m''} h*_{m',t}
    w_sr = np.conj(c_sr)
    terms = MonteCarloTerms(r, eta, n_draws)
    terms.cpu["ds"] = float(np.sum(np.abs(c_sr) ** 2))
    terms.cpu["noise"] = float(np.sum(np.abs(w_sr) ** 2))

    for kk in range(K):
        terms.ue[kk] = {"ds": _Acc(), "iu": [_Acc() for _ in range(K - 1)],
                        "is": _Acc(), "js_s": _Acc(), "js_c": _Acc()}
    terms.monitor = {"ds": _Acc(), "iu": [_Acc() for _ in range(K - 1)],
                     "is": _Acc(), "js_s": _Acc(), "js_c": _Acc()}
    terms.cpu.update({"iu": [_Acc() for _ in range(K)], "js_s": _Acc(), "js_c": _Acc()})

    tau_rho_p = p.tau_p * p.rho_p
    done = 0
    while done < n_draws:
        B = min(batch, n_draws - done)
        done += B
        # ---- training -------------------------------------------------
        g = crandn(rng, (B, Mc, K, N), r.beta_c_ue[None, :, :, None])
        y = np.sqrt(tau_rho_p) * g + crandn(rng, (B, Mc, K, N))
        spoof = crandn(rng, (B, Mc, N, Npm), r.beta_c_pm[None, :, None, None]).sum(axis=-1)
        y[:, :, 0, :] += np.sqrt(p.tau_p * p.rho_p_pm) * spoof
        g_hat = stats.gain[None, :, :, None] * y
        prec = np.conj(g_hat) * sq_c[None, :, :, None]        # sqrt(eta rho_c) w_{m,k}

        g_pm = crandn(rng, (B, K, Npm), r.beta_pm_ue[None, :, None])   # monitor tx -> UE
        jam_1 = np.conj(g_pm[:, 0, :])                                  # precoder toward UE 1
        jam_t = np.conj(h_pm)                                           # precoder toward target

        if "ue" in receivers:
            g_st = crandn(rng, (B, Mst, K, N), r.beta_st_ue[None, :, :, None])
            # received UE-k amplitude of C-AP stream k': sum_m g_{m,k}^T prec_{m,k'}
            x = np.einsum("bmkn,bmjn->bkj", g, prec)
            sens = (np.einsum("bmkn,mn->bk", g_st, np.conj(h_st) * sq_s[:, None])
                    + np.sqrt(alpha) * h_tk[None, :] * probe)
            hp_t = g_pm @ jam_t                                    # (B, K)
            hp_1 = np.einsum("bkp,bp->bk", g_pm, jam_1)
            refl_1 = np.sqrt(alpha) * h_tk[None, :] * (jam_1 @ h_pm)[:, None]
            for kk in range(K):
                t = terms.ue[kk]
                t["ds"].add(x[:, kk, kk])
                for j, kp in enumerate(q for q in range(K) if q != kk):
                    t["iu"][j].add(x[:, kk, kp])
                t["is"].add(sens[:, kk])
                t["js_s"].add(hp_t[:, kk] + np.sqrt(alpha) * h_tk[kk] * (h_pm @ jam_t))
                t["js_c"].add(hp_1[:, kk] + refl_1[:, kk])

        if "monitor" in receivers:
            G = crandn(rng, (B, Mc, N, Npm), r.beta_c_pm[None, :, None, None])   # C-AP -> monitor rx
            # u_{k'} = sum_m sqrt(eta rho_c) G_m^T conj(g_hat_{m,k'})
            u = np.einsum("bmnp,bmkn->bkp", G, prec)
            v = u[:, 0, :]
            vc = np.conj(v)
            t = terms.monitor
            t["ds"].add(np.sum(np.abs(v) ** 2, axis=1))
            for j in range(1, K):
                t["iu"][j - 1].add(np.sum(vc * u[:, j, :], axis=1))
            G_st = crandn(rng, (B, Mst, N, Npm), r.beta_st_pm[None, :, None, None])
            lam = (np.einsum("bmnp,mn->bp", G_st, np.conj(h_st) * sq_s[:, None])
                   + np.sqrt(alpha) * h_pm[None, :] * probe)
            t["is"].add(np.sum(vc * lam, axis=1))
            G_si = crandn(rng, (B, Npm, Npm), r.beta_pm_pm)        # indexed (tx, rx)
            si_t = np.einsum("bqp,q->bp", G_si, jam_t) + np.sqrt(alpha) * h_pm[None, :] * (h_pm @ jam_t)
            si_1 = np.einsum("bqp,bq->bp", G_si, jam_1) + np.sqrt(alpha) * h_pm[None, :] * (jam_1 @ h_pm)[:, None]
            t["js_s"].add(np.sum(vc * si_t, axis=1))
            t["js_c"].add(np.sum(vc * si_1, axis=1))

        if "cpu" in receivers:
            t = terms.cpu
            G_cs = crandn(rng, (B, Mc, Msr, N, N), r.beta_c_sr[None, :, :, None, None])  # (tx n, rx n'')
            # sum_m'' sum_m w_{m''}^T G_{m,m''}^T prec_{m,k}
            iu = np.einsum("bmsnr,sr,bmkn->bk", G_cs, w_sr, prec)
            for kk in range(K):
                t["iu"][kk].add(iu[:, kk])
            G_ps = crandn(rng, (B, Msr, Npm, N), r.beta_pm_sr[None, :, None, None])     # (tx p, rx n)
            refl = np.sqrt(alpha) * np.sum(w_sr * h_sr)                                 # sum_m'' w^T h_{t,m''}
            js_t = np.einsum("bspn,sn,p->b", G_ps, w_sr, jam_t) + refl * (h_pm @ jam_t)
            js_1 = np.einsum("bspn,sn,bp->b", G_ps, w_sr, jam_1) + refl * (jam_1 @ h_pm)
            t["js_s"].add(js_t)
            t["js_c"].add(js_1)
    return terms


def empirical_sinr_ue(k, realization, alloc, eta, n_draws, rng, batch=DEFAULT_BATCH) -> SinrBreakdown:
    return simulate(realization, eta, n_draws, rng, batch, receivers=("ue",)).breakdown_ue(k, alloc)


def empirical_sinr_monitor(realization, alloc, eta, n_draws, rng, batch=DEFAULT_BATCH) -> SinrBreakdown:
    return simulate(realization, eta, n_draws, rng, batch, receivers=("monitor",)).breakdown_monitor(alloc)


def empirical_sinr_cpu(realization, alloc, eta, n_draws, rng, batch=DEFAULT_BATCH) -> SinrBreakdown:
    return simulate(realization, eta, n_draws, rng, batch, receivers=("cpu",)).breakdown_cpu(alloc)
