"""Acceptance criteria 1-8.  Each test prints one PASS/FAIL line.

Run standalone for just the report:  python3 tests/test_acceptance.py
"""

import functools
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))
from _qgen import random_feasible_q, random_p2_instance, random_q  # noqa: E402

from cfmonitor import experiments as ex  # noqa: E402
from cfmonitor.metrics import EnsembleRecord, db, from_db, msp, sdp  # noqa: E402
from cfmonitor.optimizer import grid_p1, grid_p2, iteration_count, solve_p1, solve_p2  # noqa: E402
from cfmonitor.scenario import SystemParams, generate_realization, reduced_params  # noqa: E402
from cfmonitor.estimation import estimation_stats  # noqa: E402
from cfmonitor.sinr import (  # noqa: E402
    PowerAllocation, asymptotic_sinr_cpu_limit, asymptotic_sinr_monitor_limit,
    asymptotic_sinr_ue_limit, default_ap_power_control, q_coefficients, sinr_cpu, sinr_monitor,
    sinr_ue,
)

REALIZATIONS = 200


def report(n, ok, text, capsys=None):
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} | {text}"
    if capsys is not None:
        with capsys.disabled():
            print("\n" + line)
    else:
        print(line)
    return ok


# ---------------------------------------------------------------- 1 and 2

@functools.lru_cache(maxsize=1)
def _validation():
    t0 = time.perf_counter()
    rep = ex.run_validation(reduced_params(), 20_000, tol=0.02, tol_approx=0.03)
    return rep, time.perf_counter() - t0


def criterion_1(capsys=None):
    rep, secs = _validation()
    checks = [c for c in rep.checks if c.receiver.startswith(("ue", "cpu"))]
    bad = [c for c in checks if c.rel_err > 0.02]
    worst = max(checks, key=lambda c: c.rel_err)
    ok = not bad and secs < 120
    detail = ", ".join(sorted({f"{c.receiver}.{c.term}={100 * c.rel_err:.2f}%" for c in bad})) or "none"
    return report(1, ok, f"{len(checks)} UE/CPU terms over 5 allocations at 2e4 draws; "
                  f"worst {worst.receiver}.{worst.term} {100 * worst.rel_err:.2f}%; over 2%: {detail}; "
                  f"{secs:.1f} s", capsys)


def criterion_2(capsys=None):
    rep, secs = _validation()
    checks = [c for c in rep.checks if c.receiver == "monitor" and c.term == "sinr"]
    errs = {c.allocation: c.rel_err for c in checks}
    ok = all(e <= 0.03 for e in errs.values()) and secs < 120
    bu = next(c for c in rep.checks if c.receiver == "monitor" and c.term == "bu")
    text = " ".join(f"{k}={100 * v:.2f}%" for k, v in errs.items())
    return report(2, ok, f"monitor SINR vs Monte Carlo: {text}; "
                  f"approximate BU term off by {100 * bu.rel_err:.0f}%", capsys)


# ---------------------------------------------------------------- 3

def _limits(params, index=0, P=3.0):
    p = params.replace(n_pm=2**14)
    r = generate_realization(p, index)
    st = estimation_stats(r)
    eta = default_ap_power_control(r, st)
    a = PowerAllocation(0.5, 0.5, P / p.noise_power / p.n_pm)
    errs = {f"ue{k + 1}": abs(sinr_ue(k, r, st, a, eta).sinr / asymptotic_sinr_ue_limit(k, r, st, eta, P) - 1)
            for k in range(p.k_ues)}
    errs["monitor"] = abs(sinr_monitor(r, st, a, eta).sinr / asymptotic_sinr_monitor_limit(r, st, eta) - 1)
    errs["cpu"] = abs(sinr_cpu(r, st, a, eta).sinr / asymptotic_sinr_cpu_limit(r, st, eta, P) - 1)
    return errs


def criterion_3(capsys=None):
    errs = _limits(SystemParams())
    ok = all(e <= 0.02 for e in errs.values())
    diag = _limits(SystemParams(sigma_si=0.0))["monitor"]
    text = " ".join(f"{k}={100 * v:.3g}%" for k, v in errs.items())
    return report(3, ok, f"N_pm=2^14, EPA, P_pm=3 W: {text} "
                  f"(monitor with sigma_si=0 for reference: {100 * diag:.3g}%)", capsys)


# ---------------------------------------------------------------- 4

def criterion_4(capsys=None, n=1000):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst1 = worst2 = 0.0
    iters_ok = True
    mism = 0
    for _ in range(n):
        q = random_feasible_q(rng)
        res = solve_p1(q)
        t_min, t_max = q.q12 / q.q9, (max(q.q10, q.q11) + q.q12) / q.q9
        iters_ok &= res.iterations == iteration_count(t_min, t_max, 1e-6 * t_max)
        ref = grid_p1(q)
        if not res.optimal or ref is None:
            mism += 1
            continue
        worst1 = max(worst1, abs(res.objective - ref[0]) / abs(ref[0]))
    p2_solved = 0
    while p2_solved < n:
        q, kappa, budget = random_p2_instance(rng)
        res = solve_p2(q, kappa, budget)
        ref = grid_p2(q, kappa, budget)
        if not res.optimal:
            mism += ref is not None
            continue
        p2_solved += 1
        if res.objective > 0:
            iters_ok &= res.iterations == iteration_count(0.0, budget, 1e-6 * budget)
        if ref is None:
            mism += 1
            continue
        worst2 = max(worst2, abs(res.objective - ref[0]) / max(ref[0], 1e-12 * budget))
    secs = time.perf_counter() - t0
    ok = worst1 <= 1e-4 and worst2 <= 1e-4 and iters_ok and mism == 0 and secs < 60
    return report(4, ok, f"{n} P1 + {n} P2 instances vs 500x500 grid: worst rel gap P1 {worst1:.2e}, "
                  f"P2 {worst2:.2e}; status mismatches {mism}; iteration counts exact: {iters_ok}; "
                  f"{secs:.1f} s", capsys)


# ---------------------------------------------------------------- 5, 6, 7

WIDENING = (f"{REALIZATIONS} placements instead of 1000, so standard errors are "
            f"{math.sqrt(1000 / REALIZATIONS):.1f}x wider")


def criterion_5(capsys=None):
    t0 = time.perf_counter()
    p = SystemParams(n_pm=32)
    qs = ex.q_set(p, REALIZATIONS)
    epa = ex.ensemble(p, REALIZATIONS, "epa", qs)
    opa = ex.ensemble(p, REALIZATIONS, "opa", qs)
    gap = float(db(epa.sinr_cpu.mean()) - db(opa.sinr_cpu.mean()))
    ok = 2.0 <= gap <= 4.0 and time.perf_counter() - t0 < 300
    return report(5, ok, f"N_pm=32, P_pm={p.p_pm:g} W: mean SINR_cpu EPA {db(epa.sinr_cpu.mean()):.2f} dB, "
                  f"OPA {db(opa.sinr_cpu.mean()):.2f} dB, gap {gap:.2f} dB (accept [2, 4]); "
                  f"P1 infeasible in {opa.n_infeasible}/{REALIZATIONS} (monitor silent); {WIDENING}", capsys)


def criterion_6(capsys=None):
    p = SystemParams(n_pm=32, p_pm=1.0)
    qs = ex.q_set(p, REALIZATIONS)
    kappa = float(from_db(8.0))
    s_epa = sdp(ex.ensemble(p, REALIZATIONS, "epa", qs), kappa)
    opa = ex.ensemble(p, REALIZATIONS, "opa", qs)
    s_opa = sdp(opa, kappa)
    red = (s_epa - s_opa) / s_epa if s_epa > 0 else float("nan")
    ok = s_epa > 0 and red >= 0.5
    best = float(db(max(ex.ensemble(p, REALIZATIONS, "passive", qs).sinr_cpu)))
    return report(6, ok, f"kappa=8 dB, P_pm=1 W, N_pm=32: SDP EPA {s_epa:.3f}, OPA {s_opa:.3f}, "
                  f"relative reduction {red:.3f} (need >= 0.5); highest unjammed SINR_cpu "
                  f"{best:.1f} dB", capsys)


def criterion_7(capsys=None):
    t0 = time.perf_counter()
    out = {}
    for npm in (32, 8):
        p = SystemParams(n_pm=npm)
        powers, _, _, bad = ex.power_saving(ex.q_set(p, REALIZATIONS), p.rho_pm)
        saving = 100 * (1 - powers.mean() / p.rho_pm) if len(powers) else float("nan")
        out[npm] = (saving, bad)
    ok = (38 <= out[32][0] <= 49) and (25 <= out[8][0] <= 37) and time.perf_counter() - t0 < 300
    return report(7, ok, "; ".join(f"N_pm={k}: saving {v[0]:.1f}% over {REALIZATIONS - v[1]} placements "
                                   f"({v[1]} infeasible)" for k, v in out.items())
                  + " (accept [38, 49] and [25, 37])", capsys)


# ---------------------------------------------------------------- 8

def criterion_8(capsys=None):
    rng = np.random.default_rng(8)
    results = {}

    p = reduced_params()
    r = generate_realization(p, 0)
    st = estimation_stats(r)
    eta = default_ap_power_control(r, st)
    mono = True
    for _ in range(100):
        w = rng.dirichlet([1, 1, 1])
        base = sinr_cpu(r, st, PowerAllocation(w[0], w[1], p.rho_pm), eta).sinr
        d = 0.5 * w[2]
        mono &= sinr_cpu(r, st, PowerAllocation(w[0] + d, w[1], p.rho_pm), eta).sinr < base
        mono &= sinr_cpu(r, st, PowerAllocation(w[0], w[1] + d, p.rho_pm), eta).sinr < base
    results["sinr_cpu monotone"] = mono

    gam = True
    spoof = True
    for i in range(20):
        ri = generate_realization(p, i)
        g = estimation_stats(ri).gamma
        gam &= bool(np.all(g <= ri.beta_c_ue))
        g2 = estimation_stats(ri, p.replace(p_p_pm=2 * p.p_p_pm)).gamma
        spoof &= bool(np.all(g2[:, 0] < g[:, 0]))
    results["gamma <= beta"] = gam
    results["spoofing lowers gamma_m1"] = spoof

    pp = SystemParams()
    rq = generate_realization(pp, 0)
    sq = estimation_stats(rq)
    eq = default_ap_power_control(rq, sq)
    q = q_coefficients(rq, sq, eq, pp.rho_pm)
    agree = True
    for _ in range(100):
        w = rng.dirichlet([1, 1, 1])
        a = PowerAllocation(w[0], w[1], pp.rho_pm)
        pairs = ((q.sinr_cpu(w[0], w[1]), sinr_cpu(rq, sq, a, eq).sinr),
                 (q.sinr_monitor(w[0], w[1]), sinr_monitor(rq, sq, a, eq).sinr),
                 (q.sinr_ue1(w[0], w[1]), sinr_ue(0, rq, sq, a, eq).sinr))
        agree &= all(abs(x - y) <= 1e-10 * abs(y) for x, y in pairs)
    results["q-form == direct (10 digits)"] = agree

    qs = ex.q_set(pp, REALIZATIONS)
    ue, pm, cpu = [], [], []
    for qi in qs:
        res = solve_p1(qi)
        if res.optimal:
            ue.append(qi.sinr_ue1(*res.allocation))
            pm.append(qi.sinr_monitor(*res.allocation) * (1 + 1e-9))
            cpu.append(qi.sinr_cpu(*res.allocation))
    results[f"msp=1 on {len(ue)} P1-feasible placements"] = bool(ue) and msp(EnsembleRecord(ue, pm, cpu)) == 1.0

    rec = ex.ensemble(pp, REALIZATIONS, "epa", qs)
    rec_db = EnsembleRecord(db(rec.sinr_ue1) + 500, db(rec.sinr_monitor) + 500, rec.sinr_cpu)
    results["msp dB/linear invariant"] = msp(rec) == msp(rec_db)

    results["seeded runs repeat"] = (ex.fig5(SystemParams(seed=5), 10).to_csv()
                                     == ex.fig5(SystemParams(seed=5), 10).to_csv())
    ok = all(results.values())
    text = "; ".join(f"{k}: {'ok' if v else 'BROKEN'}" for k, v in results.items())
    return report(8, ok, text, capsys)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8]


@pytest.mark.parametrize("crit", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 9)])
def test_acceptance(crit, capsys):
    assert crit(capsys)


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria pass")
