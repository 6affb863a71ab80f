"""Command line: closed-form validation, figure sweeps, single-shot optimisation.

    cfmonitor validate --config cfg.json --draws 20000 --tol 2
    cfmonitor figure fig4 --config cfg.json --out fig4.csv --realizations 200
    cfmonitor optimize p2 --config cfg.json --kappa-db 0 --out run.csv

Exit codes: 0 ok, 1 validation tolerance exceeded, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from . import metrics
from .estimation import estimation_stats
from .metrics import EnsembleRecord, db, from_db
from .montecarlo import simulate
from .optimizer import solve_p1, solve_p2
from .scenario import ConfigError, SystemParams, generate_realization
from .sinr import (
    PowerAllocation, QCoefficients, SinrBreakdown, default_ap_power_control,
    q_coefficients, sinr_cpu, sinr_monitor, sinr_ue,
)

log = logging.getLogger("cfmonitor")

FIGURES = ("fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9")
DEFAULT_P_PM = (1.0, 2.0, 3.0)
DEFAULT_KAPPA_DB = 8.0


# --------------------------------------------------------------------------
# per-realization evaluation

@dataclass(frozen=True)
class Evaluated:
    realization: object
    stats: object
    eta: object
    q: QCoefficients


def evaluate(params: SystemParams, index: int) -> Evaluated:
    r = generate_realization(params, index)
    st = estimation_stats(r)
    eta = default_ap_power_control(r, st)
    return Evaluated(r, st, eta, q_coefficients(r, st, eta, params.rho_pm))


def choose_shares(q: QCoefficients, scheme: str, tol=1e-6):
    """Shares used by a scheme plus the solver status."""
    if scheme == "passive":
        return (0.0, 0.0), "optimal"
    if scheme == "epa":
        return (0.5, 0.5), "optimal"
    if scheme == "opa":
        res = solve_p1(q, tol=tol)
        if res.optimal:
            return res.allocation, "optimal"
        # monitor stays silent rather than reveal itself
        return (0.0, 0.0), "infeasible"
    raise ValueError(f"unknown scheme {scheme!r}")


def ensemble(params: SystemParams, n: int, scheme: str, qs: list[QCoefficients] | None = None) -> EnsembleRecord:
    qs = qs if qs is not None else [evaluate(params, i).q for i in range(n)]
    cols = {k: [] for k in ("ue", "pm", "cpu", "tt", "t1", "status")}
    for q in qs:
        (tt, t1), status = choose_shares(q, scheme)
        cols["ue"].append(q.sinr_ue1(tt, t1))
        cols["pm"].append(q.sinr_monitor(tt, t1))
        cols["cpu"].append(q.sinr_cpu(tt, t1))
        cols["tt"].append(tt)
        cols["t1"].append(t1)
        cols["status"].append(status)
    return EnsembleRecord(np.array(cols["ue"]), np.array(cols["pm"]), np.array(cols["cpu"]),
                          np.array(cols["tt"]), np.array(cols["t1"]), tuple(cols["status"]))


def q_set(params: SystemParams, n: int) -> list[QCoefficients]:
    return [evaluate(params, i).q for i in range(n)]


def with_rho(qs: Iterable[QCoefficients], rho_pm: float) -> list[QCoefficients]:
    """Rescale the jamming-dependent coefficients to a new monitor power."""
    out = []
    for q in qs:
        s = rho_pm / q.rho_pm
        out.append(QCoefficients(q.q1, q.q2 * s, q.q3 * s, q.q4, q.q5, q.q6 * s, q.q7 * s, q.q8,
                                 q.q9, q.q10 * s, q.q11 * s, q.q12, rho_pm))
    return out


# --------------------------------------------------------------------------
# CSV

class Table:
    def __init__(self, sweep_name: str):
        self.sweep_name = sweep_name
        self.rows: list[tuple] = []
        self.notes: list[str] = []

    def add(self, sweep, scheme, statistic, value, stderr=float("nan")):
        self.rows.append((float(sweep), scheme, statistic, float(value), float(stderr)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([self.sweep_name, "scheme", "statistic", "value", "stderr"])
        for s, sch, st, v, e in self.rows:
            w.writerow([repr(s), sch, st, repr(v), repr(e)])
        return buf.getvalue()

    def write(self, path):
        Path(path).write_text(self.to_csv(), encoding="utf-8")


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        for k in list(row):
            if k not in ("scheme", "statistic"):
                row[k] = float(row[k])
    return rows


def _mean_db(x):
    x = np.asarray(x, float)
    m = x.mean()
    se = x.std(ddof=1) / math.sqrt(len(x)) if len(x) > 1 else float("nan")
    return float(db(m)), float(10 / math.log(10) * se / m)


# --------------------------------------------------------------------------
# figures

def fig3(params: SystemParams, n: int, **_) -> Table:
    t = Table("sinr_db")
    qs = q_set(params, n)
    grid = np.arange(-60.0, 40.01, 1.0)
    for scheme in ("passive", "epa"):
        rec = ensemble(params, n, scheme, qs)
        for stat, vals in (("cdf_ue1", rec.sinr_ue1), ("cdf_monitor", rec.sinr_monitor), ("cdf_cpu", rec.sinr_cpu)):
            cdf = metrics.empirical_cdf(db(vals))
            for x, f in zip(grid, cdf(grid)):
                t.add(x, scheme, stat, f, metrics.proportion_se(f, n))
    t.notes.append(f"closed-form CDFs over {n} placements, P_pm={params.p_pm} W, N_pm={params.n_pm}")
    return t


def _npm_grid(params):
    return sorted({4, 8, 16, 32, params.n_pm})


def fig4(params: SystemParams, n: int, p_pm=DEFAULT_P_PM, **_) -> Table:
    t = Table("n_pm")
    for npm in _npm_grid(params):
        base = q_set(params.replace(n_pm=npm), n)
        for P in p_pm:
            qs = with_rho(base, P / params.noise_power)
            for scheme in ("epa", "opa"):
                rec = ensemble(params, n, scheme, qs)
                m, se = _mean_db(rec.sinr_cpu)
                tag = f"{scheme}_p{P:g}w"
                t.add(npm, tag, "mean_sinr_cpu_db", m, se)
                t.add(npm, tag, "infeasible_count", rec.n_infeasible)
    t.notes.append(f"{n} placements per point (1000 in the original study); gaps carry about "
                   f"+-{10 / math.sqrt(n):.1f}% relative noise")
    return t


def _sdp_rows(t, sweep, tag, rec, kappa_lin):
    p = metrics.sdp(rec, kappa_lin)
    t.add(sweep, tag, "sdp", p, metrics.proportion_se(p, len(rec)))
    t.add(sweep, tag, "msp", metrics.msp(rec))


def fig5(params: SystemParams, n: int, p_pm=DEFAULT_P_PM, kappa_db=DEFAULT_KAPPA_DB, **_) -> Table:
    t = Table("n_pm")
    k = float(from_db(kappa_db))
    for npm in _npm_grid(params):
        base = q_set(params.replace(n_pm=npm), n)
        for P in p_pm:
            qs = with_rho(base, P / params.noise_power)
            for scheme in ("epa", "opa"):
                _sdp_rows(t, npm, f"{scheme}_p{P:g}w", ensemble(params, n, scheme, qs), k)
    t.notes.append(f"kappa={kappa_db} dB")
    return t


def fig6(params: SystemParams, n: int, kappa_db=DEFAULT_KAPPA_DB, **_) -> Table:
    t = Table("target_height")
    k = float(from_db(kappa_db))
    base = params.replace(p_pm=1.0, n_pm=32)
    for radius in (100.0, 300.0, 500.0):
        for h in np.arange(100.0, 1000.0, 100.0):
            pr = base.replace(target_height=float(h), monitor_radius=radius)
            _sdp_rows(t, h, f"opa_r{radius:g}m", ensemble(pr, n, "opa"), k)
    t.notes.append(f"kappa={kappa_db} dB, P_pm=1 W, N_pm=32")
    return t


def _kappa_sweep(params, n, variants, t):
    kappas = np.arange(-40.0, 20.01, 2.0)
    for tag, pr in variants:
        qs = q_set(pr, n)
        for scheme in ("epa", "opa"):
            rec = ensemble(pr, n, scheme, qs)
            for kd in kappas:
                p = metrics.sdp(rec, float(from_db(kd)))
                t.add(kd, f"{scheme}_{tag}", "sdp", p, metrics.proportion_se(p, n))
    return t


def fig7(params: SystemParams, n: int, p_pm=DEFAULT_P_PM, **_) -> Table:
    t = Table("kappa_db")
    variants = [(f"p{P:g}w", params.replace(p_pm=P)) for P in p_pm]
    _kappa_sweep(params, n, variants, t)
    t.notes.append(f"N_pm={params.n_pm}; jamming power varied")
    return t


def fig8(params: SystemParams, n: int, **_) -> Table:
    t = Table("kappa_db")
    variants = [(f"n{npm}", params.replace(n_pm=npm)) for npm in (8, 16, 32)]
    _kappa_sweep(params, n, variants, t)
    t.notes.append(f"P_pm={params.p_pm} W; monitor array size varied")
    return t


def power_saving(qs: list[QCoefficients], rho_budget: float, tol=1e-6):
    """Per-realization P2 power with kappa pinned to the EPA sensing SINR."""
    powers, sinr_epa, sinr_opa, infeasible = [], [], [], 0
    for q in qs:
        kappa = q.sinr_cpu(0.5, 0.5)
        res = solve_p2(q, kappa, rho_budget, tol)
        if not res.optimal:
            infeasible += 1
            continue
        powers.append(res.objective)
        sinr_epa.append(kappa)
        sinr_opa.append(q.primed().sinr_cpu(*res.allocation))
    powers = np.array(powers)
    return powers, np.array(sinr_epa), np.array(sinr_opa), infeasible


def fig9(params: SystemParams, n: int, p_pm=DEFAULT_P_PM, **_) -> Table:
    t = Table("p_pm_w")
    for npm in (8, 16, 32):
        base = q_set(params.replace(n_pm=npm), n)
        for P in p_pm:
            rho = P / params.noise_power
            qs = with_rho(base, rho)
            powers, s_epa, s_opa, bad = power_saving(qs, rho)
            tag = f"n{npm}"
            t.add(P, f"epa_{tag}", "infeasible_count", bad)
            if len(powers) == 0:
                continue
            watts = powers * params.noise_power
            t.add(P, f"epa_{tag}", "mean_power_w", P, 0.0)
            t.add(P, f"epa_{tag}", "mean_sinr_cpu_db", *_mean_db(s_epa))
            t.add(P, f"opa_{tag}", "mean_power_w", watts.mean(),
                  watts.std(ddof=1) / math.sqrt(len(watts)) if len(watts) > 1 else float("nan"))
            t.add(P, f"opa_{tag}", "mean_sinr_cpu_db", *_mean_db(s_opa))
            t.add(P, f"opa_{tag}", "saving_pct", 100 * (1 - watts.mean() / P))
    t.notes.append("kappa per placement = EPA sensing SINR; placements where P2 is infeasible are "
                   "excluded and counted")
    return t


FIGURE_FUNCS: dict[str, Callable] = {
    "fig3": fig3, "fig4": fig4, "fig5": fig5, "fig6": fig6, "fig7": fig7, "fig8": fig8, "fig9": fig9,
}


def cmd_figure(name: str, config_path, out_csv, realizations: int, seed=None, p_pm=None) -> Table:
    if name not in FIGURE_FUNCS:
        raise ConfigError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}")
    params = load_params(config_path)
    if seed is not None:
        params = params.replace(seed=int(seed))
    kw = {} if p_pm is None else {"p_pm": tuple(p_pm)}
    table = FIGURE_FUNCS[name](params, int(realizations), **kw)
    table.write(out_csv)
    return table


# --------------------------------------------------------------------------
# validation

@dataclass
class TermCheck:
    receiver: str
    allocation: str
    term: str
    closed: float
    empirical: float
    gated: bool
    tolerance: float

    @property
    def rel_err(self) -> float:
        if self.closed == 0:
            return 0.0 if self.empirical == 0 else math.inf
        return abs(self.empirical - self.closed) / abs(self.closed)

    @property
    def ok(self) -> bool:
        return (not self.gated) or self.rel_err <= self.tolerance


@dataclass
class ValidationReport:
    checks: list[TermCheck]

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.ok]

    def worst(self, receiver=None):
        cs = [c for c in self.checks if c.gated and (receiver is None or c.receiver.startswith(receiver))]
        return max(cs, key=lambda c: c.rel_err) if cs else None

    def format(self) -> str:
        lines = [f"{'receiver':10s} {'alloc':8s} {'term':6s} {'closed':>13s} {'monte-carlo':>13s} {'rel.err':>9s}"]
        for c in self.checks:
            flag = "" if c.ok else "  FAIL"
            if not c.gated:
                flag = "  (approximation, not gated)"
            lines.append(f"{c.receiver:10s} {c.allocation:8s} {c.term:6s} {c.closed:13.6g} "
                         f"{c.empirical:13.6g} {100 * c.rel_err:8.3f}%{flag}")
        return "\n".join(lines)


def validation_allocations(params: SystemParams, rho_pm: float, n_random: int = 3):
    rng = np.random.default_rng([params.seed, 7])
    allocs = [("passive", PowerAllocation(0.0, 0.0, rho_pm)), ("epa", PowerAllocation(0.5, 0.5, rho_pm))]
    for i in range(n_random):
        w = rng.dirichlet([1.0, 1.0, 1.0])
        allocs.append((f"rand{i}", PowerAllocation(float(w[0]), float(w[1]), rho_pm)))
    return allocs


def run_validation(params: SystemParams, draws: int, tol: float, tol_approx: float = 0.03,
                   realization_index: int = 0, mutate: Callable | None = None,
                   receivers=("ue", "monitor", "cpu")) -> ValidationReport:
    """Compare every closed-form term with the Monte-Carlo oracle.

    ``tol`` applies to exact terms, ``tol_approx`` to the monitor SINR whose
    beamforming-uncertainty term is a Gaussian approximation (that term is
    reported but not gated).  ``mutate(receiver, breakdown)`` may alter the
    closed-form breakdowns; it exists to check that the validation bites.
    """
    r = generate_realization(params, realization_index)
    st = estimation_stats(r)
    eta = default_ap_power_control(r, st)
    rng = np.random.default_rng([params.seed, realization_index, 0x4D43])
    mc = simulate(r, eta, draws, rng, receivers=receivers)
    mutate = mutate or (lambda receiver, b: b)
    checks = []

    def compare(receiver, alloc_name, closed: SinrBreakdown, emp: SinrBreakdown, approx=()):
        cd, ed = closed.as_dict(), emp.as_dict()
        for term in SinrBreakdown.TERMS + ("sinr",):
            if receiver == "monitor" and term == "sinr":
                checks.append(TermCheck(receiver, alloc_name, term, cd[term], ed[term], True, tol_approx))
            else:
                checks.append(TermCheck(receiver, alloc_name, term, cd[term], ed[term], term not in approx, tol))

    for name, alloc in validation_allocations(params, params.rho_pm):
        if "ue" in receivers:
            for k in range(params.k_ues):
                compare(f"ue{k + 1}", name, mutate(f"ue{k + 1}", sinr_ue(k, r, st, alloc, eta)), mc.breakdown_ue(k, alloc))
        if "monitor" in receivers:
            compare("monitor", name, mutate("monitor", sinr_monitor(r, st, alloc, eta)),
                    mc.breakdown_monitor(alloc), approx=("bu",))
        if "cpu" in receivers:
            compare("cpu", name, mutate("cpu", sinr_cpu(r, st, alloc, eta)), mc.breakdown_cpu(alloc))
    return ValidationReport(checks)


def cmd_validate(config_path, draws: int, tolerance_pct: float, out=None) -> int:
    params = load_params(config_path)
    tol = tolerance_pct / 100
    report = run_validation(params, draws, tol, tol_approx=max(tol, 0.03) if tol > 0 else 0.0)
    print(report.format())
    if out:
        t = Table("draws")
        for c in report.checks:
            t.add(draws, f"{c.receiver}:{c.allocation}", c.term, c.rel_err)
        t.write(out)
    if report.passed:
        print(f"validation passed at {tolerance_pct}% ({draws} draws)")
        return 0
    print(f"validation FAILED: {len(report.failures())} term(s) outside tolerance")
    return 1


# --------------------------------------------------------------------------
# single realization

def cmd_optimize(config_path, problem: str, kappa_db: float | None, out) -> Table:
    params = load_params(config_path)
    ev = evaluate(params, 0)
    r, st, eta, q = ev.realization, ev.stats, ev.eta, ev.q
    t = Table("realization")

    def dump(scheme, tt, t1):
        alloc = PowerAllocation(min(tt, 1.0), min(t1, 1.0 - min(tt, 1.0)), params.rho_pm)
        ue = sinr_ue(0, r, st, alloc, eta)
        pm = sinr_monitor(r, st, alloc, eta)
        cpu = sinr_cpu(r, st, alloc, eta)
        t.add(0, scheme, "theta_t", tt)
        t.add(0, scheme, "theta_1", t1)
        t.add(0, scheme, "power_w", (tt + t1) * params.p_pm)
        for name, b in (("ue1", ue), ("monitor", pm), ("cpu", cpu)):
            t.add(0, scheme, f"sinr_{name}_db", float(db(b.sinr)))
        t.add(0, scheme, "monitoring_ok", float(pm.sinr >= ue.sinr))
        return cpu.sinr

    dump("passive", 0.0, 0.0)
    dump("epa", 0.5, 0.5)
    if problem == "p1":
        res = solve_p1(q, params.n_pm, r.zeta_pm, r.beta_pm_ue[0])
        if res.optimal:
            dump("opa", *res.allocation)
    elif problem == "p2":
        if kappa_db is None:
            raise ConfigError("p2 needs --kappa-db")
        res = solve_p2(q, float(from_db(kappa_db)), params.rho_pm)
        if res.optimal:
            s_s, s_c = res.allocation
            dump("opa", s_s / params.rho_pm, s_c / params.rho_pm)
    else:
        raise ConfigError(f"unknown problem {problem!r}")
    t.add(0, "opa", "status_optimal", float(res.optimal))
    t.add(0, "opa", "iterations", res.iterations)
    t.notes.append(f"{problem}: status={res.status} active={','.join(res.active_constraints) or '-'} {res.message}")
    t.write(out)
    return t


# --------------------------------------------------------------------------

def load_params(path) -> SystemParams:
    if path is None:
        return SystemParams()
    return SystemParams.from_json(path)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cfmonitor", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    v = sub.add_parser("validate", help="closed form vs Monte Carlo, term by term")
    v.add_argument("--config")
    v.add_argument("--draws", type=int, default=20000)
    v.add_argument("--tol", type=float, default=2.0, help="percent")
    v.add_argument("--out")

    f = sub.add_parser("figure", help="emit figure data as CSV")
    f.add_argument("name", choices=FIGURES)
    f.add_argument("--config")
    f.add_argument("--out", required=True)
    f.add_argument("--realizations", type=int, default=200)
    f.add_argument("--seed", type=int)
    f.add_argument("--p-pm", type=float, nargs="+", help="monitor power grid in W")

    o = sub.add_parser("optimize", help="solve P1 or P2 on one realization")
    o.add_argument("problem", choices=("p1", "p2"))
    o.add_argument("--config")
    o.add_argument("--kappa-db", type=float)
    o.add_argument("--out", required=True)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.cmd == "validate":
            if args.draws < 1 or args.tol < 0:
                raise ConfigError("--draws must be >= 1 and --tol >= 0")
            return cmd_validate(args.config, args.draws, args.tol, args.out)
        if args.cmd == "figure":
            if args.realizations < 1:
                raise ConfigError("--realizations must be >= 1")
            table = cmd_figure(args.name, args.config, args.out, args.realizations, args.seed, args.p_pm)
        else:
            table = cmd_optimize(args.config, args.problem, args.kappa_db, args.out)
        for note in table.notes:
            print(note)
        print(f"wrote {len(table.rows)} rows to {args.out}")
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
