"""Jamming power allocation at the proactive monitor.

Both problems are linear-fractional in two variables, so each bisection step
is a 2-D linear feasibility problem.  Those are decided exactly by vertex
enumeration: a non-empty polyhedron inside the nonnegative quadrant always
has a vertex, and every vertex is an intersection of two constraint lines.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .sinr import PowerAllocation, QCoefficients

FEAS_TOL = 1e-12


@dataclass(frozen=True)
class HalfPlane:
    a: float
    b: float
    c: float
    label: str = ""

    def slack(self, x, y):
        return self.c - self.a * x - self.b * y


@dataclass
class FeasibilityProblem2D:
    """Constraints ``a*x + b*y <= c`` over ``x, y >= 0``."""

    constraints: list[HalfPlane] = field(default_factory=list)

    def add_le(self, a, b, c, label=""):
        self.constraints.append(HalfPlane(float(a), float(b), float(c), label))
        return self

    def add_ge(self, a, b, c, label=""):
        return self.add_le(-a, -b, -c, label)

    def normalized(self) -> list[HalfPlane]:
        rows = [HalfPlane(-1.0, 0.0, 0.0, "x>=0"), HalfPlane(0.0, -1.0, 0.0, "y>=0")]
        for h in self.constraints:
            s = math.hypot(h.a, h.b)
            if s == 0:
                rows.append(h)
            else:
                rows.append(HalfPlane(h.a / s, h.b / s, h.c / s, h.label))
        return rows


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    witness: tuple[float, float] | None
    vertices: tuple[tuple[float, float], ...] = ()

    def __bool__(self):
        return self.feasible


def feasible_2d(problem: FeasibilityProblem2D, tol: float = FEAS_TOL) -> FeasibilityResult:
    rows = problem.normalized()
    lines = []
    for h in rows:
        if h.a == 0 and h.b == 0:
            if h.c < 0:
                return FeasibilityResult(False, None)
            continue
        lines.append(h)

    candidates = []
    for h1, h2 in itertools.combinations(lines, 2):
        det = h1.a * h2.b - h1.b * h2.a
        if abs(det) < 1e-14:
            continue
        x = (h1.c * h2.b - h1.b * h2.c) / det
        y = (h1.a * h2.c - h1.c * h2.a) / det
        candidates.append((x, y))

    verts = []
    best, best_key = None, None
    for x, y in candidates:
        # relative test: a row counts as met if its slack is tiny next to the
        # magnitudes being summed, so huge coefficients do not hide violations
        if any(h.slack(x, y) < -tol * (abs(h.c) + abs(h.a * x) + abs(h.b * y)) for h in rows):
            continue
        slacks = sorted(h.slack(x, y) for h in rows)
        x, y = max(x, 0.0), max(y, 0.0)
        verts.append((x, y))
        key = (tuple(slacks), x, y)
        if best_key is None or key > best_key:
            best, best_key = (x, y), key
    if best is None:
        return FeasibilityResult(False, None)
    return FeasibilityResult(True, best, tuple(verts))


@dataclass(frozen=True)
class OptimizationResult:
    allocation: tuple[float, float] | None
    objective: float
    status: str
    iterations: int
    active_constraints: tuple[str, ...] = ()
    bracket: tuple[float, float] = (math.nan, math.nan)
    message: str = ""

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def iteration_count(lo: float, hi: float, eps: float) -> int:
    if hi - lo <= 0:
        return 0
    return max(0, math.ceil(math.log2((hi - lo) / eps)))


def _monitoring(q: QCoefficients):
    a, b, c = q.monitoring_coeffs()
    return a, b, c


def _active(point, labelled, tol):
    x, y = point
    return tuple(lbl for lbl, (a, b, c) in labelled.items()
                 if abs(c - a * x - b * y) <= tol * max(1.0, abs(c), math.hypot(a, b)))


def solve_p1(q: QCoefficients, n_pm=None, zeta_pm_t=None, beta_pm_1=None, tol: float = 1e-6) -> OptimizationResult:
    """Minimise SINR_cpu over the jamming shares subject to monitoring success.

    ``n_pm``, ``zeta_pm_t`` and ``beta_pm_1`` are only used to report the
    per-antenna power coefficients in ``message``; the problem itself lives in
    share space.
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    a, b, c = _monitoring(q)

    def base():
        return (FeasibilityProblem2D()
                .add_ge(a, b, c, "monitoring")
                .add_le(1.0, 1.0, 1.0, "total_power"))

    start = feasible_2d(base())
    if not start:
        return OptimizationResult(None, q.q9 / q.q12, "infeasible", 0,
                                  message="monitoring constraint cannot be met on the simplex")

    t_min = q.q12 / q.q9
    t_max = (max(q.q10, q.q11) + q.q12) / q.q9
    eps = tol * t_max
    n_iter = iteration_count(t_min, t_max, eps)
    lo, hi = t_min, t_max
    last = start
    for _ in range(n_iter):
        t = 0.5 * (lo + hi)
        res = feasible_2d(base().add_ge(q.q10, q.q11, t * q.q9 - q.q12, "sinr_cpu"))
        if res:
            lo, last = t, res
        else:
            hi = t

    # among the vertices of the last feasible polygon keep the best one
    def denom(pt):
        return q.q10 * pt[0] + q.q11 * pt[1]

    top = max(denom(v) for v in last.vertices)
    ties = [v for v in last.vertices if denom(v) >= top - 1e-12 * max(top, 1.0)]
    theta = last.witness if last.witness in ties else min(ties, key=lambda v: (-v[0], -v[1]))
    theta = (float(theta[0]) + 0.0, float(theta[1]) + 0.0)
    s = theta[0] + theta[1]
    if s > 1:  # rounding guard
        theta = (theta[0] / s, theta[1] / s)
    labelled = {"total_power": (1.0, 1.0, 1.0), "monitoring": (-a, -b, -c)}
    msg = ""
    if n_pm and zeta_pm_t and beta_pm_1:
        msg = (f"eta_pm_t={theta[0] / (n_pm * zeta_pm_t):.6g} "
               f"eta_pm_1={theta[1] / (n_pm * beta_pm_1):.6g}")
    return OptimizationResult(theta, float(q.sinr_cpu(*theta)), "optimal", n_iter,
                              _active(theta, labelled, 10 * tol), (lo, hi), msg)


def solve_p2(q: QCoefficients, kappa: float, rho_pm_budget: float, tol: float = 1e-6) -> OptimizationResult:
    """Minimise total jamming power with SINR_cpu <= kappa and monitoring success.

    ``q`` are the raw coefficients (built for any ``rho_pm``); they are turned
    into per-unit-power form internally.  Powers are normalised by the noise
    power, like ``rho_pm``.
    """
    if kappa <= 0:
        raise ValueError("kappa must be > 0")
    if tol <= 0:
        raise ValueError("tol must be > 0")
    qp = q.primed()
    a, b, c = _monitoring(qp)

    def base(cap):
        return (FeasibilityProblem2D()
                .add_ge(qp.q10, qp.q11, qp.q9 / kappa - qp.q12, "sinr_cpu")
                .add_ge(a, b, c, "monitoring")
                .add_le(1.0, 1.0, cap, "total_power"))

    full = feasible_2d(base(rho_pm_budget))
    if not full:
        return OptimizationResult(None, math.nan, "infeasible", 0,
                                  message="budget cannot meet sensing cap and monitoring together")
    if feasible_2d(base(0.0)):
        return OptimizationResult((0.0, 0.0), 0.0, "optimal", 0, bracket=(0.0, 0.0))

    eps = tol * rho_pm_budget
    n_iter = iteration_count(0.0, rho_pm_budget, eps)
    lo, hi = 0.0, rho_pm_budget
    last = full
    for _ in range(n_iter):
        cap = 0.5 * (lo + hi)
        res = feasible_2d(base(cap))
        if res:
            hi, last = cap, res
        else:
            lo = cap
    best = min(v[0] + v[1] for v in last.vertices)
    ties = [v for v in last.vertices if v[0] + v[1] <= best + 1e-12 * max(best, 1e-300)]
    pt = last.witness if last.witness in ties else min(ties)
    pt = (float(pt[0]) + 0.0, float(pt[1]) + 0.0)
    labelled = {"sinr_cpu": (-qp.q10, -qp.q11, qp.q12 - qp.q9 / kappa), "monitoring": (-a, -b, -c)}
    return OptimizationResult(pt, pt[0] + pt[1], "optimal", n_iter,
                              _active(pt, labelled, 10 * tol), (lo, hi))


def epa_allocation(rho_pm: float = 1.0) -> PowerAllocation:
    return PowerAllocation(0.5, 0.5, rho_pm)


# brute-force reference used by the tests and the validation command -------

def _axis(lo, hi, n, graded):
    if not graded or lo != 0 or hi <= 0:
        return np.linspace(lo, hi, n)
    # half uniform, half geometric toward zero so thin slivers near an axis show up
    lin = np.linspace(lo, hi, n - n // 2)
    geo = np.geomspace(hi * 1e-9, hi, n // 2)
    return np.unique(np.concatenate([lin, geo]))


def _raster(f_obj, feasible, xs, ys):
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    return np.where(feasible(X, Y), f_obj(X, Y), np.inf)


def _grid_pass(f_obj, feasible, xs, ys):
    vals = _raster(f_obj, feasible, xs, ys)
    i, j = np.unravel_index(np.argmin(vals), vals.shape)
    if not np.isfinite(vals[i, j]):
        return None
    return float(vals[i, j]), (i, j)


def grid_minimize(f_obj, feasible, box, n=500, refine=True, levels=6, n_refine=64, max_moves=1000,
                  diagonal=None):
    """Minimise ``f_obj`` on a 2-D box by an n x n raster plus zoomed rasters.

    The first raster mixes uniform and geometric spacing.  Refinement starts
    from the raster minimum; the two lower box edges are also searched on
    their own by a 1-D zoom, since thin feasible slivers along an edge defeat
    a square window.  ``diagonal=s`` adds the same 1-D search along the
    budget edge ``x + y = s``.  Each refinement re-rasterises a +-2 cell window around its
    incumbent on an ``n_refine`` square, re-centred until it stops improving,
    then shrunk with the cell size.
    Returns ``(value, (x, y))`` or None when no raster point is feasible.
    """
    (x0, x1), (y0, y1) = box
    xs, ys = _axis(x0, x1, n, True), _axis(y0, y1, n, True)
    vals = _raster(f_obj, feasible, xs, ys)
    seeds = [np.unravel_index(np.argmin(vals), vals.shape)] if np.isfinite(vals).any() else []
    edge = [_edge_minimize(f_obj, feasible, (x0, x0), (y0, y1), n, levels),
            _edge_minimize(f_obj, feasible, (x0, x1), (y0, y0), n, levels)] if refine else []
    if refine and diagonal is not None:
        edge.append(_edge_minimize(f_obj, feasible, (diagonal, 0.0), (0.0, diagonal), n, levels))
    h0 = (2 * (x1 - x0) / (n - n // 2 - 1), 2 * (y1 - y0) / (n - n // 2 - 1))

    overall = None
    for i, j in seeds:
        best = (float(vals[i, j]), (float(xs[i]), float(ys[j])))
        hx, hy = h0
        for _ in range(levels if refine else 0):
            for _ in range(max_moves):
                cx, cy = best[1]
                wx = np.linspace(max(x0, cx - hx), min(x1, cx + hx), n_refine)
                wy = np.linspace(max(y0, cy - hy), min(y1, cy + hy), n_refine)
                nxt = _grid_pass(f_obj, feasible, wx, wy)
                if nxt is None or nxt[0] >= best[0]:
                    break
                v, (a, b) = nxt
                best = (v, (float(wx[a]), float(wy[b])))
            hx, hy = 2 * hx / (n_refine - 1), 2 * hy / (n_refine - 1)
        if overall is None or best[0] < overall[0]:
            overall = best
    for e in edge:
        if e is not None and (overall is None or e[0] < overall[0]):
            overall = e
    return overall


def _edge_minimize(f_obj, feasible, xr, yr, n, levels):
    """1-D zoomed raster along a box edge (one of the ranges is degenerate)."""
    lo, hi = 0.0, 1.0
    best = None
    for level in range(levels + 1):
        t = np.linspace(lo, hi, n)
        if level == 0:  # graded toward both ends so slivers at a corner show up
            g = np.geomspace(1e-9, 1.0, n // 2)
            t = np.unique(np.concatenate([t, g, 1.0 - g]))
        X = xr[0] + t * (xr[1] - xr[0])
        Y = yr[0] + t * (yr[1] - yr[0])
        v = np.where(feasible(X, Y), f_obj(X, Y), np.inf)
        i = int(np.argmin(v))
        if not np.isfinite(v[i]):
            break
        if best is None or v[i] <= best[0]:
            best = (float(v[i]), (float(X[i]), float(Y[i])))
        step = 2 * max(t[i] - t[max(i - 1, 0)], t[min(i + 1, len(t) - 1)] - t[i])
        lo, hi = max(0.0, t[i] - step), min(1.0, t[i] + step)
    return best


def grid_p1(q: QCoefficients, n=500, refine=True, margin=0.0):
    a, b, c = q.monitoring_coeffs()
    scale = max(abs(a), abs(b), abs(c), 1e-300)

    def feas(X, Y):
        return (X + Y <= 1 + 1e-12) & ((a * X + b * Y - c) / scale >= margin)

    return grid_minimize(lambda X, Y: q.sinr_cpu(X, Y), feas, ((0, 1), (0, 1)), n, refine, diagonal=1.0)


def grid_p2(q: QCoefficients, kappa, budget, n=500, refine=True, margin=0.0):
    qp = q.primed()
    a, b, c = qp.monitoring_coeffs()
    ms = max(abs(a) * budget, abs(b) * budget, abs(c), 1e-300)
    cs = max(qp.q10 * budget, qp.q11 * budget, qp.q9 / kappa, qp.q12, 1e-300)

    def feas(X, Y):
        return ((X + Y <= budget * (1 + 1e-12))
                & ((a * X + b * Y - c) / ms >= margin)
                & ((qp.q10 * X + qp.q11 * Y + qp.q12 - qp.q9 / kappa) / cs >= margin))

    return grid_minimize(lambda X, Y: X + Y, feas, ((0, budget), (0, budget)), n, refine, diagonal=budget)
