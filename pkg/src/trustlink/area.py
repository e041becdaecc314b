"""Geometry of the cooperative (d, w) region for a fixed (tau, p).

For a given design the region is everything under the curve
``w -> max(d_min(w), 0)`` on (0, 1); its measure is the cooperation area.
Three willingness values shape that curve:

* ``w0``  the point where ``d_min`` first reaches zero,
* ``w1 <= w2``  where the SP and client thresholds cross.

With a linear utility these have closed forms and the (tau, p) plane
splits into seven cases according to where w1, w2 fall relative to 1 and
whether ``d_min`` is positive there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .conditions import client_threshold, sp_threshold
from .model import DomainError, SystemConfig, UtilityModel
from .numerics import adaptive_simpson

DOMINANT = {
    "I": "SP",
    "II": "SP",
    "III": "SP",
    "IV": "Both",
    "V": "Both",
    "VI": "Both",
    "VII": "Client",
}

# signs of (w1 - 1, w2 - 1, d_min(w1), d_min(w2)) expected in each case
ROOT_SIGNS = {
    "II": (1, 1, 1, 1),
    "III": (-1, -1, -1, -1),
    "IV": (-1, -1, 1, 1),
    "V": (-1, 1, 1, 1),
    "VI": (-1, -1, -1, 1),
    "VII": (-1, 1, -1, 1),
}


@dataclass(frozen=True)
class RegionCase:
    label: str
    dominant: str
    w0: float
    w1: float
    w2: float


@dataclass(frozen=True)
class AreaResult:
    area: float
    case: RegionCase | None
    quadrature_error: float


@dataclass(frozen=True)
class AreaOptimum:
    tau: float
    p: float
    area: float
    case: RegionCase
    certified: bool
    evaluations: int
    warning: str | None = None


def _require_linear(util: UtilityModel) -> None:
    if util.kind != "linear":
        raise DomainError("case analysis needs a linear utility")


def w0_value(cfg: SystemConfig, util: UtilityModel) -> float:
    """Willingness at which both thresholds have become non-negative."""
    r, c, p, g = cfg.ratio, cfg.c, cfg.p, util.gamma0
    sp_zero = c * (1.0 - r) / (p - c * r)
    client_zero = (p - g * (1.0 - r)) / (g * r)
    return max(sp_zero, client_zero)


def discriminant(cfg: SystemConfig, gamma0: float) -> float:
    r = cfg.ratio
    return cfg.p * cfg.p - 4.0 * cfg.c * gamma0 * r * (1.0 - r)


def crossing_points(cfg: SystemConfig, util: UtilityModel) -> tuple[float, float]:
    """Closed-form threshold crossings for a linear utility; NaN when none are real."""
    _require_linear(util)
    disc = discriminant(cfg, util.gamma0)
    if disc < 0.0:
        return math.nan, math.nan
    r, sq = cfg.ratio, math.sqrt(disc)
    scale = 2.0 * r * math.sqrt(cfg.c * util.gamma0)
    return ((cfg.p - sq) / scale) ** 2, ((cfg.p + sq) / scale) ** 2


def d_min_at_crossings(cfg: SystemConfig, util: UtilityModel) -> tuple[float, float]:
    _require_linear(util)
    disc = discriminant(cfg, util.gamma0)
    if disc < 0.0:
        return math.nan, math.nan
    sq, r = math.sqrt(disc), cfg.ratio
    lo = cfg.p - sq
    first = 1.0 - 2.0 * cfg.c * r / lo if lo > 0.0 else -math.inf
    return first, 1.0 - 2.0 * cfg.c * r / (cfg.p + sq)


def _sign(x: float, tol: float) -> int:
    if abs(x) <= tol:
        return 0
    return 1 if x > 0 else -1


def root_sign_pattern(cfg: SystemConfig, util: UtilityModel, tol: float = 1e-9):
    """Signs of (w1 - 1, w2 - 1, d_min(w1), d_min(w2)); 0 marks a value within ``tol`` of zero.

    Returns None when the crossings are complex.
    """
    w1, w2 = crossing_points(cfg, util)
    if math.isnan(w1):
        return None
    d1, d2 = d_min_at_crossings(cfg, util)
    return (_sign(w1 - 1.0, tol), _sign(w2 - 1.0, tol), _sign(d1, tol), _sign(d2, tol))


def case_label(tau_ratio: float, p: float, c: float, gamma0: float) -> str:
    r, g = tau_ratio, gamma0
    if p * p < 4.0 * c * g * r * (1.0 - r):
        return "I"
    s = math.sqrt(c * g)
    if p < g * (1.0 - r) + c * r:
        if p < s:
            if r < 0.5:
                return "II"
            if r > g / (g + c):
                return "III"
            return "IV"
        return "V"
    return "VI" if p < s else "VII"


def classify_case(cfg: SystemConfig, util: UtilityModel) -> RegionCase:
    _require_linear(util)
    if cfg.p <= cfg.c:
        raise DomainError("case analysis requires p > c")
    label = case_label(cfg.ratio, cfg.p, cfg.c, util.gamma0)
    w1, w2 = crossing_points(cfg, util)
    return RegionCase(label, DOMINANT[label], w0_value(cfg, util), w1, w2)


def d_min_curve(cfg: SystemConfig, util: UtilityModel):
    def f(w):
        return np.minimum(sp_threshold(cfg, w), client_threshold(cfg, util, w))

    return f


def _numeric_crossings(cfg: SystemConfig, util: UtilityModel, lo: float) -> list[float]:
    h = lambda w: float(sp_threshold(cfg, w)) - float(client_threshold(cfg, util, w))
    grid = np.linspace(max(lo, 1e-9), 1.0, 2001)
    vals = sp_threshold(cfg, grid) - client_threshold(cfg, util, grid)
    out = []
    for a, b, fa, fb in zip(grid, grid[1:], vals, vals[1:]):
        if fa == 0.0:
            out.append(float(a))
        elif fa * fb < 0.0:
            out.append(brentq(h, a, b, xtol=1e-15))
    return out


def coop_area(cfg: SystemConfig, util: UtilityModel, tol: float = 1e-10) -> AreaResult:
    """Area under ``max(d_min(w), 0)`` for w in (0, 1)."""
    if cfg.p <= cfg.c:
        return AreaResult(0.0, None, 0.0)
    w0 = w0_value(cfg, util)
    lo = max(w0, 0.0)
    case = None
    if util.kind == "linear":
        case = classify_case(cfg, util)
        breaks = [x for x in (case.w1, case.w2) if not math.isnan(x)]
    else:
        breaks = _numeric_crossings(cfg, util, lo) if lo < 1.0 else []
    if lo >= 1.0:
        return AreaResult(0.0, case, 0.0)
    r, c, p = cfg.ratio, cfg.c, cfg.p
    if util.kind == "linear":
        g = util.gamma0

        def f(w):
            q = 1.0 - (1.0 - w) * r
            v = min(1.0 - c * q / (w * p), 1.0 - p / (g * q))
            return v if v > 0.0 else 0.0

    else:
        dm = d_min_curve(cfg, util)

        def f(w):
            v = float(dm(w))
            return v if v > 0.0 else 0.0

    val, err = adaptive_simpson(f, lo, 1.0, tol=tol, breaks=breaks)
    return AreaResult(val, case, err)


def riemann_area(cfg: SystemConfig, util: UtilityModel, n: int = 1_000_000) -> float:
    """Midpoint-rule area on ``n`` uniform points; a brute-force reference."""
    w = (np.arange(n) + 0.5) / n
    with np.errstate(divide="ignore", invalid="ignore"):
        v = d_min_curve(cfg, util)(w)
    return float(np.maximum(v, 0.0).mean())


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(48)


def area_grid(taus, ps, c: float, t: float, gamma0: float) -> np.ndarray:
    """Area for every (tau, p) pair of a mesh, linear utility, vectorised.

    Each smooth piece between w0, w1, w2 and 1 is integrated with a fixed
    48-point Gauss-Legendre rule. Rows follow ``taus``, columns ``ps``.
    """
    T, P = np.meshgrid(np.asarray(taus, float), np.asarray(ps, float), indexing="ij")
    r = T / t
    g = gamma0
    w0 = np.maximum(c * (1.0 - r) / (P - c * r), (P - g * (1.0 - r)) / (g * r))
    disc = P * P - 4.0 * c * g * r * (1.0 - r)
    sq = np.sqrt(np.maximum(disc, 0.0))
    scale = 2.0 * r * math.sqrt(c * g)
    w1 = np.where(disc >= 0, ((P - sq) / scale) ** 2, np.nan)
    w2 = np.where(disc >= 0, ((P + sq) / scale) ** 2, np.nan)
    lo = np.clip(w0, 0.0, 1.0)
    pts = np.stack([lo, np.nan_to_num(w1, nan=1.0), np.nan_to_num(w2, nan=1.0), np.ones_like(lo)])
    pts = np.clip(pts, lo, 1.0)
    pts.sort(axis=0)
    total = np.zeros_like(lo)
    for a, b in zip(pts[:-1], pts[1:]):
        half = 0.5 * (b - a)
        mid = 0.5 * (b + a)
        for x, wt in zip(_GL_NODES, _GL_WEIGHTS):
            w = mid + half * x
            q = 1.0 - (1.0 - w) * r
            with np.errstate(divide="ignore", invalid="ignore"):
                v = np.minimum(1.0 - c * q / (w * P), 1.0 - P / (g * q))
            total += wt * half * np.where(v > 0.0, v, 0.0)
    return np.where(P > c, total, 0.0)


def area_map(n: int, c: float, t: float, gamma0: float):
    """Cell-centred n x n mesh over c < p < gamma0, 0 < tau < t."""
    taus = (np.arange(n) + 0.5) / n * t
    ps = c + (gamma0 - c) * (np.arange(n) + 0.5) / n
    return taus, ps, area_grid(taus, ps, c, t, gamma0)


def _segment_integral(fn, a: float, b: float, tol: float) -> float:
    if b <= a:
        return -_segment_integral(fn, b, a, tol) if a != b else 0.0
    return adaptive_simpson(fn, a, b, tol=tol)[0]


def stationarity_residual(cfg: SystemConfig, util: UtilityModel, signed: bool = False) -> float:
    """Price-direction optimality residual for designs in Case V or VI.

    The signed value equals ``p * dA/dp`` in Case V and ``-p * dA/dp`` in
    Case VI, so it vanishes exactly where the area is stationary in p.
    """
    case = classify_case(cfg, util)
    if case.label not in ("V", "VI"):
        raise DomainError(f"stationarity residual needs Case V or VI, got Case {case.label}")
    ds = lambda w: float(sp_threshold(cfg, w))
    dc = lambda w: float(client_threshold(cfg, util, w))
    tol = 1e-12
    if case.label == "V":
        val = (
            _segment_integral(dc, case.w1, 1.0, tol)
            - _segment_integral(ds, case.w0, case.w1, tol)
            - (1.0 - 2.0 * case.w1 + case.w0)
        )
    else:
        val = (
            _segment_integral(ds, case.w2, 1.0, tol)
            - _segment_integral(dc, case.w0, case.w2, tol)
            - (1.0 - 2.0 * case.w2 + case.w0)
        )
    return val if signed else abs(val)


def case_peak_candidates(c: float, t: float, gamma0: float) -> dict[str, tuple[float, float]]:
    """Closed-form local optima of Cases II, III and VII as (tau, p)."""
    g = gamma0
    s = math.sqrt(c * g)
    return {
        "II": (0.5 * t, s),
        "III": (g / (g + c) * t, 2.0 * g * c / (g + c)),
        "VII": ((g - s) / (g - c) * t, s),
    }


def maximize_area(
    c: float,
    t: float,
    util: UtilityModel,
    grid: int = 400,
    budget: int = 20000,
    step_tol: float = 1e-9,
    residual_tol: float = 1e-6,
) -> AreaOptimum:
    """Global maximiser of the area over c < p < Γ(0), 0 < tau < t.

    A cell-centred grid locates the basin; a compass search with adaptive
    quadrature then refines it. The result is certified when it lies in
    Case IV, or in Case V/VI with a small stationarity residual.
    """
    _require_linear(util)
    g = util.gamma0
    taus, ps, a = area_map(grid, c, t, g)
    i, k = np.unravel_index(int(np.argmax(a)), a.shape)
    x = [float(taus[i]), float(ps[k])]
    evals = 0

    def area_at(tau, p):
        nonlocal evals
        if not (0.0 < tau < t and c < p < g):
            return -math.inf
        evals += 1
        return coop_area(SystemConfig(c=c, p=p, t=t, tau=tau), util).area

    best = area_at(*x)
    step = [t / grid, (g - c) / grid]
    warning = None
    while max(step[0] / t, step[1] / (g - c)) > step_tol:
        if evals >= budget:
            warning = "evaluation budget exhausted before the step tolerance was reached"
            break
        moved = False
        for dim in (0, 1):
            for sgn in (1.0, -1.0):
                y = list(x)
                y[dim] += sgn * step[dim]
                v = area_at(*y)
                if v > best:
                    x, best, moved = y, v, True
                    break
            if moved:
                break
        if not moved:
            step = [0.5 * step[0], 0.5 * step[1]]
    cfg = SystemConfig(c=c, p=x[1], t=t, tau=x[0])
    case = classify_case(cfg, util)
    if case.label == "IV":
        certified = True
    elif case.label in ("V", "VI"):
        certified = stationarity_residual(cfg, util) < residual_tol
    else:
        certified = False
    if not certified and warning is None:
        warning = f"optimum in Case {case.label} fails the optimality characterisation"
    return AreaOptimum(x[0], x[1], best, case, certified, evals, warning)
