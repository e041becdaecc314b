"""Choosing price and trial time so cooperation survives the worst expected conditions.

Three problems are solved:

* ``solve_min_w`` - the outage ceiling ``d_max`` is known; find (p, tau)
  minimising the willingness both parties need.
* ``solve_min_d`` - the willingness floor ``w_min`` is known; find (p, tau)
  maximising the outage both parties tolerate.
* ``solve_joint`` - both are known; the two optimal lines in the (tau, p)
  plane meet in a single point.

Each optimum is a one-parameter family along a line ``p = a + b * tau``;
the solution carries that line, the admissible tau interval and a
representative point at the interval midpoint.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from scipy.optimize import bisect

from .conditions import client_threshold, coop_conditions_w, sp_threshold
from .model import DomainError, InfeasibleError, SystemConfig, UtilityModel


@dataclass(frozen=True)
class DesignSolution:
    kind: str
    p_star: float
    tau_star: float
    tau_interval: tuple[float, float]
    w_star: float
    d_star: float
    price_intercept: float
    price_slope: float
    residuals: dict = field(default_factory=dict)

    def price_at(self, tau: float) -> float:
        return self.price_intercept + self.price_slope * tau


def _check_prob(name: str, x: float) -> None:
    if not 0.0 < x < 1.0:
        raise DomainError(f"{name} must lie in (0, 1), got {x}")


def _delivered(util: UtilityModel, d: float) -> float:
    return (1.0 - d) * float(util(d))


def min_w_requirement(c: float, util: UtilityModel, d: float) -> float:
    """Smallest willingness any (p, tau) can demand at outage ``d``."""
    val = _delivered(util, d)
    if val <= 0.0:
        return float("inf")
    return c / val


def min_w_price_line(c: float, t: float, util: UtilityModel, d: float) -> tuple[float, float]:
    """Intercept and slope of the optimal price as a function of tau."""
    g = float(util(d))
    return g, (c / (1.0 - d) - g) / t


def solve_min_w(c: float, t: float, util: UtilityModel, d_max: float) -> DesignSolution:
    _check_prob("d_max", d_max)
    w_star = min_w_requirement(c, util, d_max)
    if not w_star < 1.0:
        raise InfeasibleError(
            f"necessary condition c < (1-d)Γ(d) fails at d_max={d_max}: "
            f"required willingness {w_star:.6g} >= 1"
        )
    g = float(util(d_max))
    # p > c holds for tau below this bound, which always lies beyond t
    upper = (g - c) / (g - c / (1.0 - d_max)) * t
    hi = min(t, upper)
    tau = 0.5 * hi
    a, b = min_w_price_line(c, t, util, d_max)
    p = a + b * tau
    cfg = SystemConfig(c=c, p=p, t=t, tau=tau)
    bounds = coop_conditions_w(cfg, util, d_max)
    return DesignSolution(
        kind="MinW",
        p_star=p,
        tau_star=tau,
        tau_interval=(0.0, float(hi)),
        w_star=w_star,
        d_star=d_max,
        price_intercept=a,
        price_slope=b,
        residuals={
            "sp_bound_minus_w_star": bounds.sp - w_star,
            "client_bound_minus_w_star": bounds.client - w_star,
        },
    )


def max_tolerable_outage(c: float, util: UtilityModel, w_min: float) -> float:
    """Root of (1 - x) Γ(x) = c / w_min on [0, 1).

    The left side falls from Γ(0) to 0, so bisection always converges when
    Γ(0) >= c / w_min.
    """
    target = c / w_min
    g0 = util.gamma0
    if target > g0:
        raise InfeasibleError(
            f"f(0) = Γ(0) = {g0:.6g} must exceed c/w_min = {target:.6g}; no root exists"
        )
    if target == g0:
        return 0.0
    return bisect(lambda x: _delivered(util, x) - target, 0.0, 1.0, xtol=1e-16, rtol=8.9e-16, maxiter=200)


def min_d_price_line(c: float, t: float, util: UtilityModel, w: float, d: float) -> tuple[float, float]:
    g = float(util(d))
    return g, -g * (1.0 - w) / t


def solve_min_d(c: float, t: float, util: UtilityModel, w_min: float) -> DesignSolution:
    _check_prob("w_min", w_min)
    d_star = max_tolerable_outage(c, util, w_min)
    # p > c once tau < t (1 - w(1-d*)) / (1 - w); never tighter than t
    upper = (1.0 - w_min * (1.0 - d_star)) / (1.0 - w_min) * t
    hi = min(t, upper)
    tau = 0.5 * hi
    a, b = min_d_price_line(c, t, util, w_min, d_star)
    p = a + b * tau
    cfg = SystemConfig(c=c, p=p, t=t, tau=tau)
    return DesignSolution(
        kind="MinD",
        p_star=p,
        tau_star=tau,
        tau_interval=(0.0, float(hi)),
        w_star=w_min,
        d_star=d_star,
        price_intercept=a,
        price_slope=b,
        residuals={
            "root": _delivered(util, d_star) - c / w_min,
            "d_s_minus_d_star": float(sp_threshold(cfg, w_min)) - d_star,
            "d_c_minus_d_star": float(client_threshold(cfg, util, w_min)) - d_star,
        },
    )


def solve_joint(
    c: float, t: float, util: UtilityModel, w_min: float, d_max: float
) -> DesignSolution:
    """Single (p, tau) that is optimal for both the min-w and min-d problems."""
    _check_prob("w_min", w_min)
    _check_prob("d_max", d_max)
    w_star = min_w_requirement(c, util, d_max)
    if not w_star < 1.0:
        raise InfeasibleError(f"d_max={d_max} admits no willingness below 1")
    d_star = max_tolerable_outage(c, util, w_min)
    gm, gs = float(util(d_max)), float(util(d_star))
    num = c * (c / w_min - gm * (1.0 - d_max))
    den = (gs - gm) * (1.0 - d_star) * (1.0 - d_max) - c * (d_star - d_max)
    if abs(d_star - d_max) < 1e-12 or den == 0.0:
        # both optimal lines coincide; the whole min-d family is jointly optimal
        fam = solve_min_d(c, t, util, w_min)
        return DesignSolution(**{**fam.__dict__, "kind": "Joint", "w_star": w_star})
    p = num / den
    tau = (gm - p) / (gm - c / (1.0 - d_max)) * t
    if not 0.0 < tau < t:
        raise InfeasibleError(
            f"incompatible pair w_min={w_min}, d_max={d_max}: optimal tau={tau:.6g} outside (0, {t})"
        )
    cfg = SystemConfig(c=c, p=p, t=t, tau=tau)
    ds_w, dc_w = float(sp_threshold(cfg, w_min)), float(client_threshold(cfg, util, w_min))
    ds_m, dc_m = float(sp_threshold(cfg, w_star)), float(client_threshold(cfg, util, w_star))
    a, b = min_w_price_line(c, t, util, d_max)
    return DesignSolution(
        kind="Joint",
        p_star=p,
        tau_star=tau,
        tau_interval=(tau, tau),
        w_star=w_star,
        d_star=d_star,
        price_intercept=a,
        price_slope=b,
        residuals={
            "at_w_min_d_s_minus_d_c": ds_w - dc_w,
            "at_w_min_d_s_minus_d_star": ds_w - d_star,
            "at_w_star_d_s_minus_d_max": ds_m - d_max,
            "at_w_star_d_c_minus_d_max": dc_m - d_max,
            "min_w_line": p - (a + b * tau),
            "min_d_line": p - gs * (1.0 - (1.0 - w_min) * tau / t),
        },
    )


def reduced_negotiation(
    cfg: SystemConfig, util: UtilityModel, d_measured: float
) -> tuple[float, float, float]:
    """Price and trial time for a measured outage, plus the resulting willingness requirement.

    With these parameters the two parties' willingness bounds coincide, so
    the full cooperation test collapses to a single comparison of w.
    """
    if not 0.0 <= d_measured < 1.0:
        raise DomainError(f"measured outage must lie in [0, 1), got {d_measured}")
    w_req = min_w_requirement(cfg.c, util, d_measured)
    if not w_req < 1.0:
        raise InfeasibleError(
            f"necessary condition c < (1-d)Γ(d) fails at d={d_measured}: no w < 1 suffices"
        )
    tau = 0.5 * cfg.t
    a, b = min_w_price_line(cfg.c, cfg.t, util, d_measured)
    return a + b * tau, tau, w_req
