"""Tabular outputs shared by the CLI subcommands and figure reproduction.

Every producer returns ``(header, rows)`` with plain Python values, so the
caller decides on formatting and destination.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from . import area as area_mod
from .conditions import coop_conditions_w, outage_thresholds
from .configfile import Scenario
from .design import DesignSolution
from .model import ALLD, COOP, DomainError, Environment, jdef
from .payoffs import long_term_alld, long_term_coop, long_term_jdef
from .sim.batch import run_batch
from .sim.episode import EpisodeConfig, ExponentialService, GeometricW
from .tradeoff import slot_window, tradeoff_point

SWEEPABLE = ("w", "d", "p", "tau", "t")


def apply_value(sc: Scenario, var: str, value: float) -> Scenario:
    if var == "w":
        return replace(sc, w=value)
    if var == "d":
        return replace(sc, d=value)
    if var in ("p", "tau", "t"):
        return replace(sc, cfg=sc.cfg.replace(**{var: value}))
    raise DomainError(f"cannot sweep {var!r}; choose one of {', '.join(SWEEPABLE)}")


def payoff_table(points, j: int):
    """``points`` is a sequence of (sweep_value, Scenario)."""
    header = [
        "sweep_value",
        "pi_s_coop",
        "pi_c_coop",
        "pi_s_alld",
        "pi_c_alld",
        f"pi_s_jdef_{j}",
        f"pi_c_jdef_{j}",
    ]
    rows = []
    for x, sc in points:
        env = Environment(sc.d, sc.w)
        coop = long_term_coop(sc.cfg, sc.util, env)
        alld = long_term_alld(sc.cfg, sc.util, env)
        js = long_term_jdef(sc.cfg, sc.util, env, j, "sp")
        jc = long_term_jdef(sc.cfg, sc.util, env, j, "client")
        rows.append([x, coop.pi_s, coop.pi_c, alld.pi_s, alld.pi_c, js.pi_s, jc.pi_c])
    return header, rows


def threshold_table_w(points):
    header = ["w", "d_s", "d_c", "d_min"]
    rows = []
    for w, sc in points:
        th = outage_thresholds(sc.cfg, sc.util, w)
        rows.append([w, th.d_s, th.d_c, th.d_min])
    return header, rows


def threshold_table_d(points):
    header = ["d", "sp_w_bound", "client_w_bound", "w_bound"]
    rows = []
    for d, sc in points:
        b = coop_conditions_w(sc.cfg, sc.util, d)
        rows.append([d, b.sp, b.client, max(b.sp, b.client)])
    return header, rows


def design_table(sol: DesignSolution):
    header = ["quantity", "value"]
    rows = [
        ["kind", sol.kind],
        ["p_star", sol.p_star],
        ["tau_star", sol.tau_star],
        ["tau_low", sol.tau_interval[0]],
        ["tau_high", sol.tau_interval[1]],
        ["w_star", sol.w_star],
        ["d_star", sol.d_star],
        ["price_intercept", sol.price_intercept],
        ["price_slope", sol.price_slope],
    ]
    rows += [[f"residual_{k}", v] for k, v in sol.residuals.items()]
    return header, rows


def classify_table(sc: Scenario):
    case = area_mod.classify_case(sc.cfg, sc.util)
    return ["tau", "p", "case", "dominant", "w0", "w1", "w2"], [
        [sc.cfg.tau, sc.cfg.p, case.label, case.dominant, case.w0, case.w1, case.w2]
    ]


def area_table(sc: Scenario):
    res = area_mod.coop_area(sc.cfg, sc.util)
    label = res.case.label if res.case else ""
    return ["tau", "p", "area", "quadrature_error", "case"], [
        [sc.cfg.tau, sc.cfg.p, res.area, res.quadrature_error, label]
    ]


def area_map_table(n: int, c: float, t: float, gamma0: float):
    taus, ps, grid = area_mod.area_map(n, c, t, gamma0)
    rows = []
    for i, tau in enumerate(taus):
        r = tau / t
        for k, p in enumerate(ps):
            rows.append([float(tau), float(p), float(grid[i, k]), area_mod.case_label(r, p, c, gamma0)])
    return ["tau", "p", "area", "case"], rows


def maximize_table(opt: area_mod.AreaOptimum):
    return ["tau", "p", "area", "case", "certified", "evaluations", "warning"], [
        [opt.tau, opt.p, opt.area, opt.case.label, str(opt.certified).lower(), opt.evaluations, opt.warning or ""]
    ]


def tradeoff_table(ts, sc: Scenario):
    header = ["t", "eta", "zeta", "delta_pi"]
    rows = []
    for t in ts:
        pt = tradeoff_point(sc.d, t, sc.cfg.t_sc, sc.cfg.t_ave, sc.cfg.c, sc.util)
        rows.append([t, pt.eta, pt.zeta, pt.delta_pi])
    return header, rows


def tradeoff_grid(sc: Scenario, steps: int):
    """``steps`` interior points of the admissible slot-time window."""
    lo, hi = slot_window(sc.d, sc.cfg.t_sc, sc.cfg.t_ave, sc.cfg.c, sc.util)
    if not hi > lo:
        raise DomainError(f"empty slot-time window ({lo:.6g}, {hi:.6g}) at d={sc.d}")
    return [lo + (hi - lo) * (k + 1) / (steps + 1) for k in range(steps)]


SIM_HEADER = ["sweep_value", "mean_pi_s", "se_pi_s", "mean_pi_c", "se_pi_c", "completion_rate"]


def simulate_row(x, sc: Scenario, client, sp, horizon: str, episodes: int, seed: int, workers: int):
    if horizon == "geometric":
        hz = GeometricW(sc.w)
    else:
        hz = ExponentialService(sc.cfg.t_ave)
    ec = EpisodeConfig(sc.cfg, sc.util, sc.d, hz, client, sp, seed)
    s = run_batch(ec, episodes, workers)
    return [x, s.mean_pi_s, s.se_pi_s, s.mean_pi_c, s.se_pi_c, s.completion_rate]


def single_deviation_profiles(j: int):
    return [(COOP, COOP), (ALLD, COOP), (COOP, ALLD), (jdef(j), COOP), (COOP, jdef(j))]


def marker_table(points, j: int, episodes: int, seed: int, workers: int):
    """Monte Carlo estimates for every single-deviation profile at each point."""
    header = ["sweep_value", "client", "sp", "mean_pi_s", "se_pi_s", "mean_pi_c", "se_pi_c"]
    rows = []
    for x, sc in points:
        for client, sp in single_deviation_profiles(j):
            r = simulate_row(x, sc, client, sp, "geometric", episodes, seed, workers)
            rows.append([x, str(client), str(sp), r[1], r[2], r[3], r[4]])
    return header, rows


def linspace(start: float, stop: float, steps: int) -> list[float]:
    return [float(v) for v in np.linspace(start, stop, steps)]
