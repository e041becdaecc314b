"""Rebuild the data behind each reference figure from the bundled registry."""

from __future__ import annotations

import json
from importlib import resources

from . import area as area_mod
from . import reports
from .configfile import Scenario
from .design import solve_joint, solve_min_d, solve_min_w
from .model import COOP, DomainError, SystemConfig, UtilityModel
from .sim.batch import run_batch
from .sim.episode import EpisodeConfig, ExponentialService


def registry() -> dict:
    text = resources.files("trustlink").joinpath("data/figures.json").read_text(encoding="utf-8")
    return json.loads(text)


FIGURE_IDS = tuple(f"fig{k}" for k in range(2, 10))


def _utility(spec: dict) -> UtilityModel:
    if spec["kind"] == "linear":
        return UtilityModel.linear(spec["gamma0"])
    return UtilityModel.exponential(spec["gamma0"], spec["phi"])


def _grid(spec: dict) -> list[float]:
    return reports.linspace(spec["start"], spec["stop"], spec["steps"])


def build(fig_id: str, episodes: int = 20_000, seed: int = 0, workers: int = 1):
    """Return a list of ``(name, header, rows)`` tables for ``fig_id``."""
    reg = registry()["figures"]
    if fig_id not in reg:
        raise DomainError(f"unknown figure {fig_id!r}")
    entry = reg[fig_id]
    return _BUILDERS[fig_id](entry, episodes, seed, workers)


def _fig2(e, episodes, seed, workers):
    a = e["area"]
    util = UtilityModel.linear(a["gamma0"])
    tables = [("area_map",) + reports.area_map_table(a["grid"], a["c"], a["t"], a["gamma0"])]
    opt = area_mod.maximize_area(a["c"], a["t"], util)
    tables.append(("optimum",) + reports.maximize_table(opt))
    rows = []
    for label, (tau, p) in area_mod.case_peak_candidates(a["c"], a["t"], a["gamma0"]).items():
        cfg = SystemConfig(c=a["c"], p=p, t=a["t"], tau=tau)
        rows.append([label, tau, p, area_mod.coop_area(cfg, util).area])
    tables.append(("local_optima", ["case", "tau", "p", "area"], rows))
    j = e["joint"]
    sol = solve_joint(j["c"], j["t"], _utility(j["utility"]), j["w_min"], j["d_max"])
    tables.append(("joint_design",) + reports.design_table(sol))
    return tables


def _fig3(e, episodes, seed, workers):
    util = _utility(e["utility"])
    sol = solve_min_w(e["c"], e["t"], util, e["d_max"])
    cfg = SystemConfig(c=e["c"], p=sol.p_star, t=e["t"], tau=sol.tau_star)
    sc = Scenario(cfg, util, e["d_max"], sol.w_star)
    points = [(d, sc) for d in _grid(e["sweep"])]
    header, rows = reports.threshold_table_d(points)
    header = header + ["w_star"]
    rows = [r + [sol.w_star] for r in rows]
    return [("bounds", header, rows), ("design",) + reports.design_table(sol)]


def _fig4(e, episodes, seed, workers):
    util = _utility(e["utility"])
    sol = solve_min_d(e["c"], e["t"], util, e["w_min"])
    cfg = SystemConfig(c=e["c"], p=sol.p_star, t=e["t"], tau=sol.tau_star)
    sc = Scenario(cfg, util, sol.d_star, e["w_min"])
    points = [(w, sc) for w in _grid(e["sweep"])]
    header, rows = reports.threshold_table_w(points)
    header = header + ["d_star"]
    rows = [r + [sol.d_star] for r in rows]
    return [("thresholds", header, rows), ("design",) + reports.design_table(sol)]


def _payoff_figure(e, episodes, seed, workers):
    b = e["base"]
    tables = []
    for name, panel in e["panels"].items():
        cfg = SystemConfig(c=b["c"], p=b["p"], t=b["t"], tau=b["tau"])
        sc = Scenario(cfg, _utility(panel), panel.get("d", b["d"]), b["w"])
        var = e["sweep"]["var"]
        points = [(x, reports.apply_value(sc, var, x)) for x in _grid(e["sweep"])]
        tables.append((f"{name}_analytic",) + reports.payoff_table(points, e["j"]))
        marks = [(x, reports.apply_value(sc, var, x)) for x in _grid(e["markers"])]
        tables.append((f"{name}_simulated",) + reports.marker_table(marks, e["j"], episodes, seed, workers))
    return tables


def _fig9(e, episodes, seed, workers):
    util = _utility(e["utility"])
    tables = []
    for d in e["d_values"]:
        cfg = SystemConfig(c=e["c"], p=0.5, t=1.0, tau=0.5, t_sc=e["t_sc"], t_ave=e["t_ave"])
        sc = Scenario(cfg, util, d, 0.5)
        ts = reports.tradeoff_grid(sc, e["steps"])
        tables.append((f"d{d}_analytic",) + reports.tradeoff_table(ts, sc))
        rows = []
        for t in ts[:: max(1, len(ts) // e["markers"])][: e["markers"]]:
            ec = EpisodeConfig(cfg.replace(t=t), util, d, ExponentialService(e["t_ave"]), COOP, COOP, seed)
            s = run_batch(ec, episodes, workers)
            rows.append([t, s.completion_rate, s.se_completion])
        tables.append((f"d{d}_simulated", ["t", "completion_rate", "se_completion"], rows))
    return tables


_BUILDERS = {
    "fig2": _fig2,
    "fig3": _fig3,
    "fig4": _fig4,
    "fig5": _payoff_figure,
    "fig6": _payoff_figure,
    "fig7": _payoff_figure,
    "fig8": _payoff_figure,
    "fig9": _fig9,
}
