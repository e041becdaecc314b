"""Cooperation conditions: willingness bounds, outage thresholds, necessary checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .model import DomainError, Environment, SystemConfig, UtilityModel, utility_inverse


class WBounds(NamedTuple):
    sp: float
    client: float
    # True when some w < 1 satisfies both bounds
    feasible: bool


class OutageThresholds(NamedTuple):
    d_s: float
    d_c: float
    d_min: float
    # False when the client threshold has no root in (0, 1) and d_c was pinned to 0
    client_feasible: bool


@dataclass(frozen=True)
class CoopAssessment:
    sp_w_bound: float
    client_w_bound: float
    d_s: float
    d_c: float
    d_min: float
    cooperative: bool


def sp_w_bound(cfg: SystemConfig, d: float) -> float:
    r = cfg.ratio
    den = (1.0 - d) * cfg.p / cfg.c - r
    if den <= 0.0:
        return math.inf
    return (1.0 - r) / den


def client_w_bound(cfg: SystemConfig, util: UtilityModel, d: float) -> float:
    return 1.0 - (1.0 - cfg.p / float(util(d))) / cfg.ratio


def coop_conditions_w(cfg: SystemConfig, util: UtilityModel, d: float) -> WBounds:
    """Minimum continuation probability each party needs at outage ``d``."""
    s = sp_w_bound(cfg, d)
    k = client_w_bound(cfg, util, d)
    return WBounds(s, k, max(s, k) < 1.0)


def sp_threshold(cfg: SystemConfig, w):
    """Largest outage the SP tolerates at willingness ``w`` (array friendly)."""
    r = cfg.ratio
    return 1.0 - cfg.c * (1.0 - (1.0 - w) * r) / (w * cfg.p)


def client_threshold_arg(cfg: SystemConfig, w):
    return cfg.p / (1.0 - (1.0 - w) * cfg.ratio)


def client_threshold(cfg: SystemConfig, util: UtilityModel, w):
    """Client outage threshold, clipped to [0, 1] outside the utility range.

    Linear utilities keep the unclipped algebraic value, which goes negative
    exactly when the clipped one would be pinned at 0.
    """
    arg = client_threshold_arg(cfg, w)
    if util.kind == "linear":
        return 1.0 - arg / util.gamma0
    arg = np.asarray(arg, dtype=float)
    inner = np.clip(arg, util.at_one, util.gamma0)
    out = np.where(arg >= util.gamma0, 0.0, np.where(arg <= util.at_one, 1.0, util.inverse(inner)))
    return float(out) if out.ndim == 0 else out


def outage_thresholds(cfg: SystemConfig, util: UtilityModel, w: float) -> OutageThresholds:
    if not 0.0 < w < 1.0:
        raise DomainError(f"w must lie in (0, 1), got {w}")
    d_s = float(sp_threshold(cfg, w))
    arg = float(client_threshold_arg(cfg, w))
    feasible = arg < util.gamma0
    d_c = utility_inverse(util, arg) if feasible and arg > util.at_one else (0.0 if not feasible else 1.0)
    return OutageThresholds(d_s, d_c, min(d_s, d_c), feasible)


def necessary_condition_dw(cfg: SystemConfig, util: UtilityModel, env: Environment) -> bool:
    """Willingness exceeds the cost-to-delivered-utility ratio."""
    delivered = (1.0 - env.d) * float(util(env.d))
    if delivered <= 0.0:
        return False
    return env.w > cfg.c / delivered


def necessary_bounds(cfg: SystemConfig, util: UtilityModel) -> tuple[float, float]:
    """Outage cap and willingness floor that any cooperative (d, w) must respect."""
    if cfg.p <= cfg.c:
        raise DomainError("price below cost: cooperation impossible (p <= c)")
    r = cfg.ratio
    if cfg.p >= util.gamma0:
        client_cap = 0.0
    else:
        client_cap = utility_inverse(util, cfg.p)
    d_cap = min(1.0 - cfg.c / cfg.p, client_cap)
    w_floor = max((1.0 - r) / (cfg.p / cfg.c - r), 1.0 - (1.0 - cfg.p / util.gamma0) / r)
    return d_cap, w_floor


def assess(cfg: SystemConfig, util: UtilityModel, env: Environment) -> CoopAssessment:
    b = coop_conditions_w(cfg, util, env.d)
    if env.w > 0.0:
        th = outage_thresholds(cfg, util, env.w)
        d_s, d_c, d_min = th.d_s, th.d_c, th.d_min
    else:
        d_s = d_c = d_min = -math.inf
    return CoopAssessment(
        sp_w_bound=b.sp,
        client_w_bound=b.client,
        d_s=d_s,
        d_c=d_c,
        d_min=d_min,
        cooperative=env.w >= b.sp and env.w >= b.client,
    )
