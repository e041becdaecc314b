"""Efficiency, integrity and margin, and the identities tying them together.

Slot time ``t`` drives all three: a longer slot amortises the payment
contract (efficiency up), needs fewer payments per service (integrity up)
and lowers the continuation probability exp(-t/t_ave) (margin down).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .model import DomainError, Environment, SystemConfig, UtilityModel
from .payoffs import long_term_alld, long_term_coop


@dataclass(frozen=True)
class TradeoffPoint:
    eta: float
    zeta: float
    delta_pi: float
    t: float


@dataclass(frozen=True)
class IdentityCheck:
    point: TradeoffPoint
    residuals: tuple[float, float, float]


def transmission_efficiency(t_sc: float, t: float) -> float:
    if t_sc < 0:
        raise DomainError("contract time cannot be negative")
    if not t_sc < t:
        raise DomainError(f"smart contract cannot fit in one slot (t_sc={t_sc} >= t={t})")
    return 1.0 - t_sc / t


def service_loss(d: float, t: float, t_ave: float) -> float:
    """One minus integrity, evaluated directly so small outages keep full precision."""
    if not 0.0 <= d < 1.0:
        raise DomainError(f"d must lie in [0, 1), got {d}")
    if not (t > 0 and t_ave > 0):
        raise DomainError("t and t_ave must be positive")
    return d / (1.0 - (1.0 - d) * math.exp(-t / t_ave))


def service_integrity(d: float, t: float, t_ave: float) -> float:
    """Probability an exponentially long service finishes without losing a payment."""
    return 1.0 - service_loss(d, t, t_ave)


def service_integrity_series(d: float, round_pmf: Iterable[float]) -> float:
    """Integrity for any service-length law given as Pr(M = 1), Pr(M = 2), ..."""
    total, keep = 0.0, 1.0
    for prob in round_pmf:
        keep *= 1.0 - d
        total += keep * prob
    return total


def exponential_round_pmf(t: float, t_ave: float, terms: int):
    """Pr(M = m) for m = 1..terms when the service time is exponential."""
    for m in range(1, terms + 1):
        yield math.exp(-(m - 1) * t / t_ave) - math.exp(-m * t / t_ave)


def margin_value(c: float, util: UtilityModel, d: float, w: float) -> float:
    """Normalised COOP-over-ALLD gap for a design on the balanced price line."""
    ratio = c / float(util(d))
    return ((1.0 - d) * w - ratio) / (1.0 - ratio)


def on_balanced_line(cfg: SystemConfig, util: UtilityModel, d: float, tol: float = 1e-9) -> bool:
    r = cfg.ratio
    target = float(util(d)) * (1.0 - r) + cfg.c / (1.0 - d) * r
    return abs(cfg.p - target) <= tol * max(1.0, abs(target))


def cooperation_margin(
    cfg: SystemConfig,
    util: UtilityModel,
    d: float,
    mode: str = "explicit-w",
    w: float | None = None,
) -> float:
    """Shared margin of both parties when (p, tau) balance their willingness bounds.

    ``mode="explicit-w"`` takes ``w`` directly; ``mode="exponential-service"``
    derives it from the slot and mean service times in ``cfg``.
    """
    if mode == "explicit-w":
        if w is None:
            raise DomainError("explicit-w mode needs a value for w")
    elif mode == "exponential-service":
        w = math.exp(-cfg.t / cfg.t_ave)
    else:
        raise DomainError(f"unknown margin mode {mode!r}")
    if not on_balanced_line(cfg, util, d):
        raise DomainError(
            "(p, tau) are not on the balanced price line for this d; "
            "use per_party_margins for general designs"
        )
    return margin_value(cfg.c, util, d, w)


def per_party_margins(cfg: SystemConfig, util: UtilityModel, env: Environment) -> tuple[float, float]:
    """Each party's relative loss from switching alone from COOP to ALLD."""
    coop = long_term_coop(cfg, util, env)
    dev = long_term_alld(cfg, util, env)
    if coop.pi_s <= 0.0 or coop.pi_c <= 0.0:
        raise DomainError("margin undefined: a COOP long-term payoff is not positive")
    return 1.0 - dev.pi_s / coop.pi_s, 1.0 - dev.pi_c / coop.pi_c


def slot_window(d: float, t_sc: float, t_ave: float, c: float, util: UtilityModel) -> tuple[float, float]:
    """Open interval of slot times with a positive margin and room for the contract."""
    top = (1.0 - d) * float(util(d)) / c
    upper = t_ave * math.log(top) if top > 0 else -math.inf
    return t_sc, upper


def tradeoff_point(d: float, t: float, t_sc: float, t_ave: float, c: float, util: UtilityModel) -> TradeoffPoint:
    eta = transmission_efficiency(t_sc, t)
    zeta = service_integrity(d, t, t_ave)
    dpi = margin_value(c, util, d, math.exp(-t / t_ave))
    return TradeoffPoint(eta, zeta, dpi, t)


def tradeoff_identities(
    d: float, t: float, t_sc: float, t_ave: float, c: float, util: UtilityModel
) -> IdentityCheck:
    """Compute (eta, zeta, margin) at slot time ``t`` and the three pairwise identity residuals."""
    lo, hi = slot_window(d, t_sc, t_ave, c, util)
    if not t > lo:
        raise DomainError(f"transmission window violated: need t > t_sc ({t} <= {lo})")
    if not t < hi:
        raise DomainError(
            f"margin window violated: need t < t_ave*ln((1-d)Γ(d)/c) = {hi:.6g} (t={t})"
        )
    pt = tradeoff_point(d, t, t_sc, t_ave, c, util)
    slack = 1.0 - c / float(util(d))
    decay = math.exp(-t_sc / t_ave / (1.0 - pt.eta))
    if d < 1e-12:
        # margin from integrity is 0/0 here; compare against the direct formula
        from_zeta = margin_value(c, util, d, math.exp(-t / t_ave))
    else:
        from_zeta = 1.0 - d / (service_loss(d, t, t_ave) * slack)
    from_eta = 1.0 - (1.0 - (1.0 - d) * decay) / slack
    zeta_from_eta = 1.0 - d / (1.0 - (1.0 - d) * decay)
    return IdentityCheck(
        pt,
        (abs(pt.delta_pi - from_zeta), abs(pt.delta_pi - from_eta), abs(pt.zeta - zeta_from_eta)),
    )
