"""Stage-game payoff table and closed-form long-term payoffs.

Profiles are written ``(client strategy, SP strategy)``. Every long-term
function returns both parties' payoffs; for deviation profiles the
counterpart (the COOP player facing the deviator) is derived by the same
renewal argument as the deviator's own payoff.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    ALLD,
    COOP,
    DomainError,
    Environment,
    StageAction,
    StrategySpec,
    SystemConfig,
    UtilityModel,
    jdef,
)


@dataclass(frozen=True)
class StagePayoff:
    u_s: float
    u_c: float


@dataclass(frozen=True)
class LongTermPayoff:
    pi_s: float
    pi_c: float
    # None when the values are the two deviators' payoffs from different profiles
    profile: tuple[StrategySpec, StrategySpec] | None


def stage_table(cfg: SystemConfig, gamma: float) -> dict[tuple[str, str], tuple[float, float]]:
    """All reachable leaves as ``{(client, sp): (u_s, u_c)}`` for utility rate ``gamma``."""
    c, p, t, tau = cfg.c, cfg.p, cfg.t, cfg.tau
    rest = t - tau
    return {
        ("H", "H"): (p * t - c * t, gamma * t - p * t),
        ("H", "D"): (p * t - c * tau, gamma * tau - p * t),
        # SP delivers the remainder it withheld earlier
        ("H", "R"): (-c * rest, gamma * rest),
        # client repays a withheld payment and receives the remainder
        ("R", "H"): (p * t - c * rest, gamma * rest - p * t),
        # repayment pocketed by an SP that never delivers
        ("R", "D"): (p * t, -p * t),
        ("D", "H"): (-c * tau, gamma * tau),
        ("D", "D"): (-c * tau, gamma * tau),
        ("L", "H"): (-c * tau, gamma * tau),
        ("L", "D"): (-c * tau, gamma * tau),
    }


def stage_payoffs(
    cfg: SystemConfig, util: UtilityModel, d: float, action: StageAction
) -> StagePayoff:
    if action.sp == "NS":
        return StagePayoff(0.0, 0.0)
    gamma = float(util(d))
    key = (action.client, action.sp)
    table = stage_table(cfg, gamma)
    if key not in table:
        raise DomainError(f"no stage payoff for leaf {key}")
    u_s, u_c = table[key]
    return StagePayoff(u_s, u_c)


def _check_env(env: Environment) -> None:
    if not (0.0 <= env.d < 1.0 and 0.0 <= env.w < 1.0):
        raise DomainError("long-term payoffs need 0 <= d < 1 and 0 <= w < 1")


def long_term_coop(cfg: SystemConfig, util: UtilityModel, env: Environment) -> LongTermPayoff:
    _check_env(env)
    d, w = env.d, env.w
    tab = stage_table(cfg, float(util(d)))
    hh, lh = tab[("H", "H")], tab[("L", "H")]
    den = 1.0 - (1.0 - d) * w
    pi_s = ((1.0 - d) * hh[0] + d * lh[0]) / den
    pi_c = ((1.0 - d) * hh[1] + d * lh[1]) / den
    return LongTermPayoff(pi_s, pi_c, (COOP, COOP))


def long_term_alld(
    cfg: SystemConfig,
    util: UtilityModel,
    env: Environment,
    defector: str | None = None,
) -> LongTermPayoff:
    """ALLD against COOP.

    With ``defector=None`` the result holds each party's payoff when *it*
    is the one playing ALLD. With ``"client"`` or ``"sp"`` the result is the
    full payoff pair of that single profile.
    """
    _check_env(env)
    d = env.d
    tab = stage_table(cfg, float(util(d)))
    dh, hd, lh = tab[("D", "H")], tab[("H", "D")], tab[("L", "H")]
    # client ALLD: the unpaid trial is the only round ever served
    client_dev = dh
    # SP ALLD: one paid (or lost) round, then the client stops
    sp_dev = ((1.0 - d) * hd[0] + d * lh[0], (1.0 - d) * hd[1] + d * lh[1])
    if defector is None:
        return LongTermPayoff(sp_dev[0], client_dev[1], None)
    if defector == "client":
        return LongTermPayoff(client_dev[0], client_dev[1], (ALLD, COOP))
    if defector == "sp":
        return LongTermPayoff(sp_dev[0], sp_dev[1], (COOP, ALLD))
    raise DomainError(f"defector must be 'client' or 'sp', got {defector!r}")


def long_term_jdef(
    cfg: SystemConfig,
    util: UtilityModel,
    env: Environment,
    j: int,
    defector: str,
) -> LongTermPayoff:
    """JDEF(j) against COOP: defect, recover ``j - 1`` rounds later, repeat."""
    _check_env(env)
    if int(j) != j or j < 1:
        raise DomainError(f"JDEF needs an integer j >= 1, got {j}")
    d, w = env.d, env.w
    tab = stage_table(cfg, float(util(d)))
    # w**(j-1) underflows to 0 for huge j, which is exactly the ALLD limit
    wj1 = w ** (int(j) - 1)
    den = 1.0 - (1.0 - d) * wj1 * w
    if defector == "client":
        dh, rh, lh = tab[("D", "H")], tab[("R", "H")], tab[("L", "H")]
        # the defection itself never fails; only the repayment can be lost
        pi_s = (dh[0] + (1.0 - d) * wj1 * rh[0]) / den
        pi_c = ((1.0 - d) * (dh[1] + wj1 * rh[1]) + d * lh[1]) / den
        return LongTermPayoff(pi_s, pi_c, (jdef(j), COOP))
    if defector == "sp":
        hd, hr, lh = tab[("H", "D")], tab[("H", "R")], tab[("L", "H")]
        pi_s = ((1.0 - d) * (hd[0] + wj1 * hr[0]) + d * lh[0]) / den
        pi_c = ((1.0 - d) * (hd[1] + wj1 * hr[1]) + d * lh[1]) / den
        return LongTermPayoff(pi_s, pi_c, (COOP, jdef(j)))
    raise DomainError(f"defector must be 'client' or 'sp', got {defector!r}")


def profile_payoff(
    cfg: SystemConfig,
    util: UtilityModel,
    env: Environment,
    client: StrategySpec,
    sp: StrategySpec,
) -> LongTermPayoff:
    """Closed form for any profile with at most one non-COOP player."""
    if client == COOP and sp == COOP:
        return long_term_coop(cfg, util, env)
    if sp == COOP:
        if client == ALLD:
            return long_term_alld(cfg, util, env, "client")
        return long_term_jdef(cfg, util, env, client.j, "client")
    if client == COOP:
        if sp == ALLD:
            return long_term_alld(cfg, util, env, "sp")
        return long_term_jdef(cfg, util, env, sp.j, "sp")
    raise DomainError(f"no closed form for profile ({client}, {sp})")
