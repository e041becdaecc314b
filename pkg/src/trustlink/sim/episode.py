"""Round-by-round protocol simulation, one episode at a time.

This is the reference engine: plain Python, one branch per protocol rule.
The batch engine in :mod:`trustlink.sim.batch` reproduces it bit for bit
on whole arrays of episodes.

Each round resolves at most one of, in priority order:

1. an SP recovery that falls due (the withheld remainder is delivered),
2. a client repayment that falls due (may be lost on the channel),
3. a fresh trial, if the client asks for service and the SP offers it.

A JDEF(1) player recovers in the same round it defected, right after the trial.

Neither party sees why a payment did not arrive. The SP only learns
"paid" or "not paid"; the client only learns whether the remainder of the
slot was delivered. A lost honest payment therefore looks like a
defection to both sides, and two COOP players stall for good.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..model import DomainError, StrategySpec, SystemConfig, UtilityModel
from ..payoffs import stage_table
from . import rng


@dataclass(frozen=True)
class GeometricW:
    """Another round follows with probability ``w``."""

    w: float

    def __post_init__(self):
        if not 0.0 <= self.w < 1.0:
            raise DomainError(f"w must lie in [0, 1), got {self.w}")


@dataclass(frozen=True)
class ExponentialService:
    """Service time ~ Exp(mean t_ave); the episode lasts ceil(T / t) rounds."""

    t_ave: float

    def __post_init__(self):
        if not self.t_ave > 0:
            raise DomainError("t_ave must be positive")


@dataclass(frozen=True)
class EpisodeConfig:
    cfg: SystemConfig
    util: UtilityModel
    d: float
    horizon: GeometricW | ExponentialService
    client: StrategySpec
    sp: StrategySpec
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.d <= 1.0:
            raise DomainError(f"d must lie in [0, 1], got {self.d}")


@dataclass(frozen=True)
class EpisodeResult:
    pi_s: float
    pi_c: float
    completed: bool
    rounds_played: int
    serviced: int
    first_loss: int  # round of the first lost payment, 0 if none


def service_rounds(u: float, t: float, t_ave: float) -> int:
    return max(1, math.ceil(-t_ave * math.log1p(-u) / t))


class _Client:
    def __init__(self, spec: StrategySpec):
        self.spec = spec
        self.halted = False  # waiting for the SP to deliver what it withheld
        self.due = 0  # round of a planned repayment, 0 if none

    def requests(self) -> bool:
        return not self.halted and self.due == 0

    def pays_trial(self) -> bool:
        return self.spec.kind == "COOP"

    def defected(self, rnd: int) -> None:
        if self.spec.kind == "JDEF":
            self.due = rnd + self.spec.j - 1

    def observe(self, outcome: str) -> None:
        # outcome: "served", "withheld" or "recovery"
        if outcome == "withheld":
            self.halted = True
        elif outcome == "recovery":
            self.halted = False


class _Provider:
    def __init__(self, spec: StrategySpec):
        self.spec = spec
        self.halted = False  # waiting for the client to repay
        self.due = 0  # round of a planned recovery, 0 if none

    def offers(self) -> bool:
        return not self.halted and self.due == 0

    def delivers(self) -> bool:
        return self.spec.kind == "COOP"

    def defected(self, rnd: int) -> None:
        if self.spec.kind == "JDEF":
            self.due = rnd + self.spec.j - 1

    def accepts_repayment(self) -> bool:
        return self.spec.kind != "ALLD"

    def observe(self, outcome: str) -> None:
        # outcome: "paid", "unpaid" or "repaid"
        if outcome == "unpaid":
            self.halted = True
        elif outcome == "repaid":
            self.halted = False


def run_episode(ec: EpisodeConfig, episode: int = 0) -> EpisodeResult:
    key = rng.episode_key(ec.seed, episode)
    tab = stage_table(ec.cfg, float(ec.util(ec.d)))
    client, sp = _Client(ec.client), _Provider(ec.sp)
    geometric = isinstance(ec.horizon, GeometricW)
    if not geometric:
        horizon = service_rounds(rng.uniform(key, 0, rng.SERVICE), ec.cfg.t, ec.horizon.t_ave)
    pi_s = pi_c = 0.0
    serviced = first_loss = 0
    rnd = 0

    def add(leaf):
        nonlocal pi_s, pi_c
        pi_s += tab[leaf][0]
        pi_c += tab[leaf][1]

    def sp_recovery():
        add(("H", "R"))
        sp.due = 0
        client.observe("recovery")

    def repayment(lost: bool):
        nonlocal first_loss
        client.due = 0
        if lost:
            # the payment vanishes and no remainder follows: nothing is earned
            first_loss = first_loss or rnd
            client.observe("withheld")
        elif sp.accepts_repayment():
            add(("R", "H"))
            sp.observe("repaid")
        else:
            add(("R", "D"))
            client.observe("withheld")

    while True:
        rnd += 1
        lost = rng.uniform(key, rnd, rng.LOSS) < ec.d
        if sp.due == rnd:
            sp_recovery()
        elif client.due == rnd:
            repayment(lost)
        else:
            if client.requests() and sp.offers():
                serviced += 1
                if not client.pays_trial():
                    add(("D", "H"))
                    sp.observe("unpaid")
                    client.defected(rnd)
                elif lost:
                    add(("L", "H"))
                    first_loss = first_loss or rnd
                    sp.observe("unpaid")
                    client.observe("withheld")
                elif sp.delivers():
                    add(("H", "H"))
                    sp.observe("paid")
                    client.observe("served")
                else:
                    add(("H", "D"))
                    sp.observe("paid")
                    client.observe("withheld")
                    sp.defected(rnd)
            if sp.due == rnd:
                sp_recovery()
            if client.due == rnd:
                repayment(lost)
        stalled = (client.halted or sp.halted) and client.due == 0 and sp.due == 0
        if geometric:
            if not rng.uniform(key, rnd, rng.CONTINUE) < ec.horizon.w:
                break
        elif rnd >= horizon:
            break
        if stalled:
            break
    completed = first_loss == 0 and not (client.halted or sp.halted)
    return EpisodeResult(pi_s, pi_c, completed, rnd, serviced, first_loss)
