"""Domain types shared by every analysis module.

All types are frozen dataclasses, so they can be shared across processes
(the Monte Carlo batch runner pickles them) without coordination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

# Open-interval comparisons against probability bounds use this slack.
EPS = 1e-15


class DomainError(ValueError):
    """An input lies outside the domain where a quantity is defined."""


class InfeasibleError(DomainError):
    """A design or analysis problem has no admissible solution."""


@dataclass(frozen=True)
class SystemConfig:
    """Designer-controlled protocol parameters.

    ``c`` and ``p`` are cost and price per unit time, ``t`` the slot time,
    ``tau`` the trial time at the start of each slot, ``t_sc`` the time to
    transmit the payment contract and ``t_ave`` the mean service duration.
    """

    c: float
    p: float
    t: float = 1.0
    tau: float = 0.5
    t_sc: float = 0.0
    t_ave: float = 1.0

    @property
    def ratio(self) -> float:
        """Trial fraction tau/t."""
        return self.tau / self.t

    def replace(self, **changes) -> "SystemConfig":
        return SystemConfig(**{**self.__dict__, **changes})


@dataclass(frozen=True)
class UtilityModel:
    """Client utility rate as a strictly decreasing function of outage d.

    Build instances through :meth:`linear`, :meth:`exponential` or
    :meth:`tabulated` rather than the raw constructor.
    """

    kind: str
    gamma0: float
    phi: float = 0.0
    table: tuple[tuple[float, float], ...] = field(default=(), repr=False)

    def __post_init__(self):
        if self.kind not in ("linear", "exponential", "tabulated"):
            raise DomainError(f"unknown utility kind {self.kind!r}")
        if self.kind == "exponential" and not self.phi > 0:
            raise DomainError("exponential utility needs phi > 0")
        if self.kind == "tabulated":
            ds = np.array([row[0] for row in self.table], dtype=float)
            gs = np.array([row[1] for row in self.table], dtype=float)
            if len(ds) < 2 or ds[0] != 0.0 or ds[-1] != 1.0:
                raise DomainError("utility table must span d = 0 .. 1")
            if np.any(np.diff(ds) <= 0) or np.any(np.diff(gs) >= 0):
                raise DomainError("utility table must be strictly decreasing in d")
            if gs[0] != self.gamma0:
                raise DomainError("gamma0 must equal the tabulated value at d = 0")
        elif not self.gamma0 > 0:
            raise DomainError("gamma0 must be positive")

    @classmethod
    def linear(cls, gamma0: float = 1.0) -> "UtilityModel":
        return cls("linear", float(gamma0))

    @classmethod
    def exponential(cls, gamma0: float = 1.0, phi: float = 2.0) -> "UtilityModel":
        return cls("exponential", float(gamma0), float(phi))

    @classmethod
    def tabulated(cls, samples: Sequence[tuple[float, float]]) -> "UtilityModel":
        rows = tuple((float(d), float(g)) for d, g in samples)
        return cls("tabulated", rows[0][1] if rows else 0.0, table=rows)

    @property
    def at_one(self) -> float:
        """Utility under total outage, the lower end of the range."""
        return float(self(1.0))

    def __call__(self, d):
        if self.kind == "linear":
            return self.gamma0 * (1.0 - d)
        if self.kind == "exponential":
            return self.gamma0 * np.exp(-self.phi * d)
        ds, gs = self._grid()
        return np.interp(d, ds, gs)

    def inverse(self, x):
        """Outage probability at which the utility equals ``x`` (no range check)."""
        if self.kind == "linear":
            return 1.0 - x / self.gamma0
        if self.kind == "exponential":
            return -np.log(x / self.gamma0) / self.phi
        return _bisect_decreasing(self, x)

    def _grid(self):
        ds = np.fromiter((row[0] for row in self.table), float)
        gs = np.fromiter((row[1] for row in self.table), float)
        return ds, gs


def _bisect_decreasing(fn, target, tol: float = 1e-13):
    """Vectorised bisection for fn(d) = target with fn decreasing on [0, 1]."""
    target = np.asarray(target, dtype=float)
    lo = np.zeros_like(target)
    hi = np.ones_like(target)
    # 2**-47 < 1e-14, comfortably inside the 1e-12 contract
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        above = fn(mid) > target
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
        if np.all(hi - lo <= tol):
            break
    out = 0.5 * (lo + hi)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Environment:
    """Exogenous pair: outage probability ``d`` and continuation probability ``w``."""

    d: float
    w: float

    def __post_init__(self):
        for name in ("d", "w"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise DomainError(f"{name} must lie in [0, 1), got {v}")

    @classmethod
    def from_service(cls, d: float, t: float, t_ave: float) -> "Environment":
        """Continuation probability implied by exponentially distributed service time."""
        return cls(d, math.exp(-t / t_ave))


@dataclass(frozen=True)
class StrategySpec:
    """COOP, ALLD or JDEF(j) with j >= 1."""

    kind: str
    j: int | None = None

    def __post_init__(self):
        if self.kind not in ("COOP", "ALLD", "JDEF"):
            raise DomainError(f"unknown strategy {self.kind!r}")
        if self.kind == "JDEF":
            if self.j is None or int(self.j) != self.j or self.j < 1:
                raise DomainError("JDEF needs an integer j >= 1")
        elif self.j is not None:
            raise DomainError(f"{self.kind} takes no j")

    def __str__(self):
        return f"JDEF({self.j})" if self.kind == "JDEF" else self.kind

    @classmethod
    def parse(cls, text: str) -> "StrategySpec":
        """Accepts ``COOP``, ``ALLD``, ``JDEF(3)``, ``JDEF3`` or ``jdef:3``."""
        s = text.strip().upper().replace(" ", "")
        if s in ("COOP", "ALLD"):
            return cls(s)
        if s.startswith("JDEF"):
            digits = s[4:].strip("():")
            if digits.isdigit():
                return cls("JDEF", int(digits))
        raise DomainError(f"cannot parse strategy {text!r}")


COOP = StrategySpec("COOP")
ALLD = StrategySpec("ALLD")


def jdef(j: int) -> StrategySpec:
    return StrategySpec("JDEF", j)


CLIENT_ACTIONS = ("H", "D", "L", "R")
SP_ACTIONS = ("NS", "H", "D", "R")


@dataclass(frozen=True)
class StageAction:
    """Leaf of the stage-game tree, written (client action, SP action).

    Client actions: H pays, D withholds payment, R repays a withheld payment.
    L marks an honest payment lost on the channel; no player chooses it.
    SP actions: NS no service, H delivers the remainder, D withholds it,
    R delivers a remainder withheld in an earlier round.
    """

    client: str
    sp: str

    def __post_init__(self):
        if self.client not in CLIENT_ACTIONS:
            raise DomainError(f"bad client action {self.client!r}")
        if self.sp not in SP_ACTIONS:
            raise DomainError(f"bad SP action {self.sp!r}")


def utility_eval(util: UtilityModel, d: float) -> float:
    if not 0.0 <= d <= 1.0:
        raise DomainError(f"outage probability must lie in [0, 1], got {d}")
    return float(util(d))


def utility_inverse(util: UtilityModel, x: float) -> float:
    """Outage probability ``d`` with ``utility_eval(util, d) == x``."""
    lo, hi = util.at_one, util.gamma0
    slack = 1e-12 * max(1.0, abs(hi))
    if not lo - slack <= x <= hi + slack:
        raise DomainError(f"utility {x} outside the range [{lo}, {hi}]")
    if x >= hi:
        return 0.0
    if x <= lo:
        return 1.0
    return float(util.inverse(x))


def validate_config(cfg: SystemConfig, util: UtilityModel) -> list[str]:
    """Return one message per violated constraint; empty means valid."""
    problems = []
    if not cfg.c > 0:
        problems.append(f"c > 0: cost rate must be positive (c={cfg.c})")
    if not cfg.t > 0:
        problems.append(f"t > 0: slot time must be positive (t={cfg.t})")
    if not cfg.tau > 0:
        problems.append(f"tau > 0: trial time must be positive (tau={cfg.tau})")
    if not cfg.tau < cfg.t:
        problems.append(f"tau < t: tau must be < t (tau={cfg.tau}, t={cfg.t})")
    if not cfg.p > cfg.c:
        problems.append(f"p > c: price must exceed cost (p={cfg.p}, c={cfg.c})")
    if not util.gamma0 > cfg.p:
        problems.append(f"gamma(0) > p: Γ(0) > p required (Γ(0)={util.gamma0}, p={cfg.p})")
    if not cfg.t_sc >= 0:
        problems.append(f"t_sc >= 0: contract time cannot be negative (t_sc={cfg.t_sc})")
    if not cfg.t_sc < cfg.t:
        problems.append(f"t_sc < t: contract must fit in one slot (t_sc={cfg.t_sc}, t={cfg.t})")
    if not cfg.t_ave > 0:
        problems.append(f"t_ave > 0: mean service time must be positive (t_ave={cfg.t_ave})")
    return problems
