"""Flat ``key = value`` configuration files.

Example::

    # base scenario
    c = 0.3
    p = 0.6
    tau = 0.6
    utility.kind = linear
    env.d = 0.01
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .model import DomainError, Environment, SystemConfig, UtilityModel

ENV_VAR = "TRUSTLINK_CONFIG"

DEFAULTS = {
    "c": 0.3,
    "p": 0.6,
    "t": 1.0,
    "tau": 0.6,
    "t_sc": 0.05,
    "t_ave": 1.0,
    "utility.kind": "linear",
    "utility.gamma0": 1.0,
    "utility.phi": 2.0,
    "env.d": 0.01,
    "env.w": 0.9,
}

NUMERIC_KEYS = tuple(k for k in DEFAULTS if k != "utility.kind")


def parse_text(text: str, source: str = "<config>") -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{source}:{lineno}: expected 'key = value'")
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in DEFAULTS:
            raise DomainError(f"{source}:{lineno}: unknown key {key!r}")
        if key == "utility.kind":
            values[key] = val.lower()
        else:
            try:
                values[key] = float(val)
            except ValueError:
                raise DomainError(f"{source}:{lineno}: {key} needs a number, got {val!r}") from None
    return values


def load(path: str | None) -> dict:
    """Defaults overlaid with the file at ``path`` (or the env-var path, if set)."""
    merged = dict(DEFAULTS)
    path = path or os.environ.get(ENV_VAR)
    if path:
        with open(path, encoding="utf-8") as fh:
            merged.update(parse_text(fh.read(), path))
    return merged


@dataclass(frozen=True)
class Scenario:
    cfg: SystemConfig
    util: UtilityModel
    d: float
    w: float

    @property
    def env(self) -> Environment:
        return Environment(self.d, self.w)


def build(values: dict) -> Scenario:
    kind = values["utility.kind"]
    if kind == "linear":
        util = UtilityModel.linear(values["utility.gamma0"])
    elif kind == "exponential":
        util = UtilityModel.exponential(values["utility.gamma0"], values["utility.phi"])
    else:
        raise DomainError(f"utility.kind must be linear or exponential, got {kind!r}")
    cfg = SystemConfig(
        c=values["c"],
        p=values["p"],
        t=values["t"],
        tau=values["tau"],
        t_sc=values["t_sc"],
        t_ave=values["t_ave"],
    )
    return Scenario(cfg, util, values["env.d"], values["env.w"])
