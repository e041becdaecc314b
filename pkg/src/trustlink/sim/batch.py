"""Vectorised episode engine, parallel batches and dominance scans.

Episodes are grouped into fixed blocks of ``BLOCK`` consecutive indices.
A block is simulated in lock-step (one numpy pass per round over the
episodes still running) and reduced to count, mean and centred sum of
squares. Blocks are merged strictly in index order, so the summary does
not depend on how many worker processes computed them.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ..model import ALLD, COOP, jdef
from ..payoffs import stage_table
from . import rng
from .episode import EpisodeConfig, GeometricW

BLOCK = 1 << 16

@dataclass(frozen=True)
class EpisodeArrays:
    pi_s: np.ndarray
    pi_c: np.ndarray
    completed: np.ndarray
    rounds: np.ndarray
    serviced: np.ndarray
    first_loss: np.ndarray


@dataclass(frozen=True)
class SimSummary:
    mean_pi_s: float
    mean_pi_c: float
    se_pi_s: float
    se_pi_c: float
    completion_rate: float
    se_completion: float
    mean_rounds: float
    se_rounds: float
    episodes: int


def simulate_range(ec: EpisodeConfig, start: int, stop: int) -> EpisodeArrays:
    """Simulate episodes ``start .. stop-1``; matches :func:`run_episode` exactly."""
    n = stop - start
    keys = rng.episode_keys(ec.seed, np.arange(start, stop, dtype=np.uint64))
    tab = stage_table(ec.cfg, float(ec.util(ec.d)))
    d = ec.d
    geometric = isinstance(ec.horizon, GeometricW)
    c_kind, s_kind = ec.client.kind, ec.sp.kind
    c_lag = (ec.client.j or 1) - 1
    s_lag = (ec.sp.j or 1) - 1

    out_s = np.zeros(n)
    out_c = np.zeros(n)
    out_done = np.zeros(n, dtype=bool)
    out_rounds = np.zeros(n, dtype=np.int64)
    out_serv = np.zeros(n, dtype=np.int64)
    out_loss = np.zeros(n, dtype=np.int64)

    idx = np.arange(n)
    pi_s = np.zeros(n)
    pi_c = np.zeros(n)
    c_halt = np.zeros(n, dtype=bool)
    s_halt = np.zeros(n, dtype=bool)
    c_due = np.zeros(n, dtype=np.int64)
    s_due = np.zeros(n, dtype=np.int64)
    serviced = np.zeros(n, dtype=np.int64)
    first_loss = np.zeros(n, dtype=np.int64)
    if not geometric:
        u = rng.uniform_array(keys, 0, rng.SERVICE)
        horizon = np.maximum(1, np.ceil(-ec.horizon.t_ave * np.log1p(-u) / ec.cfg.t)).astype(np.int64)

    def add(mask, leaf):
        pi_s[mask] += tab[leaf][0]
        pi_c[mask] += tab[leaf][1]

    def sp_recovery(mask):
        add(mask, ("H", "R"))
        s_due[mask] = 0
        c_halt[mask] = False

    def repayment(mask, lost, rnd):
        c_due[mask] = 0
        gone = mask & lost
        got = mask & ~lost
        first_loss[gone & (first_loss == 0)] = rnd
        c_halt[gone] = True
        if s_kind != "ALLD":
            add(got, ("R", "H"))
            s_halt[got] = False
        else:
            add(got, ("R", "D"))
            c_halt[got] = True

    rnd = 0
    while idx.size:
        rnd += 1
        lost = rng.uniform_array(keys, rnd, rng.LOSS) < d
        rec = s_due == rnd
        rep = ~rec & (c_due == rnd)
        fresh = ~rec & ~rep
        if rec.any():
            sp_recovery(rec)
        if rep.any():
            repayment(rep, lost, rnd)
        go = fresh & ~c_halt & (c_due == 0) & ~s_halt & (s_due == 0)
        serviced += go
        if c_kind != "COOP":
            add(go, ("D", "H"))
            s_halt |= go
            if c_kind == "JDEF":
                c_due[go] = rnd + c_lag
        else:
            gone = go & lost
            ok = go & ~lost
            add(gone, ("L", "H"))
            first_loss[gone & (first_loss == 0)] = rnd
            s_halt |= gone
            c_halt |= gone
            if s_kind == "COOP":
                add(ok, ("H", "H"))
            else:
                add(ok, ("H", "D"))
                c_halt |= ok
                if s_kind == "JDEF":
                    s_due[ok] = rnd + s_lag
        # JDEF(1) recovers inside the round it defected
        follow = fresh & (s_due == rnd)
        if follow.any():
            sp_recovery(follow)
        follow = fresh & (c_due == rnd)
        if follow.any():
            repayment(follow, lost, rnd)

        stalled = (c_halt | s_halt) & (c_due == 0) & (s_due == 0)
        if geometric:
            end = ~(rng.uniform_array(keys, rnd, rng.CONTINUE) < ec.horizon.w)
        else:
            end = rnd >= horizon
        fin = end | stalled
        if fin.any():
            where = idx[fin]
            out_s[where] = pi_s[fin]
            out_c[where] = pi_c[fin]
            out_done[where] = (first_loss[fin] == 0) & ~(c_halt[fin] | s_halt[fin])
            out_rounds[where] = rnd
            out_serv[where] = serviced[fin]
            out_loss[where] = first_loss[fin]
            keep = ~fin
            idx, keys = idx[keep], keys[keep]
            pi_s, pi_c = pi_s[keep], pi_c[keep]
            c_halt, s_halt = c_halt[keep], s_halt[keep]
            c_due, s_due = c_due[keep], s_due[keep]
            serviced, first_loss = serviced[keep], first_loss[keep]
            if not geometric:
                horizon = horizon[keep]
    return EpisodeArrays(out_s, out_c, out_done, out_rounds, out_serv, out_loss)


@dataclass(frozen=True)
class _Moments:
    n: int
    mean: tuple[float, ...]
    m2: tuple[float, ...]


def _block_moments(ec: EpisodeConfig, start: int, stop: int) -> _Moments:
    arr = simulate_range(ec, start, stop)
    cols = [arr.pi_s, arr.pi_c, arr.completed.astype(np.float64), arr.rounds.astype(np.float64)]
    means = tuple(float(x.mean()) for x in cols)
    # constant columns get an exact zero rather than rounding noise
    m2 = tuple(0.0 if x.min() == x.max() else float(((x - m) ** 2).sum()) for x, m in zip(cols, means))
    return _Moments(stop - start, means, m2)


def _merge(a: _Moments, b: _Moments) -> _Moments:
    """Chan et al. pairwise update of count, mean and centred sum of squares."""
    n = a.n + b.n
    means, m2 = [], []
    for ma, mb, sa, sb in zip(a.mean, b.mean, a.m2, b.m2):
        delta = mb - ma
        means.append(ma + delta * b.n / n)
        m2.append(sa + sb + delta * delta * a.n * b.n / n)
    return _Moments(n, tuple(means), tuple(m2))


def _block_task(args):
    ec, start, stop = args
    return _block_moments(ec, start, stop)


def run_batch(ec: EpisodeConfig, n_episodes: int, workers: int = 1) -> SimSummary:
    if n_episodes < 1:
        raise ValueError("n_episodes must be >= 1")
    tasks = [(ec, s, min(s + BLOCK, n_episodes)) for s in range(0, n_episodes, BLOCK)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_block_task, tasks))
    else:
        parts = [_block_task(t) for t in tasks]
    total = parts[0]
    for part in parts[1:]:
        total = _merge(total, part)
    n = total.n

    def se(k):
        if n < 2:
            return 0.0
        return math.sqrt(total.m2[k] / (n - 1) / n)

    return SimSummary(
        mean_pi_s=total.mean[0],
        mean_pi_c=total.mean[1],
        se_pi_s=se(0),
        se_pi_c=se(1),
        completion_rate=total.mean[2],
        se_completion=se(2),
        mean_rounds=total.mean[3],
        se_rounds=se(3),
        episodes=n,
    )


@dataclass(frozen=True)
class DominanceRow:
    value: float
    party: str
    best: str
    means: dict

    @property
    def gap(self) -> float:
        """COOP payoff minus the best deviation's payoff."""
        rest = [v for k, v in self.means.items() if k != "COOP"]
        return self.means["COOP"] - max(rest)


def dominance_scan(
    ec: EpisodeConfig,
    grid,
    j_set=(2,),
    episodes: int = 100_000,
    workers: int = 1,
    sweep: str = "w",
) -> list[DominanceRow]:
    """Empirically best strategy for each party at each grid value, against a COOP opponent.

    ``sweep="w"`` varies the continuation probability at the outage of
    ``ec``; ``sweep="d"`` varies the outage at the continuation probability
    of ``ec.horizon``. Every candidate reuses the seed of ``ec``, so
    strategies are compared on common random numbers.
    """
    if sweep not in ("w", "d"):
        raise ValueError("sweep must be 'w' or 'd'")
    deviants = [ALLD] + [jdef(j) for j in j_set]
    rows = []
    for x in grid:
        x = float(x)
        point = replace(ec, horizon=GeometricW(x)) if sweep == "w" else replace(ec, d=x)
        base = run_batch(replace(point, client=COOP, sp=COOP), episodes, workers)
        for party in ("client", "sp"):
            means = {"COOP": base.mean_pi_c if party == "client" else base.mean_pi_s}
            for strat in deviants:
                if party == "client":
                    s = run_batch(replace(point, client=strat, sp=COOP), episodes, workers)
                    means[str(strat)] = s.mean_pi_c
                else:
                    s = run_batch(replace(point, client=COOP, sp=strat), episodes, workers)
                    means[str(strat)] = s.mean_pi_s
            best = max(means, key=lambda k: (means[k], k == "COOP"))
            rows.append(DominanceRow(x, party, best, means))
    return rows


def crossing_estimate(rows: list[DominanceRow], party: str) -> float | None:
    """Where COOP's simulated advantage changes sign, by linear interpolation.

    Scans from the end of the grid, so the last sign change wins; None
    when the advantage keeps one sign throughout.
    """
    seq = [r for r in rows if r.party == party]
    for a, b in reversed(list(zip(seq, seq[1:]))):
        ga, gb = a.gap, b.gap
        if (ga < 0) != (gb < 0):
            return a.value + (b.value - a.value) * (0.0 - ga) / (gb - ga)
    return None
