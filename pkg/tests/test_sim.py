import math

import numpy as np
import pytest

from trustlink.model import ALLD, COOP, DomainError, SystemConfig, UtilityModel, jdef
from trustlink.sim import rng
from trustlink.sim.batch import (
    BLOCK,
    DominanceRow,
    _Moments,
    _merge,
    crossing_estimate,
    dominance_scan,
    run_batch,
    simulate_range,
)
from trustlink.sim.episode import EpisodeConfig, ExponentialService, GeometricW, run_episode, service_rounds

CFG = SystemConfig(c=0.3, p=0.6, t=1.0, tau=0.6)
LIN = UtilityModel.linear(1.0)
STRATS = [COOP, ALLD, jdef(1), jdef(2), jdef(4)]


def ec(d=0.01, horizon=GeometricW(0.9), client=COOP, sp=COOP, seed=0, cfg=CFG, util=LIN):
    return EpisodeConfig(cfg, util, d, horizon, client, sp, seed)


def test_uniform_scalar_and_array_agree():
    keys = rng.episode_keys(42, np.arange(1000, dtype=np.uint64))
    for i in (0, 1, 517, 999):
        assert int(keys[i]) == rng.episode_key(42, i)
    for stream in (rng.LOSS, rng.CONTINUE, rng.SERVICE):
        arr = rng.uniform_array(keys, 7, stream)
        assert arr[517] == rng.uniform(rng.episode_key(42, 517), 7, stream)


def test_uniform_range_and_moments():
    keys = rng.episode_keys(1, np.arange(200_000, dtype=np.uint64))
    u = rng.uniform_array(keys, 3, rng.LOSS)
    assert u.min() >= 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 5 * math.sqrt(1 / 12 / u.size)
    v = rng.uniform_array(keys, 3, rng.CONTINUE)
    assert abs(np.corrcoef(u, v)[0, 1]) < 0.01


def test_single_round_without_loss():
    res = run_episode(ec(d=0.0, horizon=GeometricW(0.0)))
    assert (res.pi_s, res.pi_c) == pytest.approx((0.3, 0.4), abs=1e-15)
    assert res.completed and res.rounds_played == 1


def test_certain_loss_deadlocks_after_first_round():
    res = run_episode(ec(d=1.0, horizon=GeometricW(0.99)))
    assert (res.pi_s, res.pi_c) == pytest.approx((-0.18, 0.0), abs=1e-15)
    assert res.rounds_played == 1 and res.first_loss == 1 and not res.completed


@pytest.mark.parametrize("d", [0.0, 0.3])
def test_alld_client_is_served_once(d):
    for k in range(20):
        res = run_episode(ec(d=d, client=ALLD, horizon=GeometricW(0.95)), k)
        assert res.serviced == 1
        assert (res.pi_s, res.pi_c) == pytest.approx((-0.18, (1 - d) * 0.6), abs=1e-15)


def test_same_seed_same_trajectory():
    e = ec(d=0.2, client=jdef(2), seed=9)
    assert run_episode(e, 17) == run_episode(e, 17)


def test_service_rounds():
    assert service_rounds(0.0, 1.0, 1.0) == 1
    assert service_rounds(1 - math.exp(-2.5), 1.0, 1.0) == 3


@pytest.mark.parametrize("horizon", [GeometricW(0.8), ExponentialService(3.0)], ids=["geometric", "exponential"])
@pytest.mark.parametrize("d", [0.0, 0.2, 1.0])
def test_vector_engine_matches_scalar(horizon, d):
    mismatches = 0
    for client in STRATS:
        for sp in STRATS:
            e = ec(d=d, horizon=horizon, client=client, sp=sp, seed=4)
            arr = simulate_range(e, 0, 60)
            for k in range(60):
                r = run_episode(e, k)
                got = (arr.pi_s[k], arr.pi_c[k], bool(arr.completed[k]), int(arr.rounds[k]), int(arr.serviced[k]), int(arr.first_loss[k]))
                mismatches += got != (r.pi_s, r.pi_c, r.completed, r.rounds_played, r.serviced, r.first_loss)
    assert mismatches == 0


def test_batch_repeatable_and_worker_independent():
    e = ec(d=0.05, client=jdef(2), seed=123)
    one = run_batch(e, 1)
    assert one == run_batch(e, 1)
    n = 2 * BLOCK + 17
    assert run_batch(e, n, workers=1) == run_batch(e, n, workers=3)


def test_batch_rejects_empty():
    with pytest.raises(ValueError):
        run_batch(ec(), 0)


def test_chan_merge_matches_direct_moments():
    x = np.random.default_rng(0).normal(size=1000)

    def mom(a):
        return _Moments(a.size, (float(a.mean()),), (float(((a - a.mean()) ** 2).sum()),))

    m = _merge(mom(x[:313]), mom(x[313:]))
    assert m.mean[0] == pytest.approx(x.mean(), abs=1e-14)
    assert m.m2[0] == pytest.approx(((x - x.mean()) ** 2).sum(), rel=1e-12)


def test_constant_payoff_has_zero_standard_error():
    s = run_batch(ec(client=ALLD), 5000)
    assert s.se_pi_s == 0.0 and s.se_pi_c == 0.0


def test_scan_above_outage_cap_prefers_defection():
    rows = dominance_scan(ec(d=0.55, seed=3), [0.3, 0.6, 0.9], episodes=20_000)
    assert all(r.best == "ALLD" for r in rows)


def test_scan_deep_cooperation_corner():
    rows = dominance_scan(ec(d=0.001, seed=3), [0.99], episodes=20_000)
    assert [r.best for r in rows] == ["COOP", "COOP"]


def test_scan_rejects_unknown_sweep():
    with pytest.raises(ValueError):
        dominance_scan(ec(), [0.5], sweep="tau")


def test_crossing_estimate_interpolates_last_change():
    rows = [
        DominanceRow(0.1, "sp", "", {"COOP": 1.0, "ALLD": 0.0}),
        DominanceRow(0.2, "sp", "", {"COOP": 0.0, "ALLD": 1.0}),
        DominanceRow(0.3, "sp", "", {"COOP": 1.0, "ALLD": 2.0}),
        DominanceRow(0.4, "sp", "", {"COOP": 3.0, "ALLD": 2.0}),
    ]
    assert crossing_estimate(rows, "sp") == pytest.approx(0.35)
    assert crossing_estimate(rows, "client") is None


def test_episode_config_validation():
    with pytest.raises(DomainError):
        ec(d=1.5)
    with pytest.raises(DomainError):
        GeometricW(1.0)
    with pytest.raises(DomainError):
        ExponentialService(0.0)
