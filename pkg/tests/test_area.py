import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import brentq

from trustlink.area import (
    DOMINANT,
    ROOT_SIGNS,
    area_grid,
    case_label,
    classify_case,
    coop_area,
    crossing_points,
    maximize_area,
    case_peak_candidates,
    riemann_area,
    root_sign_pattern,
    stationarity_residual,
)
from trustlink.model import DomainError, SystemConfig, UtilityModel

LIN = UtilityModel.linear(1.0)


def cfg_at(tau, p, c=0.3):
    return SystemConfig(c=c, p=p, t=1.0, tau=tau)


@pytest.mark.parametrize("tau,p,label", [(0.3, 0.5, "I"), (0.65, 0.53, "IV"), (0.5, 0.55, "V")])
def test_case_examples(tau, p, label):
    case = classify_case(cfg_at(tau, p), LIN)
    assert case.label == label
    assert case.dominant == DOMINANT[label]


def test_classify_preconditions():
    with pytest.raises(DomainError):
        classify_case(cfg_at(0.5, 0.3), LIN)
    with pytest.raises(DomainError):
        classify_case(cfg_at(0.5, 0.6), UtilityModel.exponential(1.0, 2.0))


def test_labels_agree_with_root_signs_on_coarse_grid():
    for tau in (np.arange(100) + 0.5) / 100:
        for p in 0.3 + 0.7 * (np.arange(100) + 0.5) / 100:
            label = case_label(tau, p, 0.3, 1.0)
            pattern = root_sign_pattern(cfg_at(tau, p), LIN)
            if label == "I":
                assert pattern is None
            else:
                assert all(a == 0 or a == b for a, b in zip(pattern, ROOT_SIGNS[label]))


def test_area_matches_riemann_reference():
    cfg = cfg_at(0.65, 0.53)
    assert abs(coop_area(cfg, LIN).area - riemann_area(cfg, LIN)) < 1e-6


def test_area_matches_scipy_split_quadrature():
    rng = np.random.default_rng(11)
    for _ in range(25):
        tau, p = rng.uniform(0.02, 0.98), rng.uniform(0.31, 0.99)
        cfg = cfg_at(tau, p)
        res = coop_area(cfg, LIN)
        w1, w2 = crossing_points(cfg, LIN)
        pts = [x for x in (w1, w2) if not math.isnan(x) and 0 < x < 1]

        def f(w):
            q = 1 - (1 - w) * tau
            return max(min(1 - 0.3 * q / (w * p), 1 - p / q), 0.0)

        ref = quad(f, 1e-12, 1.0, points=pts or None, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
        assert abs(res.area - ref) < 1e-8


def test_area_vanishes_as_price_approaches_cost():
    assert coop_area(cfg_at(0.5, 0.3 + 1e-4), LIN).area < 1e-4
    assert coop_area(cfg_at(0.5, 0.3), LIN).area == 0.0


def test_nonlinear_area_matches_riemann():
    util = UtilityModel.exponential(1.0, 2.0)
    cfg = cfg_at(0.6, 0.5)
    res = coop_area(cfg, util)
    assert res.case is None
    assert abs(res.area - riemann_area(cfg, util)) < 1e-6


def test_vectorised_grid_matches_adaptive():
    taus, ps = [0.1, 0.45, 0.8], [0.35, 0.53, 0.9]
    grid = area_grid(taus, ps, 0.3, 1.0, 1.0)
    for i, tau in enumerate(taus):
        for k, p in enumerate(ps):
            assert grid[i, k] == pytest.approx(coop_area(cfg_at(tau, p), LIN).area, abs=1e-9)


def test_closed_form_candidates():
    cand = case_peak_candidates(0.3, 1.0, 1.0)
    assert cand["II"] == pytest.approx((0.5, math.sqrt(0.3)), abs=1e-14)
    assert cand["III"] == pytest.approx((1 / 1.3, 0.6 / 1.3), abs=1e-14)
    assert cand["VII"] == pytest.approx(((1 - math.sqrt(0.3)) / 0.7, math.sqrt(0.3)), abs=1e-14)


@pytest.mark.parametrize("label", ["II", "III", "VII"])
def test_candidates_are_local_maxima_within_their_case(label):
    tau, p = case_peak_candidates(0.3, 1.0, 1.0)[label]
    base = coop_area(cfg_at(tau, p), LIN).area
    rng = np.random.default_rng(5)
    checked = 0
    while checked < 40:
        t2, p2 = tau + rng.uniform(-0.03, 0.03), p + rng.uniform(-0.03, 0.03)
        if case_label(t2, p2, 0.3, 1.0) != label:
            continue
        checked += 1
        assert coop_area(cfg_at(t2, p2), LIN).area <= base + 1e-12


def test_maximize_reaches_case_four():
    opt = maximize_area(0.3, 1.0, LIN, grid=100)
    assert opt.case.label == "IV"
    assert opt.certified and opt.warning is None
    for tau, p in case_peak_candidates(0.3, 1.0, 1.0).values():
        assert opt.area >= coop_area(cfg_at(tau, p), LIN).area


def test_maximize_budget_warning():
    opt = maximize_area(0.3, 1.0, LIN, grid=20, budget=3)
    assert opt.warning is not None and "budget" in opt.warning


def _dA_dp(tau, p, h=1e-5):
    return (coop_area(cfg_at(tau, p + h), LIN, tol=1e-13).area - coop_area(cfg_at(tau, p - h), LIN, tol=1e-13).area) / (2 * h)


def test_stationary_point_in_case_five():
    tau = 0.04
    p = brentq(lambda x: _dA_dp(tau, x), 0.6, 0.7, xtol=1e-10)
    cfg = cfg_at(tau, p)
    assert classify_case(cfg, LIN).label == "V"
    assert stationarity_residual(cfg, LIN) < 1e-6


@pytest.mark.parametrize("tau,p,sign", [(0.04, 0.62, 1.0), (0.04, 0.68, 1.0), (0.74, 0.49, -1.0), (0.74, 0.53, -1.0)])
def test_residual_sign_tracks_price_derivative(tau, p, sign):
    cfg = cfg_at(tau, p)
    assert classify_case(cfg, LIN).label == ("V" if sign > 0 else "VI")
    res = stationarity_residual(cfg, LIN, signed=True)
    deriv = _dA_dp(tau, p)
    assert res == pytest.approx(sign * p * deriv, rel=1e-4, abs=1e-9)


def test_residual_rejects_other_cases():
    with pytest.raises(DomainError, match="Case V or VI"):
        stationarity_residual(cfg_at(0.65, 0.53), LIN)
