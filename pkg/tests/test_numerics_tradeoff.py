import math

import numpy as np
import pytest

import oracles
from trustlink.design import min_w_price_line
from trustlink.model import DomainError, Environment, SystemConfig, UtilityModel
from trustlink.numerics import adaptive_simpson
from trustlink.tradeoff import (
    cooperation_margin,
    exponential_round_pmf,
    margin_value,
    on_balanced_line,
    per_party_margins,
    service_integrity,
    service_integrity_series,
    service_loss,
    slot_window,
    tradeoff_identities,
    transmission_efficiency,
)

EXP = UtilityModel.exponential(1.0, 2.0)
LIN = UtilityModel.linear(1.0)


# quadrature

def test_simpson_is_exact_on_cubics():
    val, err = adaptive_simpson(lambda x: 4 * x**3 - x + 2, -1.0, 2.0)
    assert val == pytest.approx(15 - 1.5 + 6, abs=1e-13)
    assert err < 1e-12


def test_simpson_smooth_integral():
    val, _ = adaptive_simpson(math.sin, 0.0, math.pi, tol=1e-12)
    assert val == pytest.approx(2.0, abs=1e-11)


def test_simpson_breaks_handle_kinks():
    f = lambda x: abs(x - 0.3137)
    exact = (0.3137**2 + (1 - 0.3137) ** 2) / 2
    val, _ = adaptive_simpson(f, 0.0, 1.0, tol=1e-12, breaks=[0.3137, 5.0])
    assert val == pytest.approx(exact, abs=1e-14)


def test_simpson_empty_interval():
    assert adaptive_simpson(math.exp, 1.0, 1.0) == (0.0, 0.0)


# efficiency and integrity

def test_efficiency_values():
    assert transmission_efficiency(0.1, 1.0) == pytest.approx(0.9)
    assert transmission_efficiency(0.0, 0.3) == 1.0
    with pytest.raises(DomainError):
        transmission_efficiency(0.5, 0.5)


def test_integrity_reference():
    z = service_integrity(0.1, 1.0, 1.0)
    assert z == pytest.approx(1 - 0.1 / (1 - 0.9 * math.exp(-1)), abs=1e-15)
    assert z == pytest.approx(oracles.integrity_direct(0.1, 1.0, 1.0), abs=1e-13)
    assert z == pytest.approx(0.8505027226300376, abs=1e-13)


def test_integrity_limits():
    assert service_integrity(0.0, 0.7, 1.0) == 1.0
    assert service_integrity(0.2, 200.0, 1.0) == pytest.approx(0.8, abs=1e-15)


def test_loss_keeps_precision_for_tiny_outage():
    d = 1e-9
    # first-order expansion: loss = d / (1 - e^-1) * (1 + O(d))
    assert service_loss(d, 1.0, 1.0) == pytest.approx(d / (1 - math.exp(-1)), rel=1e-8)
    assert service_loss(0.1, 1.0, 1.0) + service_integrity(0.1, 1.0, 1.0) == 1.0


def test_integrity_series_form():
    pmf = exponential_round_pmf(0.4, 1.3, 4000)
    assert service_integrity_series(0.07, pmf) == pytest.approx(service_integrity(0.07, 0.4, 1.3), abs=1e-13)


# margins

def test_margin_reference():
    g = math.exp(-0.2)
    expected = (0.9 * math.exp(-0.5) - 0.3 / g) / (1 - 0.3 / g)
    assert margin_value(0.3, EXP, 0.1, math.exp(-0.5)) == pytest.approx(expected, abs=1e-15)
    assert expected == pytest.approx(0.2832428, abs=1e-7)


def test_margin_zero_on_boundary_and_one_at_limit():
    d = 0.1
    w = 0.3 / ((1 - d) * float(EXP(d)))
    assert margin_value(0.3, EXP, d, w) == pytest.approx(0.0, abs=1e-15)
    assert margin_value(0.3, EXP, 0.0, 1.0) == pytest.approx(1.0, abs=1e-15)


def balanced_cfg(d, tau=0.5, util=EXP):
    a, b = min_w_price_line(0.3, 1.0, util, d)
    return SystemConfig(c=0.3, p=a + b * tau, t=1.0, tau=tau, t_sc=0.05, t_ave=2.0)


def test_cooperation_margin_modes():
    cfg = balanced_cfg(0.1)
    assert on_balanced_line(cfg, EXP, 0.1)
    assert cooperation_margin(cfg, EXP, 0.1, w=0.8) == margin_value(0.3, EXP, 0.1, 0.8)
    assert cooperation_margin(cfg, EXP, 0.1, mode="exponential-service") == pytest.approx(
        margin_value(0.3, EXP, 0.1, math.exp(-0.5)), abs=1e-15
    )
    with pytest.raises(DomainError):
        cooperation_margin(cfg, EXP, 0.1)
    with pytest.raises(DomainError):
        cooperation_margin(cfg, EXP, 0.1, mode="other", w=0.5)
    with pytest.raises(DomainError, match="per_party_margins"):
        cooperation_margin(SystemConfig(c=0.3, p=0.6, t=1.0, tau=0.6), LIN, 0.01, w=0.9)


def test_per_party_reference():
    cfg = SystemConfig(c=0.3, p=0.6, t=1.0, tau=0.6)
    ms, mc = per_party_margins(cfg, LIN, Environment(0.01, 0.9))
    assert ms == pytest.approx(1 - 0.414 / (0.2952 / 0.109), abs=1e-14)


@pytest.mark.parametrize("d,w", [(0.05, 0.6), (0.1, 0.9), (0.2, 0.75)])
def test_per_party_margins_equal_on_balanced_line(d, w):
    cfg = balanced_cfg(d, tau=0.35)
    ms, mc = per_party_margins(cfg, EXP, Environment(d, w))
    assert ms == pytest.approx(mc, abs=1e-10)
    assert ms == pytest.approx(margin_value(0.3, EXP, d, w), abs=1e-10)


def test_margin_negative_below_bound():
    cfg = SystemConfig(c=0.3, p=0.6, t=1.0, tau=0.6)
    assert min(per_party_margins(cfg, LIN, Environment(0.01, 0.2))) < 0


# identities

def test_identity_reference():
    chk = tradeoff_identities(0.1, 0.5, 0.05, 1.0, 0.3, EXP)
    assert max(chk.residuals) < 1e-12


def test_identity_zero_outage():
    chk = tradeoff_identities(0.0, 0.5, 0.05, 1.0, 0.3, EXP)
    assert chk.point.zeta == 1.0
    assert max(chk.residuals) < 1e-12


def test_identity_window_errors():
    with pytest.raises(DomainError, match="transmission window violated"):
        tradeoff_identities(0.1, 0.05, 0.05, 1.0, 0.3, EXP)
    hi = slot_window(0.1, 0.05, 1.0, 0.3, EXP)[1]
    with pytest.raises(DomainError, match="margin window"):
        tradeoff_identities(0.1, hi + 0.01, 0.05, 1.0, 0.3, EXP)


def test_directions_along_slot_time():
    lo, hi = slot_window(0.1, 0.05, 1.0, 0.3, EXP)
    ts = np.linspace(lo + 1e-3, hi - 1e-3, 30)
    pts = [tradeoff_identities(0.1, t, 0.05, 1.0, 0.3, EXP).point for t in ts]
    assert all(b.eta > a.eta and b.zeta > a.zeta and b.delta_pi < a.delta_pi for a, b in zip(pts, pts[1:]))
