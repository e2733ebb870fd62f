import math

import numpy as np
import pytest

from hetnet_in.asymptotics import (
    high_sir_bounds,
    high_sir_equal_alpha,
    high_sir_objective,
    low_sir_asymptote,
    low_sir_coefficient,
    low_sir_objective,
    low_sir_outage,
    optimal_u_high,
    optimal_u_low,
)
from hetnet_in.coverage import coverage_overall, outage_overall
from hetnet_in.errors import DomainError
from hetnet_in.network import INConfig, NetworkParams, association_probabilities, db_to_linear


@pytest.mark.parametrize("U,expected", [(0, 8), (2, 8), (3, 7), (6, 4), (9, 1)])
def test_low_sir_order(fig2, U, expected):
    assert low_sir_asymptote(fig2, INConfig(U, 2.0, 2.0)).order == expected


def test_low_sir_case_rule(fig2):
    a1, a2 = association_probabilities(fig2)
    above = low_sir_asymptote(fig2, INConfig(1, 2.0, 2.0))   # N1 - U = 9 > N2
    assert above.b == pytest.approx(a2 * above.b2)
    tie = low_sir_asymptote(fig2, INConfig(2, 2.0, 2.0))     # N1 - U = N2
    assert tie.b == pytest.approx(a1 * tie.b1 + a2 * tie.b2)
    below = low_sir_asymptote(fig2, INConfig(5, 2.0, 2.0))
    assert below.b == pytest.approx(a1 * below.b1)
    assert low_sir_outage(fig2, INConfig(5, 2.0, 2.0), 1e-3) == pytest.approx(below.b * 1e-9)
    with pytest.raises(DomainError):
        low_sir_outage(fig2, INConfig(5, 2.0, 2.0), 0.0)


def test_without_requests_macro_order_is_full(fig2):
    # T = 1 means no requests, so no DoF is spent on nulling.
    assert low_sir_asymptote(fig2, INConfig(5, 1.0, 1.0)).order1 == fig2.N1


@pytest.mark.parametrize("U", [0, 4, 7])
def test_low_sir_asymptote_is_approached(fig2, U):
    cfg = INConfig(U, 2.0, 2.0)
    asym = low_sir_asymptote(fig2, cfg)
    ratios = []
    for beta_db in (-30.0, -40.0):
        b = float(db_to_linear(beta_db))
        ratios.append(outage_overall(fig2, cfg, b).value / asym.outage(b))
    assert abs(ratios[1] - 1) < abs(ratios[0] - 1) + 1e-3
    assert ratios[1] == pytest.approx(1.0, abs=0.05)


def test_low_sir_coefficient_is_positive_and_objective_shape(fig2):
    assert low_sir_coefficient(fig2, INConfig(3, 2.0, 2.0), 1) > 0
    table = low_sir_objective(fig2, 2.0, 2.0, 1e-3)
    assert table.shape == (fig2.N1,)
    assert int(np.argmin(table)) in (fig2.N1 - fig2.N2 - 1, fig2.N1 - fig2.N2)


def test_optimal_u_low_candidates(small_net):
    assert optimal_u_low(small_net, 1.8, 1.8) in (1, 2)
    tight = NetworkParams(N1=3, N2=2)
    assert optimal_u_low(tight, 2.0, 2.0) in (0, 1)


def test_equal_alpha_high_sir_limit():
    p = NetworkParams(alpha1=4.0, alpha2=4.0)
    cfg = INConfig(5, 2.0, 2.0)
    asym = high_sir_equal_alpha(p, cfg)
    b = float(db_to_linear(45.0))
    assert coverage_overall(p, cfg, b).value / asym.coverage(b) == pytest.approx(1.0, abs=0.02)
    assert asym.order_upper == -0.5
    with pytest.raises(DomainError):
        asym.bounds(b)
    with pytest.raises(DomainError):
        high_sir_bounds(p, cfg)


def test_unequal_alpha_sandwich_and_labels():
    p = NetworkParams(alpha1=4.0, alpha2=3.5)
    asym = high_sir_bounds(p, INConfig(3, 2.0, 2.0))
    assert asym.c_ub == asym.eta1 and asym.c_lb == asym.xi1
    assert asym.order_upper == pytest.approx(-0.5) and asym.order_lower == pytest.approx(-2 / 3.5)
    b = float(db_to_linear(35.0))
    lo, hi = asym.bounds(b)
    assert lo < coverage_overall(p, INConfig(3, 2.0, 2.0), b).value < hi
    with pytest.raises(DomainError):
        asym.coverage(b)
    with pytest.raises(DomainError):
        high_sir_equal_alpha(p, INConfig(3, 2.0, 2.0))
    flipped = high_sir_bounds(NetworkParams(alpha1=3.5, alpha2=4.0), INConfig(3, 2.0, 2.0))
    assert flipped.c_ub == flipped.eta2 and flipped.c_lb == flipped.xi2


def test_high_sir_optimizer(small_net):
    obj = high_sir_objective(small_net, 2.0, 2.0)
    assert np.all(np.diff(obj) < 0)
    assert optimal_u_high(small_net, 2.0, 2.0) == 0
    mixed = NetworkParams(alpha1=4.0, alpha2=3.5)
    assert optimal_u_high(mixed, 4.0, 4.0) == 0
