import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from hetnet_in.errors import ConfigError, DomainError
from hetnet_in.montecarlo import association_frequency
from hetnet_in.network import (
    INConfig,
    NetworkParams,
    association_probabilities,
    check_config,
    db_to_linear,
    in_probability,
    k0_pmf,
    linear_to_db,
    mean_in_requests,
    mean_in_requests_double_integral,
    poisson_truncation,
    serving_distance_moment,
    serving_distance_pdf,
    u_in_distribution,
    u_in_pmf,
)

# Frozen reference values at the default parameters, obtained from the
# literal r-then-y double integral and a direct Poisson expectation.
A1_REF = 0.7419868
LBAR_T2_REF = 0.7888866
PC_U5_T2_REF = 0.99976


def test_db_conversions_round_trip():
    assert db_to_linear(10.0) == pytest.approx(10.0)
    assert linear_to_db(db_to_linear(-7.5)) == pytest.approx(-7.5)


def test_invalid_params_report_every_problem():
    with pytest.raises(ConfigError) as err:
        NetworkParams(lambda1=0.0, alpha2=2.0, N1=4, N2=4)
    msgs = err.value.messages
    assert "lambda1 must be strictly positive" in msgs
    assert "alpha2: path-loss exponents must exceed 2" in msgs
    assert "N1 must exceed N2" in msgs


def test_in_config_validation():
    with pytest.raises(ConfigError, match="thresholds must be ≥ 1"):
        INConfig(1, T1=0.5)
    with pytest.raises(ConfigError, match="non-negative integer"):
        INConfig(-1)
    with pytest.raises(ConfigError, match="U must be ≤ N₁−1"):
        check_config(NetworkParams(), INConfig(10))
    check_config(NetworkParams(), INConfig(9))


def test_power_ratio_constructor():
    p = NetworkParams.from_power_ratio_db(15.0)
    assert p.power_ratio == pytest.approx(10**1.5)
    with pytest.raises(DomainError):
        p.tier(3)


def test_association_sums_to_one_and_frozen_value(fig2):
    a1, a2 = association_probabilities(fig2)
    assert a1 + a2 == pytest.approx(1.0, abs=1e-12)
    assert a1 == pytest.approx(A1_REF, abs=2e-7)


@settings(max_examples=25, deadline=None)
@given(
    st.floats(min_value=1e-4, max_value=5e-3),
    st.floats(min_value=1e-4, max_value=5e-3),
    st.floats(min_value=0.0, max_value=25.0),
    st.floats(min_value=2.5, max_value=5.0),
)
def test_equal_alpha_association_closed_form(lam1, lam2, ratio_db, alpha):
    p = NetworkParams(lambda1=lam1, lambda2=lam2, P1=float(db_to_linear(ratio_db)),
                      alpha1=alpha, alpha2=alpha)
    ratio = float(db_to_linear(ratio_db))
    expected = lam1 / (lam1 + lam2 * ratio ** (-2.0 / alpha))
    assert association_probabilities(p)[0] == pytest.approx(expected, rel=1e-9)


def test_association_against_simulation(fig2):
    n = 6000
    freq = association_frequency(fig2, n, seed=11)
    a1 = association_probabilities(fig2)[0]
    assert abs(freq - a1) < 4 * math.sqrt(a1 * (1 - a1) / n)


@pytest.mark.parametrize("tier", [1, 2])
def test_serving_distance_pdf_normalized(fig2, tier):
    total = integrate.quad(lambda y: serving_distance_pdf(fig2, tier, y), 0, np.inf, limit=200)[0]
    assert total == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(DomainError):
        serving_distance_pdf(fig2, tier, -1.0)


@pytest.mark.parametrize("tier,power", [(1, 2.0), (2, 2.0), (1, 9.4), (2, 4.0 * 4.7 / 4.5), (1, 30.0)])
def test_serving_distance_moment_against_direct_quadrature(fig2, tier, power):
    direct = integrate.quad(lambda y: y**power * serving_distance_pdf(fig2, tier, y), 0, np.inf,
                            limit=400, epsrel=1e-12)[0]
    assert serving_distance_moment(fig2, tier, power) == pytest.approx(direct, rel=1e-8)


@pytest.mark.parametrize("T1,T2", [(2.0, 2.0), (4.0, 1.5), (1.0, 3.0)])
def test_mean_requests_two_routes_agree(fig2, T1, T2):
    fast = mean_in_requests(fig2, T1, T2)
    slow = mean_in_requests_double_integral(fig2, T1, T2)
    assert fast[0] == pytest.approx(slow[0], rel=1e-8)
    assert fast[1] == pytest.approx(slow[1], rel=1e-8, abs=1e-14)
    assert fast[2] == pytest.approx(slow[2], rel=1e-8, abs=1e-14)


def test_mean_requests_frozen_and_monotone(fig2):
    assert mean_in_requests(fig2, 2.0, 2.0)[0] == pytest.approx(LBAR_T2_REF, abs=2e-7)
    assert mean_in_requests(fig2, 1.0, 1.0)[0] == 0.0
    values = [mean_in_requests(fig2, t, t)[0] for t in (1.0, 1.5, 2.0, 4.0, 8.0)]
    assert all(b > a for a, b in zip(values, values[1:]))
    with pytest.raises(DomainError):
        mean_in_requests(fig2, 0.5, 2.0)


def test_poisson_truncation_tail_is_negligible():
    for mean in (0.0, 0.3, 5.0, 40.0):
        kmax = poisson_truncation(mean)
        assert stats.poisson.sf(kmax - 1, mean) < 1e-12 if mean else kmax > 0


def test_request_pmf_and_u_distribution(fig2):
    cfg = INConfig(5, 2.0, 2.0)
    mean = mean_in_requests(fig2, 2.0, 2.0)[0]
    for k in range(6):
        assert k0_pmf(fig2, 2.0, 2.0, k) == pytest.approx(stats.poisson.pmf(k, mean), rel=1e-12)
    dist = u_in_distribution(fig2, cfg)
    assert dist.sum() == pytest.approx(1.0, abs=1e-13)
    assert dist[5] == pytest.approx(stats.poisson.sf(4, mean), rel=1e-9)
    assert u_in_pmf(fig2, cfg, 2) == pytest.approx(dist[2])
    with pytest.raises(DomainError):
        u_in_pmf(fig2, cfg, 6)
    with pytest.raises(DomainError):
        k0_pmf(fig2, 2.0, 2.0, -1)


def pc_oracle(mean, U):
    """E[min(1, U/(K+1))], K ~ Poisson(mean): chance the typical requester is selected."""
    k = np.arange(0, 400)
    return float(np.sum(stats.poisson.pmf(k, mean) * np.minimum(1.0, U / (k + 1.0))))


@pytest.mark.parametrize("U,T", [(1, 2.0), (5, 2.0), (3, 6.0), (9, 4.0)])
def test_in_probability_against_expectation(fig2, U, T):
    mean = mean_in_requests(fig2, T, T)[0]
    pc, pcbar = in_probability(fig2, INConfig(U, T, T))
    assert pc == pytest.approx(pc_oracle(mean, U), rel=1e-11)
    assert pc + pcbar == 1.0


def test_in_probability_edge_values(fig2):
    assert in_probability(fig2, INConfig(0, 3.0, 3.0)) == (0.0, 1.0)
    assert in_probability(fig2, INConfig(4, 1.0, 1.0)) == (1.0, 0.0)
    assert in_probability(fig2, INConfig(5, 2.0, 2.0))[0] == pytest.approx(PC_U5_T2_REF, abs=1e-5)
