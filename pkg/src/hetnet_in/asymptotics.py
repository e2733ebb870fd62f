"""Low- and high-SIR asymptotics of the coverage probability and the optimal U.

Low SIR: outage ≈ b·β^d with d = min(N1 − U, N2) (order gain) and b built
from serving-distance moments. High SIR: coverage ≈ c·β^{-2/α} for equal
path-loss exponents, otherwise sandwiched between two power laws.
"""

from dataclasses import dataclass
import math
from typing import Optional

import numpy as np
from scipy import special as sps

from . import special
from .errors import ConsistencyError, DomainError
from .network import (
    INConfig,
    association_probabilities,
    check_config,
    in_probability,
    mean_in_requests,
    serving_distance_moment,
    u_in_distribution,
    u_in_pmf,
)


@dataclass(frozen=True)
class LowSirAsymptote:
    order: int
    b: float
    b1: float
    b2: float
    order1: int
    order2: int

    def outage(self, beta):
        return self.b * beta**self.order


@dataclass(frozen=True)
class HighSirAsymptote:
    regime: str
    order_upper: float
    order_lower: float
    c1: Optional[float] = None
    c2: Optional[float] = None
    coefficient: Optional[float] = None
    eta1: Optional[float] = None
    eta2: Optional[float] = None
    xi1: Optional[float] = None
    xi2: Optional[float] = None
    c_ub: Optional[float] = None
    c_lb: Optional[float] = None

    def coverage(self, beta):
        """Equal-α asymptote coefficient·β^{-2/α}."""
        if self.regime != "equal-alpha":
            raise DomainError("single asymptote only exists for equal path-loss exponents")
        return self.coefficient * beta**self.order_upper

    def bounds(self, beta):
        """(lower, upper) power-law bounds for unequal path-loss exponents."""
        if self.regime != "unequal-alpha":
            raise DomainError("bounds are defined for unequal path-loss exponents")
        return self.c_lb * beta**self.order_lower, self.c_ub * beta**self.order_upper


def _macro_nulling_branch(params, cfg):
    """(U_1, 𝒫_1) for the macro tier.

    The lowest macro DoF N1 − U occurs with probability Pr(u_IN = U), which is
    positive exactly when a macro-BS can receive requests (mean request count
    L̄ > 0). Otherwise no DoF is ever spent on nulling.
    """
    if cfg.U > 0 and mean_in_requests(params, cfg.T1, cfg.T2)[0] > 0:
        return int(cfg.U), u_in_pmf(params, cfg, cfg.U)
    return 0, 1.0


def _partition_power_sum(counts, base_of_order):
    """Σ_a m_a·log(base_a) - Σ_a log(m_a!) for one multiplicity vector."""
    out = 0.0
    for a, m in enumerate(counts, start=1):
        if m:
            base = base_of_order(a)
            if base == 0.0:
                return -math.inf
            out += m * math.log(base) - math.lgamma(m + 1)
    return out


def low_sir_coefficient(params, cfg, tier):
    """b_j: coefficient of the tier-j outage β^{N_j − U_j} as β → 0."""
    check_config(params, cfg)
    lam_j, a_j, n_j, p_j = params.tier(tier)
    if tier == 1:
        u_j, prob_j = _macro_nulling_branch(params, cfg)
    else:
        u_j, prob_j = 0, 1.0
    T_j = cfg.threshold(tier)
    pcbar = in_probability(params, cfg)[1]
    d1 = 2.0 / params.alpha1
    d2 = 2.0 / params.alpha2
    macro_base = lambda a: d1 * math.pi * params.lambda1 / (a - d1) * (params.P1 / p_j) ** d1
    pico_base = lambda a: d2 * math.pi * params.lambda2 / (a - d2) * (params.P2 / p_j) ** d2
    nulled_base = lambda a: macro_base(a) * pcbar * (1.0 - (1.0 / T_j) ** (a - d1))
    outer_base = lambda a: macro_base(a) * (1.0 / T_j) ** (a - d1)
    macro_exp = 2.0 * a_j / params.alpha1
    pico_exp = 2.0 * a_j / params.alpha2

    total = []
    for n1, n2, n3 in special.enumerate_compositions3(n_j - u_j):
        blocks_m = [(sum(m), _partition_power_sum(m, nulled_base))
                    for m in special.enumerate_partitions(n1)]
        blocks_p = [(sum(p), _partition_power_sum(p, outer_base))
                    for p in special.enumerate_partitions(n2)]
        blocks_q = [(sum(q), _partition_power_sum(q, pico_base))
                    for q in special.enumerate_partitions(n3)]
        for size_m, log_m in blocks_m:
            if log_m == -math.inf:
                continue
            for size_p, log_p in blocks_p:
                for size_q, log_q in blocks_q:
                    power = macro_exp * (size_m + size_p) + pico_exp * size_q
                    moment = serving_distance_moment(params, tier, power)
                    total.append(moment * math.exp(log_m + log_p + log_q))
    return prob_j * math.fsum(total)


def low_sir_asymptote(params, cfg):
    """Order gain and coefficient of the overall outage as β → 0."""
    a1, a2 = association_probabilities(params)
    b1 = low_sir_coefficient(params, cfg, 1)
    b2 = low_sir_coefficient(params, cfg, 2)
    u_eff = _macro_nulling_branch(params, cfg)[0]
    order1 = params.N1 - u_eff
    order2 = params.N2
    if order1 > order2:
        b = a2 * b2
    elif order1 == order2:
        b = a1 * b1 + a2 * b2
    else:
        b = a1 * b1
    return LowSirAsymptote(min(order1, order2), b, b1, b2, order1, order2)


def low_sir_outage(params, cfg, beta):
    """b·β^{min(N1 − U, N2)}."""
    if not beta > 0:
        raise DomainError("beta must be positive")
    return low_sir_asymptote(params, cfg).outage(beta)


def low_sir_objective(params, T1, T2, beta):
    """Asymptotic outage b(U)·β^{d(U)} for every U in 0..N1−1 (audit table)."""
    return np.array([low_sir_outage(params, INConfig(U, T1, T2), beta) for U in range(params.N1)])


def optimal_u_low(params, T1, T2):
    """Asymptotically optimal U as β → 0: one of N1 − N2 − 1 and N1 − N2."""
    a1, a2 = association_probabilities(params)
    top = params.N1 - 1
    lower = min(max(params.N1 - params.N2 - 1, 0), top)
    upper = min(max(params.N1 - params.N2, 0), top)
    if lower == upper:
        return lower
    b_lower = low_sir_coefficient(params, INConfig(lower, T1, T2), 2)
    cfg_upper = INConfig(upper, T1, T2)
    b_upper = a1 * low_sir_coefficient(params, cfg_upper, 1) + a2 * low_sir_coefficient(
        params, cfg_upper, 2
    )
    return lower if a2 * b_lower < b_upper else upper


def _high_sir_series(orders, weights, own_base, cross_base, own_power, cross_power, denom):
    """Σ_u w_u Σ_{n<M_u} (1/n!) Σ_{n2} C(n,n2) Σ_p Σ_q [...] denom^{-k-1} Γ(k+1).

    ``own_base(a)`` and ``cross_base(a)`` are the per-order factors of the p-
    and q-partitions; k = own_power·Σp + cross_power·Σq.
    """
    per_order = {}
    max_order = int(max(orders))
    for n in range(max_order):
        acc = []
        for n2 in range(n + 1):
            binom = math.comb(n, n2)
            for p in special.enumerate_partitions(n2):
                log_p = math.lgamma(n2 + 1) + _partition_power_sum(p, own_base)
                for q in special.enumerate_partitions(n - n2):
                    log_q = math.lgamma(n - n2 + 1) + _partition_power_sum(q, cross_base)
                    k = own_power * sum(p) + cross_power * sum(q)
                    log_tail = -(k + 1.0) * math.log(denom) + math.lgamma(k + 1.0)
                    acc.append(binom * math.exp(log_p + log_q + log_tail - math.lgamma(n + 1)))
        per_order[n] = math.fsum(acc)
    total = []
    for M, w in zip(orders, weights):
        total.append(w * math.fsum(per_order[n] for n in range(int(M))))
    return math.fsum(total)


def _macro_weights(params, cfg):
    weights = u_in_distribution(params, cfg)
    return params.N1 - np.arange(len(weights)), weights


def high_sir_bounds(params, cfg):
    """Power-law sandwich of the high-SIR coverage when α1 ≠ α2."""
    check_config(params, cfg)
    a1, a2 = params.alpha1, params.alpha2
    if a1 == a2:
        raise DomainError("high_sir_bounds requires alpha1 != alpha2")
    lam1, lam2 = params.lambda1, params.lambda2
    d1, d2 = 2.0 / a1, 2.0 / a2
    ratio = params.P1 / params.P2
    A1, A2 = association_probabilities(params)
    macro_b = lambda a: 2.0 * math.pi / a1 * lam1 * sps.beta(1.0 + d1, a - d1)
    pico_b = lambda a: 2.0 * math.pi / a2 * lam2 * sps.beta(1.0 + d2, a - d2)
    core1 = 2.0 * math.pi * lam1 / a1 * sps.beta(d1, 1.0 - d1)
    core2 = 2.0 * math.pi * lam2 / a2 * sps.beta(d2, 1.0 - d2)

    orders, weights = _macro_weights(params, cfg)
    eta1 = math.pi * lam1 / A1 * _high_sir_series(
        orders, weights, macro_b, lambda a: pico_b(a) * ratio ** (-d2), 1.0, a1 / a2, core1
    )
    eta2 = math.pi * lam2 / A2 * _high_sir_series(
        [params.N2], [1.0], lambda a: macro_b(a) * ratio**d1, pico_b, a2 / a1, 1.0, core2
    )
    a_max, a_min = max(a1, a2), min(a1, a2)
    xi1 = (math.pi * lam1 * a_max / (A1 * a1)
           * (core1 + core2 * ratio ** (-d2)) ** (-a_max / a1) * math.gamma(a_max / a1))
    xi2 = (math.pi * lam2 * a_max / (A2 * a2)
           * (core1 * ratio**d1 + core2) ** (-a_max / a2) * math.gamma(a_max / a2))
    c_ub, c_lb = (eta1, xi1) if a1 > a2 else (eta2, xi2)
    out = HighSirAsymptote("unequal-alpha", -2.0 / a_max, -2.0 / a_min, eta1=eta1, eta2=eta2,
                           xi1=xi1, xi2=xi2, c_ub=c_ub, c_lb=c_lb)
    if min(eta1, eta2, xi1, xi2) <= 0:
        raise ConsistencyError("high-SIR coefficients must be positive")
    return out


def high_sir_equal_alpha(params, cfg):
    """Coverage ≈ (A1·c1 + A2·c2)·β^{-2/α} as β → ∞ when α1 = α2 = α."""
    check_config(params, cfg)
    if params.alpha1 != params.alpha2:
        raise DomainError("high_sir_equal_alpha requires alpha1 == alpha2")
    alpha = params.alpha1
    lam1, lam2 = params.lambda1, params.lambda2
    d = 2.0 / alpha
    ratio = params.P1 / params.P2
    A1, A2 = association_probabilities(params)
    shape = lambda a: 2.0 * math.pi / alpha * sps.beta(1.0 + d, a - d)
    core = 2.0 * math.pi / alpha * sps.beta(d, 1.0 - d)

    orders, weights = _macro_weights(params, cfg)
    c1 = math.pi * lam1 / A1 * _high_sir_series(
        orders, weights, lambda a: lam1 * shape(a), lambda a: lam2 * ratio ** (-d) * shape(a),
        1.0, 1.0, core * (lam1 + lam2 * ratio ** (-d)),
    )
    c2 = math.pi * lam2 / A2 * _high_sir_series(
        [params.N2], [1.0], lambda a: lam1 * ratio**d * shape(a), lambda a: lam2 * shape(a),
        1.0, 1.0, core * (lam1 * ratio**d + lam2),
    )
    if min(c1, c2) <= 0:
        raise ConsistencyError("high-SIR coefficients must be positive")
    return HighSirAsymptote("equal-alpha", -d, -d, c1=c1, c2=c2, coefficient=A1 * c1 + A2 * c2)


def high_sir_objective(params, T1, T2):
    """c^{ub}(U) (unequal α) or c1(U) (equal α) for U = 0..N1−1."""
    out = []
    for U in range(params.N1):
        cfg = INConfig(U, T1, T2)
        if params.alpha1 == params.alpha2:
            out.append(high_sir_equal_alpha(params, cfg).c1)
        else:
            out.append(high_sir_bounds(params, cfg).c_ub)
    return np.array(out)


def optimal_u_high(params, T1, T2):
    """Asymptotically optimal U as β → ∞; always 0."""
    objective = high_sir_objective(params, T1, T2)
    best = int(np.argmax(objective))
    if best != 0:
        raise ConsistencyError(f"high-SIR objective maximized at U={best}, expected 0")
    return best
