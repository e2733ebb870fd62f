"""Analytical SIR coverage of macro users, pico users and the whole network.

The conditional coverage given the serving distance y is a finite sum of
Poisson-mixture-like terms T_n(y) built from three Laplace-transform factors
(non-selecting potential-IN macro-BSs, other macro-BSs, pico-BSs). Every
incomplete-beta argument in those factors turns out to be independent of y,
so the factors are prepared once per (tier, β) and then only rescaled by
powers of y inside the quadrature.
"""

from dataclasses import dataclass, field
import math
from typing import Optional

import numpy as np
from scipy import integrate, optimize

from . import special
from .errors import ConsistencyError, DomainError, IntegrationError
from .network import (
    INConfig,
    NetworkParams,
    _association,
    _other_tier_coefficient,
    association_probabilities,
    check_config,
    density_cut,
    in_probability,
    u_in_distribution,
)

# Number of tail terms prepared for the outage recursion.
TAIL_TERMS = 240
# Below this outage level the head sum is replaced by a direct tail sum.
TAIL_SWITCH = 1e-3


@dataclass(frozen=True)
class CoverageResult:
    value: float
    method: str
    beta: float
    cfg: Optional[INConfig] = None
    stderr: Optional[float] = None
    tier: str = "overall"
    quantity: str = "coverage"
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not (0.0 <= self.value <= 1.0 or self.method.startswith("asymptotic")):
            raise ConsistencyError(f"probability {self.value!r} outside [0, 1]")
        if (self.stderr is not None) != (self.method == "monte-carlo"):
            raise ConsistencyError("stderr must be present exactly for Monte Carlo results")


@dataclass(frozen=True)
class SirIntegrandLimits:
    """Distance limits of the three interference regions for serving distance y."""

    r_1c: float
    r_1o: float
    r_2: float


def integrand_limits(params, cfg, tier, y):
    """Inner radii of the nulling annulus, the macro tail and the pico tail."""
    ratio = params.P1 / params.P2
    a1, a2 = params.alpha1, params.alpha2
    if tier == 1:
        return SirIntegrandLimits(
            y, cfg.T1 ** (1.0 / a1) * y, (1.0 / ratio) ** (1.0 / a2) * y ** (a1 / a2)
        )
    if tier == 2:
        scale = y ** (a2 / a1)
        return SirIntegrandLimits(
            ratio ** (1.0 / a1) * scale, (ratio * cfg.T2) ** (1.0 / a1) * scale, y
        )
    raise DomainError(f"tier must be 1 or 2, got {tier!r}")


def laplace_arguments(params, tier, beta, y):
    """(s for macro interferers, s for pico interferers) at serving distance y."""
    ratio = params.P1 / params.P2
    if tier == 1:
        s_macro = beta * y**params.alpha1
        return s_macro, s_macro / ratio
    s_pico = beta * y**params.alpha2
    return s_pico * ratio, s_pico


def _annulus_series(density, alpha, s, r_in, r_out, n_terms):
    """Exponent and Faà di Bruno coefficients for a PPP on the annulus [r_in, r_out).

    Returns ``(exponent, coeffs)`` with ``coeffs[a-1]`` the coefficient of
    order a, so that L(s) = exp(-exponent) and the normalized derivatives
    follow from :func:`normalized_derivative`. ``r_out = inf`` gives the tail.
    """
    if not (s > 0 and r_in > 0 and r_out >= r_in):
        raise DomainError(f"need s > 0 and 0 < r_in <= r_out, got s={s}, r=({r_in}, {r_out})")
    delta = 2.0 / alpha
    scale = 2.0 * math.pi * density / alpha * s**delta
    x_in = s * r_in ** (-alpha)
    z_in, w_in = 1.0 / (1.0 + x_in), x_in / (1.0 + x_in)
    if math.isinf(r_out):
        z_out, w_out = 1.0, 0.0
    else:
        x_out = s * r_out ** (-alpha)
        z_out, w_out = 1.0 / (1.0 + x_out), x_out / (1.0 + x_out)
    if z_out == z_in or scale == 0.0:
        return 0.0, np.zeros(n_terms)
    orders = np.arange(1, n_terms + 1, dtype=float)
    exponent = scale * float(special.beta_window(delta, 1.0 - delta, z_in, z_out, w_in, w_out))
    coeffs = scale * special.beta_window(1.0 + delta, orders - delta, z_in, z_out, w_in, w_out)
    if exponent < 0 or np.any(coeffs < 0):
        raise ConsistencyError("negative Laplace-series coefficient")
    return exponent, np.atleast_1d(coeffs)


def normalized_derivative(exponent, coeffs, n):
    """L̃^(n) = exp(-exponent)·Σ_{m∈M_n} n!/∏m_a! ∏ coeffs_a^{m_a}.

    Terms are non-negative and accumulated with compensated summation.
    """
    if n == 0:
        return math.exp(-exponent)
    terms = []
    log_n = math.lgamma(n + 1)
    for counts in special.enumerate_partitions(n):
        log_term = log_n
        for a, m in enumerate(counts, start=1):
            if m:
                c = coeffs[a - 1]
                if c == 0.0:
                    log_term = -math.inf
                    break
                log_term += m * math.log(c) - math.lgamma(m + 1)
        terms.append(math.exp(log_term - exponent))
    return math.fsum(terms)


def laplace_deriv_nulled(params, cfg, n, s, r_1c, r_1o):
    """Normalized n-th derivative of the Laplace transform of the residual
    interference from potential-IN macro-BSs in [r_1c, r_1o) that did not
    select the typical user (density p̄_c·λ1)."""
    if n < 0 or int(n) != n:
        raise DomainError("derivative order must be a non-negative integer")
    if r_1c > r_1o:
        raise DomainError("nulling annulus requires r_1c <= r_1o")
    pcbar = in_probability(params, cfg)[1]
    exponent, coeffs = _annulus_series(
        pcbar * params.lambda1, params.alpha1, s, r_1c, r_1o, max(int(n), 1)
    )
    return normalized_derivative(exponent, coeffs, int(n))


def laplace_deriv_tail(params, tier_of_interferer, n, s, r):
    """Normalized n-th derivative of the Laplace transform of interference from
    all tier-``tier_of_interferer`` BSs beyond distance r."""
    if n < 0 or int(n) != n:
        raise DomainError("derivative order must be a non-negative integer")
    density, alpha = params.tier(tier_of_interferer)[:2]
    exponent, coeffs = _annulus_series(density, alpha, s, r, math.inf, max(int(n), 1))
    return normalized_derivative(exponent, coeffs, int(n))


class _Factor:
    """One Laplace factor rescaled in y: exponent·y^power, coeffs·y^power."""

    def __init__(self, exponent, coeffs, power, n_head):
        self.exponent = exponent
        self.coeffs = coeffs
        self.power = power
        # size_weights[n, k] = Σ over partitions of n with k parts of ∏ c_a^{m_a}/m_a!
        self.size_weights = np.zeros((n_head, n_head))
        self.size_weights[0, 0] = 1.0
        for n in range(1, n_head):
            counts, sizes, log_fact = special.partition_arrays(n)
            prods = np.prod(coeffs[:n] ** counts, axis=1) * np.exp(-log_fact)
            np.add.at(self.size_weights[n], sizes, prods)


class TierKernel:
    """Conditional coverage machinery for one tier at one SIR threshold.

    ``heads(t)`` returns the partial sums H_M(y) = Σ_{n<M} T_n(y) for
    M = 1..n_head at y² = t/(πλ_j); ``tail(t, M)`` returns Σ_{n≥M} T_n(y)
    without forming 1 - H_M.
    """

    def __init__(self, params, cfg, tier, beta, n_head, n_tail=0):
        if not beta > 0:
            raise DomainError("beta must be positive")
        self.tier = tier
        self.n_head = n_head
        lam_j = params.tier(tier)[0]
        self.t_to_y2 = 1.0 / (math.pi * lam_j)
        self.kappa, self.kappa_power = _other_tier_coefficient(params, tier)
        self.area = _association(params, tier)
        pcbar = in_probability(params, cfg)[1]
        n_coef = max(n_head, n_tail, 1)
        limits = integrand_limits(params, cfg, tier, 1.0)
        s_macro, s_pico = laplace_arguments(params, tier, beta, 1.0)
        a_j = params.tier(tier)[1]
        macro_power = 2.0 * a_j / params.alpha1
        pico_power = 2.0 * a_j / params.alpha2
        pieces = [
            (_annulus_series(pcbar * params.lambda1, params.alpha1, s_macro,
                             limits.r_1c, limits.r_1o, n_coef), macro_power),
            (_annulus_series(params.lambda1, params.alpha1, s_macro,
                             limits.r_1o, math.inf, n_coef), macro_power),
            (_annulus_series(params.lambda2, params.alpha2, s_pico,
                             limits.r_2, math.inf, n_coef), pico_power),
        ]
        self.factors = [_Factor(e, c, p, n_head) for (e, c), p in pieces]
        comps = [np.array(special.enumerate_compositions3(n)) for n in range(n_head)]
        self._comp = np.concatenate(comps)
        self._comp_order = np.repeat(np.arange(n_head), [len(c) for c in comps])
        self._size_index = np.arange(n_head)
        self.n_tail = n_tail

    def log_weight(self, t):
        """log of the t-density e^{-t-κt^e}/A_j times the total Laplace exponent."""
        y2 = t * self.t_to_y2
        total = t + self.kappa * t**self.kappa_power
        for f in self.factors:
            total += f.exponent * y2 ** (0.5 * f.power)
        return -total

    def _per_factor(self, y2):
        return [f.size_weights @ (y2 ** (0.5 * f.power)) ** self._size_index
                for f in self.factors]

    def terms(self, t):
        """T_n(y) for n < n_head, without the common exponential prefactor."""
        y2 = t * self.t_to_y2
        phi1, phi2, phi3 = self._per_factor(y2)
        comp = self._comp
        products = phi1[comp[:, 0]] * phi2[comp[:, 1]] * phi3[comp[:, 2]]
        return np.bincount(self._comp_order, weights=products, minlength=self.n_head)

    def heads(self, t):
        """Partial sums H_M(y) weighted by the serving-distance density in t."""
        return np.cumsum(self.terms(t)) * (math.exp(self.log_weight(t)) / self.area)

    def conditional_heads(self, t):
        """H_M(y) without the density weight, i.e. Pr(SIR > β | Y = y) pieces."""
        y2 = t * self.t_to_y2
        prefactor = math.exp(-sum(f.exponent * y2 ** (0.5 * f.power) for f in self.factors))
        return np.cumsum(self.terms(t)) * prefactor

    @property
    def tail_usable(self):
        """True when the series coefficients decay fast enough for the tail recursion."""
        if self.n_tail == 0:
            return False
        first = sum(f.coeffs[0] for f in self.factors)
        last = sum(f.coeffs[self.n_tail - 1] for f in self.factors)
        return first == 0.0 or last <= 1e-30 * first

    def conditional_tail(self, t, M):
        """Σ_{n≥M} T_n(y) via the power-series recursion n·T_n = Σ_a a·C_a·T_{n-a}."""
        if M == 0:
            return 1.0
        y2 = t * self.t_to_y2
        total_coeffs = np.zeros(self.n_tail)
        exponent = 0.0
        for f in self.factors:
            scale = y2 ** (0.5 * f.power)
            total_coeffs += f.coeffs[: self.n_tail] * scale
            exponent += f.exponent * scale
        weighted = total_coeffs * np.arange(1, self.n_tail + 1)
        series = np.zeros(self.n_tail)
        series[0] = math.exp(-exponent)
        tail = []
        for n in range(1, self.n_tail):
            value = float(np.dot(weighted[:n], series[n - 1::-1])) / n
            series[n] = value
            if n >= M:
                tail.append(value)
                if value <= 1e-18 * math.fsum(tail) and value <= series[n - 1]:
                    return math.fsum(tail)
        raise IntegrationError("outage tail recursion did not converge")


def _integration_cut(kernel):
    """Upper t-limit where the weight has dropped by e^{-45}, plus breakpoints."""

    def excess(t):
        return -kernel.log_weight(t) - 45.0

    hi = 45.0
    if excess(hi) > 0:
        hi = optimize.brentq(excess, 1e-300, hi, xtol=1e-12)
    points = [hi * f for f in (1e-5, 1e-4, 1e-3, 1e-2, 0.05, 0.15, 0.3, 0.5)]
    return hi, points


def _integrate(fun, hi, points):
    val, err = integrate.quad(fun, 0.0, hi, points=points, epsabs=1e-15, epsrel=1e-11,
                              limit=500)[:2]
    if err > max(1e-12, 1e-8 * abs(val)):
        raise IntegrationError(f"coverage quadrature error {err:.2e} (value {val:.6e})")
    return val


def _macro_orders(params, cfg):
    weights = u_in_distribution(params, cfg)
    orders = params.N1 - np.arange(len(weights))
    return orders, weights


def _tier_orders(params, cfg, tier):
    if tier == 1:
        return _macro_orders(params, cfg)
    return np.array([params.N2]), np.array([1.0])


def tier_coverage(params, cfg, tier, beta):
    """S_j(β): coverage of a typical tier-j user (value only)."""
    check_config(params, cfg)
    orders, weights = _tier_orders(params, cfg, tier)
    kernel = TierKernel(params, cfg, tier, beta, int(orders.max()))
    idx = orders - 1
    hi, points = _integration_cut(kernel)

    def fun(t):
        return float(np.dot(weights, kernel.heads(t)[idx]))

    return min(1.0, max(0.0, _integrate(fun, hi, points)))


def tier_outage(params, cfg, tier, beta):
    """1 - S_j(β) computed from the series tail, accurate for tiny outages."""
    check_config(params, cfg)
    orders, weights = _tier_orders(params, cfg, tier)
    kernel = TierKernel(params, cfg, tier, beta, int(orders.max()), TAIL_TERMS)
    idx = orders - 1
    use_tail = kernel.tail_usable

    def fun(t):
        heads = kernel.conditional_heads(t)[idx]
        outs = np.empty(len(orders))
        for i, (M, h) in enumerate(zip(orders, heads)):
            if h < 1.0 - TAIL_SWITCH or not use_tail:
                outs[i] = 1.0 - h
            else:
                outs[i] = kernel.conditional_tail(t, int(M))
        return float(np.dot(weights, outs)) * math.exp(-t - kernel.kappa * t**kernel.kappa_power) / kernel.area

    # The outage integrand is not damped by the Laplace exponent, so integrate to the
    # plain density cut-off.
    hi, points = density_cut(kernel.kappa, kernel.kappa_power)
    return min(1.0, max(0.0, _integrate(fun, hi, points)))


def conditional_coverage(params, cfg, tier, beta, y):
    """Pr(SIR > β | tier-j user at serving distance y)."""
    orders, weights = _tier_orders(params, cfg, tier)
    kernel = TierKernel(params, cfg, tier, beta, int(orders.max()))
    t = math.pi * params.tier(tier)[0] * y**2
    return float(np.dot(weights, kernel.conditional_heads(t)[orders - 1]))


def coverage_macro(params, cfg, beta):
    return CoverageResult(tier_coverage(params, cfg, 1, beta), "analytic", beta, cfg, tier="macro")


def coverage_pico(params, cfg, beta):
    return CoverageResult(tier_coverage(params, cfg, 2, beta), "analytic", beta, cfg, tier="pico")


def coverage_overall(params, cfg, beta):
    """A1·S1 + A2·S2."""
    a1, a2 = association_probabilities(params)
    s1 = tier_coverage(params, cfg, 1, beta)
    s2 = tier_coverage(params, cfg, 2, beta)
    return CoverageResult(a1 * s1 + a2 * s2, "analytic", beta, cfg,
                          extra={"macro": s1, "pico": s2})


def outage_overall(params, cfg, beta):
    """1 - S(β) assembled from per-tier tail integrals."""
    a1, a2 = association_probabilities(params)
    o1 = tier_outage(params, cfg, 1, beta)
    o2 = tier_outage(params, cfg, 2, beta)
    return CoverageResult(a1 * o1 + a2 * o2, "analytic", beta, cfg, quantity="outage",
                          extra={"macro": o1, "pico": o2})


def simple_beamforming_coverage(params, beta):
    """Coverage without interference management (U = 0)."""
    return coverage_overall(params, INConfig(U=0, T1=1.0, T2=1.0), beta)
