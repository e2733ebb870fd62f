"""Network parameterization, association statistics and IN request laws.

All distance integrals are evaluated after the substitution t = πλ_j y², which
turns the serving-distance density into e^{-t} times a second decaying factor.
"""

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from scipy import integrate, optimize, special as sps

from .errors import ConfigError, DomainError, IntegrationError

# Truncation for ∫_0^∞ e^{-t}(...) dt: e^{-45} ≈ 3e-20 relative to the peak.
T_CUT = 45.0
POISSON_TAIL_TOL = 1e-12


def db_to_linear(value_db):
    return 10.0 ** (np.asarray(value_db, dtype=float) / 10.0)


def linear_to_db(value):
    return 10.0 * np.log10(value)


@dataclass(frozen=True)
class NetworkParams:
    """Static description of the two-tier network.

    Only the ratio P1/P2 enters any formula; ``P2`` defaults to 1 so that
    ``P1`` can be read as the macro-to-pico power ratio.
    """

    lambda1: float = 5e-4
    lambda2: float = 1e-3
    P1: float = float(db_to_linear(15.0))
    P2: float = 1.0
    N1: int = 10
    N2: int = 8
    alpha1: float = 4.5
    alpha2: float = 4.7
    lambda_u: float = 0.01

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ConfigError(problems)

    def problems(self):
        """Violated invariants as a list of messages (empty when valid)."""
        out = []
        for name in ("lambda1", "lambda2", "lambda_u", "P1", "P2"):
            if not getattr(self, name) > 0:
                out.append(f"{name} must be strictly positive")
        for name in ("alpha1", "alpha2"):
            if not getattr(self, name) > 2:
                out.append(f"{name}: path-loss exponents must exceed 2")
        for name in ("N1", "N2"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                out.append(f"{name} must be a positive integer")
        if self.N1 <= self.N2:
            out.append("N1 must exceed N2")
        return out

    @property
    def power_ratio(self):
        """P1/P2."""
        return self.P1 / self.P2

    @classmethod
    def from_power_ratio_db(cls, power_ratio_db, **kwargs):
        return cls(P1=float(db_to_linear(power_ratio_db)), P2=1.0, **kwargs)

    def tier(self, j):
        """(λ_j, α_j, N_j, P_j) for tier 1 or 2."""
        if j == 1:
            return self.lambda1, self.alpha1, self.N1, self.P1
        if j == 2:
            return self.lambda2, self.alpha2, self.N2, self.P2
        raise DomainError(f"tier must be 1 or 2, got {j!r}")


@dataclass(frozen=True)
class INConfig:
    """Design parameters of the interference-nulling scheme."""

    U: int
    T1: float = 1.0
    T2: float = 1.0

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ConfigError(problems)

    def problems(self, N1=None):
        out = []
        if int(self.U) != self.U or self.U < 0:
            out.append("U must be a non-negative integer")
        elif N1 is not None and self.U > N1 - 1:
            out.append("U must be ≤ N₁−1")
        if not (self.T1 >= 1 and self.T2 >= 1):
            out.append("thresholds must be ≥ 1")
        return out

    def threshold(self, j):
        return self.T1 if j == 1 else self.T2


def check_config(params, cfg):
    problems = cfg.problems(params.N1)
    if problems:
        raise ConfigError(problems)


def _other_tier_coefficient(params, j):
    """κ and exponent e with f_{Y_j} ∝ exp(-t - κ t^e) in the variable t = πλ_j y²."""
    lam_j, a_j, _, p_j = params.tier(j)
    k = 3 - j
    lam_k, a_k, _, p_k = params.tier(k)
    ratio = a_j / a_k
    # πλ_k (P_k/P_j)^{2/α_k} y^{2α_j/α_k} with y² = t/(πλ_j)
    kappa = math.pi * lam_k * (p_k / p_j) ** (2.0 / a_k) * (math.pi * lam_j) ** (-ratio)
    return kappa, ratio


def _quad(fun, lo, hi, points=None, epsabs=1e-15, epsrel=1e-12):
    val, err, info = integrate.quad(
        fun, lo, hi, points=points, epsabs=epsabs, epsrel=epsrel, limit=400, full_output=True
    )[:3]
    if err > max(1e3 * epsabs, 1e3 * epsrel * abs(val)):
        raise IntegrationError(f"quadrature error estimate {err:.3e} too large (value {val:.6e})")
    return val


@lru_cache(maxsize=65536)
def density_cut(kappa, e, order=0.0, drop=T_CUT):
    """Integration range for t^order·exp(-t - κ t^e).

    Returns ``(hi, points)``: the integrand at ``hi`` is e^{-drop} of its peak,
    and ``points`` are breakpoints around the peak and on a geometric scale,
    so that sharply concentrated weights (large κ) are resolved.
    """

    def g(t):
        return (order * math.log(t) if order else 0.0) - t - kappa * t**e

    if order > 0:
        slope = lambda u: order - math.exp(u) - kappa * e * math.exp(u * e)
        t_peak = math.exp(optimize.brentq(slope, -700.0, math.log(order) + 1e-12))
        g_peak = g(t_peak)
    else:
        t_peak, g_peak = 0.0, 0.0
    target = g_peak - drop
    hi = max(2.0 * t_peak, 1e-6)
    while g(hi) > target:
        hi *= 2.0
    hi = optimize.brentq(lambda t: g(t) - target, t_peak, hi, xtol=1e-14)
    points = sorted({hi * f for f in (1e-6, 1e-4, 1e-3, 1e-2, 0.05, 0.15, 0.3, 0.5)}
                    | ({t_peak} if 0.0 < t_peak < hi else set()))
    return hi, points


@lru_cache(maxsize=4096)
def _association(params, j):
    kappa, e = _other_tier_coefficient(params, j)
    hi, points = density_cut(kappa, e)
    return _quad(lambda t: math.exp(-t - kappa * t**e), 0.0, hi, points=points)


def association_probabilities(params):
    """(A1, A2): probability that the typical user associates with each tier."""
    a1 = _association(params, 1)
    a2 = _association(params, 2)
    if abs(a1 + a2 - 1.0) > 1e-9:
        raise IntegrationError(f"association probabilities sum to {a1 + a2!r}")
    return a1, a2


def serving_distance_pdf(params, tier, y):
    """Density of the distance to the serving BS for a tier-``tier`` user."""
    lam_j, a_j, _, p_j = params.tier(tier)
    lam_k, a_k, _, p_k = params.tier(3 - tier)
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise DomainError("distance must be non-negative")
    area = _association(params, tier)
    expo = math.pi * (lam_j * y**2 + lam_k * (p_k / p_j) ** (2.0 / a_k) * y ** (2.0 * a_j / a_k))
    out = 2.0 * math.pi * lam_j / area * y * np.exp(-expo)
    return out[()] if out.ndim == 0 else out


@lru_cache(maxsize=65536)
def serving_distance_moment(params, tier, power):
    """E[Y_j^power] for the serving distance of a tier-j user.

    The integrand is handled in log-space so high moments do not overflow.
    """
    lam_j = params.tier(tier)[0]
    kappa, e = _other_tier_coefficient(params, tier)
    half = 0.5 * power
    if half == 0:
        return 1.0
    log_scale = math.lgamma(half + 1.0)

    def integrand(t):
        if t <= 0.0:
            return 0.0
        return math.exp(half * math.log(t) - t - kappa * t**e - log_scale)

    hi, points = density_cut(kappa, e, half)
    val = _quad(integrand, 0.0, hi, points=points)
    area = _association(params, tier)
    return val * math.exp(log_scale) * (math.pi * lam_j) ** (-half) / area


def _mean_requests_tier(params, j, T):
    lam_j, a_j, _, p_j = params.tier(j)
    a1 = params.alpha1
    if T == 1.0:
        return 0.0
    geometry = (T ** (2.0 / a1) - 1.0) * (params.P1 / p_j) ** (2.0 / a1)
    return math.pi * lam_j * geometry * serving_distance_moment(params, j, 2.0 * a_j / a1)


@lru_cache(maxsize=4096)
def mean_in_requests(params, T1, T2):
    """(L̄, L̄1, L̄2): mean number of IN requests received by a macro-BS.

    The double integral over requester distance r and serving distance y is
    reduced by exchanging the order of integration: for fixed y the admissible
    r form an annulus whose area scales with y^{2α_j/α1}, leaving a single
    serving-distance moment.
    """
    if T1 < 1 or T2 < 1:
        raise DomainError("thresholds must be ≥ 1")
    l1 = _mean_requests_tier(params, 1, float(T1))
    l2 = _mean_requests_tier(params, 2, float(T2))
    return l1 + l2, l1, l2


def mean_in_requests_double_integral(params, T1, T2):
    """Literal r-then-y double integral for L̄ (slow; used as a test oracle)."""
    out = []
    for j, T in ((1, T1), (2, T2)):
        lam_j, a_j, _, p_j = params.tier(j)

        def inner(r):
            hi = (p_j / params.P1) ** (1.0 / a_j) * r ** (params.alpha1 / a_j)
            lo = (p_j / (params.P1 * T)) ** (1.0 / a_j) * r ** (params.alpha1 / a_j)
            val = integrate.quad(lambda y: serving_distance_pdf(params, j, y), lo, hi,
                                 epsabs=1e-14, epsrel=1e-11)[0]
            return r * val

        r_max = 60.0 / math.sqrt(math.pi * min(params.lambda1, params.lambda2))
        r_max *= max(T1, T2) ** (1.0 / params.alpha1) * params.power_ratio ** (1.0 / params.alpha1)
        total = integrate.quad(inner, 0.0, r_max, limit=400, epsabs=1e-12, epsrel=1e-10)[0]
        out.append(2.0 * math.pi * lam_j * total)
    return out[0] + out[1], out[0], out[1]


def poisson_truncation(mean):
    """K_max = ⌈L̄ + 12√(L̄+1) + 20⌉ with a Chernoff check on the dropped tail."""
    kmax = int(math.ceil(mean + 12.0 * math.sqrt(mean + 1.0) + 20.0))
    if mean > 0:
        # Pr(K >= kmax) <= exp(-L) (eL/kmax)^kmax
        log_bound = -mean + kmax * (1.0 + math.log(mean) - math.log(kmax))
        if log_bound > math.log(POISSON_TAIL_TOL):
            raise IntegrationError(f"Poisson tail bound {math.exp(log_bound):.2e} too large")
    return kmax


def _poisson_log_pmf(mean, k):
    k = np.asarray(k, dtype=float)
    if mean == 0:
        return np.where(k == 0, 0.0, -np.inf)
    return k * math.log(mean) - mean - sps.gammaln(k + 1.0)


def k0_pmf(params, T1, T2, k):
    """Pr(K0 = k): Poisson law of the number of requests at a macro-BS."""
    if k < 0 or int(k) != k:
        raise DomainError("k must be a non-negative integer")
    mean = mean_in_requests(params, T1, T2)[0]
    return float(np.exp(_poisson_log_pmf(mean, k)))


def u_in_distribution(params, cfg):
    """Array of Pr(u_IN = u) for u = 0..U."""
    mean = mean_in_requests(params, cfg.T1, cfg.T2)[0]
    U = int(cfg.U)
    head = np.exp(_poisson_log_pmf(mean, np.arange(U)))
    kmax = poisson_truncation(mean)
    tail = float(np.exp(_poisson_log_pmf(mean, np.arange(U, max(kmax, U) + 1))).sum())
    return np.append(head, tail)


def u_in_pmf(params, cfg, u):
    """Pr(u_IN = u) with u_IN = min(U, K0)."""
    if u < 0 or u > cfg.U or int(u) != u:
        raise DomainError(f"u must lie in 0..U={cfg.U}, got {u!r}")
    return float(u_in_distribution(params, cfg)[int(u)])


@lru_cache(maxsize=4096)
def _in_probability(params, U, T1, T2):
    mean = mean_in_requests(params, T1, T2)[0]
    if U == 0:
        return 0.0
    if mean == 0.0:
        return 1.0
    kmax = poisson_truncation(mean)
    k = np.arange(kmax + 1, dtype=float)
    head = np.exp(k[:U] * math.log(mean) - mean - sps.gammaln(k[:U] + 1.0)).sum()
    kt = k[U:]
    tail = np.exp(kt * math.log(mean) - mean - sps.gammaln(kt + 2.0)).sum()
    return float(min(1.0, head + U * tail))


def in_probability(params, cfg):
    """(p_c, p̄_c): probability that a potential IN macro-BS nulls the typical user."""
    pc = _in_probability(params, int(cfg.U), float(cfg.T1), float(cfg.T2))
    return pc, 1.0 - pc
