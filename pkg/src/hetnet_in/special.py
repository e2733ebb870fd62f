"""Special functions and index-set enumerations used by the analytical formulas.

The incomplete beta routines are thin, domain-checked wrappers around the
regularized functions in :mod:`scipy.special`; the partition and composition
enumerations are generated here and memoized per order.
"""

from functools import lru_cache
import math

import numpy as np
from scipy import special as sps

from .errors import DomainError

# Above this order factorials are evaluated through log-gamma in floating point.
EXACT_FACTORIAL_LIMIT = 20


def _check_positive(name, value):
    if not np.all(np.asarray(value) > 0):
        raise DomainError(f"{name} must be positive, got {value!r}")


def beta(a, b):
    """Beta function B(a, b) = Γ(a)Γ(b)/Γ(a+b) for positive arguments."""
    _check_positive("a", a)
    _check_positive("b", b)
    return sps.beta(a, b)


def comp_incomplete_beta(a, b, z):
    """Complementary incomplete beta ∫_z^1 u^(a-1) (1-u)^(b-1) du.

    Evaluated as B(a, b)·I_{1-z}(b, a), which keeps full relative accuracy
    both for z near 0 and for z near 1.
    """
    z = np.asarray(z, dtype=float)
    if np.any((z <= 0.0) | (z >= 1.0)):
        raise DomainError(f"z must lie in (0, 1), got {z!r}")
    return comp_incomplete_beta_upper(a, b, 1.0 - z)


def comp_incomplete_beta_upper(a, b, w):
    """Same integral as :func:`comp_incomplete_beta` parameterized by w = 1 - z.

    Callers that know 1 - z more precisely than z (for instance w = x/(1+x)
    with small x) should use this form.
    """
    _check_positive("a", a)
    _check_positive("b", b)
    w = np.asarray(w, dtype=float)
    if np.any((w < 0.0) | (w > 1.0)):
        raise DomainError(f"1 - z must lie in [0, 1], got {w!r}")
    out = sps.beta(a, b) * sps.betainc(b, a, w)
    return out[()] if isinstance(out, np.ndarray) and out.ndim == 0 else out


def beta_window(a, b, z_lo, z_hi, w_lo, w_hi):
    """∫_{z_lo}^{z_hi} u^(a-1) (1-u)^(b-1) du without cancellation.

    ``w_lo = 1 - z_lo`` and ``w_hi = 1 - z_hi`` must be supplied by the caller
    (they are usually available to full precision). The difference of
    regularized incomplete betas is taken on whichever side of 1/2 the window
    sits, so neither endpoint close to 0 nor close to 1 loses digits.
    """
    _check_positive("a", a)
    _check_positive("b", b)
    z_lo = np.asarray(z_lo, dtype=float)
    z_hi = np.asarray(z_hi, dtype=float)
    if np.any(z_hi < z_lo):
        raise DomainError("window endpoints must satisfy z_lo <= z_hi")
    full = sps.beta(a, b)
    low_side = full * (sps.betainc(a, b, z_hi) - sps.betainc(a, b, z_lo))
    high_side = full * (sps.betainc(b, a, w_lo) - sps.betainc(b, a, w_hi))
    out = np.where(z_hi <= 0.5, low_side, high_side)
    return out[()] if out.ndim == 0 else out


def lower_incomplete_gamma(a, z):
    """Lower incomplete gamma γ(a, z) = ∫_0^z u^(a-1) e^(-u) du."""
    _check_positive("a", a)
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise DomainError(f"z must be non-negative, got {z!r}")
    out = sps.gamma(a) * sps.gammainc(a, z)
    return out[()] if isinstance(out, np.ndarray) and out.ndim == 0 else out


def upper_incomplete_gamma(a, z):
    """Upper incomplete gamma Γ(a, z) = ∫_z^∞ u^(a-1) e^(-u) du."""
    _check_positive("a", a)
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise DomainError(f"z must be non-negative, got {z!r}")
    out = sps.gamma(a) * sps.gammaincc(a, z)
    return out[()] if isinstance(out, np.ndarray) and out.ndim == 0 else out


def _partitions_desc(n, largest):
    """Integer partitions of n into parts <= largest, as non-increasing part lists."""
    if n == 0:
        yield []
        return
    for part in range(min(n, largest), 0, -1):
        for rest in _partitions_desc(n - part, part):
            yield [part] + rest


@lru_cache(maxsize=None)
def enumerate_partitions(n):
    """All multiplicity vectors (m_1, ..., m_n) with Σ a·m_a = n.

    Each element is a tuple of length n; ``n = 0`` gives the single empty
    tuple. The result is sorted in decreasing lexicographic order, so the
    all-ones partition comes first and the single part ``n`` comes last.
    """
    if n < 0:
        raise DomainError(f"partition order must be non-negative, got {n}")
    out = []
    for parts in _partitions_desc(n, n):
        counts = [0] * n
        for p in parts:
            counts[p - 1] += 1
        out.append(tuple(counts))
    out.sort(reverse=True)
    return tuple(out)


@lru_cache(maxsize=None)
def partition_arrays(n):
    """Vectorization helpers for the partitions of n.

    Returns ``(counts, sizes, log_fact)`` where ``counts`` is an integer array
    of shape (p(n), n), ``sizes`` holds Σ_a m_a per partition and ``log_fact``
    holds Σ_a log(m_a!). Arrays are marked read-only because they are cached.
    """
    parts = enumerate_partitions(n)
    counts = np.array(parts, dtype=np.int64).reshape(len(parts), n)
    sizes = counts.sum(axis=1)
    log_fact = sps.gammaln(counts + 1.0).sum(axis=1)
    for arr in (counts, sizes, log_fact):
        arr.setflags(write=False)
    return counts, sizes, log_fact


@lru_cache(maxsize=None)
def enumerate_compositions3(n):
    """All ordered triples of non-negative integers summing to n.

    Ordered by decreasing first, then second component: (n,0,0) comes first.
    """
    if n < 0:
        raise DomainError(f"composition total must be non-negative, got {n}")
    return tuple(
        (n1, n2, n - n1 - n2) for n1 in range(n, -1, -1) for n2 in range(n - n1, -1, -1)
    )


def multinomial(n, parts):
    """Multinomial coefficient n!/(n_1! n_2! ...).

    Exact integer for n <= 20, floating point via log-gamma above that.
    """
    parts = tuple(int(p) for p in parts)
    if any(p < 0 for p in parts) or sum(parts) != n:
        raise DomainError(f"parts {parts} do not sum to {n}")
    if n <= EXACT_FACTORIAL_LIMIT:
        out = math.factorial(n)
        for p in parts:
            out //= math.factorial(p)
        return out
    log_val = math.lgamma(n + 1) - sum(math.lgamma(p + 1) for p in parts)
    return float(round(math.exp(log_val)))


def log_factorial(n):
    """log(n!) for non-negative integers (array friendly)."""
    return sps.gammaln(np.asarray(n, dtype=float) + 1.0)
