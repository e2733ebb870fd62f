"""Snapshot Monte Carlo simulator of the two-tier network with interference nulling.

Each realization draws macro-BSs, pico-BSs and users as PPPs in a square
window centred on the typical user (at the origin), associates users by
maximum received power, schedules one user per BS, applies the SIIR request
rule and evaluates the typical user's SIR.

Every realization owns a random stream derived from (seed, realization
index). Geometry is drawn first and fading pools second, with pool sizes that
do not depend on the IN configuration. Therefore a grid of (U, T1, T2)
configurations evaluated on one realization sees common random numbers, and
the estimate for any one configuration does not depend on which other
configurations were evaluated alongside it or on the worker count.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import math
from typing import Optional

import numpy as np
from scipy import integrate

from .coverage import CoverageResult
from .errors import ConsistencyError, DomainError
from .network import INConfig, NetworkParams, _association, _other_tier_coefficient, check_config

DEFAULT_WINDOW = 240.0
USER_FIELDS = ("full", "ppp")
CHANNEL_MODES = ("distributional", "exact")


# --------------------------------------------------------------------------- geometry


def _points(rng, density, side):
    count = rng.poisson(density * side * side)
    return rng.uniform(-side / 2.0, side / 2.0, size=(count, 2))


def _sq_dist(a, b, side, wrap):
    diff = a[:, None, :] - b[None, :, :]
    if wrap:
        diff = (diff + side / 2.0) % side - side / 2.0
    return np.einsum("ijk,ijk->ij", diff, diff)


class ServingDistanceSampler:
    """Inverse-CDF sampler for the serving distance Y_j of a tier-j user."""

    def __init__(self, params, tier, n_grid=20001):
        kappa, e = _other_tier_coefficient(params, tier)
        t = np.linspace(0.0, 45.0, n_grid)
        dens = np.exp(-t - kappa * t**e)
        cdf = integrate.cumulative_trapezoid(dens, t, initial=0.0)
        self._t = t
        self._cdf = cdf / cdf[-1]
        self._scale = 1.0 / (math.pi * params.tier(tier)[0])
        self.area = _association(params, tier)

    def sample(self, rng, size):
        t = np.interp(rng.random(size), self._cdf, self._t)
        return np.sqrt(t * self._scale)


@dataclass
class _Scene:
    """Geometry-level state of one realization (configuration independent)."""

    params: NetworkParams
    side: float
    macro_positions: np.ndarray
    pico_positions: np.ndarray
    typ_tier: int
    typ_bs: int
    typ_signal: float                  # P_j Y^{-α_j}
    macro_mean: np.ndarray             # P1 D^{-α1} at the typical user
    pico_mean: np.ndarray
    typ_log_siir: np.ndarray           # log SIIR of the typical user per macro (+inf at serving)
    req_log_siir: np.ndarray           # (scheduled others, macros)
    req_tier: np.ndarray               # tier of each scheduled requester
    req_user: np.ndarray               # user index of each scheduled requester (-1 in ppp mode)
    user_positions: np.ndarray = None
    user_tier: np.ndarray = None
    user_bs: np.ndarray = None
    macro_sched: np.ndarray = None     # user index or -1 for a synthetic user
    pico_sched: np.ndarray = None

    def requests(self, T1, T2):
        """(request matrix of scheduled others, typical's request mask)."""
        log_t = np.where(self.req_tier == 1, math.log(T1), math.log(T2))
        others = self.req_log_siir < log_t[:, None]
        typ = self.typ_log_siir < math.log(T1 if self.typ_tier == 1 else T2)
        return others, typ

    def request_counts(self, T1, T2):
        others, typ = self.requests(T1, T2)
        return others.sum(axis=0) + typ, typ


def _associate(params, sq_m, sq_p):
    """Tier, BS index and received power for each row of the distance matrices."""
    i1 = np.argmin(sq_m, axis=1)
    i2 = np.argmin(sq_p, axis=1)
    rows = np.arange(sq_m.shape[0])
    z1 = sq_m[rows, i1]
    z2 = sq_p[rows, i2]
    pw1 = params.P1 * z1 ** (-0.5 * params.alpha1)
    pw2 = params.P2 * z2 ** (-0.5 * params.alpha2)
    macro = pw1 >= pw2
    tier = np.where(macro, 1, 2)
    bs = np.where(macro, i1, i2)
    power = np.where(macro, pw1, pw2)
    return tier, bs, power


def _build_scene(params, rng, side, wrap, user_field, samplers=None):
    while True:
        macros = _points(rng, params.lambda1, side)
        picos = _points(rng, params.lambda2, side)
        if len(macros) and len(picos):
            break
    origin = np.zeros((1, 2))
    d2m = _sq_dist(origin, macros, side, wrap)[0]
    d2p = _sq_dist(origin, picos, side, wrap)[0]
    tier0, bs0, sig0 = _associate(params, d2m[None, :], d2p[None, :])
    tier0, bs0, sig0 = int(tier0[0]), int(bs0[0]), float(sig0[0])
    macro_mean = params.P1 * d2m ** (-0.5 * params.alpha1)
    pico_mean = params.P2 * d2p ** (-0.5 * params.alpha2)
    typ_log_siir = math.log(sig0) - np.log(macro_mean)
    if tier0 == 1:
        typ_log_siir[bs0] = np.inf
    scene = _Scene(params, side, macros, picos, tier0, bs0, sig0, macro_mean, pico_mean,
                   typ_log_siir, None, None, None)

    if user_field == "full":
        users = np.vstack([origin, _points(rng, params.lambda_u, side)])
        sq_m = _sq_dist(users, macros, side, wrap)
        sq_p = _sq_dist(users, picos, side, wrap)
        tier, bs, power = _associate(params, sq_m, sq_p)
        n_m = len(macros)
        cell = np.where(tier == 1, bs, n_m + bs)
        # Users are i.i.d. uniform, so the first user of each cell is a uniform pick.
        order_cells, first = np.unique(cell[1:], return_index=True)
        first = first + 1
        serving_cell = bs0 if tier0 == 1 else n_m + bs0
        keep = order_cells != serving_cell
        sched = first[keep]
        macro_sched = np.full(n_m, -1)
        pico_sched = np.full(len(picos), -1)
        for c, u in zip(order_cells[keep], sched):
            if c < n_m:
                macro_sched[c] = u
            else:
                pico_sched[c - n_m] = u
        if tier0 == 1:
            macro_sched[bs0] = 0
        else:
            pico_sched[bs0] = 0
        log_siir = np.log(power[sched])[:, None] - (
            math.log(params.P1) - 0.5 * params.alpha1 * np.log(sq_m[sched])
        )
        own = tier[sched] == 1
        log_siir[np.nonzero(own)[0], bs[sched][own]] = np.inf
        scene.req_log_siir = log_siir
        scene.req_tier = tier[sched]
        scene.req_user = sched
        scene.user_positions = users
        scene.user_tier = tier
        scene.user_bs = bs
        scene.macro_sched = macro_sched
        scene.pico_sched = pico_sched
    elif user_field == "ppp":
        if samplers is None:
            samplers = (ServingDistanceSampler(params, 1), ServingDistanceSampler(params, 2))
        blocks, tiers = [], []
        for j, sampler in ((1, samplers[0]), (2, samplers[1])):
            lam_j, a_j, _, p_j = params.tier(j)
            pts = _points(rng, lam_j, side)
            marks = sampler.sample(rng, len(pts))
            sq = _sq_dist(pts, macros, side, wrap)
            siir = (math.log(p_j) - a_j * np.log(marks))[:, None] - (
                math.log(params.P1) - 0.5 * params.alpha1 * np.log(sq)
            )
            # A macro stronger than the serving BS would itself be serving: no request.
            siir[siir < 0.0] = np.inf
            blocks.append(siir)
            tiers.append(np.full(len(pts), j))
        scene.req_log_siir = np.vstack(blocks)
        scene.req_tier = np.concatenate(tiers)
        scene.req_user = np.full(len(scene.req_tier), -1)
    else:
        raise DomainError(f"user_field must be one of {USER_FIELDS}")
    return scene


# --------------------------------------------------------------------------- public snapshot API


@dataclass(frozen=True)
class Snapshot:
    """One sampled network realization (typical user is user 0 at the origin)."""

    params: NetworkParams
    cfg: INConfig
    window_side: float
    macro_positions: np.ndarray
    pico_positions: np.ndarray
    user_positions: np.ndarray
    associations: np.ndarray              # (users, 2): tier, BS index
    macro_schedule: np.ndarray            # scheduled user per macro-BS, -1 = synthetic
    pico_schedule: np.ndarray
    in_requests: tuple                    # per macro-BS: array of requesting user indices
    in_targets: tuple                     # per macro-BS: selected subset of requesters
    scene: _Scene = field(repr=False, compare=False, default=None)

    @property
    def typical_tier(self):
        return int(self.associations[0, 0])

    @property
    def typical_bs(self):
        return int(self.associations[0, 1])

    def request_counts(self):
        return np.array([len(r) for r in self.in_requests])


def sample_snapshot(params, cfg, window_side=DEFAULT_WINDOW, rng_seed=0, wrap=False):
    """Sample a full-user-field snapshot, including IN requests and targets."""
    check_config(params, cfg)
    if not window_side > 0:
        raise DomainError("window_side must be positive")
    rng = np.random.default_rng(rng_seed)
    scene = _build_scene(params, rng, window_side, wrap, "full")
    others, typ = scene.requests(cfg.T1, cfg.T2)
    requests, targets = [], []
    for ell in range(len(scene.macro_positions)):
        req = scene.req_user[others[:, ell]]
        if typ[ell]:
            req = np.sort(np.append(req, 0))
        requests.append(req)
        # Seeded partial shuffle: uniform subset of size min(U, K).
        take = min(int(cfg.U), len(req))
        targets.append(np.sort(rng.permutation(req)[:take]))
    assoc = np.stack([scene.user_tier, scene.user_bs], axis=1)
    return Snapshot(params, cfg, window_side, scene.macro_positions, scene.pico_positions,
                    scene.user_positions, assoc, scene.macro_sched, scene.pico_sched,
                    tuple(requests), tuple(targets), scene)


def dump_snapshot(snapshot, path):
    """Write one record per node: kind, x, y, assoc_tier, assoc_index, scheduled."""
    scheduled = set(int(u) for u in snapshot.macro_schedule if u >= 0)
    scheduled |= set(int(u) for u in snapshot.pico_schedule if u >= 0)
    with open(path, "w") as fh:
        fh.write("kind x y assoc_tier assoc_index scheduled\n")
        for kind, pts in (("macro", snapshot.macro_positions), ("pico", snapshot.pico_positions)):
            for x, y in pts:
                fh.write(f"{kind} {x!r} {y!r} 0 -1 0\n")
        for i, (x, y) in enumerate(snapshot.user_positions):
            t, b = snapshot.associations[i]
            fh.write(f"user {x!r} {y!r} {int(t)} {int(b)} {int(i in scheduled)}\n")


# --------------------------------------------------------------------------- precoding


def _complex_normal(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def zfbf_precoder(channel_matrix):
    """Unit-norm ZF beam for the first row, orthogonal to all remaining rows.

    Rows are conjugate-transposed channel vectors h†. The beam is the first
    column of the pseudo-inverse, normalized.
    """
    H = np.atleast_2d(np.asarray(channel_matrix, dtype=complex))
    if H.shape[0] > H.shape[1]:
        raise DomainError("more rows than antennas")
    if np.linalg.matrix_rank(H) < H.shape[0]:
        raise np.linalg.LinAlgError("channel matrix is rank deficient")
    w = np.linalg.pinv(H)[:, 0]
    return w / np.linalg.norm(w)


def zfbf_precoders(H):
    """Batched ZF beams for a stack of matrices of shape (batch, rows, antennas)."""
    H = np.asarray(H, dtype=complex)
    gram = H @ np.conj(np.swapaxes(H, -1, -2))
    rhs = np.zeros(gram.shape[:-1] + (1,), dtype=complex)
    rhs[..., 0, 0] = 1.0
    coef = np.linalg.solve(gram, rhs)
    w = (np.conj(np.swapaxes(H, -1, -2)) @ coef)[..., 0]
    return w / np.linalg.norm(w, axis=-1, keepdims=True)


# --------------------------------------------------------------------------- channels and SIR


@dataclass(frozen=True)
class ChannelRealization:
    """Fading pools for one snapshot.

    ``distributional``: ``desired_exp`` holds N1 unit exponentials whose
    partial sums give Gamma(M, 1) desired gains; ``macro_gain``/``pico_gain``
    are Exp(1) interferer gains; ``macro_rank`` places the typical user's
    position among each macro-BS's requesters.
    ``exact``: complex Gaussian vectors for every link the typical SIR needs.
    """

    mode: str
    desired_exp: Optional[np.ndarray] = None
    macro_gain: Optional[np.ndarray] = None
    pico_gain: Optional[np.ndarray] = None
    macro_rank: Optional[np.ndarray] = None
    typ_macro: Optional[np.ndarray] = None     # (n_m, N1) typical's channel from each macro
    typ_pico: Optional[np.ndarray] = None      # (n_p, N2)
    macro_rows: Optional[np.ndarray] = None    # (n_m, N1, N1) scheduled + IN-user channels
    pico_rows: Optional[np.ndarray] = None     # (n_p, N2)


def draw_channels(params, n_macro, n_pico, mode, rng):
    if mode == "distributional":
        return ChannelRealization(
            mode,
            desired_exp=rng.standard_exponential(params.N1),
            macro_gain=rng.standard_exponential(n_macro),
            pico_gain=rng.standard_exponential(n_pico),
            macro_rank=rng.random(n_macro),
        )
    if mode == "exact":
        return ChannelRealization(
            mode,
            macro_rank=rng.random(n_macro),
            typ_macro=_complex_normal(rng, (n_macro, params.N1)),
            typ_pico=_complex_normal(rng, (n_pico, params.N2)),
            macro_rows=_complex_normal(rng, (n_macro, params.N1, params.N1)),
            pico_rows=_complex_normal(rng, (n_pico, params.N2)),
        )
    raise DomainError(f"mode must be one of {CHANNEL_MODES}")


def _selection(counts, typ_mask, rank, U):
    """Macro-BSs selecting the typical user: its uniform rank among K requesters is < U."""
    position = np.floor(rank * np.maximum(counts, 1))
    return typ_mask & (position < U)


def _exact_gains(params, scene, ch, counts, selected, U):
    """(desired gain, macro gains, pico gains) under ZFBF at macros and MRT at picos."""
    n_m = len(counts)
    u_all = np.minimum(counts, U)
    macro_gain = np.zeros(n_m)
    desired = None
    serving_macro = scene.typ_tier == 1
    for u in np.unique(u_all):
        idx = np.nonzero(u_all == u)[0]
        rows = ch.macro_rows[idx, : u + 1, :].copy()
        sel = selected[idx]
        if u > 0 and np.any(sel):
            rows[sel, 1, :] = ch.typ_macro[idx[sel]]
        if serving_macro:
            hit = idx == scene.typ_bs
            rows[hit, 0, :] = ch.typ_macro[scene.typ_bs]
        # Rows hold h† with h the channel vector; the precoded gain is |h† f|².
        beams = zfbf_precoders(np.conj(rows))
        gains = np.abs(np.einsum("bk,bk->b", np.conj(ch.typ_macro[idx]), beams)) ** 2
        macro_gain[idx] = gains
    pico_beams = ch.pico_rows / np.linalg.norm(ch.pico_rows, axis=1, keepdims=True)
    pico_gain = np.abs(np.einsum("bk,bk->b", np.conj(ch.typ_pico), pico_beams)) ** 2
    if serving_macro:
        desired = macro_gain[scene.typ_bs]
        macro_gain[scene.typ_bs] = 0.0
    else:
        h = ch.typ_pico[scene.typ_bs]
        desired = float(np.vdot(h, h).real)
        pico_gain[scene.typ_bs] = 0.0
    return desired, macro_gain, pico_gain


def _sir(signal, macro_power, pico_power):
    interference = macro_power.sum() + pico_power.sum()
    return math.inf if interference == 0.0 else signal / interference


def typical_sir(snapshot, channels, cfg):
    """SIR of the typical user for one snapshot, channel draw and configuration.

    With a :class:`Snapshot` the IN targets stored in the snapshot decide
    which macro-BSs null the typical user.
    """
    scene = snapshot.scene
    params = snapshot.params
    counts = snapshot.request_counts()
    selected = np.array([0 in t for t in snapshot.in_targets], dtype=bool)
    return _typical_sir_core(params, scene, channels, counts, selected, int(cfg.U))


def _typical_sir_core(params, scene, ch, counts, selected, U):
    if ch.mode == "exact":
        desired, mg, pg = _exact_gains(params, scene, ch, counts, selected, U)
    else:
        mg = ch.macro_gain * ~selected
        pg = ch.pico_gain.copy()
        if scene.typ_tier == 1:
            dof = params.N1 - min(U, int(counts[scene.typ_bs]))
            mg[scene.typ_bs] = 0.0
        else:
            dof = params.N2
            pg[scene.typ_bs] = 0.0
        desired = ch.desired_exp[:dof].sum()
    return _sir(scene.typ_signal * desired, scene.macro_mean * mg, scene.pico_mean * pg)


# --------------------------------------------------------------------------- estimators


def _realization_rng(seed, index):
    return np.random.default_rng([int(seed), int(index)])


def _eval_in_realization(params, scene, ch, thresholds, U_values, betas):
    """Coverage indicators, shape (len(thresholds), len(U_values), len(betas))."""
    out = np.zeros((len(thresholds), len(U_values), len(betas)), dtype=bool)
    U_arr = np.asarray(U_values)
    for ti, (T1, T2) in enumerate(thresholds):
        counts, typ = scene.request_counts(T1, T2)
        if ch.mode == "exact":
            for ui, U in enumerate(U_values):
                sel = _selection(counts, typ, ch.macro_rank, U)
                sir = _typical_sir_core(params, scene, ch, counts, sel, int(U))
                out[ti, ui] = sir > betas
            continue
        # Distributional mode: vectorized over U.
        position = np.floor(ch.macro_rank * np.maximum(counts, 1))
        sel = typ[None, :] & (position[None, :] < U_arr[:, None])
        macro_int = scene.macro_mean * ch.macro_gain
        pico_int = scene.pico_mean * ch.pico_gain
        if scene.typ_tier == 1:
            macro_int = macro_int.copy()
            macro_int[scene.typ_bs] = 0.0
            dof = params.N1 - np.minimum(U_arr, counts[scene.typ_bs])
        else:
            pico_int = pico_int.copy()
            pico_int[scene.typ_bs] = 0.0
            dof = np.full(len(U_arr), params.N2)
        gamma = np.cumsum(ch.desired_exp)[dof - 1]
        interference = (macro_int[None, :] * ~sel).sum(axis=1) + pico_int.sum()
        with np.errstate(divide="ignore"):
            sir = np.where(interference > 0, scene.typ_signal * gamma / interference, np.inf)
        out[ti] = sir[:, None] > betas[None, :]
    return out


def _in_chunk(args):
    params, seed, start, stop, mode, thresholds, U_values, betas, side, wrap, user_field = args
    shape = (len(thresholds), len(U_values), len(betas))
    covered = np.zeros((2,) + shape, dtype=np.int64)
    tier_counts = np.zeros(2, dtype=np.int64)
    samplers = None
    if user_field == "ppp":
        samplers = (ServingDistanceSampler(params, 1), ServingDistanceSampler(params, 2))
    for r in range(start, stop):
        rng = _realization_rng(seed, r)
        scene = _build_scene(params, rng, side, wrap, user_field, samplers)
        ch = draw_channels(params, len(scene.macro_positions), len(scene.pico_positions), mode, rng)
        ind = _eval_in_realization(params, scene, ch, thresholds, U_values, betas)
        covered[scene.typ_tier - 1] += ind
        tier_counts[scene.typ_tier - 1] += 1
    return covered, tier_counts


def _chunks(n, workers):
    size = max(1, math.ceil(n / max(1, workers * 4)))
    return [(s, min(n, s + size)) for s in range(0, n, size)]


def _run_chunks(fn, base_args, n_realizations, workers):
    chunks = _chunks(n_realizations, workers)
    jobs = [base_args[:2] + (s, e) + base_args[2:] for s, e in chunks]
    if workers <= 1:
        results = [fn(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(fn, jobs))
    return results


def _binomial(successes, n):
    p = successes / n
    return p, math.sqrt(max(p * (1.0 - p), 0.0) / n)


def estimate_coverage_grid(params, cfgs, beta_grid, n_realizations, mode="distributional",
                           seed=0, user_field="full", window_side=DEFAULT_WINDOW, wrap=False,
                           workers=1):
    """Monte Carlo coverage for several configurations on shared realizations.

    Returns a dict mapping each :class:`INConfig` to a list of
    :class:`CoverageResult` (one per β). Per-tier conditional estimates are
    stored in ``extra``.
    """
    if n_realizations < 1:
        raise DomainError("n_realizations must be at least 1")
    if mode not in CHANNEL_MODES:
        raise DomainError(f"mode must be one of {CHANNEL_MODES}")
    if user_field not in USER_FIELDS:
        raise DomainError(f"user_field must be one of {USER_FIELDS}")
    cfgs = list(cfgs)
    for cfg in cfgs:
        check_config(params, cfg)
    betas = np.asarray(beta_grid, dtype=float)
    thresholds = sorted({(float(c.T1), float(c.T2)) for c in cfgs})
    U_values = sorted({int(c.U) for c in cfgs})
    args = (params, int(seed), mode, thresholds, U_values, betas, float(window_side), bool(wrap),
            user_field)
    covered = 0
    tiers = 0
    for c, t in _run_chunks(_in_chunk, args, n_realizations, workers):
        covered = covered + c
        tiers = tiers + t
    out = {}
    for cfg in cfgs:
        ti = thresholds.index((float(cfg.T1), float(cfg.T2)))
        ui = U_values.index(int(cfg.U))
        results = []
        for bi, beta in enumerate(betas):
            hits = covered[:, ti, ui, bi]
            value, err = _binomial(int(hits.sum()), n_realizations)
            extra = {"realizations": n_realizations, "macro_users": int(tiers[0]),
                     "pico_users": int(tiers[1])}
            for name, k in (("macro", 0), ("pico", 1)):
                if tiers[k]:
                    extra[name], extra[name + "_stderr"] = _binomial(int(hits[k]), int(tiers[k]))
            results.append(CoverageResult(value, "monte-carlo", float(beta), cfg, stderr=err,
                                          extra=extra))
        out[cfg] = results
    return out


def estimate_coverage(params, cfg, beta_grid, n_realizations, mode="distributional", seed=0,
                      **kwargs):
    """Monte Carlo coverage of one configuration over a β grid."""
    return estimate_coverage_grid(params, [cfg], beta_grid, n_realizations, mode, seed,
                                  **kwargs)[cfg]


# --------------------------------------------------------------------------- ABS baseline


def abs_threshold(beta, share, metric):
    """SIR threshold equivalent to β when only a fraction ``share`` of resources is used."""
    if metric == "sir":
        return beta
    if metric == "rate":
        return (1.0 + beta) ** (1.0 / share) - 1.0
    raise DomainError("metric must be 'rate' or 'sir'")


def _abs_chunk(args):
    (params, seed, start, stop, thresholds, betas, etas, side, wrap, user_field, metric) = args
    covered = np.zeros((len(thresholds), len(etas), len(betas)), dtype=np.int64)
    for r in range(start, stop):
        rng = _realization_rng(seed, r)
        scene = _build_scene(params, rng, side, wrap, user_field)
        ch = draw_channels(params, len(scene.macro_positions), len(scene.pico_positions),
                           "distributional", rng)
        dof = params.N1 if scene.typ_tier == 1 else params.N2
        signal = scene.typ_signal * ch.desired_exp[:dof].sum()
        macro_int = scene.macro_mean * ch.macro_gain
        pico_int = scene.pico_mean * ch.pico_gain
        for ti, (T1, T2) in enumerate(thresholds):
            counts, _ = scene.request_counts(T1, T2)
            muted = counts >= 1
            mi = macro_int.copy()
            pi = pico_int.copy()
            if scene.typ_tier == 1:
                in_abs_group = bool(muted[scene.typ_bs])
                mi[scene.typ_bs] = 0.0
            else:
                in_abs_group = False
                pi[scene.typ_bs] = 0.0
            if in_abs_group:
                interference = mi[muted].sum()
            else:
                interference = mi[~muted].sum() + pi.sum()
            sir = math.inf if interference == 0 else signal / interference
            for ei, eta in enumerate(etas):
                if not muted.any():
                    share = 1.0
                else:
                    share = (1.0 - eta) if in_abs_group else eta
                thr = abs_threshold(betas, share, metric)
                covered[ti, ei] += sir > thr
    return covered


def abs_baseline_sweep(params, thresholds, beta_grid, eta_grid, n_realizations, seed=0,
                       metric="rate", user_field="full", window_side=DEFAULT_WINDOW, wrap=False,
                       workers=1):
    """User-centric ABS coverage for every (T1, T2), η and β.

    Returns (coverage, stderr) arrays of shape (len(thresholds), len(eta_grid), len(beta_grid)).
    """
    etas = np.asarray(eta_grid, dtype=float)
    if np.any((etas <= 0) | (etas >= 1)):
        raise DomainError("eta values must lie in (0, 1)")
    betas = np.asarray(beta_grid, dtype=float)
    thresholds = [(float(a), float(b)) for a, b in thresholds]
    args = (params, int(seed), thresholds, betas, etas, float(window_side), bool(wrap),
            user_field, metric)
    total = 0
    for c in _run_chunks(_abs_chunk, args, n_realizations, workers):
        total = total + c
    cov = total / n_realizations
    err = np.sqrt(cov * (1.0 - cov) / n_realizations)
    return cov, err


def abs_baseline_coverage(params, T1, T2, beta, eta_grid, n_realizations, seed=0, **kwargs):
    """(best coverage, best η) of the user-centric ABS scheme at one β."""
    cov, _ = abs_baseline_sweep(params, [(T1, T2)], [beta], eta_grid, n_realizations, seed,
                                **kwargs)
    best = int(np.argmax(cov[0, :, 0]))
    return float(cov[0, best, 0]), float(np.asarray(eta_grid, dtype=float)[best])


# --------------------------------------------------------------------------- request statistics


def sample_request_counts(params, T1, T2, n_realizations, seed=0, user_field="ppp",
                          window_side=DEFAULT_WINDOW, wrap=False):
    """Number of IN requests received by a representative macro-BS, per realization.

    ``ppp``: a macro-BS at the origin and scheduled users drawn as PPPs of
    densities λ1, λ2 with independent serving-distance marks. ``full``: a
    uniformly chosen macro-BS of the central quarter-area sub-window of a full
    snapshot, counting requests from scheduled real users.
    """
    out = np.empty(n_realizations, dtype=np.int64)
    samplers = (ServingDistanceSampler(params, 1), ServingDistanceSampler(params, 2))
    for r in range(n_realizations):
        rng = _realization_rng(seed, r)
        if user_field == "ppp":
            total = 0
            for j, sampler in ((1, samplers[0]), (2, samplers[1])):
                lam_j, a_j, _, p_j = params.tier(j)
                T = T1 if j == 1 else T2
                pts = _points(rng, lam_j, window_side)
                marks = sampler.sample(rng, len(pts))
                d2 = np.einsum("ij,ij->i", pts, pts)
                log_siir = (math.log(p_j) - a_j * np.log(marks)) - (
                    math.log(params.P1) - 0.5 * params.alpha1 * np.log(d2)
                )
                total += int(np.count_nonzero((log_siir >= 0.0) & (log_siir < math.log(T))))
            out[r] = total
        elif user_field == "full":
            while True:
                scene = _build_scene(params, rng, window_side, wrap, "full")
                central = np.nonzero(np.all(np.abs(scene.macro_positions) <= window_side / 4,
                                            axis=1))[0]
                if len(central):
                    break
            ell = central[rng.integers(len(central))]
            others, _ = scene.requests(T1, T2)
            out[r] = int(others[:, ell].sum())
        else:
            raise DomainError(f"user_field must be one of {USER_FIELDS}")
    return out


def serving_u_in_histogram(params, cfg, n_realizations, seed=0, user_field="full",
                           window_side=DEFAULT_WINDOW, wrap=False):
    """Empirical distribution of u_IN at the typical user's serving macro-BS.

    Returns (counts per u = 0..U, number of macro-associated realizations).
    """
    hist = np.zeros(int(cfg.U) + 1, dtype=np.int64)
    macro_users = 0
    samplers = None
    if user_field == "ppp":
        samplers = (ServingDistanceSampler(params, 1), ServingDistanceSampler(params, 2))
    for r in range(n_realizations):
        rng = _realization_rng(seed, r)
        scene = _build_scene(params, rng, window_side, wrap, user_field, samplers)
        if scene.typ_tier != 1:
            continue
        counts, _ = scene.request_counts(cfg.T1, cfg.T2)
        hist[min(int(cfg.U), int(counts[scene.typ_bs]))] += 1
        macro_users += 1
    return hist, macro_users


def association_frequency(params, n_realizations, seed=0, window_side=DEFAULT_WINDOW):
    """Fraction of realizations in which the typical user associates with the macro tier."""
    hits = 0
    for r in range(n_realizations):
        rng = _realization_rng(seed, r)
        while True:
            macros = _points(rng, params.lambda1, window_side)
            picos = _points(rng, params.lambda2, window_side)
            if len(macros) and len(picos):
                break
        d2m = np.einsum("ij,ij->i", macros, macros).min()
        d2p = np.einsum("ij,ij->i", picos, picos).min()
        hits += params.P1 * d2m ** (-0.5 * params.alpha1) >= params.P2 * d2p ** (-0.5 * params.alpha2)
    return hits / n_realizations
