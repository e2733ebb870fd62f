import math

import numpy as np
import pytest
from scipy import stats

from hetnet_in import montecarlo as mc
from hetnet_in.errors import DomainError
from hetnet_in.network import INConfig, NetworkParams, db_to_linear, mean_in_requests, u_in_distribution


@pytest.fixture(scope="module")
def snapshot():
    return mc.sample_snapshot(NetworkParams(), INConfig(2, 2.0, 4.0), rng_seed=5)


def test_association_rule_exhaustive(snapshot):
    p = snapshot.params
    users = snapshot.user_positions
    d_m = np.linalg.norm(users[:, None] - snapshot.macro_positions[None], axis=2)
    d_p = np.linalg.norm(users[:, None] - snapshot.pico_positions[None], axis=2)
    pw = np.hstack([p.P1 * d_m ** -p.alpha1, p.P2 * d_p ** -p.alpha2])
    best = np.argmax(pw, axis=1)
    n_m = len(snapshot.macro_positions)
    tier = np.where(best < n_m, 1, 2)
    idx = np.where(best < n_m, best, best - n_m)
    assert np.array_equal(snapshot.associations[:, 0], tier)
    assert np.array_equal(snapshot.associations[:, 1], idx)


def test_scheduling_and_typical_user(snapshot):
    assert np.all(snapshot.user_positions[0] == 0.0)
    sched = snapshot.macro_schedule if snapshot.typical_tier == 1 else snapshot.pico_schedule
    assert sched[snapshot.typical_bs] == 0
    for tier, table in ((1, snapshot.macro_schedule), (2, snapshot.pico_schedule)):
        for bs, u in enumerate(table):
            if u >= 0:
                assert tuple(snapshot.associations[u]) == (tier, bs)


def test_requests_follow_siir_rule(snapshot):
    p, cfg = snapshot.params, snapshot.cfg
    scheduled = [u for u in np.concatenate([snapshot.macro_schedule, snapshot.pico_schedule]) if u >= 0]
    for ell, req in enumerate(snapshot.in_requests):
        expected = []
        for u in scheduled:
            tier, bs = snapshot.associations[u]
            if tier == 1 and bs == ell:
                continue
            pos = snapshot.user_positions[u]
            own = (snapshot.macro_positions if tier == 1 else snapshot.pico_positions)[bs]
            a, P = (p.alpha1, p.P1) if tier == 1 else (p.alpha2, p.P2)
            signal = P * np.linalg.norm(pos - own) ** -a
            interf = p.P1 * np.linalg.norm(pos - snapshot.macro_positions[ell]) ** -p.alpha1
            if signal / interf < cfg.threshold(tier):
                expected.append(u)
        assert sorted(req.tolist()) == sorted(expected)
        tgt = snapshot.in_targets[ell]
        assert len(tgt) == min(cfg.U, len(req)) and set(tgt) <= set(req)


def test_snapshot_dump(tmp_path, snapshot):
    path = tmp_path / "snap.txt"
    mc.dump_snapshot(snapshot, path)
    lines = path.read_text().splitlines()
    assert lines[0].split() == ["kind", "x", "y", "assoc_tier", "assoc_index", "scheduled"]
    expected = len(snapshot.macro_positions) + len(snapshot.pico_positions) + len(snapshot.user_positions)
    assert len(lines) == 1 + expected


def test_snapshot_argument_checks():
    with pytest.raises(DomainError):
        mc.sample_snapshot(NetworkParams(), INConfig(1), window_side=0.0)


def test_zf_beam_is_orthogonal_and_batched_matches_pinv():
    rng = np.random.default_rng(1)
    H = (rng.standard_normal((50, 4, 10)) + 1j * rng.standard_normal((50, 4, 10))) / math.sqrt(2)
    batched = mc.zfbf_precoders(H)
    for k in range(50):
        f = mc.zfbf_precoder(H[k])
        assert np.linalg.norm(f) == pytest.approx(1.0)
        assert np.max(np.abs(H[k, 1:] @ f)) < 1e-10
        assert np.allclose(np.abs(batched[k]), np.abs(f), atol=1e-10)
    with pytest.raises(DomainError):
        mc.zfbf_precoder(np.ones((3, 2)))
    with pytest.raises(np.linalg.LinAlgError):
        mc.zfbf_precoder(np.ones((2, 4)))


def test_exact_mode_nulls_selected_typical_user():
    p = NetworkParams()
    cfg = INConfig(3, 4.0, 4.0)
    for seed in range(40):
        snap = mc.sample_snapshot(p, cfg, rng_seed=seed)
        selecting = [ell for ell, t in enumerate(snap.in_targets) if 0 in t]
        if not selecting:
            continue
        scene = snap.scene
        ch = mc.draw_channels(p, len(scene.macro_positions), len(scene.pico_positions), "exact",
                              np.random.default_rng(seed))
        counts = snap.request_counts()
        sel = np.zeros(len(counts), dtype=bool)
        sel[selecting] = True
        _, gains, _ = mc._exact_gains(p, scene, ch, counts, sel, cfg.U)
        assert np.all(gains[selecting] < 1e-20)
        sir_a = mc.typical_sir(snap, ch, cfg)
        assert sir_a > 0
        return
    pytest.fail("no snapshot with a selecting macro-BS")


def test_gain_distributions_ks():
    rng = np.random.default_rng(3)
    n, N, u = 20000, 6, 2
    H = (rng.standard_normal((n, u + 1, N)) + 1j * rng.standard_normal((n, u + 1, N))) / math.sqrt(2)
    f = mc.zfbf_precoders(np.conj(H))
    desired = np.abs(np.einsum("bk,bk->b", np.conj(H[:, 0]), f)) ** 2
    g = (rng.standard_normal((n, N)) + 1j * rng.standard_normal((n, N))) / math.sqrt(2)
    interf = np.abs(np.einsum("bk,bk->b", np.conj(g), f)) ** 2
    assert stats.kstest(desired, stats.gamma(N - u).cdf).pvalue > 1e-3
    assert stats.kstest(interf, stats.expon().cdf).pvalue > 1e-3


def test_serving_distance_sampler_matches_density():
    p = NetworkParams()
    for tier in (1, 2):
        sampler = mc.ServingDistanceSampler(p, tier)
        y = sampler.sample(np.random.default_rng(tier), 20000)
        from hetnet_in.network import serving_distance_pdf
        from scipy import integrate
        cdf = lambda x: integrate.quad(lambda t: serving_distance_pdf(p, tier, t), 0, x)[0]
        assert stats.kstest(y, np.vectorize(cdf)).pvalue > 1e-3


def test_estimates_are_deterministic_and_grid_independent():
    p = NetworkParams()
    c1, c2 = INConfig(3, 2.0, 2.0), INConfig(6, 4.0, 4.0)
    betas = [1.0, 10.0]
    alone = mc.estimate_coverage(p, c1, betas, 150, seed=9)
    grid = mc.estimate_coverage_grid(p, [c2, c1], betas, 150, seed=9)
    again = mc.estimate_coverage(p, c1, betas, 150, seed=9)
    assert [r.value for r in alone] == [r.value for r in grid[c1]] == [r.value for r in again]
    assert alone[0].value >= alone[1].value


def test_worker_count_does_not_change_results():
    p = NetworkParams()
    cfg = INConfig(4, 2.0, 2.0)
    one = mc.estimate_coverage(p, cfg, [3.0], 80, seed=2, workers=1)
    two = mc.estimate_coverage(p, cfg, [3.0], 80, seed=2, workers=2)
    assert one[0].value == two[0].value and one[0].extra == two[0].extra


def test_estimator_metadata_and_checks():
    p = NetworkParams()
    res = mc.estimate_coverage(p, INConfig(0), [1e-6, 10.0], 100, seed=0)
    assert res[0].value == 1.0
    assert res[1].stderr == pytest.approx(math.sqrt(res[1].value * (1 - res[1].value) / 100))
    assert res[1].extra["macro_users"] + res[1].extra["pico_users"] == 100
    with pytest.raises(DomainError):
        mc.estimate_coverage(p, INConfig(0), [1.0], 0)
    with pytest.raises(DomainError):
        mc.estimate_coverage(p, INConfig(0), [1.0], 10, mode="other")
    with pytest.raises(DomainError):
        mc.estimate_coverage(p, INConfig(0), [1.0], 10, user_field="other")


def test_exact_and_ppp_modes_run():
    p = NetworkParams()
    cfg = INConfig(5, 2.0, 2.0)
    exact = mc.estimate_coverage(p, cfg, [10.0], 60, mode="exact", seed=1)
    ppp = mc.estimate_coverage(p, cfg, [10.0], 60, user_field="ppp", seed=1)
    wrapped = mc.estimate_coverage(p, cfg, [10.0], 60, wrap=True, seed=1)
    for r in exact + ppp + wrapped:
        assert 0.0 <= r.value <= 1.0


def test_request_count_mean_matches_analytic():
    p = NetworkParams()
    counts = mc.sample_request_counts(p, 2.0, 2.0, 3000, seed=4)
    mean = mean_in_requests(p, 2.0, 2.0)[0]
    assert abs(counts.mean() - mean) < 4 * math.sqrt(mean / 3000)
    full = mc.sample_request_counts(p, 2.0, 2.0, 50, seed=4, user_field="full")
    assert full.min() >= 0
    with pytest.raises(DomainError):
        mc.sample_request_counts(p, 2.0, 2.0, 1, user_field="bad")


def test_u_in_histogram_matches_pmf_in_ppp_mode():
    p = NetworkParams()
    cfg = INConfig(3, 2.0, 2.0)
    hist, n = mc.serving_u_in_histogram(p, cfg, 4000, seed=8, user_field="ppp")
    pmf = u_in_distribution(p, cfg)
    freq = hist / n
    err = np.sqrt(pmf * (1 - pmf) / n)
    assert np.all(np.abs(freq - pmf) <= 3 * err + 1e-12)


def test_abs_degenerates_without_requests():
    p = NetworkParams()
    b = float(db_to_linear(5.0))
    cov, err = mc.abs_baseline_sweep(p, [(1.0, 1.0)], [b], [0.2, 0.5, 0.8], 200, seed=6)
    assert np.all(cov[0, :, 0] == cov[0, 0, 0])
    simple = mc.estimate_coverage(p, INConfig(0), [b], 200, seed=6)[0].value
    assert cov[0, 0, 0] == simple


def test_abs_best_eta_is_exhaustive_max():
    p = NetworkParams()
    grid = [0.1, 0.3, 0.5, 0.7, 0.9]
    best, eta = mc.abs_baseline_coverage(p, 4.0, 4.0, 3.0, grid, 150, seed=2)
    table, _ = mc.abs_baseline_sweep(p, [(4.0, 4.0)], [3.0], grid, 150, seed=2)
    assert best == table.max() and eta == grid[int(np.argmax(table[0, :, 0]))]
    with pytest.raises(DomainError):
        mc.abs_baseline_coverage(p, 4.0, 4.0, 3.0, [0.0, 0.5], 10)


def test_abs_thresholds():
    assert mc.abs_threshold(3.0, 0.5, "sir") == 3.0
    assert mc.abs_threshold(3.0, 0.5, "rate") == pytest.approx(15.0)
    assert mc.abs_threshold(3.0, 1.0, "rate") == pytest.approx(3.0)
    with pytest.raises(DomainError):
        mc.abs_threshold(3.0, 0.5, "bits")


def test_stderr_bound_at_desk_scale():
    assert math.sqrt(0.25 / 1e5) <= 0.0016
