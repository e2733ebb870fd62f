"""Bundled experiment configurations reproducing the reference figure set.

Each preset is a list of run configurations in the format accepted by
:mod:`hetnet_in.cli`. Realization counts are desk-scale and can be
overridden with ``--realizations``.
"""

import copy

DEFAULT_REALIZATIONS = 100_000

_BASE_NETWORK = {
    "lambda1": 5e-4,
    "lambda2": 1e-3,
    "power_ratio_db": 15.0,
    "N1": 10,
    "N2": 8,
    "alpha1": 4.5,
    "alpha2": 4.7,
}


def _run(name, engines, network=None, scheme=None, **sections):
    net = dict(_BASE_NETWORK)
    net.update(network or {})
    cfg = {"name": name, "engine": engines, "network": net, "scheme": scheme or {}}
    if "monte-carlo" in engines or "abs-baseline" in engines or "compare" in engines:
        cfg["montecarlo"] = {"realizations": DEFAULT_REALIZATIONS, "seed": 1}
    cfg.update(sections)
    return cfg


def _db_range(lo, hi, step):
    count = int(round((hi - lo) / step))
    return [lo + step * i for i in range(count + 1)]


_LOW_SIR_OPT = {"N1": 6, "N2": 4}
_ETA_GRID = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]

PRESETS = {
    "fig2a": [_run("fig2a", ["analytic", "monte-carlo"],
                   scheme={"U": list(range(10)), "T1": [2.0, 4.0], "T2": [2.0, 4.0],
                           "beta_db": [10.0]})],
    "fig2b": [_run("fig2b", ["analytic", "monte-carlo"],
                   scheme={"U": [5], "T": [2.0, 4.0], "beta_db": _db_range(-10.0, 20.0, 5.0)})],
    "fig3": [_run("fig3", ["analytic", "asymptotic-low"],
                  scheme={"U": [6, 7], "T": [2.0, 4.0], "beta_db": _db_range(-30.0, 0.0, 2.5)},
                  analytic={"quantity": "outage"})],
    "fig4a": [_run("fig4a", ["analytic", "optimize-u-low"],
                   network=dict(_LOW_SIR_OPT, alpha1=4.0, alpha2=4.0),
                   scheme={"U": list(range(6)), "T": [1.8],
                           "beta_db": [-30.0, -25.0, -20.0, -15.0, -10.0, -8.0, -6.0, -4.0]},
                   analytic={"quantity": "outage"}, optimize={"exhaustive": True})],
    "fig4b": [_run("fig4b", ["analytic", "optimize-u-low"],
                   network=dict(_LOW_SIR_OPT, alpha1=4.5, alpha2=4.0),
                   scheme={"U": list(range(6)), "T": [1.8],
                           "beta_db": [-30.0, -25.0, -20.0, -15.0, -10.0, -8.0, -6.0, -4.0]},
                   analytic={"quantity": "outage"}, optimize={"exhaustive": True})],
    "fig5": [_run("fig5", ["optimize-u-low"],
                  network=dict(_LOW_SIR_OPT, alpha1=4.0, alpha2=4.0),
                  scheme={"T": [2.0], "beta_db": _db_range(-30.0, 0.0, 2.0)},
                  optimize={"exhaustive": True})],
    "fig6a": [_run("fig6a", ["analytic", "asymptotic-high"],
                   network={"alpha1": 4.0, "alpha2": 3.5},
                   scheme={"U": [0, 5, 9], "T": [2.0, 4.0], "beta_db": _db_range(20.0, 40.0, 2.5)})],
    "fig6b": [_run("fig6b", ["analytic", "asymptotic-high"],
                   network={"alpha1": 4.0, "alpha2": 4.0},
                   scheme={"U": [0, 5, 9], "T": [2.0, 4.0], "beta_db": _db_range(20.0, 40.0, 2.5)})],
    "fig7": [_run("fig7", ["compare"],
                  network={"alpha1": 4.5, "alpha2": 4.5, "N1": [10, 12, 14, 16, 18, 20],
                           "N2": [2, 4, 6, 8]},
                  scheme={"T": [6.0], "beta_db": [10.0]}, abs={"eta": _ETA_GRID})],
    "fig8": [_run("fig8", ["analytic"],
                  network=dict(_LOW_SIR_OPT, alpha1=4.0, alpha2=4.0),
                  scheme={"U": list(range(6)), "T": [4.0], "beta_db": _db_range(10.0, 30.0, 5.0)})],
    "fig9": [_run("fig9", ["optimize-u-high"],
                  network=dict(_LOW_SIR_OPT, alpha1=4.0, alpha2=4.0),
                  scheme={"T": [2.0], "beta_db": _db_range(16.0, 40.0, 4.0)},
                  optimize={"exhaustive": True})],
    "fig10": [_run("fig10", ["compare"],
                   network={"N1": 16, "N2": 8, "alpha2": 4.0,
                            "alpha1": [3.0, 3.5, 4.0, 4.5, 5.0, 5.5]},
                   scheme={"T": [6.0], "beta_db": [10.0]}, abs={"eta": _ETA_GRID})],
    "fig11": [_run("fig11", ["compare"],
                   network={"N1": 16, "N2": 8, "alpha1": 4.5, "alpha2": 4.5, "lambda2": 2e-3,
                            "power_ratio_db": [5.0, 10.0, 15.0, 20.0, 25.0]},
                   scheme={"T": [6.0], "beta_db": [10.0]}, abs={"eta": _ETA_GRID})],
}
PRESETS["fig4"] = PRESETS["fig4a"] + PRESETS["fig4b"]
PRESETS["fig6"] = PRESETS["fig6a"] + PRESETS["fig6b"]


def get_preset(name):
    """Deep copy of a named preset (list of run configurations)."""
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}")
    return copy.deepcopy(PRESETS[name])
