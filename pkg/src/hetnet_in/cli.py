"""Configuration-driven experiment runner.

A configuration is a JSON document describing one run, a list of runs, or
``{"runs": [...]}``. See ``docs/config-schema.md`` for the schema. Every
network or scheme leaf may be a scalar or a list; lists are swept as a
Cartesian grid. SIR thresholds are given in dB and converted once, at parse
time.
"""

import argparse
from concurrent.futures import ProcessPoolExecutor
import csv
from dataclasses import dataclass, field
import hashlib
import io
import itertools
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .asymptotics import (
    high_sir_bounds,
    high_sir_equal_alpha,
    low_sir_outage,
    optimal_u_high,
    optimal_u_low,
)
from .coverage import coverage_overall, outage_overall
from .errors import ConfigError
from .montecarlo import CHANNEL_MODES, DEFAULT_WINDOW, USER_FIELDS, abs_baseline_sweep, estimate_coverage_grid
from .network import INConfig, NetworkParams, db_to_linear
from .presets import DEFAULT_REALIZATIONS, PRESETS, get_preset

EXIT_OK, EXIT_INVALID, EXIT_ENGINE = 0, 1, 2

ENGINES = (
    "analytic",
    "asymptotic-low",
    "asymptotic-high",
    "monte-carlo",
    "abs-baseline",
    "optimize-u-low",
    "optimize-u-high",
    "compare",
)
NETWORK_KEYS = ("lambda1", "lambda2", "power_ratio_db", "N1", "N2", "alpha1", "alpha2", "lambda_u")
INT_KEYS = {"N1", "N2"}
COLUMNS = (
    "run", "engine", *NETWORK_KEYS, "U", "T1", "T2", "beta_db", "eta",
    "method", "quantity", "value", "stderr", "wall_time_ms",
)
RUN_KEYS = {"name", "engine", "network", "scheme", "analytic", "montecarlo", "abs", "optimize",
            "output", "workers"}
SCHEME_KEYS = {"U", "T", "T1", "T2", "beta_db"}
MC_KEYS = {"realizations", "seed", "mode", "user_field", "window", "wrap", "workers"}
ABS_KEYS = {"eta", "metric"}
DEFAULT_ETA = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]


class EngineError(RuntimeError):
    pass


# --------------------------------------------------------------------------- parsing


@dataclass
class RunSpec:
    name: str
    engines: list
    network_grid: list            # list of dicts keyed by NETWORK_KEYS
    U: list
    thresholds: list              # list of (T1, T2)
    beta_db: list
    quantity: str = "coverage"
    mc: dict = field(default_factory=dict)
    eta: list = field(default_factory=lambda: list(DEFAULT_ETA))
    metric: str = "rate"
    exhaustive: bool = False
    workers: int = 1


def _as_list(value):
    return list(value) if isinstance(value, (list, tuple)) else [value]


def _sorted_unique(values):
    return sorted(set(values))


def _is_number(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _numbers(path, value, errors, integer=False):
    values = _as_list(value)
    if not values:
        errors.append(f"{path}: sweep lists must be non-empty")
        return []
    out = []
    for v in values:
        if not _is_number(v) or (integer and int(v) != v):
            kind = "integer" if integer else "number"
            errors.append(f"{path}: expected a {kind}, got {v!r}")
            continue
        out.append(int(v) if integer else float(v))
    return _sorted_unique(out)


def _unknown(path, given, allowed, errors):
    for key in sorted(set(given) - set(allowed)):
        errors.append(f"{path}.{key}: unknown key")


def _network_problems(point):
    fields = {k: v for k, v in point.items() if k != "power_ratio_db"}
    fields["P1"] = float(db_to_linear(point["power_ratio_db"]))
    fields["P2"] = 1.0
    probe = object.__new__(NetworkParams)
    for k, v in fields.items():
        object.__setattr__(probe, k, v)
    return NetworkParams.problems(probe)


def network_params(point):
    return NetworkParams(
        lambda1=point["lambda1"], lambda2=point["lambda2"],
        P1=float(db_to_linear(point["power_ratio_db"])), P2=1.0,
        N1=int(point["N1"]), N2=int(point["N2"]),
        alpha1=point["alpha1"], alpha2=point["alpha2"], lambda_u=point["lambda_u"],
    )


def _parse_run(doc, index, errors):
    where = f"runs[{index}]"
    if not isinstance(doc, dict):
        errors.append(f"{where}: a run must be a JSON object")
        return None
    _unknown(where, doc, RUN_KEYS, errors)
    name = str(doc.get("name", f"run{index}"))

    engines = _as_list(doc.get("engine", "analytic"))
    if not engines:
        errors.append(f"{where}.engine: sweep lists must be non-empty")
    for e in engines:
        if e not in ENGINES:
            errors.append(f"{where}.engine: unknown engine {e!r}; choose from {', '.join(ENGINES)}")

    net_doc = doc.get("network", {})
    _unknown(f"{where}.network", net_doc, NETWORK_KEYS, errors)
    defaults = NetworkParams()
    default_point = {
        "lambda1": defaults.lambda1, "lambda2": defaults.lambda2, "power_ratio_db": 15.0,
        "N1": defaults.N1, "N2": defaults.N2, "alpha1": defaults.alpha1,
        "alpha2": defaults.alpha2, "lambda_u": defaults.lambda_u,
    }
    axes = []
    for key in NETWORK_KEYS:
        raw = net_doc.get(key, default_point[key])
        axes.append(_numbers(f"{where}.network.{key}", raw, errors, integer=key in INT_KEYS))
    grid = [dict(zip(NETWORK_KEYS, combo)) for combo in itertools.product(*axes)]
    for point in grid:
        for msg in _network_problems(point):
            label = ", ".join(f"{k}={point[k]!r}" for k in NETWORK_KEYS)
            errors.append(f"{where}.network ({label}): {msg}")

    scheme = doc.get("scheme", {})
    _unknown(f"{where}.scheme", scheme, SCHEME_KEYS, errors)
    U = _numbers(f"{where}.scheme.U", scheme.get("U", 0), errors, integer=True)
    if "T" in scheme and ("T1" in scheme or "T2" in scheme):
        errors.append(f"{where}.scheme.T: give either T or T1/T2, not both")
    if "T" in scheme:
        tied = _numbers(f"{where}.scheme.T", scheme["T"], errors)
        thresholds = [(t, t) for t in tied]
    else:
        t1 = _numbers(f"{where}.scheme.T1", scheme.get("T1", 1.0), errors)
        t2 = _numbers(f"{where}.scheme.T2", scheme.get("T2", 1.0), errors)
        thresholds = list(itertools.product(t1, t2))
    beta_db = _numbers(f"{where}.scheme.beta_db", scheme.get("beta_db", [10.0]), errors)
    for point in grid:
        for u in U:
            for t1, t2 in thresholds:
                for msg in INConfig.problems(_ConfigProbe(u, t1, t2), point["N1"]):
                    errors.append(f"{where}.scheme (U={u}, T1={t1!r}, T2={t2!r}, N1={point['N1']}): {msg}")

    analytic = doc.get("analytic", {})
    _unknown(f"{where}.analytic", analytic, {"quantity"}, errors)
    quantity = analytic.get("quantity", "coverage")
    if quantity not in ("coverage", "outage"):
        errors.append(f"{where}.analytic.quantity: must be 'coverage' or 'outage'")

    mc_doc = doc.get("montecarlo", {})
    _unknown(f"{where}.montecarlo", mc_doc, MC_KEYS, errors)
    mc = {
        "realizations": mc_doc.get("realizations", DEFAULT_REALIZATIONS),
        "seed": mc_doc.get("seed", 0),
        "mode": mc_doc.get("mode", "distributional"),
        "user_field": mc_doc.get("user_field", "full"),
        "window": mc_doc.get("window", DEFAULT_WINDOW),
        "wrap": mc_doc.get("wrap", False),
        "workers": mc_doc.get("workers", 1),
    }
    for key in ("realizations", "workers"):
        if not (isinstance(mc[key], int) and not isinstance(mc[key], bool) and mc[key] >= 1):
            errors.append(f"{where}.montecarlo.{key}: must be a positive integer")
    if not (isinstance(mc["seed"], int) and not isinstance(mc["seed"], bool) and mc["seed"] >= 0):
        errors.append(f"{where}.montecarlo.seed: must be a non-negative integer")
    if mc["mode"] not in CHANNEL_MODES:
        errors.append(f"{where}.montecarlo.mode: must be one of {', '.join(CHANNEL_MODES)}")
    if mc["user_field"] not in USER_FIELDS:
        errors.append(f"{where}.montecarlo.user_field: must be one of {', '.join(USER_FIELDS)}")
    if not (_is_number(mc["window"]) and mc["window"] > 0):
        errors.append(f"{where}.montecarlo.window: must be a positive number")
    if not isinstance(mc["wrap"], bool):
        errors.append(f"{where}.montecarlo.wrap: must be true or false")

    abs_doc = doc.get("abs", {})
    _unknown(f"{where}.abs", abs_doc, ABS_KEYS, errors)
    eta = _numbers(f"{where}.abs.eta", abs_doc.get("eta", DEFAULT_ETA), errors)
    if any(not 0 < e < 1 for e in eta):
        errors.append(f"{where}.abs.eta: values must lie strictly between 0 and 1")
    metric = abs_doc.get("metric", "rate")
    if metric not in ("rate", "sir"):
        errors.append(f"{where}.abs.metric: must be 'rate' or 'sir'")

    opt = doc.get("optimize", {})
    _unknown(f"{where}.optimize", opt, {"exhaustive"}, errors)
    exhaustive = opt.get("exhaustive", False)
    if not isinstance(exhaustive, bool):
        errors.append(f"{where}.optimize.exhaustive: must be true or false")

    workers = doc.get("workers", 1)
    if not (isinstance(workers, int) and not isinstance(workers, bool) and workers >= 1):
        errors.append(f"{where}.workers: must be a positive integer")

    return RunSpec(name, engines, grid, U, thresholds, beta_db, quantity, mc, eta, metric,
                   exhaustive, workers)


class _ConfigProbe:
    """Duck-typed stand-in so INConfig invariants can be listed without raising."""

    def __init__(self, U, T1, T2):
        self.U, self.T1, self.T2 = U, T1, T2


def _runs_of(document):
    if isinstance(document, list):
        return document
    if isinstance(document, dict) and "runs" in document:
        return document["runs"]
    return [document]


def validate_document(document):
    """All violated invariants of a configuration document (empty when valid)."""
    errors = []
    runs = _runs_of(document)
    if not isinstance(runs, list) or not runs:
        return ["runs: at least one run is required"]
    for i, run in enumerate(runs):
        _parse_run(run, i, errors)
    return errors


def parse_document(document):
    errors = []
    runs = _runs_of(document)
    if not isinstance(runs, list) or not runs:
        raise ConfigError(["runs: at least one run is required"])
    specs = [_parse_run(run, i, errors) for i, run in enumerate(runs)]
    if errors:
        raise ConfigError(errors)
    return specs


def _without_workers(node):
    if isinstance(node, dict):
        return {k: _without_workers(v) for k, v in node.items() if k != "workers"}
    if isinstance(node, list):
        return [_without_workers(v) for v in node]
    return node


def config_hash(document):
    """SHA-256 of the canonical configuration; parallelism settings are excluded."""
    canonical = json.dumps(_without_workers(document), sort_keys=True, separators=(",", ":"),
                           ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# --------------------------------------------------------------------------- engines


def _row(spec, engine, point, **values):
    row = {c: None for c in COLUMNS}
    row.update(run=spec.name, engine=engine, **point)
    row.update(values)
    return row


def _scheme_grid(spec):
    return [(u, t1, t2, b) for u in spec.U for (t1, t2) in spec.thresholds for b in spec.beta_db]


def _analytic_point(args):
    point, quantity, u, t1, t2, b_db = args
    params = network_params(point)
    cfg = INConfig(u, t1, t2)
    beta = float(db_to_linear(b_db))
    if quantity == "outage":
        return outage_overall(params, cfg, beta).value
    return coverage_overall(params, cfg, beta).value


def _pool_map(fn, items, workers):
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def _engine_analytic(spec, point, params):
    grid = _scheme_grid(spec)
    values = _pool_map(_analytic_point, [(point, spec.quantity) + g for g in grid], spec.workers)
    return [_row(spec, "analytic", point, U=u, T1=t1, T2=t2, beta_db=b, method="analytic",
                 quantity=spec.quantity, value=v)
            for (u, t1, t2, b), v in zip(grid, values)]


def _engine_asymptotic_low(spec, point, params):
    rows = []
    for u, t1, t2, b in _scheme_grid(spec):
        value = low_sir_outage(params, INConfig(u, t1, t2), float(db_to_linear(b)))
        rows.append(_row(spec, "asymptotic-low", point, U=u, T1=t1, T2=t2, beta_db=b,
                         method="asymptotic-low", quantity="outage", value=value))
    return rows


def _engine_asymptotic_high(spec, point, params):
    rows = []
    for u, t1, t2, b in _scheme_grid(spec):
        cfg = INConfig(u, t1, t2)
        beta = float(db_to_linear(b))
        common = dict(U=u, T1=t1, T2=t2, beta_db=b, method="asymptotic-high")
        if params.alpha1 == params.alpha2:
            value = high_sir_equal_alpha(params, cfg).coverage(beta)
            rows.append(_row(spec, "asymptotic-high", point, quantity="coverage", value=value,
                             **common))
        else:
            lo, hi = high_sir_bounds(params, cfg).bounds(beta)
            rows.append(_row(spec, "asymptotic-high", point, quantity="coverage-lower-bound",
                             value=lo, **common))
            rows.append(_row(spec, "asymptotic-high", point, quantity="coverage-upper-bound",
                             value=hi, **common))
    return rows


def _mc_kwargs(spec):
    mc = spec.mc
    return dict(seed=mc["seed"], user_field=mc["user_field"], window_side=mc["window"],
                wrap=mc["wrap"], workers=mc["workers"])


def _engine_monte_carlo(spec, point, params):
    cfgs = [INConfig(u, t1, t2) for u in spec.U for (t1, t2) in spec.thresholds]
    betas = [float(db_to_linear(b)) for b in spec.beta_db]
    results = estimate_coverage_grid(params, cfgs, betas, spec.mc["realizations"],
                                     mode=spec.mc["mode"], **_mc_kwargs(spec))
    rows = []
    for cfg in cfgs:
        for b, res in zip(spec.beta_db, results[cfg]):
            rows.append(_row(spec, "monte-carlo", point, U=cfg.U, T1=cfg.T1, T2=cfg.T2,
                             beta_db=b, method="monte-carlo", quantity="coverage",
                             value=res.value, stderr=res.stderr))
    return rows


def _abs_table(spec, params):
    betas = [float(db_to_linear(b)) for b in spec.beta_db]
    kw = _mc_kwargs(spec)
    return abs_baseline_sweep(params, spec.thresholds, betas, spec.eta, spec.mc["realizations"],
                              metric=spec.metric, **kw)


def _engine_abs(spec, point, params):
    cov, err = _abs_table(spec, params)
    rows = []
    for ti, (t1, t2) in enumerate(spec.thresholds):
        for bi, b in enumerate(spec.beta_db):
            best = int(np.argmax(cov[ti, :, bi]))
            rows.append(_row(spec, "abs-baseline", point, T1=t1, T2=t2, beta_db=b,
                             eta=spec.eta[best], method="abs-baseline", quantity="coverage",
                             value=float(cov[ti, best, bi]), stderr=float(err[ti, best, bi])))
    return rows


def _engine_optimize(spec, point, params, regime):
    engine = f"optimize-u-{regime}"
    rows = []
    for t1, t2 in spec.thresholds:
        u_star = (optimal_u_low if regime == "low" else optimal_u_high)(params, t1, t2)
        rows.append(_row(spec, engine, point, T1=t1, T2=t2, method=engine,
                         quantity="optimal_U", value=u_star))
        if not spec.exhaustive:
            continue
        for b in spec.beta_db:
            beta = float(db_to_linear(b))
            if regime == "low":
                vals = [outage_overall(params, INConfig(u, t1, t2), beta).value
                        for u in range(params.N1)]
                best = int(np.argmin(vals))
            else:
                vals = [coverage_overall(params, INConfig(u, t1, t2), beta).value
                        for u in range(params.N1)]
                best = int(np.argmax(vals))
            rows.append(_row(spec, engine, point, T1=t1, T2=t2, beta_db=b,
                             method="exhaustive", quantity="optimal_U", value=best))
    return rows


def _engine_compare(spec, point, params):
    cov, err = _abs_table(spec, params)
    rows = []
    for ti, (t1, t2) in enumerate(spec.thresholds):
        for bi, b in enumerate(spec.beta_db):
            beta = float(db_to_linear(b))
            vals = [coverage_overall(params, INConfig(u, t1, t2), beta).value
                    for u in range(params.N1)]
            u_best = int(np.argmax(vals))
            e_best = int(np.argmax(cov[ti, :, bi]))
            rows.append(_row(spec, "compare", point, U=u_best, T1=t1, T2=t2, beta_db=b,
                             method="in", quantity="coverage", value=vals[u_best]))
            rows.append(_row(spec, "compare", point, T1=t1, T2=t2, beta_db=b,
                             eta=spec.eta[e_best], method="abs", quantity="coverage",
                             value=float(cov[ti, e_best, bi]), stderr=float(err[ti, e_best, bi])))
            rows.append(_row(spec, "compare", point, U=0, T1=t1, T2=t2, beta_db=b,
                             method="simple", quantity="coverage", value=vals[0]))
    return rows


_DISPATCH = {
    "analytic": _engine_analytic,
    "asymptotic-low": _engine_asymptotic_low,
    "asymptotic-high": _engine_asymptotic_high,
    "monte-carlo": _engine_monte_carlo,
    "abs-baseline": _engine_abs,
    "optimize-u-low": lambda s, p, n: _engine_optimize(s, p, n, "low"),
    "optimize-u-high": lambda s, p, n: _engine_optimize(s, p, n, "high"),
    "compare": _engine_compare,
}


def run_specs(specs, timing=False):
    """Evaluate every run; rows come out in deterministic grid order."""
    rows = []
    for spec in specs:
        for engine in spec.engines:
            for point in spec.network_grid:
                params = network_params(point)
                start = time.perf_counter()
                try:
                    produced = _DISPATCH[engine](spec, point, params)
                except Exception as exc:
                    label = ", ".join(f"{k}={point[k]!r}" for k in NETWORK_KEYS)
                    raise EngineError(f"{spec.name}/{engine} at ({label}): "
                                      f"{type(exc).__name__}: {exc}") from exc
                if timing:
                    elapsed = (time.perf_counter() - start) * 1e3
                    for r in produced:
                        r["wall_time_ms"] = elapsed
                rows.extend(produced)
    return rows


def run(document, timing=False, workers=None):
    """Parse, validate and evaluate a configuration document; returns the rows.

    ``workers`` overrides both the grid-point pool and the Monte Carlo pool.
    """
    specs = parse_document(document)
    if workers is not None:
        for spec in specs:
            spec.workers = workers
            spec.mc["workers"] = workers
    return run_specs(specs, timing=timing)


# --------------------------------------------------------------------------- persistence


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def format_table(rows, digest):
    buf = io.StringIO()
    buf.write(f"# hetnet-in {__version__} config_sha256={digest}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in rows:
        writer.writerow([_cell(r[c]) for c in COLUMNS])
    return buf.getvalue()


def write_table(rows, digest, path):
    text = format_table(rows, digest)
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


_TEXT_COLUMNS = {"run", "engine", "method", "quantity"}
_INT_COLUMNS = {"N1", "N2", "U"}


def read_table(path):
    """(comment line, rows) with numeric cells converted back to int/float."""
    with open(path, encoding="utf-8", newline="") as fh:
        comment = fh.readline().rstrip("\n")
        reader = csv.DictReader(fh)
        rows = []
        for raw in reader:
            row = {}
            for key, cell in raw.items():
                if cell == "":
                    row[key] = None
                elif key in _TEXT_COLUMNS:
                    row[key] = cell
                elif key in _INT_COLUMNS:
                    row[key] = int(cell)
                else:
                    row[key] = float(cell)
            rows.append(row)
    return comment, rows


# --------------------------------------------------------------------------- command line

_SUBCOMMAND_ENGINES = {
    "analytic": ("analytic",),
    "simulate": ("monte-carlo",),
    "asymptotic": ("asymptotic-low", "asymptotic-high"),
    "optimize-u": ("optimize-u-low", "optimize-u-high"),
    "compare": ("compare",),
}


def _load_document(args):
    if args.preset and args.config:
        raise ConfigError(["give either --config or --preset, not both"])
    if args.preset:
        try:
            return get_preset(args.preset)
        except KeyError as exc:
            raise ConfigError([str(exc.args[0])])
    if not args.config:
        raise ConfigError(["a configuration is required (--config or --preset)"])
    try:
        with open(args.config, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError([f"cannot read {args.config}: {exc.strerror}"])
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{args.config}: invalid JSON ({exc.msg} at line {exc.lineno})"])


def _apply_overrides(document, args):
    runs = _runs_of(document)
    if not isinstance(runs, list):
        return document
    for run_doc in runs:
        if not isinstance(run_doc, dict):
            continue
        if args.command in _SUBCOMMAND_ENGINES:
            allowed = _SUBCOMMAND_ENGINES[args.command]
            chosen = [e for e in _as_list(run_doc.get("engine", [])) if e in allowed]
            if not chosen:
                regime = getattr(args, "regime", None) or "low"
                chosen = [allowed[0] if len(allowed) == 1 else f"{allowed[0].rsplit('-', 1)[0]}-{regime}"]
            run_doc["engine"] = chosen
        mc = run_doc.setdefault("montecarlo", {}) if (args.seed is not None or args.realizations is not None) else None
        if args.seed is not None:
            mc["seed"] = args.seed
        if args.realizations is not None:
            mc["realizations"] = args.realizations
    return document


def build_parser():
    parser = argparse.ArgumentParser(prog="hetnet-in", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("analytic", "simulate", "asymptotic", "optimize-u", "compare", "validate", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--preset", choices=sorted(PRESETS), help="bundled figure configuration")
        p.add_argument("--out", help="output CSV path (default: config 'output' or stdout)")
        p.add_argument("--seed", type=int, help="override the Monte Carlo seed")
        p.add_argument("--realizations", type=int, help="override the Monte Carlo sample size")
        p.add_argument("--workers", type=int, help="worker processes for grid points")
        p.add_argument("--timing", action="store_true", help="record wall_time_ms per row")
        if name in ("asymptotic", "optimize-u"):
            p.add_argument("--regime", choices=("low", "high"),
                           help="SIR regime when the config names no matching engine")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        document = _apply_overrides(_load_document(args), args)
    except ConfigError as exc:
        for msg in exc.messages:
            print(f"error: {msg}", file=sys.stderr)
        return EXIT_INVALID
    problems = validate_document(document)
    if args.command == "validate":
        for msg in problems:
            print(f"error: {msg}")
        if not problems:
            print("configuration is valid")
        return EXIT_INVALID if problems else EXIT_OK
    if problems:
        for msg in problems:
            print(f"error: {msg}", file=sys.stderr)
        return EXIT_INVALID
    try:
        if args.workers is not None and args.workers < 1:
            print("error: --workers must be a positive integer", file=sys.stderr)
            return EXIT_INVALID
        rows = run(document, timing=args.timing, workers=args.workers)
    except EngineError as exc:
        print(f"engine error: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    out = args.out
    if out is None:
        runs = _runs_of(document)
        out = runs[0].get("output") if len(runs) == 1 else None
    write_table(rows, config_hash(document), out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
