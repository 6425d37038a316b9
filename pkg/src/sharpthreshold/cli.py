"""Command-line experiment runner.

Every command accepts ``--config FILE`` (key=value lines); explicit flags
override file values.  The default seed comes from SHARPTHRESHOLD_SEED when
set.  Output files embed the config hash, seed, replica count and code
version; they are byte-identical across reruns with equal configuration, so
wall-clock timing goes to stderr only.

Exit codes: 0 pass, 1 assertion failure, 2 configuration error.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import __version__
from .boolfn import ProductMeasure, all_monotone_functions, random_monotone
from .curves import CurveFamily
from .decisiontree import osss_check, standard_tree_suite
from .graphprops import default_giant_size, threshold_experiment
from .lattice import RectangleRegion, cycle_graph
from .percolation import (
    CrossingEvent,
    direct_mc_curve,
    duality_complement_check_batch,
    newman_ziff_sweep,
    theta_curve,
)
from .randomcluster import (
    ExactMeasure,
    RandomClusterParams,
    fkg_check,
    heat_bath_probability,
    monotonic_osss_check,
    monotonicity_check,
)
from .rng import stream
from .spectral import fourier_walsh, gradient_spectrum_check
from .threshold import critical_estimator, talagrand_bound, window_from_curve

# Calibrated once on a pilot run of the d=2 pipeline (boxes up to n=32,
# 10^4 replicas) and fixed; see cmd theta.
DEFAULT_THRESHOLD_RATIO = 0.92


def _fail(message: str) -> None:
    click.echo(f"FAIL {message}")
    sys.exit(1)


def _config_hash(params: dict) -> str:
    canon = json.dumps(params, sort_keys=True, default=str)
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


def _metadata(params: dict) -> dict:
    return {
        "config_hash": _config_hash(params),
        "seed": params.get("seed"),
        "replicas": params.get("replicas"),
        "version": __version__,
    }


def _parse_grid(text: str) -> np.ndarray:
    try:
        lo, hi, steps = text.split(":")
        grid = np.linspace(float(lo), float(hi), int(steps))
    except ValueError as exc:
        raise click.UsageError(f"bad grid {text!r}; expected lo:hi:steps") from exc
    if len(grid) < 2:
        raise click.UsageError("grid needs at least 2 points")
    return grid


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise click.UsageError(f"cannot read config file: {exc}") from exc
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise click.UsageError(f"bad config line {line!r}; expected key=value")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _merged(ctx: click.Context, config: str | None, **flags):
    """File values fill in wherever the flag was not given explicitly."""
    file_values = _load_config(config)
    out = {}
    for key, value in flags.items():
        source = ctx.get_parameter_source(key)
        if source is not None and source.name != "DEFAULT":
            out[key] = value
        elif key in file_values:
            out[key] = type(value)(file_values[key]) if value is not None else file_values[key]
        else:
            out[key] = value
    for key, value in file_values.items():
        out.setdefault(key, value)
    return out


def _write(path: str, content: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(content)
    click.echo(f"wrote {path}", err=True)


@click.group()
@click.version_option(version=__version__)
def main() -> None:
    """Sharp-threshold experiments: crossings, one-arm decay, inequalities, ER."""


@main.command("crossing")
@click.option("--n", type=int, required=True, help="rectangle width parameter")
@click.option("--m", type=int, default=None, help="rectangle height (default: from --rho)")
@click.option("--rho", type=float, default=None, help="aspect ratio m = rho * n")
@click.option("--direction", type=click.Choice(["h", "v"]), default="h", show_default=True)
@click.option("--grid", default="0.35:0.65:31", show_default=True, help="p grid lo:hi:steps")
@click.option("--replicas", type=int, default=10000, show_default=True)
@click.option("--seed", type=int, default=0, envvar="SHARPTHRESHOLD_SEED", show_default=True)
@click.option("--method", type=click.Choice(["nz", "direct"]), default="nz", show_default=True)
@click.option("--workers", type=int, default=None, help="parallel replica batches")
@click.option("--out", default="crossing.csv", show_default=True)
@click.option("--config", default=None, help="key=value config file; flags override")
@click.pass_context
def cmd_crossing(ctx, n, m, rho, direction, grid, replicas, seed, method, workers, out, config):
    """Crossing-probability sweep for R(n, m) via Newman-Ziff."""
    params = _merged(ctx, config, n=n, m=m, rho=rho, direction=direction, grid=grid,
                     replicas=replicas, seed=seed, method=method, workers=workers, out=out)
    n = int(params["n"])
    if params["m"] is None and params["rho"] is None:
        raise click.UsageError("give --m or --rho")
    m = int(params["m"]) if params["m"] is not None else int(round(float(params["rho"]) * n))
    if n < 1 or m < 1:
        raise click.UsageError("rectangle sides must be >= 1")
    t0 = time.monotonic()
    region = RectangleRegion(n, m)
    p_grid = _parse_grid(params["grid"])
    event = CrossingEvent(params["direction"])
    runner = newman_ziff_sweep if params["method"] == "nz" else direct_mc_curve
    curve = runner(region, event, p_grid, int(params["replicas"]), int(params["seed"]),
                   workers=params["workers"] or os.cpu_count())
    _write(params["out"], curve.to_csv(_metadata(params)))
    click.echo(f"crossing sweep done in {time.monotonic() - t0:.1f}s", err=True)


@main.command("theta")
@click.option("--dim", type=int, default=2, show_default=True)
@click.option("--n-max", type=int, default=32, show_default=True, help="use boxes 1..n-max")
@click.option("--grid", default="0.40:0.60:21", show_default=True)
@click.option("--replicas", type=int, default=10000, show_default=True)
@click.option("--seed", type=int, default=0, envvar="SHARPTHRESHOLD_SEED", show_default=True)
@click.option("--threshold-ratio", type=float, default=DEFAULT_THRESHOLD_RATIO, show_default=True)
@click.option("--workers", type=int, default=None)
@click.option("--out-prefix", default="theta", show_default=True)
@click.option("--config", default=None)
@click.pass_context
def cmd_theta(ctx, dim, n_max, grid, replicas, seed, threshold_ratio, workers, out_prefix, config):
    """One-arm curves theta_n(p), partial sums S_n, and the critical estimate."""
    params = _merged(ctx, config, dim=dim, n_max=n_max, grid=grid, replicas=replicas,
                     seed=seed, threshold_ratio=threshold_ratio, workers=workers,
                     out_prefix=out_prefix)
    t0 = time.monotonic()
    p_grid = _parse_grid(params["grid"])
    n_list = list(range(1, int(params["n_max"]) + 1))
    result = theta_curve(int(params["dim"]), n_list, p_grid, int(params["replicas"]),
                         int(params["seed"]), workers=params["workers"] or os.cpu_count())
    family = result.family()
    meta = _metadata(params)
    _write(f"{params['out_prefix']}_curves.csv", family.to_csv(meta))
    s_lines = [f"# {k}: {v}" for k, v in meta.items()]
    s_lines.append("n,p,S_n")
    for n in n_list:
        s_vals = result.s_values(n)
        for p, s in zip(p_grid, s_vals):
            s_lines.append(f"{n},{float(p)!r},{float(s)!r}")
    _write(f"{params['out_prefix']}_sums.csv", "\n".join(s_lines) + "\n")
    estimate = critical_estimator(family, float(params["threshold_ratio"]))
    top = max(estimate.ratio_curves)
    doc = {
        "p_hat": estimate.x_hat,
        "censored": estimate.censored,
        "threshold_ratio": estimate.threshold_ratio,
        "sizes": sorted(estimate.ratio_curves),
        "ratio_at_largest_n": estimate.ratio_curves[top].tolist(),
        **meta,
    }
    _write(f"{params['out_prefix']}_critical.json", json.dumps(doc, indent=2) + "\n")
    click.echo(f"theta pipeline done in {time.monotonic() - t0:.1f}s", err=True)


@main.command("er")
@click.option("--property", "property_name", type=click.Choice(["connectivity", "giant"]),
              default="connectivity", show_default=True)
@click.option("--n", type=int, default=1000, show_default=True)
@click.option("--grid", default=None, help="p grid lo:hi:steps (default: around the threshold)")
@click.option("--replicas", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, envvar="SHARPTHRESHOLD_SEED", show_default=True)
@click.option("--epsilon", type=float, default=0.1, show_default=True)
@click.option("--out-prefix", default="er", show_default=True)
@click.option("--config", default=None)
@click.pass_context
def cmd_er(ctx, property_name, n, grid, replicas, seed, epsilon, out_prefix, config):
    """Erdos-Renyi property curve plus its epsilon-window."""
    params = _merged(ctx, config, property_name=property_name, n=n, grid=grid,
                     replicas=replicas, seed=seed, epsilon=epsilon, out_prefix=out_prefix)
    n = int(params["n"])
    if params["grid"] is not None:
        p_grid = _parse_grid(params["grid"])
    elif params["property_name"] == "connectivity":
        center = math.log(n) / n
        p_grid = np.linspace(0.2 * center, 2.5 * center, 47)
    else:
        p_grid = np.linspace(0.2 / n, 3.0 / n, 47)
    t0 = time.monotonic()
    curve, window = threshold_experiment(
        params["property_name"], n, p_grid, int(params["replicas"]), int(params["seed"]),
        epsilon=float(params["epsilon"]),
    )
    meta = _metadata(params)
    if params["property_name"] == "giant":
        meta["r"] = default_giant_size(n)
    _write(f"{params['out_prefix']}_curve.csv", curve.to_csv(meta))
    doc = json.loads(window.to_json())
    doc.update(meta)
    _write(f"{params['out_prefix']}_window.json", json.dumps(doc, indent=2) + "\n")
    click.echo(f"er experiment done in {time.monotonic() - t0:.1f}s", err=True)


# ---------------------------------------------------------------------------
# exact-identity suites
# ---------------------------------------------------------------------------


def _suite_parseval(seed: int) -> list[str]:
    from .boolfn import random_function

    lines = []
    rng = stream(seed, 1)
    worst = 0.0
    for trial in range(200):
        n = int(rng.integers(2, 9))
        f = random_function(n, rng)
        coeffs = fourier_walsh(f)
        lhs = coeffs.parseval_sum()
        rhs = float(np.mean(f.values.astype(float) ** 2))
        worst = max(worst, abs(lhs - rhs))
        i = int(rng.integers(1, n + 1))
        if not gradient_spectrum_check(f, i):
            raise AssertionError(f"gradient spectrum identity failed (trial {trial})")
    if worst > 1e-10:
        raise AssertionError(f"Parseval residual {worst} exceeds 1e-10")
    lines.append(f"parseval: 200 random tables ok, worst residual {worst:.2e}")
    return lines


def _suite_osss_exact(seed: int) -> list[str]:
    lines = []
    checked = 0
    for f in all_monotone_functions(3):
        for tree in standard_tree_suite(3, count=8):
            for p in (0.2, 0.5, 0.8):
                res = osss_check(f, tree, ProductMeasure(p, 3))
                if not res.holds:
                    raise AssertionError("OSSS violated on an exhaustive monotone case")
                checked += 1
    rng = stream(seed, 2)
    for _ in range(60):
        f = random_monotone(6, rng)
        for tree in standard_tree_suite(6, count=4):
            res = osss_check(f, tree, ProductMeasure(0.5, 6))
            if not res.holds:
                raise AssertionError("OSSS violated on a random monotone case")
            checked += 1
    lines.append(f"osss-exact: {checked} (f, tree, p) cases ok")
    return lines


def _suite_talagrand(seed: int) -> list[str]:
    rng = stream(seed, 3)
    mu_half = ProductMeasure(0.5, 8)
    for _ in range(120):
        f = random_monotone(8, rng)
        talagrand_bound(f, mu_half)  # raises on violation at p = 1/2
    return ["talagrand: 120 random monotone tables ok at p=1/2"]


def _suite_rcm_exact(seed: int) -> list[str]:
    lines = []
    region = cycle_graph(4)
    for q in (1.0, 1.5, 2.0, 4.0):
        params = RandomClusterParams(0.5, q)
        measure = ExactMeasure(region, params)
        ok, witness = monotonicity_check(region, params)
        if not ok:
            raise AssertionError(f"monotonicity violated at q={q}: {witness}")
        masks = np.arange(1 << region.n_edges)
        f = ((masks >> 0) & 1).astype(np.float64)
        g = ((masks >> 2) & 1).astype(np.float64)
        if not fkg_check(region, params, f, g):
            raise AssertionError(f"FKG violated at q={q}")
        for mask in range(1 << region.n_edges):
            omega = ((mask >> np.arange(region.n_edges)) & 1).astype(np.uint8)
            for e in range(region.n_edges):
                formula = heat_bath_probability(region, omega, e, params)
                exact = measure.conditional_open_given_rest(e, mask & ~(1 << e))
                if abs(formula - exact) > 1e-10:
                    raise AssertionError(
                        f"heat-bath conditional mismatch at q={q}, mask={mask}, e={e}"
                    )
        from .boolfn import BooleanFunctionTable
        from .decisiontree import DecisionTree

        pair_event = BooleanFunctionTable(
            4, (((masks >> 0) & 1) & ((masks >> 1) & 1)).astype(np.uint8), monotone=True
        )
        res = monotonic_osss_check(pair_event, measure, DecisionTree.fixed_order([1, 2, 3, 4]))
        if not res.holds:
            raise AssertionError(f"monotonic OSSS violated at q={q}")
        lines.append(f"rcm-exact q={q}: monotonicity, FKG, conditionals, OSSS ok")
    return lines


def _suite_duality(seed: int) -> list[str]:
    region = RectangleRegion(1, 2)
    configs = ((np.arange(1 << region.n_edges)[:, None] >> np.arange(region.n_edges)) & 1).astype(np.uint8)
    results = duality_complement_check_batch(2, configs)
    if not np.all(results):
        raise AssertionError("duality complement identity violated on R(1,2)")
    return [f"duality: all {len(configs)} configurations of R(1,2) ok"]


_SUITES = {
    "parseval": _suite_parseval,
    "osss-exact": _suite_osss_exact,
    "talagrand": _suite_talagrand,
    "rcm-exact": _suite_rcm_exact,
    "duality": _suite_duality,
}


@main.command("inequalities")
@click.option("--suite", default="all", show_default=True,
              help="one of: " + ", ".join([*_SUITES, "all"]))
@click.option("--seed", type=int, default=0, envvar="SHARPTHRESHOLD_SEED", show_default=True)
@click.option("--config", default=None)
@click.pass_context
def cmd_inequalities(ctx, suite, seed, config):
    """Run the exact-identity verification suites; nonzero exit on violation."""
    params = _merged(ctx, config, suite=suite, seed=seed)
    name = params["suite"]
    if name != "all" and name not in _SUITES:
        raise click.UsageError(f"unknown suite {name!r}")
    chosen = list(_SUITES) if name == "all" else [name]
    t0 = time.monotonic()
    for key in chosen:
        try:
            for line in _SUITES[key](int(params["seed"])):
                click.echo(f"PASS {line}")
        except AssertionError as exc:
            _fail(f"{key}: {exc}")
    click.echo(f"inequality suites done in {time.monotonic() - t0:.1f}s", err=True)


if __name__ == "__main__":
    main()
