"""Command-line front end: seeded experiments driven by flat config files.

Config format: one ``key = value`` per line, ``#`` starts a comment.  Keys
are hyphenated (``inner-tol``); map parameters use a ``map.`` prefix
(``map.a = 2.0``).  Vectors are semicolon-separated (``x0 = 1.0;2.0``).
Unknown and duplicate keys are hard errors, with the offending line in the
message.

Five experiment kinds: solve, stability, trace, limit, certify.  Outputs go
to the --out directory as CSV and key=value text files whose floats are
written with repr, so a repeated run with the same config and seed produces
byte-identical reports; the wall-time stamp lives only in manifest.txt.
Exit status: 0 when every asserted invariant passed, 1 when the experiment
ran but an assertion or continuation failed, 2 for config or usage errors.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .continuation import (PathConfig, limit_path, path_csv, trace_path)
from .core import check_modulus_admissible, verify_contractive
from .errors import (ConfigError, ConvergenceError, FixpointError,
                     LsViolationError, NonselfExitError, StallError)
from .gallery import GalleryEntry, list_maps, make_map, map_summary
from .picard import (orbit_csv, orbit_exact, run_stability_experiment,
                     solve_fixed_point, stability_report_text)

_EXPERIMENTS = ("solve", "stability", "trace", "limit", "certify")

_COMMON_KEYS = {"experiment", "map", "seed", "out"}
_KEYS = {
    "solve": {"x0", "tol", "max-iter"},
    "stability": {"xbar", "M", "epsilon", "trials", "n"},
    "trace": {"q", "inner-tol", "max-inner-iter", "target-t"},
    "limit": {"q", "inner-tol", "max-inner-iter", "final-tol", "ratio"},
    "certify": {"pairs", "slack", "grid-max", "grid-points"},
}


def parse_config(path: Path) -> dict[str, str]:
    """Read a flat config file into a key -> raw value dict."""
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc}") from exc
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', "
                              f"got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        if key in values:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        values[key] = value
    if "experiment" not in values:
        raise ConfigError(f"{path}: missing required key 'experiment'")
    kind = values["experiment"]
    if kind not in _EXPERIMENTS:
        raise ConfigError(f"{path}: unknown experiment {kind!r}; one of "
                          f"{', '.join(_EXPERIMENTS)}")
    if "map" not in values:
        raise ConfigError(f"{path}: missing required key 'map'")
    allowed = _COMMON_KEYS | _KEYS[kind]
    for key in values:
        if key.startswith("map."):
            continue
        if key not in allowed:
            raise ConfigError(
                f"{path}: key {key!r} is not valid for experiment "
                f"{kind!r}; allowed: {', '.join(sorted(allowed))} "
                "and map.<param>")
    return values


def _as_float(values: dict[str, str], key: str, default: float | None = None,
              positive: bool = False) -> float:
    if key not in values:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        v = float(values[key])
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: not a number: "
                          f"{values[key]!r}") from exc
    if positive and v <= 0.0:
        raise ConfigError(f"key {key!r} must be > 0, got {v}")
    return v


def _as_int(values: dict[str, str], key: str, default: int | None = None,
            at_least: int | None = None) -> int:
    if key not in values:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        v = int(values[key])
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: not an integer: "
                          f"{values[key]!r}") from exc
    if at_least is not None and v < at_least:
        raise ConfigError(f"key {key!r} must be >= {at_least}, got {v}")
    return v


def _as_vector(values: dict[str, str], key: str) -> np.ndarray:
    if key not in values:
        raise ConfigError(f"missing required key {key!r}")
    try:
        return np.array([float(p) for p in values[key].split(";")])
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: expected semicolon-separated "
                          f"floats, got {values[key]!r}") from exc


def _build_entry(values: dict[str, str]) -> GalleryEntry:
    params = {}
    for key, raw in values.items():
        if not key.startswith("map."):
            continue
        pname = key[len("map."):]
        try:
            params[pname] = float(raw)
        except ValueError as exc:
            raise ConfigError(f"key {key!r}: not a number: "
                              f"{raw!r}") from exc
    return make_map(values["map"], **params)


def _error_text(exc: FixpointError) -> str:
    lines = [f"error={type(exc).__name__}", f"message={exc}"]
    for attr in ("t", "lam", "step", "residual"):
        v = getattr(exc, attr, None)
        if v is not None:
            lines.append(f"{attr}={v!r}")
    for attr in ("point", "last_inside"):
        v = getattr(exc, attr, None)
        if v is not None:
            lines.append(
                f"{attr}={';'.join(repr(float(c)) for c in v)}")
    return "\n".join(lines) + "\n"


def _run_solve(entry: GalleryEntry, values: dict[str, str],
               outdir: Path) -> int:
    x0 = _as_vector(values, "x0")
    tol = _as_float(values, "tol", 1e-10, positive=True)
    max_iter = _as_int(values, "max-iter", 100_000, at_least=1)
    T = entry.mapping
    try:
        res = solve_fixed_point(T, x0, tol, max_iter)
    except NonselfExitError as exc:
        (outdir / "error.txt").write_text(_error_text(exc))
        if exc.orbit is not None:
            (outdir / "orbit.csv").write_text(orbit_csv(exc.orbit))
        return 1
    except ConvergenceError as exc:
        (outdir / "error.txt").write_text(_error_text(exc))
        return 1
    orbit = orbit_exact(T, x0, max(res.iterations, 1))
    (outdir / "orbit.csv").write_text(orbit_csv(orbit))
    point = ";".join(repr(float(c)) for c in res.point)
    (outdir / "solution.txt").write_text(
        f"point={point}\niterations={res.iterations}\n"
        f"residual={res.residual!r}\n")
    return 0


def _run_stability(entry: GalleryEntry, values: dict[str, str],
                   outdir: Path, seed: int) -> int:
    T = entry.mapping
    if "xbar" in values:
        xbar = _as_vector(values, "xbar")
    elif entry.known_fixed_point is not None:
        xbar = entry.known_fixed_point
    else:
        raise ConfigError(f"map {entry.name!r} has no known fixed point; "
                          "give one with 'xbar'")
    M = _as_float(values, "M", positive=True)
    epsilon = _as_float(values, "epsilon", positive=True)
    trials = _as_int(values, "trials", 100, at_least=1)
    n = _as_int(values, "n", at_least=1)
    report = run_stability_experiment(T, xbar, M, epsilon, trials, n, seed)
    (outdir / "stability.txt").write_text(stability_report_text(report))
    return 0 if report.all_passed else 1


def _path_config(values: dict[str, str], target_key: str | None) -> \
        PathConfig:
    q = _as_float(values, "q", 0.9, positive=True)
    inner_tol = _as_float(values, "inner-tol", 1e-10, positive=True)
    max_inner = _as_int(values, "max-inner-iter", 200_000, at_least=1)
    target = _as_float(values, target_key, q) if target_key else q
    return PathConfig(q=q, inner_tol=inner_tol, max_inner_iter=max_inner,
                      target_t=target)


def _run_trace(entry: GalleryEntry, values: dict[str, str],
               outdir: Path) -> int:
    cfg = _path_config(values, "target-t")
    try:
        path = trace_path(entry.mapping, cfg)
    except (LsViolationError, StallError, ConvergenceError) as exc:
        (outdir / "error.txt").write_text(_error_text(exc))
        return 1
    (outdir / "path.csv").write_text(path_csv(path))
    return 0


def _run_limit(entry: GalleryEntry, values: dict[str, str],
               outdir: Path) -> int:
    cfg = _path_config(values, None)
    final_tol = _as_float(values, "final-tol", 1e-6, positive=True)
    ratio = _as_float(values, "ratio", 0.5, positive=True)
    try:
        path = limit_path(entry.mapping, cfg, final_tol, ratio)
    except (LsViolationError, StallError, ConvergenceError) as exc:
        (outdir / "error.txt").write_text(_error_text(exc))
        return 1
    (outdir / "path.csv").write_text(path_csv(path))
    x1, cert = path.terminal
    point = ";".join(repr(float(c)) for c in x1)
    (outdir / "limit.txt").write_text(
        f"point={point}\non_boundary={cert.on_boundary}\n"
        f"residual={cert.residual!r}\ntail_bound={cert.tail_bound!r}\n"
        f"schedule_steps={cert.schedule_steps}\n")
    return 0


def _run_certify(entry: GalleryEntry, values: dict[str, str],
                 outdir: Path, seed: int) -> int:
    n_pairs = _as_int(values, "pairs", 64, at_least=1)
    slack = _as_float(values, "slack", 1e-12)
    if slack < 0.0:
        raise ConfigError(f"key 'slack' must be >= 0, got {slack}")
    grid_max = _as_float(values, "grid-max", 10.0, positive=True)
    grid_pts = _as_int(values, "grid-points", 64, at_least=2)
    grid = np.concatenate(
        [[0.0], np.geomspace(1e-6, grid_max, grid_pts - 1)])
    T = entry.mapping
    adm = check_modulus_admissible(T.declared_modulus, grid)
    rng = np.random.default_rng(seed)
    pairs = [(entry.sampler(rng), entry.sampler(rng))
             for _ in range(n_pairs)]
    rep = verify_contractive(T, pairs, slack=slack)
    ok = adm.admissible and rep.passed
    lines = [
        f"map={entry.name}",
        f"modulus_kind={T.declared_modulus.kind}",
        f"grid_points={len(grid)}",
        f"grid_max={grid_max!r}",
        f"admissible_on_grid={adm.admissible}",
        f"monotonicity_violations={len(adm.monotonicity_violations)}",
        f"not_below_one={len(adm.not_below_one)}",
        f"pairs={rep.n_pairs}",
        f"slack={rep.slack!r}",
        f"pairs_passed={sum(1 for c in rep.checks if c.passed)}",
        f"contractive_on_pairs={rep.passed}",
        f"certified={ok}",
    ]
    (outdir / "certify.txt").write_text("\n".join(lines) + "\n")
    return 0 if ok else 1


def run_config(config_path: Path, outdir: Path | None,
               seed_override: int | None) -> int:
    values = parse_config(config_path)
    kind = values["experiment"]
    seed = seed_override if seed_override is not None else \
        _as_int(values, "seed", 0)
    entry = _build_entry(values)
    if outdir is None:
        outdir = Path(values["out"]) if "out" in values else Path("out")
    outdir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    if kind == "solve":
        status = _run_solve(entry, values, outdir)
    elif kind == "stability":
        status = _run_stability(entry, values, outdir, seed)
    elif kind == "trace":
        status = _run_trace(entry, values, outdir)
    elif kind == "limit":
        status = _run_limit(entry, values, outdir)
    else:
        status = _run_certify(entry, values, outdir, seed)
    elapsed = time.perf_counter() - start
    map_params = " ".join(
        f"{k}={v}" for k, v in sorted(values.items())
        if k.startswith("map."))
    (outdir / "manifest.txt").write_text(
        f"engine=fixpoint {__version__}\nexperiment={kind}\n"
        f"map={values['map']}\nmap_params={map_params}\nseed={seed}\n"
        f"config={config_path}\nstatus={status}\n"
        f"elapsed_seconds={elapsed!r}\n")
    return status


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="fixpoint",
        description="certified Picard iteration and homotopy continuation")
    parser.add_argument("--version", action="version",
                        version=f"fixpoint {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run an experiment config")
    runp.add_argument("config", type=Path, help="path to a key=value "
                      "experiment config")
    runp.add_argument("--out", type=Path, default=None,
                      help="output directory (default: 'out' key in the "
                      "config, else ./out)")
    runp.add_argument("--seed", type=int, default=None,
                      help="override the config seed")
    sub.add_parser("list-maps", help="describe the gallery maps")
    args = parser.parse_args(argv)

    if args.command == "list-maps":
        print("\n\n".join(map_summary(name) for name in list_maps()))
        return 0
    try:
        return run_config(args.config, args.out, args.seed)
    except FixpointError as exc:
        print(f"fixpoint: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
