"""Experiment runner: closed-form profiles, root cascades, PDE runs, modal
evolution, and cross-formalism comparisons, driven by flat TOML configs.

Every run is deterministic: identical configs produce byte-identical
outputs.  Exit codes: 0 success, 2 config error, 3 root-oracle error,
4 solver error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from . import densities, linearized, metrics, pde_solver, poly_dynamics
from .errors import ConfigError, RootflowError

ENV_PREFIX = "ROOTFLOW_"
EXACT_GRID_POINTS = 1000

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ORACLE = 3
EXIT_SOLVER = 4


class _OracleFailure(RootflowError):
    pass


class _SolverFailure(RootflowError):
    pass


def _fmt(value: float) -> str:
    return f"{value:.17g}"


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


def load_config(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            cfg = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    for name, raw in os.environ.items():
        if not name.startswith(ENV_PREFIX):
            continue
        key = name[len(ENV_PREFIX):].lower()
        try:
            cfg[key] = tomllib.loads(f"value = {raw}")["value"]
        except tomllib.TOMLDecodeError:
            cfg[key] = raw
    return cfg


def _family_from_config(cfg: dict) -> densities.ClosedFormFamily:
    name = str(cfg.get("family", "")).lower()
    try:
        if name == "arcsine":
            return densities.Arcsine(amplitude=float(cfg.get("c", 1.0 / math.pi)))
        if name == "semicircle":
            return densities.Semicircle(vanish_time=float(cfg.get("T", 1.0)))
        if name in ("marchenko_pastur", "mp"):
            return densities.MarchenkoPastur(ratio=float(cfg.get("c", 1.0)))
    except RootflowError as exc:
        raise ConfigError(f"invalid family parameters: {exc}") from exc
    raise ConfigError(f"unknown family {name!r}")


def _times_from_config(cfg: dict, family=None) -> list[float]:
    times = cfg.get("times")
    if times is None:
        raise ConfigError("config needs a 'times' array")
    try:
        times = [float(t) for t in times]
    except TypeError as exc:
        raise ConfigError("'times' must be an array of numbers") from exc
    if times != sorted(times):
        raise ConfigError("'times' must be sorted ascending")
    if family is not None:
        for t in times:
            try:
                family.require_valid_time(t)
            except RootflowError as exc:
                raise ConfigError(str(exc)) from exc
    return times


def _solver_params(cfg: dict) -> pde_solver.SolverParams:
    keys = {
        "N": int,
        "K": int,
        "cfl": float,
        "eps_flux": float,
        "eps_supp": float,
        "delta_stop": float,
        "remap_stride": int,
    }
    kwargs = {}
    for key, cast in keys.items():
        if key in cfg:
            try:
                kwargs[key] = cast(cfg[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad solver parameter {key}={cfg[key]!r}") from exc
    try:
        return pde_solver.SolverParams(**kwargs)
    except RootflowError as exc:
        raise ConfigError(f"invalid solver parameters: {exc}") from exc


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _write_profile_csv(path: Path, blocks) -> None:
    """blocks: iterable of (t, x array, u array)."""
    with open(path, "w", newline="") as fh:
        fh.write("t,x,u\n")
        for t, xs, us in blocks:
            ts = _fmt(t)
            for x, u in zip(xs, us):
                fh.write(f"{ts},{_fmt(x)},{_fmt(u)}\n")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_exact(cfg: dict, out: Path) -> None:
    family = _family_from_config(cfg)
    times = _times_from_config(cfg, family)
    blocks = []
    for t in times:
        sup = family.support(t)
        grid = np.linspace(sup.a, sup.b, EXACT_GRID_POINTS)
        blocks.append((t, grid, np.asarray(family.eval(t, grid))))
    _write_profile_csv(out / "profiles.csv", blocks)
    _write_json(
        out / "meta.json",
        {
            "mode": "exact",
            "family": cfg.get("family"),
            "params": {k: cfg[k] for k in ("c", "T") if k in cfg},
            "times": times,
            "grid_points": EXACT_GRID_POINTS,
        },
    )


def _poly_cascade(cfg: dict, threads):
    family = _family_from_config(cfg)
    t_start = float(cfg.get("t_start", 0.0))
    try:
        n = int(cfg["n"])
        k = int(cfg["k"])
    except KeyError as exc:
        raise ConfigError(f"poly mode needs key {exc}") from exc
    stride = int(cfg.get("stride", k or 1))
    if not 0 <= k < n:
        raise ConfigError(f"need 0 <= k < n, got k={k}, n={n}")
    try:
        family.require_valid_time(t_start)
    except RootflowError as exc:
        raise ConfigError(f"t_start invalid: {exc}") from exc
    try:
        config = family.sample_roots(t_start, n)
        schedule = poly_dynamics.DifferentiationSchedule(k=k, snapshot_stride=stride)
        snapshots = poly_dynamics.differentiate_k(config, schedule, threads=threads)
    except RootflowError as exc:
        raise _OracleFailure(str(exc)) from exc
    return family, t_start, n, k, stride, snapshots


def cmd_poly(cfg: dict, out: Path, threads=None) -> None:
    family, t_start, n, k, stride, snapshots = _poly_cascade(cfg, threads)
    steps = []
    for step, config in snapshots:
        steps.append(step)
        poly_dynamics.save_roots(config, out / f"roots_step{step:06d}.csv")
        cdf = poly_dynamics.empirical_cdf(config)
        with open(out / f"ecdf_step{step:06d}.csv", "w", newline="") as fh:
            fh.write("x,F\n")
            for i, x in enumerate(cdf.xs):
                fh.write(f"{_fmt(x)},{_fmt((i + 1) / cdf.n)}\n")
    _write_json(
        out / "meta.json",
        {
            "mode": "poly",
            "family": cfg.get("family"),
            "params": {key: cfg[key] for key in ("c", "T") if key in cfg},
            "t_start": t_start,
            "n": n,
            "k": k,
            "stride": stride,
            "steps": steps,
        },
    )


def _pde_run(cfg: dict):
    family = _family_from_config(cfg)
    params = _solver_params(cfg)
    t_start = float(cfg.get("t_start", 0.0))
    if "t_end" not in cfg:
        raise ConfigError("pde mode needs 't_end'")
    t_end = float(cfg["t_end"])
    times = _times_from_config(cfg, family) if "times" in cfg else []
    if t_end < t_start:
        raise ConfigError("t_end must be >= t_start")
    if any(t < t_start or t > t_end for t in times):
        raise ConfigError("snapshot times must lie within [t_start, t_end]")
    try:
        if isinstance(family, densities.Arcsine):
            initial = pde_solver.arcsine_regularized_state(
                params, amplitude=family.amplitude
            )
        else:
            family.require_valid_time(t_start)
            initial = pde_solver.state_from_family(family, t_start, params)
    except RootflowError as exc:
        raise ConfigError(f"cannot build initial data: {exc}") from exc
    try:
        trajectory = pde_solver.run(initial, t_end, params, snapshot_times=times)
    except RootflowError as exc:
        raise _SolverFailure(str(exc)) from exc
    return family, params, t_start, t_end, times, trajectory


def cmd_pde(cfg: dict, out: Path) -> None:
    family, params, t_start, t_end, times, traj = _pde_run(cfg)
    blocks = [(s.t, s.grid, s.values) for s in traj.snapshots]
    if not any(abs(s.t - traj.final_state.t) < 1e-12 for s in traj.snapshots):
        blocks.append(
            (traj.final_state.t, traj.final_state.grid, traj.final_state.values)
        )
    _write_profile_csv(out / "profiles.csv", blocks)
    with open(out / "mass.csv", "w", newline="") as fh:
        fh.write("t,mass\n")
        for t, m in zip(traj.mass_times, traj.masses):
            fh.write(f"{_fmt(t)},{_fmt(m)}\n")
    _write_json(
        out / "meta.json",
        {
            "mode": "pde",
            "family": cfg.get("family"),
            "family_params": {k: cfg[k] for k in ("c", "T") if k in cfg},
            "solver_params": {
                "N": params.N,
                "K": params.K,
                "cfl": params.cfl,
                "eps_flux": params.eps_flux,
                "eps_supp": params.eps_supp,
                "delta_stop": params.delta_stop,
                "remap_stride": params.remap_stride,
            },
            "t_start": t_start,
            "t_end": t_end,
            "snapshot_times": times,
            "termination": traj.termination,
            "steps": traj.steps,
            "mass_series": {
                "t": [float(v) for v in traj.mass_times],
                "mass": [float(v) for v in traj.masses],
            },
        },
    )


def cmd_linearized(cfg: dict, out: Path) -> None:
    coeffs = cfg.get("coeffs")
    if not coeffs:
        raise ConfigError("linearized mode needs a non-empty 'coeffs' array")
    times = _times_from_config(cfg)
    try:
        state = linearized.modal_from_json(json.dumps([float(c) for c in coeffs]))
    except (RootflowError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad coefficients: {exc}") from exc
    for i, t in enumerate(times):
        evolved = linearized.evolve(state, t)
        (out / f"modes_{i:03d}.json").write_text(
            linearized.modal_to_json(evolved) + "\n"
        )
    _write_json(
        out / "meta.json",
        {"mode": "linearized", "coeffs": [float(c) for c in coeffs], "times": times},
    )


class _ExactSide:
    kind = "exact"

    def __init__(self, cfg):
        self.family = _family_from_config(cfg)

    def at(self, t):
        cdf = metrics.FamilyCdf(self.family, t)
        return cdf, self.family.mass(t), EXACT_GRID_POINTS


class _PolySide:
    kind = "poly"

    def __init__(self, cfg, times, threads):
        self.family = _family_from_config(cfg)
        self.t_start = float(cfg.get("t_start", 0.0))
        try:
            self.n = int(cfg["n"])
        except KeyError as exc:
            raise ConfigError("poly side needs 'n'") from exc
        steps = []
        for t in times:
            k = round((t - self.t_start) * self.n)
            if not 0 <= k < self.n:
                raise ConfigError(f"time {t} maps to invalid derivative count {k}")
            steps.append(k)
        self.step_of_time = dict(zip(times, steps))
        try:
            current = self.family.sample_roots(self.t_start, self.n)
            self.configs = {0: current}
            done = 0
            for target in sorted(set(steps)):
                if target > done:
                    hop = poly_dynamics.DifferentiationSchedule(
                        k=target - done, snapshot_stride=target - done
                    )
                    current = poly_dynamics.differentiate_k(
                        current, hop, threads=threads
                    )[-1][1]
                    done = target
                self.configs[target] = current
        except RootflowError as exc:
            raise _OracleFailure(str(exc)) from exc

    def at(self, t):
        config = self.configs[self.step_of_time[t]]
        return poly_dynamics.empirical_cdf(config), float(config.n), config.n


class _PdeSide:
    kind = "pde"

    def __init__(self, cfg, times):
        run_cfg = dict(cfg)
        run_cfg["times"] = times
        run_cfg.setdefault("t_end", max(times))
        family, params, _, _, _, traj = _pde_run(run_cfg)
        if len(traj.snapshots) != len(times):
            raise _SolverFailure(
                f"run terminated by {traj.termination} before the last snapshot"
            )
        self.params = params
        self.states = dict(zip(times, traj.snapshots))

    def at(self, t):
        state = self.states[t]
        cdf = metrics.GridCdf(state.grid, state.values)
        return cdf, cdf.mass, self.params.N, state


def _build_side(kind: str, cfg: dict, times, threads):
    if kind == "exact":
        return _ExactSide(cfg)
    if kind == "poly":
        return _PolySide(cfg, times, threads)
    if kind == "pde":
        return _PdeSide(cfg, times)
    raise ConfigError(f"unknown comparison side {kind!r}")


def cmd_compare(cfg: dict, out: Path, threads=None) -> None:
    kind_a = str(cfg.get("compare_a", "")).lower()
    kind_b = str(cfg.get("compare_b", "")).lower()
    family = _family_from_config(cfg)
    times = _times_from_config(cfg, family)
    if not times:
        raise ConfigError("compare mode needs at least one snapshot time")
    side_a = _build_side(kind_a, cfg, times, threads)
    side_b = _build_side(kind_b, cfg, times, threads)
    reports = []
    for i, t in enumerate(times):
        got_a = side_a.at(t)
        got_b = side_b.at(t)
        cdf_a, mass_a, size_a = got_a[:3]
        cdf_b, mass_b, size_b = got_b[:3]
        if hasattr(cdf_a, "jumps"):
            ks = metrics.ks_distance(cdf_a, cdf_b)
        elif hasattr(cdf_b, "jumps"):
            ks = metrics.ks_distance(cdf_b, cdf_a)
        else:
            ks = metrics.sup_cdf_distance(cdf_a, cdf_b)
        w1 = metrics.wasserstein1(cdf_a, cdf_b)
        l1 = None
        if side_a.kind == "pde" and side_b.kind == "exact":
            l1 = metrics.l1_density_error(got_a[3], side_b.family, t)
        elif side_b.kind == "pde" and side_a.kind == "exact":
            l1 = metrics.l1_density_error(got_b[3], side_a.family, t)
        elif side_a.kind == "exact" and side_b.kind == "exact":
            sup = side_a.family.support(t)
            xs = np.linspace(sup.a, sup.b, 4001)
            diff = np.abs(
                np.asarray(side_a.family.eval(t, xs))
                - np.asarray(side_b.family.eval(t, xs))
            )
            l1 = float(np.trapezoid(diff, xs))
        report = metrics.ComparisonReport(
            ks=ks,
            wasserstein1=w1,
            l1=l1,
            n_or_N=int(min(size_a, size_b)),
            normalization=(float(mass_a), float(mass_b)),
        )
        reports.append(report)
        (out / f"compare_{i:03d}.json").write_text(report.to_json() + "\n")
    _write_json(
        out / "meta.json",
        {
            "mode": "compare",
            "compare_a": kind_a,
            "compare_b": kind_b,
            "family": cfg.get("family"),
            "times": times,
        },
    )


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rootflow",
        description="Deterministic experiments on root densities under differentiation",
    )
    parser.add_argument("--config", required=True, help="flat TOML config file")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--threads", type=int, default=None, help="worker threads")
    parser.add_argument(
        "--seed", type=int, default=None, help="reserved; sampling is deterministic"
    )
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        mode = str(cfg.get("mode", "")).lower()
        if mode not in ("exact", "pde", "poly", "linearized", "compare"):
            raise ConfigError(f"unknown mode {cfg.get('mode')!r}")
        out = Path(args.out if args.out is not None else cfg.get("out", "."))
        out.mkdir(parents=True, exist_ok=True)
        if mode == "exact":
            cmd_exact(cfg, out)
        elif mode == "poly":
            cmd_poly(cfg, out, threads=args.threads)
        elif mode == "pde":
            cmd_pde(cfg, out)
        elif mode == "linearized":
            cmd_linearized(cfg, out)
        else:
            cmd_compare(cfg, out, threads=args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _OracleFailure as exc:
        print(f"oracle error: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except _SolverFailure as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
