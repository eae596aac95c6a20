"""Command line driver.

Subcommands: simulate, verify, gauge-compare, reduce, curvature-residual.
Every run is driven by a JSON config document plus optional dotted-path
overrides, writes a manifest that reproduces it exactly, and emits only
deterministic bytes: rerunning the same config and seed gives identical
files.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .algebra import AlgebraSpec, Family
from .fields import Grid
from .flows import FlowBlowupError, FlowKind, StabilityError, evolve, stability_bound
from .functionals import FlowParams
from .gauge import GaugeError, evolve_potential, gauge_transform
from .initial_data import make_initial_potential, make_initial_state
from .orbit import OrbitState, SpectralError, gauge_fix_frame
from .reductions import phi_to_s, spec_geometry, spin_step
from .suites import run_suite

VERIFY_SUITES = (
    "identities",
    "gradients",
    "conservation",
    "gauge-compare",
    "curvature",
    "reductions",
    "integrable-limit",
)

OBSERVABLE_COLUMNS = (
    "t",
    "E",
    "E21",
    "E22",
    "E23",
    "E2",
    "Etilde",
    "H",
    "spectrum_dev",
    "m_residual",
)


class ConfigError(ValueError):
    def __init__(self, messages):
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))


@dataclass
class RunConfig:
    spec: AlgebraSpec
    grid: Grid
    params: FlowParams
    kind: FlowKind
    initial_data: dict
    T: float
    dt_raw: object
    output_times: list | None
    seed: int
    raw: dict


def load_config(path: str) -> dict:
    try:
        with open(path) as f:
            cfg = json.load(f)
    except OSError as exc:
        raise ConfigError([f"cannot read config: {exc}"]) from None
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config is not valid JSON: {exc}"]) from None
    if not isinstance(cfg, dict):
        raise ConfigError(["config must be a JSON object"])
    return cfg


def apply_overrides(cfg: dict, pairs: list) -> dict:
    for pair in pairs:
        key, sep, raw = pair.partition("=")
        if not sep or not key:
            raise ConfigError([f"override must look like key=value, got {pair!r}"])
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = cfg
        parts = key.split(".")
        for part in parts[:-1]:
            nxt = node.get(part)
            if nxt is None:
                nxt = node[part] = {}
            if not isinstance(nxt, dict):
                raise ConfigError([f"override path '{key}' crosses a non-object field"])
            node = nxt
        node[parts[-1]] = value
    return cfg


def parse_run_config(cfg: dict, seed_override: int | None = None) -> RunConfig:
    errors = []

    def get(path, required=True, default=None):
        node = cfg
        for part in path.split("."):
            if not isinstance(node, dict) or part not in node:
                if required:
                    errors.append(f"missing field '{path}'")
                return default
            node = node[part]
        return node

    family = get("algebra.family")
    n = get("algebra.n")
    k = get("algebra.k")
    spec = None
    if family is not None and n is not None and k is not None:
        try:
            spec = AlgebraSpec(Family(family), n, k)
        except (ValueError, TypeError) as exc:
            errors.append(f"algebra: {exc}")

    npts = get("grid.N")
    length = get("grid.L")
    grid = None
    if npts is not None and length is not None:
        try:
            grid = Grid(npts, length)
        except (ValueError, TypeError) as exc:
            errors.append(f"grid: {exc}")

    alpha = get("params.alpha")
    beta = get("params.beta")
    gamma = get("params.gamma")
    params = None
    if alpha is not None and beta is not None and gamma is not None:
        try:
            params = FlowParams(alpha, beta, gamma)
        except (ValueError, TypeError) as exc:
            errors.append(f"params: {exc}")

    kind = None
    flow = get("flow")
    if flow is not None:
        try:
            kind = FlowKind(flow)
        except ValueError:
            errors.append(f"flow: {flow!r} is not one of {[m.value for m in FlowKind]}")

    initial = get("initial_data")
    if initial is not None and not isinstance(initial, dict):
        errors.append("initial_data: must be an object")
        initial = None
    if isinstance(initial, dict) and "generator" not in initial and "snapshot" not in initial:
        errors.append("initial_data: needs either 'generator' or 'snapshot'")

    T = get("T")
    if T is not None:
        try:
            T = float(T)
            if T < 0:
                errors.append("T: must be nonnegative")
        except (TypeError, ValueError):
            errors.append("T: must be a number")

    dt_raw = get("dt")
    if dt_raw is not None and dt_raw != "auto":
        try:
            dt_raw = float(dt_raw)
            if dt_raw <= 0:
                errors.append("dt: must be positive or 'auto'")
        except (TypeError, ValueError):
            errors.append("dt: must be a number or 'auto'")

    output_times = get("output_times", required=False)
    if output_times is not None:
        try:
            output_times = [float(t) for t in output_times]
        except (TypeError, ValueError):
            errors.append("output_times: must be a list of numbers")
            output_times = None
        if output_times is not None and any(
            b <= a for a, b in zip(output_times, output_times[1:])
        ):
            errors.append("output_times: must be strictly increasing")

    seed = get("seed", required=False, default=0)
    if not isinstance(seed, int):
        errors.append("seed: must be an integer")
        seed = 0
    if seed_override is not None:
        seed = seed_override

    if errors:
        raise ConfigError(errors)
    return RunConfig(spec, grid, params, kind, dict(initial), T, dt_raw, output_times, seed, cfg)


_SEEDED_GENERATORS = ("random_smooth", "random_frame")


def _seeded_options(rc: RunConfig) -> dict:
    options = dict(rc.initial_data)
    if options.get("generator") in _SEEDED_GENERATORS and "seed" not in options:
        options["seed"] = rc.seed
    return options


def build_state(rc: RunConfig) -> OrbitState:
    if "snapshot" in rc.initial_data:
        path = rc.initial_data["snapshot"]
        try:
            with open(path) as f:
                state = OrbitState.from_json_dict(json.load(f))
        except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
            raise ConfigError([f"initial_data.snapshot: cannot load {path!r}: {exc}"]) from None
        if state.spec != rc.spec:
            raise ConfigError(["initial_data.snapshot: algebra does not match the config"])
        if (
            state.phi.grid.num_points != rc.grid.num_points
            or state.phi.grid.length != rc.grid.length
        ):
            raise ConfigError(["initial_data.snapshot: grid does not match the config"])
        return state
    try:
        return make_initial_state(rc.spec, rc.grid, _seeded_options(rc))
    except ValueError as exc:
        raise ConfigError([f"initial_data: {exc}"]) from None


def resolve_dt(rc: RunConfig) -> float:
    if rc.dt_raw == "auto":
        return 0.5 * stability_bound(rc.params, rc.grid.h, rc.kind)
    return float(rc.dt_raw)


def _resolve_output_times(rc: RunConfig, t0: float) -> list:
    if rc.output_times is not None:
        times = rc.output_times
        lo, hi = t0 - 1e-9, t0 + rc.T + 1e-9
        if times[0] < lo or times[-1] > hi:
            raise ConfigError(["output_times: must lie within [start, start + T]"])
        return times
    return [t0, t0 + rc.T] if rc.T > 0 else [t0]


def _fmt(value) -> str:
    return repr(float(value))


def _write_json(path: str, obj) -> None:
    with open(path, "w") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def _manifest(rc: RunConfig, resolved: dict) -> dict:
    return {
        "config": rc.raw,
        "resolved": resolved,
        "versions": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "grassflow": __version__,
        },
        "status": "running",
        "abort": None,
    }


def _abort(manifest, out_dir, exc) -> int:
    manifest["status"] = "aborted"
    manifest["abort"] = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, FlowBlowupError):
        manifest["abort"]["step_index"] = exc.step_index
        manifest["abort"]["last_time"] = float(exc.last_state.time)
    _write_json(os.path.join(out_dir, "manifest.json"), manifest)
    print(f"aborted: {exc}", file=sys.stderr)
    return 1


def cmd_simulate(rc: RunConfig, out_dir: str) -> int:
    state = build_state(rc)
    dt = resolve_dt(rc)
    times = _resolve_output_times(rc, state.time)
    os.makedirs(out_dir, exist_ok=True)
    manifest = _manifest(rc, {"dt": dt, "output_times": times, "seed": rc.seed})
    _write_json(os.path.join(out_dir, "manifest.json"), manifest)
    csv_path = os.path.join(out_dir, "observables.csv")
    with open(csv_path, "w") as f:
        f.write(",".join(OBSERVABLE_COLUMNS) + "\n")
    current = state
    try:
        for index, target in enumerate(times):
            seg = evolve(
                current,
                rc.params,
                rc.kind,
                target - current.time,
                dt,
                output_times=[target],
                record_steps=False,
            )
            current = seg.states[0]
            _write_json(
                os.path.join(out_dir, f"snapshot_{index:04d}.json"), current.to_json_dict()
            )
            rep = seg.reports[0]
            row = (
                target,
                rep.E,
                rep.E21,
                rep.E22,
                rep.E23,
                rep.E2,
                rep.Etilde,
                rep.H,
                seg.spectrum_deviations[0],
                seg.membership_residuals[0],
            )
            with open(csv_path, "a") as f:
                f.write(",".join(_fmt(v) for v in row) + "\n")
    except (FlowBlowupError, StabilityError, SpectralError) as exc:
        return _abort(manifest, out_dir, exc)
    manifest["status"] = "completed"
    _write_json(os.path.join(out_dir, "manifest.json"), manifest)
    return 0


def cmd_verify(cfg: dict | None, out_dir: str | None, suite: str) -> int:
    options = {}
    if cfg is not None:
        options = cfg.get("suite_options", {})
        if not isinstance(options, dict):
            raise ConfigError(["suite_options: must be an object"])
    try:
        report = run_suite(suite, **options)
    except TypeError as exc:
        raise ConfigError([f"suite_options: {exc}"]) from None
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        _write_json(os.path.join(out_dir, "report.json"), report)
    return 0 if report["pass"] else 1


def cmd_gauge_compare(rc: RunConfig, out_dir: str, window=(0.1, 0.9)) -> int:
    if rc.kind is FlowKind.SECOND_ORDER:
        raise ConfigError(["flow: gauge-compare covers the commutator flows"])
    from .initial_data import state_from_potential

    try:
        ps0 = make_initial_potential(rc.spec, rc.grid, _seeded_options(rc))
    except ValueError as exc:
        raise ConfigError([f"initial_data: {exc}"]) from None
    dt = resolve_dt(rc)
    times = _resolve_output_times(rc, ps0.time)
    os.makedirs(out_dir, exist_ok=True)
    manifest = _manifest(rc, {"dt": dt, "output_times": times, "seed": rc.seed})
    _write_json(os.path.join(out_dir, "manifest.json"), manifest)
    lo, hi = window
    mask = (rc.grid.x >= lo * rc.grid.length) & (rc.grid.x <= hi * rc.grid.length)
    rows = []
    state = state_from_potential(ps0)
    ps = ps0
    try:
        for target in times:
            seg = evolve(
                state,
                rc.params,
                rc.kind,
                target - state.time,
                dt,
                output_times=[target],
                record_steps=False,
            )
            state = seg.states[0]
            fixed = gauge_fix_frame(rc.spec, state.frame, time=state.time)
            matrix_q = gauge_transform(fixed).q
            pseg = evolve_potential(ps, rc.params, target - ps.time, dt, output_times=[target])
            ps = pseg.states[0]
            nm = np.linalg.norm(matrix_q, axis=(1, 2))
            ng = np.linalg.norm(ps.q, axis=(1, 2))
            gap = np.abs(nm - ng)
            rows.append((target, float(np.max(gap)), float(np.max(gap[mask]))))
    except (FlowBlowupError, StabilityError, SpectralError, GaugeError) as exc:
        return _abort(manifest, out_dir, exc)
    _write_csv(os.path.join(out_dir, "gauge_compare.csv"), ("t", "norm_gap", "interior_linf"), rows)
    manifest["status"] = "completed"
    _write_json(os.path.join(out_dir, "manifest.json"), manifest)
    return 0


def cmd_reduce(rc: RunConfig, out_dir: str) -> int:
    try:
        geometry = spec_geometry(rc.spec)
    except ValueError as exc:
        raise ConfigError([f"algebra: {exc}"]) from None
    if rc.kind is FlowKind.SECOND_ORDER:
        raise ConfigError(["flow: reduce covers the commutator flows"])
    state = build_state(rc)
    sf = phi_to_s(state)
    dt = resolve_dt(rc)
    times = _resolve_output_times(rc, state.time)
    os.makedirs(out_dir, exist_ok=True)
    manifest = _manifest(
        rc, {"dt": dt, "output_times": times, "seed": rc.seed, "geometry": geometry.value}
    )
    _write_json(os.path.join(out_dir, "manifest.json"), manifest)
    header = (
        "x",
        "s1_matrix",
        "s2_matrix",
        "s3_matrix",
        "s1_vector",
        "s2_vector",
        "s3_vector",
    )
    summary = []
    t_vec = state.time
    try:
        for index, target in enumerate(times):
            seg = evolve(
                state,
                rc.params,
                rc.kind,
                target - state.time,
                dt,
                output_times=[target],
                record_steps=False,
            )
            state = seg.states[0]
            matrix_s = phi_to_s(state).s
            while target - t_vec > 1e-9 * max(1.0, abs(target)):
                remaining = target - t_vec
                dt_step = dt if remaining > dt * (1.0 + 1e-9) else remaining
                sf = spin_step(sf, rc.params, dt_step)
                t_vec += dt_step
            rows = [
                (x, ms[0], ms[1], ms[2], vs[0], vs[1], vs[2])
                for x, ms, vs in zip(rc.grid.x, matrix_s, sf.s)
            ]
            _write_csv(os.path.join(out_dir, f"reduce_{index:04d}.csv"), header, rows)
            summary.append((target, float(np.max(np.abs(matrix_s - sf.s)))))
    except (FlowBlowupError, StabilityError, SpectralError, ValueError) as exc:
        return _abort(manifest, out_dir, exc)
    _write_csv(os.path.join(out_dir, "reduce_summary.csv"), ("t", "max_gap"), summary)
    manifest["status"] = "completed"
    _write_json(os.path.join(out_dir, "manifest.json"), manifest)
    return 0


def cmd_curvature_residual(rc: RunConfig, out_dir: str) -> int:
    from .gauge import curvature_residual

    if rc.kind is FlowKind.SECOND_ORDER:
        raise ConfigError(["flow: curvature-residual covers the commutator flows"])
    lambdas = rc.raw.get("lambdas", [0.5, 1.0, 2.0])
    try:
        lambdas = [float(v) for v in lambdas]
    except (TypeError, ValueError):
        raise ConfigError(["lambdas: must be a list of numbers"]) from None
    state = build_state(rc)
    dt = resolve_dt(rc)
    t0 = state.time
    if rc.output_times is not None:
        if len(rc.output_times) < 3:
            raise ConfigError(["output_times: curvature residuals need at least three snapshots"])
        times = rc.output_times
    else:
        times = [t0 + dt, t0 + 2.0 * dt, t0 + 3.0 * dt]
    os.makedirs(out_dir, exist_ok=True)
    manifest = _manifest(
        rc, {"dt": dt, "output_times": times, "seed": rc.seed, "lambdas": lambdas}
    )
    _write_json(os.path.join(out_dir, "manifest.json"), manifest)
    try:
        traj = evolve(
            state,
            rc.params,
            rc.kind,
            times[-1] - t0,
            dt,
            output_times=times,
            record_steps=False,
        )
        rows = []
        for lam in lambdas:
            for t, res in curvature_residual(traj, rc.params, lam):
                rows.append((t, lam, res))
    except (FlowBlowupError, StabilityError, SpectralError) as exc:
        return _abort(manifest, out_dir, exc)
    _write_csv(os.path.join(out_dir, "curvature.csv"), ("t", "lam", "residual"), rows)
    manifest["status"] = "completed"
    _write_json(os.path.join(out_dir, "manifest.json"), manifest)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="grassflow",
        description="Structure-preserving flows on matrix orbits: simulation and verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp, need_config=True, need_out=True):
        sp.add_argument("--config", required=need_config, help="path to a JSON config")
        sp.add_argument("--out", required=need_out, help="output directory")
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp.add_argument(
            "--override",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="dotted-path config override, value parsed as JSON",
        )

    add_common(sub.add_parser("simulate", help="run a flow and write trajectory files"))
    sp_verify = sub.add_parser("verify", help="run a verification suite")
    add_common(sp_verify, need_config=False, need_out=False)
    sp_verify.add_argument("--suite", required=True, choices=VERIFY_SUITES)
    add_common(sub.add_parser("gauge-compare", help="frame flow vs potential flow, |q| gap"))
    add_common(sub.add_parser("reduce", help="matrix and vector forms side by side"))
    add_common(
        sub.add_parser("curvature-residual", help="connection curvature against its target")
    )
    args = parser.parse_args(argv)

    try:
        cfg = None
        if args.config is not None:
            cfg = apply_overrides(load_config(args.config), args.override)
        elif args.override:
            raise ConfigError(["--override needs --config"])
        if args.command == "verify":
            return cmd_verify(cfg, args.out, args.suite)
        rc = parse_run_config(cfg, args.seed)
        if args.command == "simulate":
            return cmd_simulate(rc, args.out)
        if args.command == "gauge-compare":
            return cmd_gauge_compare(rc, args.out)
        if args.command == "reduce":
            return cmd_reduce(rc, args.out)
        return cmd_curvature_residual(rc, args.out)
    except ConfigError as exc:
        for message in exc.messages:
            print(f"config error: {message}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
