"""Command line front end.

Four subcommands:

* ``simulate``  - integrate an interface from a JSON config or preset,
  writing timeseries.csv, snapshots.bin and metadata.json to a directory
* ``verify``    - run the built-in self-check table (exit 1 on failure)
* ``spectrum``  - tabulate measured vs predicted linear decay rates
* ``velocity``  - sample the bulk velocity field on a rectangle

Exit codes: 0 success, 1 a computation ran but failed (self-check fails,
simulation terminated abnormally), 2 bad usage or configuration,
including physically inadmissible parameters.
"""

from __future__ import annotations

import argparse
import difflib
import json
import struct
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, analysis, evolution, flow, operators
from .evolution import SchemeConfig
from .kernels import QuadratureRule, cancellation_residual
from .operators import OperatorWorkspace, PhysicalParams
from .spectral import (Grid, SpectralField, derivative, half_laplacian,
                       integral_mean)

SNAPSHOT_MAGIC = b"MUSKSNAP"
SNAPSHOT_VERSION = 1


class ConfigError(Exception):
    pass


# -- configuration ----------------------------------------------------

_NUMBER = (int, float)

DEFAULT_CONFIG = {
    "n_points": 128,
    "t_end": 1.0,
    "monitor_stride": 1,
    "snapshot_stride": 0,          # 0: first and last only
    "quadrature_multiple": 1,
    "norm_orders": [1.75, 2.0],
    "initial": {"modes": [[1, 0.5, 0.0]]},
    "scheme": {"name": "rk4_explicit", "dt": 1e-2, "adaptive": False,
               "tol": 1e-8, "dt_min": 1e-10, "dt_max": None,
               "cfl_safety": 0.5},
    "physics": {"permeability": 1.0, "viscosity": 1.0, "rho_minus": 1.0,
                "rho_plus": 0.0, "gravity": 1.0},
}

_SCHEMA = {
    "n_points": int,
    "t_end": _NUMBER,
    "monitor_stride": int,
    "snapshot_stride": int,
    "quadrature_multiple": int,
    "norm_orders": list,
    "initial": {"modes": list},
    "scheme": {"name": str, "dt": _NUMBER, "adaptive": bool,
               "tol": _NUMBER, "dt_min": _NUMBER,
               "dt_max": (int, float, type(None)), "cfl_safety": _NUMBER},
    "physics": {"permeability": _NUMBER, "viscosity": _NUMBER,
                "rho_minus": _NUMBER, "rho_plus": _NUMBER,
                "gravity": _NUMBER},
}

PRESETS = {
    # small decaying cosine: clean exponential relaxation at rate
    # k*drho/(2 mu), the dispersion-relation benchmark
    "small_cos": {
        "n_points": 128,
        "t_end": 4.0,
        "monitor_stride": 5,
        "scheme": {"name": "rk4_explicit", "dt": 0.02},
        "initial": {"modes": [[1, 1e-3, 0.0]]},
    },
    # cosine plus a shallow exponential tail (slope -0.05): the fitted
    # tail slope steepens in time, the instant-smoothing signature
    "smoothing_tail": {
        "n_points": 128,
        "t_end": 1.0,
        "monitor_stride": 5,
        "scheme": {"name": "rk4_explicit", "dt": 0.02},
        "initial": {"modes": [[1, 0.5, 0.0]] + [
            [m, 1e-4 * float(np.exp(-0.05 * m)), 0.0]
            for m in range(2, 33)]},
    },
}


def _check_section(data: dict, schema: dict, path: str = "") -> None:
    for key, value in data.items():
        here = f"{path}{key}"
        if key not in schema:
            hint = difflib.get_close_matches(key, schema, n=1)
            extra = f" (did you mean '{path}{hint[0]}'?)" if hint else ""
            raise ConfigError(f"unknown config key '{here}'{extra}")
        expected = schema[key]
        if isinstance(expected, dict):
            if not isinstance(value, dict):
                raise ConfigError(
                    f"config key '{here}': expected an object, got "
                    f"{type(value).__name__}")
            _check_section(value, expected, here + ".")
        elif isinstance(value, bool) and expected is not bool:
            # JSON true/false must not slip into numeric slots
            raise ConfigError(f"config key '{here}': expected "
                              f"{_type_name(expected)}, got bool")
        elif not isinstance(value, expected):
            raise ConfigError(
                f"config key '{here}': expected {_type_name(expected)}, "
                f"got {type(value).__name__} ({value!r})")


def _type_name(expected) -> str:
    if isinstance(expected, tuple):
        return "/".join(t.__name__ for t in expected)
    return expected.__name__


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def load_config(source: dict) -> dict:
    """Validate a raw config dict and fill in defaults."""
    _check_section(source, _SCHEMA)
    cfg = _merge(DEFAULT_CONFIG, source)
    for triple in cfg["initial"]["modes"]:
        if (not isinstance(triple, (list, tuple)) or len(triple) != 3
                or not isinstance(triple[0], int)
                or not all(isinstance(v, _NUMBER) for v in triple)):
            raise ConfigError(
                "config key 'initial.modes': entries must be "
                "[mode:int, cos_amp, sin_amp] triples, got "
                f"{triple!r}")
        if not 0 <= triple[0] <= cfg["n_points"] // 2:
            raise ConfigError(
                f"config key 'initial.modes': mode {triple[0]} does not fit "
                f"on {cfg['n_points']} points")
    return cfg


def build_objects(cfg: dict):
    """Config dict -> (field, scheme, params, workspace)."""
    try:
        params = PhysicalParams(**cfg["physics"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"physics: {exc}") from None
    try:
        scheme = SchemeConfig(**cfg["scheme"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"scheme: {exc}") from None
    try:
        grid = Grid(cfg["n_points"])
        f0 = SpectralField.from_modes(
            grid, [tuple(t) for t in cfg["initial"]["modes"]])
        mult = cfg["quadrature_multiple"]
        rule = QuadratureRule.shifted_symmetric(mult * grid.n_points)
        ws = OperatorWorkspace(grid, rule)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return f0, scheme, params, ws


# -- simulation outputs -----------------------------------------------

class SnapshotWriter:
    """Binary snapshot stream: 16-byte header (magic, format version,
    n_points), then float64 records (t, samples[n]), little endian."""

    def __init__(self, path: Path, n_points: int, stride: int):
        self.path = path
        self.stride = max(0, stride)
        self._fh = open(path, "wb")
        self._fh.write(SNAPSHOT_MAGIC)
        self._fh.write(struct.pack("<II", SNAPSHOT_VERSION, n_points))
        self._count = 0
        self._seen = 0
        self._last = None

    def sink(self, state) -> None:
        take = self.stride > 0 and self._seen % self.stride == 0
        if self._seen == 0 or take:
            self._write(state.t, state.field.samples)
        else:
            self._last = (state.t, state.field.samples.copy())
        self._seen += 1

    def _write(self, t: float, samples: np.ndarray) -> None:
        self._fh.write(struct.pack("<d", t))
        self._fh.write(np.asarray(samples, "<f8").tobytes())
        self._count += 1
        self._last = None

    def close(self) -> None:
        if self._last is not None:
            self._write(*self._last)
        self._fh.close()


def read_snapshots(path) -> tuple[np.ndarray, np.ndarray]:
    """Return (times, samples[k, n]) from a snapshots.bin file."""
    raw = Path(path).read_bytes()
    if raw[:8] != SNAPSHOT_MAGIC:
        raise ValueError(f"{path}: not a snapshot file")
    version, n = struct.unpack("<II", raw[8:16])
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"{path}: unsupported snapshot version {version}")
    rec = 8 * (1 + n)
    body = raw[16:]
    if len(body) % rec:
        raise ValueError(f"{path}: truncated snapshot record")
    k = len(body) // rec
    flat = np.frombuffer(body, "<f8").reshape(k, 1 + n)
    return flat[:, 0].copy(), flat[:, 1:].copy()


def _write_timeseries(path: Path, monitors) -> None:
    orders = monitors.norm_orders
    header = ["time", "mean", "max_abs", "tail_slope"] + [
        f"sobolev_{s:g}" for s in orders]
    lines = [",".join(header)]
    for i, t in enumerate(monitors.times):
        row = [f"{t:.17g}", f"{monitors.means[i]:.17g}",
               f"{monitors.max_abs[i]:.17g}"]
        slope = monitors.tail_slopes[i]
        row.append("" if slope is None else f"{slope:.17g}")
        row.extend(f"{monitors.sobolev[s][i]:.17g}" for s in orders)
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")


def run_simulation(cfg: dict, outdir: Path) -> dict:
    f0, scheme, params, ws = build_objects(cfg)
    outdir.mkdir(parents=True, exist_ok=True)
    snaps = SnapshotWriter(outdir / "snapshots.bin", f0.grid.n_points,
                           cfg["snapshot_stride"])
    t0 = time.perf_counter()
    try:
        state = evolution.run(
            f0, cfg["t_end"], scheme, params, ws,
            monitor_stride=cfg["monitor_stride"], sinks=(snaps.sink,),
            norm_orders=tuple(cfg["norm_orders"]))
    except ValueError as exc:
        snaps.close()
        raise ConfigError(str(exc)) from None
    finally:
        snaps.close()
    elapsed = time.perf_counter() - t0

    _write_timeseries(outdir / "timeseries.csv", state.monitors)
    meta = {
        "version": __version__,
        "config": cfg,
        "termination": state.termination,
        "steps": state.step_index,
        "final_time": state.t,
        "final_mean_drift": float(integral_mean(state.field)
                                  - integral_mean(f0)),
        "blow_up": evolution.blow_up_status(state, 2.0),
        "wall_seconds": elapsed,
    }
    (outdir / "metadata.json").write_text(json.dumps(meta, indent=2) + "\n")
    return meta


# -- self checks ------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    value: float
    requirement: str
    passed: bool


def _upper(name, value, bound) -> CheckResult:
    return CheckResult(name, value, f"<= {bound:g}", value <= bound)


def verification_checks(full: bool = False) -> list[CheckResult]:
    """Deterministic self-check table; `full` adds the slower rows."""
    rng = np.random.default_rng(20240817)
    rows: list[CheckResult] = []

    # flat-interface operator equals the -2 pi |m| multiplier
    grid = Grid(128)
    ws = OperatorWorkspace(grid)
    h = SpectralField.from_modes(
        grid, [(m, rng.normal(), rng.normal()) for m in range(1, 17)])
    flat = SpectralField.zero(grid)
    got = operators.full_operator(flat, h, ws)
    want = (-2.0 * np.pi) * half_laplacian(h)
    rows.append(_upper("flat_multiplier", _max_err(got, want), 1e-9))

    # direct vs decomposed interface velocity
    params = PhysicalParams.from_contrast(1.0, 1.0, 1.0)
    f = _random_interface(grid, rng, slope=1.0)
    err = _max_err(operators.direct_rhs(f, params, ws),
                   operators.decomposed_rhs(f, params, ws))
    rows.append(_upper("decomposition", err, 1e-7))

    # odd-kernel cancellation at high resolution
    g512 = Grid(512)
    f512 = _random_interface(g512, rng, slope=1.5)
    rule = QuadratureRule.shifted_symmetric(1024)
    worst = max(abs(cancellation_residual(f512, x, rule))
                for x in (-2.0, 0.3, 1.7))
    rows.append(_upper("cancellation", worst, 1e-8))

    # linearized rate of a single mode
    rate = analysis.linearized_rate(2, params, ws)
    rel = abs(rate + params.decay_coefficient * 2) / (
        params.decay_coefficient * 2)
    rows.append(_upper("linear_rate", rel, 1e-3))

    # trace velocity reproduces the interface velocity
    kin = flow.kinematic_residual(f, params, ws)
    rows.append(_upper("kinematic", kin, 1e-7))

    # conservation of the interface mean over a short run
    cfgm = SchemeConfig("rk4_explicit", dt=0.01)
    st = evolution.run(SpectralField.from_modes(grid, [(1, 0.5, 0.0)]),
                       0.5, cfgm, params, ws, monitor_stride=10)
    drift = abs(integral_mean(st.field))
    rows.append(_upper("mean_drift", drift, 1e-10))

    if not full:
        return rows

    # dispersion relation across modes and parameter sets
    worst_rel = 0.0
    for trip in ((1.0, 1.0, 1.0), (2.0, 1.0, 1.0), (1.0, 0.5, 3.0)):
        p = PhysicalParams.from_contrast(*trip)
        rep = analysis.linearized_spectrum(range(1, 9), p, ws)
        worst_rel = max(worst_rel, rep.max_rel_error)
    rows.append(_upper("dispersion_table", worst_rel, 1e-4))

    # transport coefficient: desingularized split vs naive PV at n = 512
    g512b = Grid(512)
    ws512 = OperatorWorkspace(g512b)
    f04 = SpectralField.from_modes(g512b, [(1, 0.4, 0.0)])
    split_err = _max_err(operators.transport_coefficient_split(f04, ws512),
                         operators.transport_coefficient(f04, ws512))
    rows.append(_upper("transport_split", split_err, 1e-8))

    # divergence-free bulk velocity (centered differences)
    f2 = SpectralField.from_modes(grid, [(1, 0.2, 0.0)])
    rows.append(_upper("flow_divergence",
                       _divergence_error(f2, params), 1e-6))

    # pressure continuity across the interface
    c_plus, c_minus = flow.match_pressure_constants(f2, params)
    xs = np.array([-1.9, 0.7, 2.4])
    pts = np.column_stack([xs, f2.eval_at(xs)])
    pj = flow.pressure(f2, params, "+", pts, (c_plus, c_minus))
    mj = flow.pressure(f2, params, "-", pts, (c_plus, c_minus))
    rows.append(_upper("pressure_continuity",
                       float(np.max(np.abs(pj - mj))), 1e-5))

    # observed convergence order of the explicit stepper
    order = _rk4_order(params)
    rows.append(CheckResult("rk4_order", order, "in [3.7, 4.3]",
                            3.7 <= order <= 4.3))
    return rows


def _max_err(a: SpectralField, b: SpectralField) -> float:
    return float(np.max(np.abs(a.samples - b.samples)))


def _random_interface(grid: Grid, rng, slope: float) -> SpectralField:
    modes = [(m, rng.normal(), rng.normal()) for m in range(1, 9)]
    f = SpectralField.from_modes(grid, modes)
    mx = float(np.max(np.abs(derivative(f).samples)))
    return (slope / mx) * f


def _divergence_error(f: SpectralField, params: PhysicalParams) -> float:
    rng = np.random.default_rng(7)
    xs = rng.uniform(-np.pi, np.pi, 6)
    ys = rng.uniform(0.7, 1.5, 6)
    eps = 1e-4
    worst = 0.0
    for x, y in zip(xs, ys):
        pts = [(x + eps, y), (x - eps, y), (x, y + eps), (x, y - eps)]
        vel = flow.bulk_velocity(f, params, pts, clearance=0.2).velocity
        div = (vel[0, 0] - vel[1, 0] + vel[2, 1] - vel[3, 1]) / (2 * eps)
        worst = max(worst, abs(div))
    return worst


def _rk4_order(params: PhysicalParams) -> float:
    grid = Grid(64)
    ws = OperatorWorkspace(grid)
    f0 = SpectralField.from_modes(grid, [(1, 0.3, 0.0), (2, 0.0, 0.1)])
    t_end = 0.1
    errs = []
    ref = evolution.run(f0, t_end, SchemeConfig("rk4_explicit", dt=t_end / 64),
                        params, ws, monitor_stride=1000).field
    for steps in (4, 8):
        st = evolution.run(f0, t_end,
                           SchemeConfig("rk4_explicit", dt=t_end / steps),
                           params, ws, monitor_stride=1000)
        errs.append(_max_err(st.field, ref))
    return float(np.log2(errs[0] / errs[1]))


# -- subcommands ------------------------------------------------------

def _cmd_simulate(args) -> int:
    if args.preset:
        if args.preset not in PRESETS:
            names = ", ".join(sorted(PRESETS))
            print(f"unknown preset '{args.preset}' (available: {names})",
                  file=sys.stderr)
            return 2
        raw = PRESETS[args.preset]
    else:
        try:
            raw = json.loads(Path(args.config).read_text())
        except OSError as exc:
            print(f"cannot read config: {exc}", file=sys.stderr)
            return 2
        except json.JSONDecodeError as exc:
            print(f"config is not valid JSON: {exc}", file=sys.stderr)
            return 2
        if not isinstance(raw, dict):
            print("config must be a JSON object", file=sys.stderr)
            return 2
    try:
        cfg = load_config(raw)
        meta = run_simulation(cfg, Path(args.output))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    print(f"termination={meta['termination']} steps={meta['steps']} "
          f"final_time={meta['final_time']:.6g} "
          f"mean_drift={meta['final_mean_drift']:.3e}")
    if meta["termination"] != "t_end" or meta["blow_up"] != "ok":
        print(f"simulation ended abnormally: termination="
              f"{meta['termination']}, blow_up={meta['blow_up']}",
              file=sys.stderr)
        return 1
    return 0


def _cmd_verify(args) -> int:
    rows = verification_checks(full=args.level == "full")
    width = max(len(r.name) for r in rows)
    failures = 0
    for r in rows:
        status = "PASS" if r.passed else "FAIL"
        failures += not r.passed
        print(f"{status}  {r.name:<{width}}  value={r.value:.3e}  "
              f"require {r.requirement}")
    print(f"{len(rows) - failures}/{len(rows)} checks passed")
    return 1 if failures else 0


def _cmd_spectrum(args) -> int:
    if args.m_max > args.n // 8:
        print(f"error: m-max {args.m_max} exceeds n/8 = {args.n // 8}; "
              "increase --n", file=sys.stderr)
        return 2
    try:
        params = PhysicalParams.from_contrast(args.k, args.mu, args.drho)
        grid = Grid(args.n)
        ws = OperatorWorkspace(grid)
        report = analysis.linearized_spectrum(
            range(1, args.m_max + 1), params, ws)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    lines = ["mode,computed_rate,predicted_rate,rel_error"]
    for i, m in enumerate(report.modes):
        c, p = report.computed[i], report.predicted[i]
        lines.append(f"{m},{c:.17g},{p:.17g},{abs(c - p) / abs(p):.3e}")
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text)
        print(f"wrote {args.output} (max rel error "
              f"{report.max_rel_error:.3e})")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_velocity(args) -> int:
    try:
        raw = json.loads(Path(args.config).read_text())
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        cfg = load_config(raw)
        f, _, params, _ = build_objects(cfg)
    except (OSError, json.JSONDecodeError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    xs = np.linspace(args.xmin, args.xmax, args.nx)
    ys = np.linspace(args.ymin, args.ymax, args.ny)
    gx, gy = np.meshgrid(xs, ys)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    gap = pts[:, 1] - f.eval_at(pts[:, 0])
    bad = np.abs(gap) < args.clearance
    if np.any(bad):
        i = int(np.argmax(bad))
        print(f"error: row {i} at (x={pts[i, 0]:.6g}, y={pts[i, 1]:.6g}) "
              f"is within clearance {args.clearance:g} of the interface",
              file=sys.stderr)
        return 2
    field = flow.bulk_velocity(f, params, pts, clearance=args.clearance)
    if np.any(np.abs(f.samples) > 0):
        constants = flow.match_pressure_constants(f, params)
    else:
        constants = (0.0, 0.0)
    press = np.empty(len(pts))
    for side in ("+", "-"):
        mask = field.region == side
        if np.any(mask):
            press[mask] = flow.pressure(f, params, side, pts[mask],
                                        constants)
    lines = ["x,y,v1,v2,region,p"]
    for (x, y), (v1, v2), reg, p in zip(field.points, field.velocity,
                                        field.region, press):
        lines.append(f"{x:.17g},{y:.17g},{v1:.17g},{v2:.17g},{reg},"
                     f"{p:.17g}")
    Path(args.output).write_text("\n".join(lines) + "\n")
    print(f"wrote {args.output}: {len(field.points)} points at kernel "
          f"resolution {field.resolution}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="muskat",
        description="Periodic two-phase interface flow in a porous medium")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="integrate an interface in time")
    src = sim.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="path to a JSON run configuration")
    src.add_argument("--preset", help="built-in configuration: "
                     + ", ".join(sorted(PRESETS)))
    sim.add_argument("--output", required=True,
                     help="directory for timeseries/snapshots/metadata")
    sim.set_defaults(func=_cmd_simulate)

    ver = sub.add_parser("verify", help="run the self-check table")
    ver.add_argument("--level", choices=("quick", "full"), default="quick",
                     help="quick: <1 min; full adds the n=512 oracles")
    ver.set_defaults(func=_cmd_verify)

    spec = sub.add_parser("spectrum",
                          help="measured vs predicted linear decay rates")
    spec.add_argument("--k", type=float, default=1.0,
                      help="permeability")
    spec.add_argument("--mu", type=float, default=1.0, help="viscosity")
    spec.add_argument("--drho", type=float, default=1.0,
                      help="gravity-scaled density jump")
    spec.add_argument("--m-max", type=int, default=8,
                      help="largest mode; must be at most n/8")
    spec.add_argument("--n", type=int, default=128)
    spec.add_argument("--output", help="write CSV here instead of stdout")
    spec.set_defaults(func=_cmd_spectrum)

    vel = sub.add_parser(
        "velocity",
        help="sample velocity and pressure on a rectangle (CSV)")
    vel.add_argument("--config", required=True,
                     help="JSON run config supplying interface and physics")
    vel.add_argument("--xmin", type=float, default=-np.pi)
    vel.add_argument("--xmax", type=float, default=np.pi)
    vel.add_argument("--ymin", type=float, default=-1.5)
    vel.add_argument("--ymax", type=float, default=1.5)
    vel.add_argument("--nx", type=int, default=24)
    vel.add_argument("--ny", type=int, default=17)
    vel.add_argument("--clearance", type=float, default=1e-3,
                     help="required distance of every point from the "
                          "interface")
    vel.add_argument("--output", required=True, help="CSV output path")
    vel.set_defaults(func=_cmd_velocity)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
