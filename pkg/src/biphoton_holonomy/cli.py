"""Command-line front end: sweeps, trajectories, spectra and the verify suite.

Every dataset is written as CSV (17 significant digits, ``\\n`` line endings)
with, when ``-o`` is given, a JSON sidecar describing the run. Angles given
with a ``_deg`` suffix (``--eta-deg`` on the command line) are in degrees;
all others are radians.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import subprocess
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .biphoton import EntanglementParams, alpha_from_schmidt, g_phi, g_proj, schmidt_number
from .checks import CheckConfig, run_checks
from .circuit import (
    Circuit,
    DEFAULT_SAMPLES,
    closed_form_dynamic_phase,
    circuit_from_dict,
    load_circuit,
    oracle_g_phi,
    oracle_g_proj,
    oracle_projections,
    trajectory_export,
    transit,
)
from .errors import ConfigError, HolonomyError, UndefinedPhase
from .holonomy import phase_profile, wrap_angle
from .modes import SpherePoint
from .pump import (
    DEFAULT_WINDOW,
    closed_form_pump,
    pump_from_target,
    spectrum_from_pump,
    target_from_entanglement,
)

__all__ = ["SweepSpec", "Axis", "parse_sweep_spec", "load_sweep_spec", "run_sweep", "run_trajectory",
           "run_spectrum", "format_csv", "main"]

AXIS_NAMES = ("eta", "theta_i", "alpha", "beta", "K")
ANGLE_NAMES = ("eta", "theta_i", "phi_i", "alpha", "beta")
QUANTITIES = ("g_phi", "g_proj", "p_aa", "p_ab_sq", "schmidt", "spectrum", "trajectory")
DEFAULTS = {"eta": 0.0, "theta_i": math.pi / 2, "phi_i": 0.0, "alpha": math.pi / 2, "beta": 0.0}


@dataclass(frozen=True)
class Axis:
    name: str
    min: float
    max: float
    count: int

    def values(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.count)


@dataclass(frozen=True)
class SweepSpec:
    quantity: str
    axes: tuple = ()
    fixed: dict = field(default_factory=dict)
    samples: int = DEFAULT_SAMPLES
    window: int = DEFAULT_WINDOW
    branch: str = "lower"
    circuit: object = None

    def __post_init__(self):
        if self.quantity not in QUANTITIES:
            raise ConfigError(f"quantity: unknown quantity {self.quantity!r}; expected one of {', '.join(QUANTITIES)}")
        if len(self.axes) > 2:
            raise ConfigError("axes: at most two variable axes are allowed")
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ConfigError("axes: an axis name appears twice")
        if "K" in names and "alpha" in names:
            raise ConfigError("axes: 'K' and 'alpha' cannot both vary")
        if self.quantity in ("spectrum", "trajectory") and self.axes:
            raise ConfigError(f"axes: quantity {self.quantity!r} takes fixed parameters only")
        if self.circuit is not None and self.quantity != "trajectory":
            raise ConfigError("circuit: custom circuits are only supported for 'trajectory'")
        clash = set(names) & set(self.fixed)
        if clash:
            raise ConfigError(f"fixed: {sorted(clash)} also appear as axes")
        if "K" in self.fixed and ("alpha" in self.fixed or "alpha" in names):
            raise ConfigError("fixed: 'K' and 'alpha' cannot both be set")
        if "K" in names and "alpha" in self.fixed:
            raise ConfigError("fixed: 'alpha' is determined by the 'K' axis")


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{where}: must be finite")
    return float(value)


def _named_value(d: dict, key: str, where: str) -> tuple[str, float]:
    """Resolve ``name`` / ``name_deg`` keys to ``(name, radians)``."""
    if key.endswith("_deg"):
        name = key[:-4]
        if name not in ANGLE_NAMES:
            raise ConfigError(f"{where}.{key}: '{name}' is not an angle")
        return name, math.radians(_number(d[key], f"{where}.{key}"))
    if key not in ANGLE_NAMES and key != "K":
        raise ConfigError(f"{where}.{key}: unknown parameter")
    return key, _number(d[key], f"{where}.{key}")


def _parse_axis(d, where: str) -> Axis:
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: axis must be an object")
    name = d.get("name")
    if name not in AXIS_NAMES:
        raise ConfigError(f"{where}.name: expected one of {', '.join(AXIS_NAMES)}, got {name!r}")
    bounds = {}
    for end in ("min", "max"):
        if f"{end}_deg" in d:
            if name == "K":
                raise ConfigError(f"{where}.{end}_deg: K is not an angle")
            bounds[end] = math.radians(_number(d[f"{end}_deg"], f"{where}.{end}_deg"))
        elif end in d:
            bounds[end] = _number(d[end], f"{where}.{end}")
        else:
            raise ConfigError(f"{where}: missing '{end}'")
    count = d.get("count")
    if isinstance(count, bool) or not isinstance(count, int) or count < 1:
        raise ConfigError(f"{where}.count: expected a positive integer, got {count!r}")
    unknown = set(d) - {"name", "min", "max", "min_deg", "max_deg", "count"}
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {sorted(unknown)}")
    if name == "K" and not (1 <= bounds["min"] <= 2 and 1 <= bounds["max"] <= 2):
        raise ConfigError(f"{where}: Schmidt number bounds must lie in [1, 2]")
    return Axis(name, bounds["min"], bounds["max"], count)


def parse_sweep_spec(data) -> SweepSpec:
    if not isinstance(data, dict):
        raise ConfigError("top level: sweep spec must be a JSON object")
    unknown = set(data) - {"quantity", "axes", "fixed", "samples", "window", "branch", "circuit"}
    if unknown:
        raise ConfigError(f"top level: unknown field(s) {sorted(unknown)}")
    if "quantity" not in data:
        raise ConfigError("top level: missing 'quantity'")
    axes = data.get("axes", [])
    if not isinstance(axes, list):
        raise ConfigError("axes: expected a list")
    fixed_raw = data.get("fixed", {})
    if not isinstance(fixed_raw, dict):
        raise ConfigError("fixed: expected an object")
    fixed = {}
    for key in fixed_raw:
        name, value = _named_value(fixed_raw, key, "fixed")
        if name in fixed:
            raise ConfigError(f"fixed.{key}: '{name}' given twice")
        fixed[name] = value
    if "K" in fixed and not 1 <= fixed["K"] <= 2:
        raise ConfigError("fixed.K: Schmidt number must lie in [1, 2]")
    samples = data.get("samples", DEFAULT_SAMPLES)
    if isinstance(samples, bool) or not isinstance(samples, int) or samples < 2:
        raise ConfigError("samples: expected an integer >= 2")
    window = data.get("window", DEFAULT_WINDOW)
    if isinstance(window, bool) or not isinstance(window, int) or window < 1:
        raise ConfigError("window: expected an integer >= 1")
    branch = data.get("branch", "lower")
    if branch not in ("lower", "upper"):
        raise ConfigError("branch: expected 'lower' or 'upper'")
    circuit = data.get("circuit")
    if circuit is not None:
        circuit_from_dict(circuit)
    return SweepSpec(
        quantity=data["quantity"],
        axes=tuple(_parse_axis(a, f"axes[{i}]") for i, a in enumerate(axes)),
        fixed=fixed,
        samples=samples,
        window=window,
        branch=branch,
        circuit=circuit,
    )


def load_sweep_spec(path) -> tuple[SweepSpec, dict]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return parse_sweep_spec(data), data
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _resolve(point: dict, branch: str) -> dict:
    values = dict(DEFAULTS)
    values.update(point)
    if "K" in point:
        values["alpha"] = alpha_from_schmidt(point["K"], branch)
    return values


def _grid_points(spec: SweepSpec) -> list[dict]:
    points = [dict(spec.fixed)]
    for axis in spec.axes:
        points = [{**p, axis.name: float(v)} for p in points for v in axis.values()]
    return points


def _evaluate_point(task) -> list:
    """Simulated and oracle values at one grid point; module-level for pickling."""
    quantity, point, samples, branch = task
    v = _resolve(point, branch)
    if quantity == "schmidt":
        sim = schmidt_number(v["alpha"])
        lam_a, lam_b = math.cos(v["alpha"] / 2) ** 2, math.sin(v["alpha"] / 2) ** 2
        ref = point["K"] if "K" in point else 1.0 / (lam_a**2 + lam_b**2)
        return [sim, ref, abs(sim - ref)]
    circ = Circuit.two_pi_converters(v["eta"], samples=samples)
    proj = transit(circ, SpherePoint(v["theta_i"], v["phi_i"])).end_projections
    oracle = oracle_projections(v["eta"], v["theta_i"])
    if quantity == "p_aa":
        return [proj.p_aa.real, proj.p_aa.imag, oracle.p_aa.real, oracle.p_aa.imag, abs(proj.p_aa - oracle.p_aa)]
    if quantity == "p_ab_sq":
        a, b = proj.p_ab**2, oracle.p_ab**2
        return [a.real, a.imag, b.real, b.imag, abs(a - b)]
    prm = EntanglementParams(v["alpha"], v["beta"])
    if quantity == "g_proj":
        sim, ref = g_proj(prm, proj), oracle_g_proj(v["eta"], v["theta_i"], prm)
        return [sim, ref, abs(sim - ref)]
    try:
        sim = g_phi(prm, proj)
    except UndefinedPhase:
        sim = math.nan
    try:
        ref = oracle_g_phi(v["eta"], v["theta_i"], prm)
    except UndefinedPhase:
        ref = math.nan
    return [sim, ref, abs(wrap_angle(sim - ref))]


_VALUE_COLUMNS = {
    "g_phi": ["simulated", "oracle", "abs_diff"],
    "g_proj": ["simulated", "oracle", "abs_diff"],
    "schmidt": ["simulated", "oracle", "abs_diff"],
    "p_aa": ["simulated_re", "simulated_im", "oracle_re", "oracle_im", "abs_diff"],
    "p_ab_sq": ["simulated_re", "simulated_im", "oracle_re", "oracle_im", "abs_diff"],
}


def _unwrap_last_axis(values: np.ndarray, spec: SweepSpec) -> np.ndarray:
    """Continue a wrapped angle along the fastest-varying axis, skipping undefined points."""
    counts = [a.count for a in spec.axes] or [1]
    grid = values.reshape(-1, counts[-1])
    out = np.full_like(grid, np.nan)
    for i, row in enumerate(grid):
        ok = np.isfinite(row)
        out[i, ok] = np.unwrap(row[ok])
    return out.reshape(-1)


def _map(fn, tasks, jobs: int) -> list:
    if jobs <= 1 or len(tasks) < 2:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def run_sweep(spec: SweepSpec, jobs: int = 1) -> tuple[list[str], list[list]]:
    """Header and rows, in row-major order over the axes."""
    if spec.quantity == "spectrum":
        v = _resolve(spec.fixed, spec.branch)
        return run_spectrum(v["alpha"], v["beta"], v["theta_i"], spec.window)
    if spec.quantity == "trajectory":
        v = _resolve(spec.fixed, spec.branch)
        circuit = circuit_from_dict(spec.circuit) if spec.circuit is not None else (
            Circuit.two_pi_converters(v["eta"], samples=spec.samples))
        return run_trajectory(circuit, SpherePoint(v["theta_i"], v["phi_i"]))
    points = _grid_points(spec)
    results = _map(_evaluate_point, [(spec.quantity, p, spec.samples, spec.branch) for p in points], jobs)
    axis_names = [a.name for a in spec.axes]
    header = axis_names + _VALUE_COLUMNS[spec.quantity]
    rows = [[p[n] for n in axis_names] + r for p, r in zip(points, results)]
    if spec.quantity == "g_phi":
        header.append("simulated_unwrapped")
        unwrapped = _unwrap_last_axis(np.array([r[len(axis_names)] for r in rows]), spec)
        for row, u in zip(rows, unwrapped):
            row.append(float(u))
    return header, rows


def run_trajectory(circuit: Circuit, start: SpherePoint, mode: str = "A") -> tuple[list[str], list[list]]:
    """Chart coordinates and accumulated phases along the path of one mode."""
    record = transit(circuit, start)
    path = record.path_a if mode.upper() == "A" else record.path_b
    chart = trajectory_export(record, mode)
    prof = phase_profile(path)
    oracle = closed_form_dynamic_phase(circuit, path.initial, path.s)
    header = ["s", "theta", "phi", "chi", "phi_tot", "phi_dyn", "phi_geom", "phi_dyn_oracle", "abs_diff"]
    rows = [
        [*c, t, d, g, o, abs(d - o)]
        for c, t, d, g, o in zip(chart.tolist(), prof.total, prof.dynamic, prof.geometric, oracle)
    ]
    return header, rows


def run_spectrum(alpha: float, beta: float, theta_i: float, window: int = DEFAULT_WINDOW):
    """Two-photon spectrum of the engineered pump, checked against the closed-form pump."""
    prm = EntanglementParams(alpha, beta)
    spec = spectrum_from_pump(pump_from_target(target_from_entanglement(prm, theta_i)), window)
    ref = spectrum_from_pump(closed_form_pump(prm, theta_i), window)
    header = ["l1", "l2", "re_c", "im_c", "abs_c", "probability", "oracle_re", "oracle_im", "abs_diff"]
    rows = []
    for key in sorted(spec.entries):
        c, r = spec[key], ref[key]
        rows.append([key[0], key[1], c.real, c.imag, abs(c), abs(c) ** 2 / spec.normalization,
                     r.real, r.imag, abs(c - r)])
    return header, rows


def _cell(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x) + 0.0, ".17g")


def format_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(x) for x in row])
    return buf.getvalue()


def _version() -> str:
    try:
        from importlib.metadata import version

        base = version("artifact")
    except Exception:
        base = "0+unknown"
    try:
        desc = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent, capture_output=True, text=True, timeout=5,
        )
        if desc.returncode == 0 and desc.stdout.strip():
            return f"{base}+g{desc.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return base


def _emit(header, rows, out, meta: dict):
    text = format_csv(header, rows)
    if out is None:
        sys.stdout.write(text)
        return
    out = Path(out)
    out.write_text(text, encoding="utf-8", newline="")
    sidecar = {"version": _version(), "columns": header, "rows": len(rows), **meta}
    Path(str(out) + ".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _default_jobs() -> int:
    raw = os.environ.get("BIPHOTON_JOBS", "1")
    try:
        jobs = int(raw)
    except ValueError:
        raise ConfigError(f"BIPHOTON_JOBS: expected an integer, got {raw!r}") from None
    if jobs < 1:
        raise ConfigError("BIPHOTON_JOBS: must be at least 1")
    return jobs


def _angle_arg(parser, name: str, required: bool, help_text: str):
    group = parser.add_mutually_exclusive_group(required=required)
    flag = name.replace("_", "-")
    group.add_argument(f"--{flag}", dest=name, type=float, help=f"{help_text} (radians)")
    group.add_argument(f"--{flag}-deg", dest=f"{name}_deg", type=float, help=f"{help_text} (degrees)")


def _angle(args, name: str, default=None) -> float:
    deg = getattr(args, f"{name}_deg", None)
    if deg is not None:
        return math.radians(deg)
    rad = getattr(args, name, None)
    return default if rad is None else rad


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="biphoton", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="evaluate a quantity over a parameter grid")
    sw.add_argument("spec", help="sweep spec (JSON)")
    sw.add_argument("-o", "--output", help="CSV output file (default: stdout)")
    sw.add_argument("--jobs", type=int, default=None, help="worker processes (default: $BIPHOTON_JOBS or 1)")

    tr = sub.add_parser("trajectory", help="chart coordinates and phases along a circuit path")
    src = tr.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=["two-pi-converters"], default="two-pi-converters")
    src.add_argument("--circuit", help="circuit file (JSON)")
    _angle_arg(tr, "eta", False, "misorientation of the second converter")
    _angle_arg(tr, "theta_i", True, "initial polar angle")
    _angle_arg(tr, "phi_i", False, "initial azimuth")
    tr.add_argument("--mode", choices=["A", "B"], default="A")
    tr.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, help="samples per lens")
    tr.add_argument("-o", "--output")

    sp = sub.add_parser("spectrum", help="two-photon OAM spectrum of the engineered pump")
    _angle_arg(sp, "alpha", True, "entanglement strength")
    _angle_arg(sp, "beta", True, "entanglement phase")
    _angle_arg(sp, "theta_i", True, "initial polar angle")
    sp.add_argument("--window", type=int, default=DEFAULT_WINDOW, help="largest |l| tabulated")
    sp.add_argument("-o", "--output")

    ve = sub.add_parser("verify", help="run the oracle and invariant suite")
    ve.add_argument("--tol", type=float, default=None, help="override every tolerance")
    ve.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, help="samples per lens")
    ve.add_argument("--jobs", type=int, default=None)
    return parser


def _verify(args) -> int:
    jobs = args.jobs if args.jobs is not None else _default_jobs()
    results = run_checks(CheckConfig(tol=args.tol, samples=args.samples), jobs=jobs)
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status}  {r.name:<{width}}  err={r.error:.3e}  tol={r.tol:.1e}")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return _verify(args)
        if args.command == "sweep":
            spec, raw = load_sweep_spec(args.spec)
            jobs = args.jobs if args.jobs is not None else _default_jobs()
            if jobs < 1:
                raise ConfigError("--jobs: must be at least 1")
            header, rows = run_sweep(spec, jobs)
            _emit(header, rows, args.output, {"command": "sweep", "spec": raw})
        elif args.command == "trajectory":
            if args.samples < 2:
                raise ConfigError("--samples: must be at least 2")
            start = SpherePoint(_angle(args, "theta_i"), _angle(args, "phi_i", 0.0))
            if args.circuit:
                if args.eta is not None or args.eta_deg is not None:
                    raise ConfigError("--eta applies to the preset only")
                circuit = load_circuit(args.circuit)
                source = {"circuit": str(args.circuit)}
            else:
                eta = _angle(args, "eta", 0.0)
                circuit = Circuit.two_pi_converters(eta, samples=args.samples)
                source = {"preset": args.preset, "eta": eta, "samples": args.samples}
            header, rows = run_trajectory(circuit, start, args.mode)
            _emit(header, rows, args.output, {"command": "trajectory", **source, "mode": args.mode,
                                              "start": {"theta": start.theta, "phi": start.phi}})
        elif args.command == "spectrum":
            if args.window < 1:
                raise ConfigError("--window: must be at least 1")
            alpha, beta, theta_i = (_angle(args, n) for n in ("alpha", "beta", "theta_i"))
            header, rows = run_spectrum(alpha, beta, theta_i, args.window)
            _emit(header, rows, args.output, {"command": "spectrum", "alpha": alpha, "beta": beta,
                                              "theta_i": theta_i, "window": args.window})
    except HolonomyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
