"""Optical circuits of astigmatic lenses acting on first-order OAM states.

A cylindrical lens imposes a relative Gouy phase between the two
Hermite-Gaussian modes aligned with its axis. With the traceless split used
here, transit fraction ``zeta`` through a lens with axis angle ``a`` and total
relative Gouy phase ``g`` acts as

    L(zeta) = R(a)^dag diag(exp(-i zeta g/2), exp(+i zeta g/2))_HG R(a)

where ``R(a) = diag(exp(-i a), exp(i a))`` (``LG_l -> exp(-i l a) LG_l``)
takes lab coordinates into the lens frame. Every element is in SU(2), which
is what keeps the antipodal projection relations exact.

A :class:`FrameRotation` does not act on the light: it rotates the mounting
frame of all later elements, which is how a misoriented converter is built.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .biphoton import EntanglementParams, ProjectionSet
from .errors import ConfigError, UndefinedPhase
from .holonomy import StatePath, principal_arg, wrap_angle
from .modes import POLE_TOL, SpherePoint, state_A, state_B

__all__ = [
    "LensElement",
    "FrameRotation",
    "Circuit",
    "TransitRecord",
    "lens_operator",
    "frame_rotation",
    "circuit_operator",
    "transit",
    "oracle_projections",
    "oracle_g_phi",
    "oracle_g_proj",
    "closed_form_dynamic_phase",
    "trajectory_export",
    "circuit_from_dict",
    "load_circuit",
    "GOUY_PER_LENS",
    "CONVERTER_AXIS",
    "DEFAULT_SAMPLES",
]

GOUY_PER_LENS = math.pi / 4
# lens axis of the first converter; puts phi=0 starts on a great circle
CONVERTER_AXIS = math.pi / 4
DEFAULT_SAMPLES = 64


@dataclass(frozen=True)
class LensElement:
    axis_angle: float
    gouy_total: float = GOUY_PER_LENS
    samples: int = DEFAULT_SAMPLES

    def __post_init__(self):
        if not self.gouy_total > 0:
            raise ValueError("gouy_total must be positive")
        if int(self.samples) < 2:
            raise ValueError("a lens needs at least two samples")


@dataclass(frozen=True)
class FrameRotation:
    eta: float


Element = Union[LensElement, FrameRotation]


@dataclass(frozen=True)
class Circuit:
    elements: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))

    @classmethod
    def two_pi_converters(cls, eta: float, samples: int = DEFAULT_SAMPLES,
                          gouy_per_lens: float = GOUY_PER_LENS,
                          axis: float = CONVERTER_AXIS) -> "Circuit":
        """Two pi-mode converters, the second misoriented by ``eta``.

        Each converter is modelled as two pi/2-converters, i.e. four lenses,
        and the misorientation is a frame rotation between lens 4 and lens 5.
        """
        lens = LensElement(axis, gouy_per_lens, samples)
        return cls((lens,) * 4 + (FrameRotation(eta),) + (lens,) * 4)

    @property
    def lenses(self) -> list[LensElement]:
        return [e for e in self.elements if isinstance(e, LensElement)]

    def with_samples(self, samples: int) -> "Circuit":
        return Circuit(
            LensElement(e.axis_angle, e.gouy_total, samples) if isinstance(e, LensElement) else e
            for e in self.elements
        )

    def placed_lenses(self) -> list[tuple[float, float, int]]:
        """``(lab axis angle, gouy_total, samples)`` for each lens in order."""
        offset = 0.0
        out = []
        for e in self.elements:
            if isinstance(e, FrameRotation):
                offset += e.eta
            else:
                out.append((e.axis_angle + offset, e.gouy_total, int(e.samples)))
        return out


def _lens_matrices(axis: float, gouy: np.ndarray) -> np.ndarray:
    """Stack of lens operators for an array of accumulated Gouy phases."""
    g = np.atleast_1d(np.asarray(gouy, dtype=float))
    c, s = np.cos(g / 2), np.sin(g / 2)
    out = np.empty(g.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = c
    out[..., 1, 1] = c
    out[..., 0, 1] = -1j * s * np.exp(2j * axis)
    out[..., 1, 0] = -1j * s * np.exp(-2j * axis)
    return out


def _generator(axis: float) -> np.ndarray:
    """``R(a)^dag sigma_x R(a)``; the lens rotates states about this axis."""
    return np.array([[0, np.exp(2j * axis)], [np.exp(-2j * axis), 0]], dtype=complex)


def lens_operator(elem: LensElement, zeta: float) -> np.ndarray:
    if not 0.0 <= zeta <= 1.0:
        raise ValueError("transit fraction must lie in [0, 1]")
    return _lens_matrices(elem.axis_angle, zeta * elem.gouy_total)[0]


def frame_rotation(eta: float) -> np.ndarray:
    """``LG_l -> exp(-i l eta) LG_l`` on the ``{|+1>, |-1>}`` basis."""
    return np.diag([np.exp(-1j * eta), np.exp(1j * eta)])


def circuit_operator(circuit: Circuit) -> np.ndarray:
    """Unitary for a full transit in lab coordinates."""
    u = np.eye(2, dtype=complex)
    for axis, gouy, _ in circuit.placed_lenses():
        u = _lens_matrices(axis, gouy)[0] @ u
    return u


@dataclass(frozen=True)
class TransitRecord:
    path_a: StatePath
    path_b: StatePath
    end_projections: ProjectionSet
    start: SpherePoint
    params: EntanglementParams | None = None


class _CircuitEvaluator:
    """Evaluates the propagated state at arbitrary path parameter ``s``.

    Lens ``j`` occupies ``s`` in ``[j, j+1]`` with transit fraction ``s - j``.
    """

    def __init__(self, lenses, initial: np.ndarray):
        self.lenses = lenses
        self.inputs = []
        v = np.asarray(initial, dtype=complex)
        for axis, gouy, _ in lenses:
            self.inputs.append(v)
            v = _lens_matrices(axis, gouy)[0] @ v
        self.output = v
        self.initial = np.asarray(initial, dtype=complex)

    def __call__(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if not self.lenses:
            return np.tile(self.initial, (len(s), 1))
        n = len(self.lenses)
        idx = np.clip(np.floor(s).astype(int), 0, n - 1)
        zeta = np.clip(s - idx, 0.0, 1.0)
        out = np.empty((len(s), 2), dtype=complex)
        for j in np.unique(idx):
            sel = idx == j
            axis, gouy, _ = self.lenses[j]
            mats = _lens_matrices(axis, zeta[sel] * gouy)
            out[sel] = mats @ self.inputs[j]
        return out


def _grid(lenses) -> np.ndarray:
    if not lenses:
        return np.array([0.0, 1.0])
    parts = [np.array([0.0])]
    for j, (_, _, samples) in enumerate(lenses):
        parts.append(j + np.linspace(0.0, 1.0, samples)[1:])
    return np.concatenate(parts)


def transit(circuit: Circuit, start: SpherePoint, params: EntanglementParams | None = None) -> TransitRecord:
    """Propagate the antipodal pair prepared at ``start`` through ``circuit``.

    Both photons follow the same circuit. Projections use the
    ``<initial|final>`` convention.
    """
    start = SpherePoint(*start)
    lenses = circuit.placed_lenses()
    s = _grid(lenses)
    eval_a = _CircuitEvaluator(lenses, state_A(start).array)
    eval_b = _CircuitEvaluator(lenses, state_B(start).array)
    path_a = StatePath(s, eval_a(s), eval_a)
    path_b = StatePath(s, eval_b(s), eval_b)
    proj = ProjectionSet.from_states(path_a.initial, path_b.initial, path_a.final, path_b.final)
    return TransitRecord(path_a, path_b, proj, start, params)


def oracle_projections(eta: float, theta_i: float) -> ProjectionSet:
    """Closed-form end projections of the two-converter circuit (start at phi = chi = 0).

    The reduced forms are quoted as ``<final|initial>`` brackets, e.g.
    ``<A_f|A_i> = -cos 2eta + i sin 2eta cos theta_i``; they are conjugated
    here into the ``<initial|final>`` convention used everywhere else. The
    quoted cross terms are known only up to an overall sign, so compare them
    squared.
    """
    c2, s2 = math.cos(2 * eta), math.sin(2 * eta)
    af_ai = complex(-c2, s2 * math.cos(theta_i))
    bf_bi = complex(-c2, -s2 * math.cos(theta_i))
    af_bi = complex(0.0, -s2 * math.sin(theta_i))
    bf_ai = complex(0.0, -s2 * math.sin(theta_i))
    return ProjectionSet(
        p_aa=af_ai.conjugate(),
        p_bb=bf_bi.conjugate(),
        p_ab=bf_ai.conjugate(),
        p_ba=af_bi.conjugate(),
    )


def oracle_g_phi(eta: float, theta_i: float, params: EntanglementParams) -> float:
    """Closed-form Geometric Phase of Entanglement for the two-converter circuit."""
    al, be = params.alpha, params.beta
    t_r = (
        6 * math.cos(4 * eta)
        - 8 * math.sin(al) * math.cos(be) * math.sin(2 * eta) ** 2 * math.sin(theta_i) ** 2
        + 2
        + math.cos(4 * eta - 2 * theta_i)
        + math.cos(4 * eta + 2 * theta_i)
        - 2 * math.cos(2 * theta_i)
    )
    t_i = 8 * math.cos(al) * math.sin(4 * eta) * math.cos(theta_i)
    if abs(t_r) < 1e-14 and abs(t_i) < 1e-14:
        raise UndefinedPhase("entangled projection vanishes")
    lam_a = math.cos(al / 2) ** 2
    lam_b = math.sin(al / 2) ** 2
    plus = complex(math.cos(2 * eta), math.sin(2 * eta) * math.cos(theta_i)) ** 2
    minus = complex(math.cos(2 * eta), -math.sin(2 * eta) * math.cos(theta_i)) ** 2
    return wrap_angle(principal_arg(complex(t_r, t_i)) - lam_a * principal_arg(plus) - lam_b * principal_arg(minus))


def oracle_g_proj(eta: float, theta_i: float, params: EntanglementParams) -> float:
    return -math.sin(params.alpha) * math.cos(params.beta) * math.sin(theta_i) ** 2 * math.sin(2 * eta) ** 2


def closed_form_dynamic_phase(circuit: Circuit, initial, s) -> np.ndarray:
    """Analytic dynamic phase accumulated up to each ``s``.

    Within a lens the state precesses about the lens generator, so the
    expectation of the generator is constant and the dynamic phase grows
    linearly with the transit fraction.
    """
    lenses = circuit.placed_lenses()
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if not lenses:
        return np.zeros_like(s)
    v = np.asarray(initial, dtype=complex)
    rates, offsets = [], [0.0]
    for axis, gouy, _ in lenses:
        rate = -0.5 * gouy * float(np.real(np.vdot(v, _generator(axis) @ v)))
        rates.append(rate)
        offsets.append(offsets[-1] + rate)
        v = _lens_matrices(axis, gouy)[0] @ v
    n = len(lenses)
    idx = np.clip(np.floor(s).astype(int), 0, n - 1)
    zeta = np.clip(s - idx, 0.0, 1.0)
    return np.asarray(offsets)[idx] + np.asarray(rates)[idx] * zeta


def _filled(values: np.ndarray, valid: np.ndarray) -> np.ndarray:
    """Replace invalid entries by the nearest preceding (else following) valid one."""
    if not valid.any():
        return np.zeros_like(values)
    idx = np.where(valid, np.arange(len(values)), 0)
    np.maximum.accumulate(idx, out=idx)
    first = int(np.argmax(valid))
    idx[:first] = first
    return values[idx]


def trajectory_export(record: TransitRecord, mode: str = "A") -> np.ndarray:
    """Chart coordinates ``(s, theta, phi, chi)`` along the path of one mode.

    Every sample is charted as an ``A``-type state at its own sphere point.
    ``phi`` and ``chi`` are continued along ``s`` rather than wrapped. Samples
    sitting on a pole inherit the phase of the nearest regular sample.
    """
    if mode.upper() not in ("A", "B"):
        raise ValueError(f"mode must be 'A' or 'B', got {mode!r}")
    path = record.path_a if mode.upper() == "A" else record.path_b
    cp, cm = path.states[:, 0], path.states[:, 1]
    ap, am = np.abs(cp), np.abs(cm)
    arg_p = np.unwrap(_filled(np.angle(cp), ap > POLE_TOL ** 0.75))
    arg_m = np.unwrap(_filled(np.angle(cm), am > POLE_TOL ** 0.75))
    theta = 2 * np.arctan2(am, ap)
    phi = arg_m - arg_p
    chi = 0.5 * (arg_p + arg_m)
    return np.column_stack([path.s, theta, phi, chi])


_PRESET = re.compile(r"^two-pi-converters(?:\((?P<eta>[^)]*)\))?$")


def _angle_field(d: dict, name: str, where: str, default=None) -> float:
    if f"{name}_deg" in d:
        value, scale = d[f"{name}_deg"], math.pi / 180
    elif name in d:
        value, scale = d[name], 1.0
    elif default is not None:
        return default
    else:
        raise ConfigError(f"{where}: missing '{name}' (or '{name}_deg')")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: '{name}' must be a number, got {value!r}")
    return float(value) * scale


def _element_from_dict(d, where: str) -> Element:
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: element must be an object")
    kind = d.get("kind")
    if kind == "lens":
        axis = _angle_field(d, "axis", where)
        gouy = _angle_field(d, "gouy_total", where, default=GOUY_PER_LENS)
        samples = d.get("samples", DEFAULT_SAMPLES)
        if isinstance(samples, bool) or not isinstance(samples, int) or samples < 2:
            raise ConfigError(f"{where}: 'samples' must be an integer >= 2")
        try:
            return LensElement(axis, gouy, samples)
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from None
    if kind == "rotation":
        return FrameRotation(_angle_field(d, "eta", where))
    raise ConfigError(f"{where}: unknown element kind {kind!r} (expected 'lens' or 'rotation')")


def circuit_from_dict(spec) -> Circuit:
    """Build a circuit from its JSON description.

    Accepted forms: a list of elements; ``{"elements": [...]}``;
    ``{"preset": "two-pi-converters", "eta": ...}`` (or ``eta_deg``); or the
    string ``"two-pi-converters(<eta in radians>)"``.
    """
    if isinstance(spec, str):
        m = _PRESET.match(spec.strip())
        if not m:
            raise ConfigError(f"unknown circuit preset {spec!r}")
        try:
            eta = float(m.group("eta") or 0.0)
        except ValueError:
            raise ConfigError(f"preset angle {m.group('eta')!r} is not a number") from None
        return Circuit.two_pi_converters(eta)
    if isinstance(spec, dict) and "preset" in spec:
        if spec["preset"] != "two-pi-converters":
            raise ConfigError(f"preset: unknown preset {spec['preset']!r}")
        eta = _angle_field(spec, "eta", "preset", default=0.0)
        samples = spec.get("samples", DEFAULT_SAMPLES)
        return Circuit.two_pi_converters(eta, samples=samples)
    if isinstance(spec, dict):
        if "elements" not in spec:
            raise ConfigError("circuit object needs 'elements' or 'preset'")
        spec = spec["elements"]
    if not isinstance(spec, list):
        raise ConfigError("circuit must be a list of elements")
    return Circuit(_element_from_dict(e, f"elements[{i}]") for i, e in enumerate(spec))


def load_circuit(path) -> Circuit:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return circuit_from_dict(data)
