"""Phase functionals on sampled state paths.

A :class:`StatePath` is an ordered set of normalised states ``v(s)``. The
dynamic phase ``-i int <v|d_s v> ds`` is approximated by summing
Pancharatnam increments ``arg <v_k|v_{k+1}>``, which is second-order accurate
and exactly compatible with gauge transformations on the sample grid. When
the path knows how to evaluate itself at arbitrary ``s`` the sum is refined by
interval bisection with Richardson extrapolation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import DegenerateLoop, NoConvergence, OrthogonalEndpoints, ResolutionError
from .modes import ModeVector, sphere_point_to_bloch

__all__ = [
    "StatePath",
    "PhaseReport",
    "PhaseProfile",
    "wrap_angle",
    "principal_arg",
    "projection",
    "total_phase",
    "dynamic_phase",
    "geometric_phase",
    "phase_profile",
    "gauge_transform",
    "invariant_projection",
    "solid_angle_of_loop",
]

RESOLUTION_OVERLAP = 0.99
NORM_TOL = 1e-9


def wrap_angle(x):
    """Wrap angle(s) into (-pi, pi]."""
    if np.ndim(x):
        return np.pi - np.mod(np.pi - np.asarray(x, dtype=float), 2 * np.pi)
    return math.pi - (math.pi - float(x)) % (2 * math.pi)


def principal_arg(z: complex, tol: float = 1e-9) -> float:
    """Argument in (-pi, pi], with round-off on the negative real axis sent to +pi.

    A value whose imaginary part is within ``tol * |z|`` of the cut is taken to
    lie on it. Without this, roundoff of either sign picks a branch at random,
    and weighted sums of arguments then jump by a non-integer multiple of
    2*pi.
    """
    z = complex(z)
    if z.real < 0 and abs(z.imag) <= tol * abs(z):
        return math.pi
    return math.atan2(z.imag, z.real)


def _as_array(v) -> np.ndarray:
    if isinstance(v, ModeVector):
        return v.array
    return np.asarray(v, dtype=complex)


def _overlaps(states: np.ndarray) -> np.ndarray:
    """``<v_k|v_{k+1}>`` for successive samples."""
    return np.einsum("ij,ij->i", states[:-1].conj(), states[1:])


@dataclass(frozen=True)
class StatePath:
    """Sampled state path.

    Parameters
    ----------
    s : array_like, shape (N,)
        Strictly increasing path parameter.
    states : array_like, shape (N, d)
        Unit-norm states at each ``s``.
    evaluate : callable, optional
        ``evaluate(s_array) -> (len(s_array), d)`` states. Enables automatic
        refinement of the resolution guard and Richardson refinement of the
        dynamic phase.
    """

    s: np.ndarray
    states: np.ndarray
    evaluate: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        states = np.asarray(self.states, dtype=complex)
        if states.ndim == 1:
            states = states[:, None]
        if s.ndim != 1 or len(s) < 2:
            raise ValueError("a path needs at least two samples")
        if states.shape[0] != len(s):
            raise ValueError("s and states have different lengths")
        if np.any(np.diff(s) <= 0):
            raise ValueError("path parameter must be strictly increasing")
        norms = np.linalg.norm(states, axis=1)
        if np.max(np.abs(norms - 1.0)) > NORM_TOL:
            raise ValueError(f"path states are not unit norm (max deviation {np.max(np.abs(norms - 1)):.3g})")
        for _ in range(40):
            bad = np.abs(_overlaps(states)) <= RESOLUTION_OVERLAP
            if not bad.any():
                break
            if self.evaluate is None:
                raise ResolutionError(
                    f"{int(bad.sum())} adjacent sample pairs have overlap below {RESOLUTION_OVERLAP}"
                )
            mids = 0.5 * (s[:-1][bad] + s[1:][bad])
            s_new = np.concatenate([s, mids])
            order = np.argsort(s_new)
            s = s_new[order]
            states = np.concatenate([states, np.asarray(self.evaluate(mids), dtype=complex)])[order]
        else:
            raise ResolutionError("resolution guard could not be met by refinement")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "states", states)

    @classmethod
    def from_function(cls, func, s) -> "StatePath":
        s = np.asarray(s, dtype=float)
        return cls(s, func(s), func)

    def __len__(self):
        return len(self.s)

    @property
    def initial(self) -> np.ndarray:
        return self.states[0]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def refined(self) -> "StatePath":
        """Bisect every interval (requires ``evaluate``)."""
        if self.evaluate is None:
            raise ResolutionError("path has no evaluator and cannot be refined")
        mids = 0.5 * (self.s[:-1] + self.s[1:])
        n = len(self.s)
        s = np.empty(2 * n - 1)
        s[0::2], s[1::2] = self.s, mids
        states = np.empty((2 * n - 1, self.states.shape[1]), dtype=complex)
        states[0::2] = self.states
        states[1::2] = self.evaluate(mids)
        return StatePath(s, states, self.evaluate)


class PhaseReport(NamedTuple):
    total: float
    dynamic: float
    geometric: float


class PhaseProfile(NamedTuple):
    """Phases accumulated from the start of the path up to each sample."""

    s: np.ndarray
    total: np.ndarray
    dynamic: np.ndarray
    geometric: np.ndarray


def projection(initial, final) -> complex:
    """``<initial|final>``."""
    return complex(np.vdot(_as_array(initial), _as_array(final)))


def total_phase(path: StatePath) -> float:
    p = projection(path.initial, path.final)
    if abs(p) < 1e-12:
        raise OrthogonalEndpoints(f"end-state overlap {abs(p):.3g} is too small to carry a phase")
    return math.atan2(p.imag, p.real)


def _pancharatnam_sum(states: np.ndarray) -> float:
    return float(np.sum(np.angle(_overlaps(states))))


def dynamic_phase(path: StatePath, tol: float = 1e-8, max_doublings: int = 20) -> float:
    """Dynamic phase ``-i int <v|d_s v> ds``.

    Without an evaluator the Pancharatnam sum over the given samples is
    returned as is. With one, the grid is bisected repeatedly and successive
    sums are Richardson-extrapolated until two extrapolants differ by less
    than ``tol``.
    """
    coarse = _pancharatnam_sum(path.states)
    if path.evaluate is None:
        return coarse
    current = path
    previous = None
    for _ in range(max_doublings):
        current = current.refined()
        fine = _pancharatnam_sum(current.states)
        estimate = fine + (fine - coarse) / 3.0
        if previous is not None and abs(estimate - previous) < tol:
            return estimate
        previous, coarse = estimate, fine
    raise NoConvergence(f"dynamic phase did not settle to {tol} after {max_doublings} doublings")


def geometric_phase(path: StatePath, tol: float = 1e-8) -> PhaseReport:
    tot = total_phase(path)
    dyn = dynamic_phase(path, tol=tol)
    return PhaseReport(tot, dyn, wrap_angle(tot - dyn))


def phase_profile(path: StatePath) -> PhaseProfile:
    """Unwrapped total, dynamic and geometric phase at every sample.

    The total phase is continued along ``s`` by unwrapping; where the running
    state passes through a state orthogonal to the start, the total phase is
    genuinely undefined and the continuation picks one side.
    """
    inc = np.angle(_overlaps(path.states))
    dyn = np.concatenate([[0.0], np.cumsum(inc)])
    if path.evaluate is not None:
        fine = np.angle(_overlaps(path.refined().states))
        dyn_f = np.concatenate([[0.0], np.cumsum(fine[0::2] + fine[1::2])])
        dyn = dyn_f + (dyn_f - dyn) / 3.0
    tot = np.unwrap(np.angle(path.states @ path.initial.conj()))
    return PhaseProfile(path.s.copy(), tot, dyn, tot - dyn)


def gauge_transform(path: StatePath, gamma: Callable) -> StatePath:
    """Multiply every sample by ``exp(i gamma(s))``."""
    factor = np.exp(1j * np.asarray(gamma(path.s), dtype=float))
    states = path.states * factor[:, None]
    evaluate = None
    if path.evaluate is not None:
        inner = path.evaluate

        def evaluate(s):
            s = np.asarray(s, dtype=float)
            return inner(s) * np.exp(1j * np.asarray(gamma(s), dtype=float))[:, None]

    return StatePath(path.s, states, evaluate)


def invariant_projection(path: StatePath, tol: float = 1e-8) -> complex:
    """Gauge-invariant projection ``exp(-i Phi_dyn) <v_i|v_f>``."""
    return complex(np.exp(-1j * dynamic_phase(path, tol=tol)) * projection(path.initial, path.final))


def _unit_vectors(vertices) -> np.ndarray:
    pts = list(vertices)
    if len(pts) and np.ndim(pts[0]) == 1 and len(pts[0]) == 3 and not hasattr(pts[0], "theta"):
        arr = np.asarray(pts, dtype=float)
    else:
        arr = np.array([sphere_point_to_bloch(p) for p in pts], dtype=float)
    return arr / np.linalg.norm(arr, axis=1, keepdims=True)


def solid_angle_of_loop(vertices) -> float:
    """Oriented area of a closed spherical polygon, in (-2pi, 2pi].

    ``vertices`` are :class:`SpherePoint` values or unit 3-vectors joined by
    great-circle arcs. A final vertex equal to the first is dropped. By
    Gauss-Bonnet the area is ``2pi`` minus the summed signed turning angles,
    so it is positive for loops running counter-clockwise seen from outside.
    """
    pts = _unit_vectors(vertices)
    if len(pts) > 1 and np.linalg.norm(pts[-1] - pts[0]) < 1e-12:
        pts = pts[:-1]
    if len(pts) < 3:
        raise DegenerateLoop("a loop needs at least three distinct vertices")
    nxt = np.roll(pts, -1, axis=0)
    prv = np.roll(pts, 1, axis=0)
    if np.any(np.linalg.norm(nxt - pts, axis=1) < 1e-12):
        raise DegenerateLoop("consecutive loop vertices coincide")
    # tangents at each vertex toward the neighbours
    to_prev = prv - np.sum(prv * pts, axis=1, keepdims=True) * pts
    to_next = nxt - np.sum(nxt * pts, axis=1, keepdims=True) * pts
    t_in = -to_prev
    turning = np.arctan2(
        np.sum(pts * np.cross(t_in, to_next), axis=1),
        np.sum(t_in * to_next, axis=1),
    )
    area = 2 * np.pi - float(np.sum(turning))
    # oriented area is defined modulo 4pi
    return 2 * np.pi - (2 * np.pi - area) % (4 * np.pi)
