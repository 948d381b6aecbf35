"""First-order OAM mode algebra.

States live in the two-dimensional space spanned by the Laguerre-Gaussian
modes with OAM index +1 and -1 (radial index zero). A normalised state is
charted by a point on the Sphere of Modes, ``(theta, phi)``, together with a
horizontal lift ``chi`` that carries its overall phase.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NonUnitNorm

__all__ = [
    "ModeVector",
    "SpherePoint",
    "RadialProfile",
    "state_A",
    "state_B",
    "chart_from_vector",
    "bloch_vector",
    "sphere_point_to_bloch",
    "radial_overlap_f",
    "POLE_TOL",
]

# amplitude below which a state is treated as sitting on a chart pole
POLE_TOL = 1e-12
NORM_TOL = 1e-9


@dataclass(frozen=True)
class ModeVector:
    """Complex amplitudes on the ``{|+1>, |-1>}`` OAM basis."""

    c_plus: complex
    c_minus: complex

    @classmethod
    def from_array(cls, arr) -> "ModeVector":
        arr = np.asarray(arr, dtype=complex).reshape(2)
        return cls(complex(arr[0]), complex(arr[1]))

    @property
    def array(self) -> np.ndarray:
        return np.array([self.c_plus, self.c_minus], dtype=complex)

    def norm(self) -> float:
        return math.hypot(abs(self.c_plus), abs(self.c_minus))

    def inner(self, other: "ModeVector") -> complex:
        """``<self|other>``."""
        return self.c_plus.conjugate() * other.c_plus + self.c_minus.conjugate() * other.c_minus

    def __array__(self, dtype=None, copy=None):
        arr = self.array
        return arr if dtype is None else arr.astype(dtype)


class SpherePoint(NamedTuple):
    """Polar angle, azimuth and horizontal lift (all radians)."""

    theta: float
    phi: float = 0.0
    chi: float = 0.0


@dataclass(frozen=True)
class RadialProfile:
    """Waist-normalised radial factor of a p=0 Laguerre-Gaussian mode.

    ``R_l(r) = exp(-r**2/2) r**|l| / sqrt(pi |l|!)``
    """

    ell: int

    def __call__(self, r):
        m = abs(int(self.ell))
        r = np.asarray(r, dtype=float)
        return np.exp(-0.5 * r**2) * r**m / math.sqrt(math.pi * math.factorial(m))


def state_A(p: SpherePoint) -> ModeVector:
    theta, phi, chi = p
    lift = np.exp(1j * chi)
    return ModeVector(
        complex(lift * np.exp(-0.5j * phi) * math.cos(theta / 2)),
        complex(lift * np.exp(0.5j * phi) * math.sin(theta / 2)),
    )


def state_B(p: SpherePoint) -> ModeVector:
    """Antipodal partner of :func:`state_A`; its lift runs the opposite way."""
    theta, phi, chi = p
    lift = np.exp(-1j * chi)
    return ModeVector(
        complex(lift * np.exp(-0.5j * phi) * math.sin(theta / 2)),
        complex(-lift * np.exp(0.5j * phi) * math.cos(theta / 2)),
    )


def _wrap(x: float) -> float:
    """Wrap into (-pi, pi]."""
    return math.pi - (math.pi - x) % (2 * math.pi)


def chart_from_vector(v) -> SpherePoint:
    """Invert :func:`state_A`.

    The azimuth is returned in (-pi, pi] and the lift in (-pi, pi]. On a pole
    the azimuth is meaningless; it is reported as zero and the lift takes the
    whole phase of the surviving amplitude.
    """
    if not isinstance(v, ModeVector):
        v = ModeVector.from_array(v)
    n = v.norm()
    if abs(n - 1.0) > NORM_TOL:
        raise NonUnitNorm(f"mode vector has norm {n!r}")
    ap, am = abs(v.c_plus), abs(v.c_minus)
    theta = 2.0 * math.atan2(am, ap)
    if am < POLE_TOL:
        return SpherePoint(theta, 0.0, _wrap(np.angle(v.c_plus)))
    if ap < POLE_TOL:
        return SpherePoint(theta, 0.0, _wrap(np.angle(v.c_minus)))
    arg_p, arg_m = np.angle(v.c_plus), np.angle(v.c_minus)
    raw_phi = arg_m - arg_p
    phi = _wrap(raw_phi)
    # shifting phi by 2*pi*k requires shifting chi by pi*k
    k = round((raw_phi - phi) / (2 * math.pi))
    chi = _wrap(0.5 * (arg_p + arg_m) + math.pi * k)
    return SpherePoint(theta, phi, chi)


def bloch_vector(states) -> np.ndarray:
    """Unit vector(s) on the Sphere of Modes; the +1 mode is the north pole.

    Accepts a single state or an ``(N, 2)`` array of states.
    """
    arr = np.asarray(states, dtype=complex)
    cp, cm = arr[..., 0], arr[..., 1]
    cross = np.conj(cp) * cm
    return np.stack([2 * cross.real, 2 * cross.imag, abs(cp) ** 2 - abs(cm) ** 2], axis=-1)


def sphere_point_to_bloch(p) -> np.ndarray:
    theta, phi = p[0], p[1]
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


def radial_overlap_f(ell1: int, ell2: int) -> float:
    """Triple radial overlap ``2 pi * int r R_{l1+l2} R_{l1} R_{l2} dr``.

    Evaluated in closed form with the Gaussian moment
    ``int_0^inf r**(2n+1) exp(-a r**2) dr = n! / (2 a**(n+1))``, ``a = 3/2``.
    The power ``|l1+l2| + |l1| + |l2|`` is always even.
    """
    ell1, ell2 = int(ell1), int(ell2)
    m1, m2, m12 = abs(ell1), abs(ell2), abs(ell1 + ell2)
    n = (m1 + m2 + m12) // 2
    moment = math.factorial(n) / (2.0 * 1.5 ** (n + 1))
    # integer product keeps f exactly symmetric in its arguments
    fact = math.factorial(m12) * math.factorial(m1) * math.factorial(m2)
    return 2.0 * math.pi * moment / (math.pi**1.5 * math.sqrt(fact))
