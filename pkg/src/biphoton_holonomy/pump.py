"""Pump engineering for thin-crystal Type-I down-conversion.

A pump made of p=0 Laguerre-Gaussian modes ``sum_l D_l LG_l`` yields two-photon
coefficients ``C_{l1,l2} = D_{l1+l2} f(l1, l2)`` (OAM conservation picks the
pump component), where ``f`` is the triple radial overlap from
:func:`~biphoton_holonomy.modes.radial_overlap_f`. Inverting this on the four
first-order amplitudes gives the pump that prepares a chosen entangled state.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .biphoton import EntanglementParams
from .errors import EmptyBlock, InconsistentTarget
from .modes import radial_overlap_f

__all__ = [
    "TargetAmplitudes",
    "PumpSpec",
    "OamSpectrum",
    "target_from_entanglement",
    "pump_from_target",
    "closed_form_pump",
    "spectrum_from_pump",
    "first_order_block",
    "spectrum_csv",
    "DEFAULT_WINDOW",
]

DEFAULT_WINDOW = 6
FIRST_ORDER = ((1, 1), (1, -1), (-1, 1), (-1, -1))


@dataclass(frozen=True)
class TargetAmplitudes:
    """Two-photon amplitudes on ``|++>, |+->, |-+>, |-->``."""

    w_pp: complex
    w_pm: complex
    w_mp: complex
    w_mm: complex

    def __post_init__(self):
        norm = float(np.sum(np.abs(self.as_array()) ** 2))
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"target amplitudes have squared norm {norm!r}")

    @classmethod
    def from_array(cls, arr) -> "TargetAmplitudes":
        arr = np.asarray(arr, dtype=complex).reshape(4)
        return cls(*(complex(x) for x in arr))

    def as_array(self) -> np.ndarray:
        return np.array([self.w_pp, self.w_pm, self.w_mp, self.w_mm], dtype=complex)


@dataclass(frozen=True)
class PumpSpec:
    """Pump LG coefficients keyed by OAM index."""

    coefficients: dict = field(default_factory=dict)

    def __getitem__(self, ell: int) -> complex:
        return self.coefficients.get(int(ell), 0j)

    @property
    def support(self) -> list[int]:
        return sorted(ell for ell, d in self.coefficients.items() if d != 0)


@dataclass(frozen=True)
class OamSpectrum:
    """p=0 two-photon coefficients on the window ``|l1|, |l2| <= window``."""

    entries: dict
    normalization: float
    window: int

    def __getitem__(self, key) -> complex:
        return self.entries.get(tuple(key), 0j)

    @property
    def ells(self) -> np.ndarray:
        return np.arange(-self.window, self.window + 1)

    def table(self) -> np.ndarray:
        """Complex coefficients as a matrix indexed ``[l1 + window, l2 + window]``."""
        ells = self.ells
        return np.array([[self[(a, b)] for b in ells] for a in ells], dtype=complex)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.table()) ** 2 / self.normalization


def target_from_entanglement(params: EntanglementParams, theta_i: float) -> TargetAmplitudes:
    """First-order amplitudes of the entangled state prepared at ``(theta_i, phi=0)``."""
    a = np.exp(-0.5j * params.beta) * math.cos(params.alpha / 2)
    b = np.exp(0.5j * params.beta) * math.sin(params.alpha / 2)
    c2, s2 = math.cos(theta_i / 2) ** 2, math.sin(theta_i / 2) ** 2
    half_sin = 0.5 * math.sin(theta_i)
    return TargetAmplitudes(
        complex(a * c2 + b * s2),
        complex(half_sin * (-b + a)),
        complex(half_sin * (a - b)),
        complex(b * c2 + a * s2),
    )


def pump_from_target(target: TargetAmplitudes, tol: float = 1e-9) -> PumpSpec:
    """Pump coefficients ``D_{-2}, D_0, D_{+2}`` that produce ``target``.

    Raises
    ------
    InconsistentTarget
        If ``w_pm != w_mp``: the two-photon coefficients of an engineered pump
        are symmetric under photon exchange.
    """
    if abs(target.w_pm - target.w_mp) > tol:
        raise InconsistentTarget(
            f"w_pm={target.w_pm} and w_mp={target.w_mp} differ; exchange symmetry is violated"
        )
    d0_pm = target.w_pm / radial_overlap_f(1, -1)
    d0_mp = target.w_mp / radial_overlap_f(-1, 1)
    assert abs(d0_pm - d0_mp) <= max(1e-10, 10 * tol)
    return PumpSpec({
        -2: complex(target.w_mm / radial_overlap_f(-1, -1)),
        0: complex(d0_pm),
        2: complex(target.w_pp / radial_overlap_f(1, 1)),
    })


def closed_form_pump(params: EntanglementParams, theta_i: float) -> PumpSpec:
    """Hand-reduced pump coefficients, used to cross-check :func:`pump_from_target`."""
    al, be = params.alpha, params.beta
    em, ep = np.exp(-0.5j * be), np.exp(0.5j * be)
    ca, sa = math.cos(al / 2), math.sin(al / 2)
    c2, s2 = math.cos(theta_i / 2) ** 2, math.sin(theta_i / 2) ** 2
    k2 = 27 / 8 * math.sqrt(math.pi / 2)
    return PumpSpec({
        -2: complex(k2 * ep * sa * c2 + k2 * em * ca * s2),
        0: complex(9 / 8 * math.sqrt(math.pi) * math.sin(theta_i) * (em * ca - ep * sa)),
        2: complex(k2 * em * ca * c2 + k2 * ep * sa * s2),
    })


def spectrum_from_pump(pump: PumpSpec, window: int = DEFAULT_WINDOW) -> OamSpectrum:
    """Two-photon p=0 spectrum on ``|l1|, |l2| <= window``.

    Pairs whose total OAM is outside the pump's support are stored as exact
    zeros. The normalisation is the summed ``|C|**2`` over the window.
    """
    if window < 1:
        raise ValueError("window must be at least 1")
    entries = {}
    for l1 in range(-window, window + 1):
        for l2 in range(-window, window + 1):
            d = pump[l1 + l2]
            entries[(l1, l2)] = complex(d * radial_overlap_f(l1, l2)) if d != 0 else 0j
    norm = float(sum(abs(c) ** 2 for c in entries.values()))
    return OamSpectrum(entries, norm, window)


def first_order_block(spectrum: OamSpectrum) -> TargetAmplitudes:
    """Renormalised ``|l| = 1`` block of a spectrum."""
    block = np.array([spectrum[k] for k in FIRST_ORDER], dtype=complex)
    if np.all(np.abs(block) < 1e-12):
        raise EmptyBlock("spectrum has no first-order content")
    return TargetAmplitudes.from_array(block / np.linalg.norm(block))


def spectrum_csv(spectrum: OamSpectrum) -> str:
    """CSV text with columns l1, l2, Re C, Im C, |C|, |C|^2/normalization."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["l1", "l2", "re_c", "im_c", "abs_c", "probability"])
    for (l1, l2), c in sorted(spectrum.entries.items()):
        writer.writerow([l1, l2, *(format(x, ".17g") for x in (
            c.real, c.imag, abs(c), abs(c) ** 2 / spectrum.normalization))])
    return buf.getvalue()
