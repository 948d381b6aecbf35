"""Entangled antipodal bi-photons and their geometric measures.

The two-photon state is

    |Psi> = exp(-i beta/2) cos(alpha/2) |A>|A> + exp(i beta/2) sin(alpha/2) |B>|B>

with ``|B>`` antipodal to ``|A>`` on the Sphere of Modes. Everything that
matters about a transit is captured by four single-photon end projections
(:class:`ProjectionSet`), from which the entangled projection, the Geometric
Phase of Entanglement ``g_phi`` and the Geometric Projection of Entanglement
``g_proj`` follow.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotReal, OutOfRange, UndefinedPhase
from .holonomy import StatePath, dynamic_phase, principal_arg, projection, wrap_angle
from .modes import ModeVector, SpherePoint, state_A, state_B

__all__ = [
    "EntanglementParams",
    "BiPhotonState",
    "ProjectionSet",
    "reduced_eigenvalues",
    "entangled_projection",
    "separable_projection",
    "g_phi",
    "g_proj",
    "solo_projection",
    "g_proj_solo",
    "g_phi_solo",
    "pair_path",
    "product_path",
    "entangled_dynamic_phase",
    "schmidt_number",
    "alpha_from_schmidt",
]

PHASE_TOL = 1e-12


@dataclass(frozen=True)
class EntanglementParams:
    """Entanglement strength ``alpha`` and entanglement phase ``beta`` (radians)."""

    alpha: float
    beta: float = 0.0

    @property
    def lambda_a(self) -> float:
        return math.cos(self.alpha / 2) ** 2

    @property
    def lambda_b(self) -> float:
        return 1.0 - self.lambda_a

    @property
    def amp_a(self) -> complex:
        return complex(np.exp(-0.5j * self.beta) * math.cos(self.alpha / 2))

    @property
    def amp_b(self) -> complex:
        return complex(np.exp(0.5j * self.beta) * math.sin(self.alpha / 2))


@dataclass(frozen=True)
class BiPhotonState:
    params: EntanglementParams
    mode_a: ModeVector
    mode_b: ModeVector

    def __post_init__(self):
        if abs(self.mode_a.inner(self.mode_b)) > 1e-10:
            raise ValueError("bi-photon modes must be orthogonal")

    @classmethod
    def from_point(cls, params: EntanglementParams, p: SpherePoint) -> "BiPhotonState":
        return cls(params, state_A(p), state_B(p))

    @property
    def amplitudes(self) -> np.ndarray:
        """Four amplitudes on ``|++>, |+->, |-+>, |-->``."""
        a, b = self.mode_a.array, self.mode_b.array
        return self.params.amp_a * np.kron(a, a) + self.params.amp_b * np.kron(b, b)


@dataclass(frozen=True)
class ProjectionSet:
    """Mode projections ``<X_i|Y_f>`` between initial and final antipodal states."""

    p_aa: complex
    p_bb: complex
    p_ab: complex
    p_ba: complex

    @classmethod
    def from_states(cls, a_i, b_i, a_f, b_f) -> "ProjectionSet":
        return cls(
            projection(a_i, a_f),
            projection(b_i, b_f),
            projection(a_i, b_f),
            projection(b_i, a_f),
        )

    @classmethod
    def identity(cls) -> "ProjectionSet":
        return cls(1 + 0j, 1 + 0j, 0j, 0j)

    def antipodal_residual(self) -> float:
        """Largest violation of ``p_bb = conj(p_aa)`` and ``p_ba = -conj(p_ab)``."""
        return max(
            abs(self.p_bb - self.p_aa.conjugate()),
            abs(self.p_ba + self.p_ab.conjugate()),
        )


def reduced_eigenvalues(params: EntanglementParams) -> tuple[float, float]:
    return params.lambda_a, params.lambda_b


def _correlation_term(params: EntanglementParams, proj: ProjectionSet) -> complex:
    s = math.sin(params.alpha) / 2
    return s * (np.exp(1j * params.beta) * proj.p_ab**2 + np.exp(-1j * params.beta) * proj.p_ba**2)


def entangled_projection(params: EntanglementParams, proj: ProjectionSet,
                         second: ProjectionSet | None = None) -> complex:
    """``<Psi_i|Psi_f>`` from single-photon projections.

    ``second`` holds the projections of photon 2 when it follows a different
    circuit; by default both photons see the same one.
    """
    if second is None:
        second = proj
    a, b = params.amp_a, params.amp_b
    return complex(
        abs(a) ** 2 * proj.p_aa * second.p_aa
        + abs(b) ** 2 * proj.p_bb * second.p_bb
        + a.conjugate() * b * proj.p_ab * second.p_ab
        + b.conjugate() * a * proj.p_ba * second.p_ba
    )


def separable_projection(params: EntanglementParams, proj: ProjectionSet) -> complex:
    return complex(params.lambda_a * proj.p_aa**2 + params.lambda_b * proj.p_bb**2)


def _checked_arg(z: complex, what: str) -> float:
    if abs(z) < PHASE_TOL:
        raise UndefinedPhase(f"{what} has magnitude {abs(z):.3g}")
    return principal_arg(z)


def g_phi(params: EntanglementParams, proj: ProjectionSet) -> float:
    """Geometric Phase of Entanglement, wrapped to (-pi, pi].

    The single-photon weights are applied to the arguments of the product-state
    projections ``p_aa**2`` and ``p_bb**2`` (the phase of ``|A>|A>`` after
    transit), so that the measure is continuous in the circuit parameters and
    vanishes identically without entanglement.
    """
    total = _checked_arg(entangled_projection(params, proj), "entangled projection")
    _checked_arg(proj.p_aa, "p_aa")
    _checked_arg(proj.p_bb, "p_bb")
    weighted = params.lambda_a * principal_arg(proj.p_aa**2) + params.lambda_b * principal_arg(proj.p_bb**2)
    return wrap_angle(total - weighted)


def g_proj(params: EntanglementParams, proj: ProjectionSet, tol: float = 1e-10) -> float:
    """Geometric Projection of Entanglement (real by construction)."""
    value = _correlation_term(params, proj)
    if abs(value.imag) > tol:
        raise NotReal(
            f"imaginary part {value.imag:.3g}; end states were not built from a common chart"
        )
    return float(value.real)


def solo_projection(params: EntanglementParams, proj: ProjectionSet) -> complex:
    """Entangled projection when photon 2 stays idle."""
    return entangled_projection(params, proj, ProjectionSet.identity())


def g_proj_solo(params: EntanglementParams, proj: ProjectionSet) -> float:
    """Solo-transit projection minus its product-state counterpart.

    Both terms reduce to ``lambda_a p_aa + lambda_b p_bb``; the difference is
    computed rather than hard-coded so that the cancellation is witnessed.
    """
    product = abs(params.amp_a) ** 2 * proj.p_aa + abs(params.amp_b) ** 2 * proj.p_bb
    return float((solo_projection(params, proj) - product).real)


def g_phi_solo(params: EntanglementParams, proj: ProjectionSet) -> float:
    p = solo_projection(params, proj)
    total = _checked_arg(p, "solo projection")
    arg_a = _checked_arg(proj.p_aa, "p_aa")
    arg_b = _checked_arg(proj.p_bb, "p_bb")
    return wrap_angle(total - (params.lambda_a * arg_a + params.lambda_b * arg_b))


def _same_grid(path_a: StatePath, path_b: StatePath):
    if len(path_a.s) != len(path_b.s) or np.max(np.abs(path_a.s - path_b.s)) > 1e-14:
        raise ValueError("paths must share the same s grid")


def pair_path(path_a: StatePath, path_b: StatePath, params: EntanglementParams) -> StatePath:
    """Four-amplitude two-photon path built from the two mode paths."""
    _same_grid(path_a, path_b)
    ca, cb = params.amp_a, params.amp_b

    def combine(va, vb):
        return ca * np.einsum("ni,nj->nij", va, va).reshape(len(va), -1) + cb * np.einsum(
            "ni,nj->nij", vb, vb
        ).reshape(len(vb), -1)

    evaluate = None
    if path_a.evaluate is not None and path_b.evaluate is not None:
        ea, eb = path_a.evaluate, path_b.evaluate

        def evaluate(s):
            return combine(ea(s), eb(s))

    return StatePath(path_a.s, combine(path_a.states, path_b.states), evaluate)


def product_path(path_a: StatePath, path_b: StatePath) -> StatePath:
    """Path of the product state ``|A(s)>|B(s)>``."""
    _same_grid(path_a, path_b)

    def combine(va, vb):
        return np.einsum("ni,nj->nij", va, vb).reshape(len(va), -1)

    evaluate = None
    if path_a.evaluate is not None and path_b.evaluate is not None:
        ea, eb = path_a.evaluate, path_b.evaluate

        def evaluate(s):
            return combine(ea(s), eb(s))

    return StatePath(path_a.s, combine(path_a.states, path_b.states), evaluate)


def entangled_dynamic_phase(path_a: StatePath, path_b: StatePath, params: EntanglementParams,
                            tol: float = 1e-10) -> float:
    _same_grid(path_a, path_b)
    return 2 * params.lambda_a * dynamic_phase(path_a, tol=tol) + 2 * params.lambda_b * dynamic_phase(
        path_b, tol=tol
    )


def schmidt_number(params_or_alpha) -> float:
    """Schmidt number ``1/(lambda_a**2 + lambda_b**2) = 4/(3 + cos 2 alpha)``."""
    alpha = getattr(params_or_alpha, "alpha", params_or_alpha)
    return 4.0 / (3.0 + math.cos(2.0 * alpha))


def alpha_from_schmidt(K: float, branch: str = "lower") -> float:
    """Entanglement strength giving Schmidt number ``K``.

    The lower branch lies in [0, pi/2], the upper one in [pi/2, pi].
    """
    if not 1.0 <= K <= 2.0:
        raise OutOfRange(f"Schmidt number {K} outside [1, 2]")
    if branch not in ("lower", "upper"):
        raise ValueError(f"unknown branch {branch!r}")
    # sin^2 alpha = 2(K-1)/K and cos^2 alpha = (2-K)/K; atan2 avoids arccos near +-1
    alpha = math.atan2(math.sqrt(2.0 * (K - 1.0)), math.sqrt(2.0 - K))
    return alpha if branch == "lower" else math.pi - alpha
