"""Oracle and invariant suite behind ``biphoton verify``."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate

from .biphoton import (
    EntanglementParams,
    alpha_from_schmidt,
    entangled_dynamic_phase,
    entangled_projection,
    g_phi,
    g_proj,
    g_proj_solo,
    pair_path,
    product_path,
    schmidt_number,
)
from .circuit import (
    Circuit,
    FrameRotation,
    GOUY_PER_LENS,
    LensElement,
    circuit_operator,
    oracle_g_phi,
    oracle_g_proj,
    oracle_projections,
    transit,
)
from .errors import UndefinedPhase
from .holonomy import (
    dynamic_phase,
    gauge_transform,
    geometric_phase,
    invariant_projection,
    solid_angle_of_loop,
    wrap_angle,
)
from .modes import (
    RadialProfile,
    SpherePoint,
    bloch_vector,
    chart_from_vector,
    radial_overlap_f,
    state_A,
    state_B,
)
from .pump import (
    closed_form_pump,
    first_order_block,
    pump_from_target,
    spectrum_from_pump,
    target_from_entanglement,
)

__all__ = ["CheckConfig", "CheckResult", "run_checks", "CHECKS", "random_circuit", "random_gauge",
           "small_circle_case"]


@dataclass(frozen=True)
class CheckConfig:
    """``tol`` overrides every per-check tolerance when set."""

    tol: float | None = None
    samples: int = 64
    gouy_per_lens: float = GOUY_PER_LENS
    seed: int = 20240611

    def circuit(self, eta: float) -> Circuit:
        return Circuit.two_pi_converters(eta, samples=self.samples, gouy_per_lens=self.gouy_per_lens)

    def tolerance(self, default: float) -> float:
        return default if self.tol is None else self.tol


class CheckResult(NamedTuple):
    name: str
    passed: bool
    error: float
    tol: float


def _grid(lo, hi, n):
    return np.linspace(lo, hi, n)


def _projection_oracle(cfg: CheckConfig) -> float:
    worst = 0.0
    for eta in _grid(0, math.pi / 2, 13):
        for th in _grid(0, math.pi, 13):
            p = transit(cfg.circuit(eta), SpherePoint(th)).end_projections
            o = oracle_projections(eta, th)
            worst = max(worst, abs(p.p_aa - o.p_aa), abs(p.p_bb - o.p_bb),
                        abs(p.p_ab**2 - o.p_ab**2), abs(p.p_ba**2 - o.p_ba**2))
    return worst


def _antipodal_relations(cfg: CheckConfig) -> float:
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    for _ in range(20):
        circ = random_circuit(rng, cfg.samples)
        start = SpherePoint(rng.uniform(0, math.pi), rng.uniform(-math.pi, math.pi), rng.uniform(-math.pi, math.pi))
        worst = max(worst, transit(circ, start).end_projections.antipodal_residual())
    return worst


def _measure_grid(cfg: CheckConfig, which: str) -> float:
    worst = 0.0
    for eta in _grid(0, math.pi / 4, 7):
        for th in _grid(0, math.pi, 7):
            proj = transit(cfg.circuit(eta), SpherePoint(th)).end_projections
            for al in _grid(0, math.pi, 7):
                for be in _grid(0, 2 * math.pi, 7):
                    prm = EntanglementParams(al, be)
                    if which == "g_proj":
                        worst = max(worst, abs(g_proj(prm, proj) - oracle_g_proj(eta, th, prm)))
                        continue
                    if abs(entangled_projection(prm, proj)) < 1e-9 or abs(proj.p_aa) < 1e-9:
                        continue
                    try:
                        ref = oracle_g_phi(eta, th, prm)
                    except UndefinedPhase:
                        continue
                    worst = max(worst, abs(wrap_angle(g_phi(prm, proj) - ref)))
    return worst


def _g_phi_zeros(cfg: CheckConfig) -> float:
    worst = 0.0
    for th in _grid(0, math.pi, 7):
        proj0 = transit(cfg.circuit(0.0), SpherePoint(th)).end_projections
        for al in _grid(0, math.pi, 5):
            worst = max(worst, abs(g_phi(EntanglementParams(al, 0.4), proj0)))
        for eta in _grid(0, math.pi / 4, 7):
            proj = transit(cfg.circuit(eta), SpherePoint(th)).end_projections
            if abs(proj.p_aa) < 1e-9:
                continue
            for al in (0.0, math.pi):
                prm = EntanglementParams(al, 1.1)
                worst = max(worst, abs(g_phi(prm, proj)), abs(g_proj(prm, proj)))
    return worst


def _unitarity(cfg: CheckConfig) -> float:
    rng = np.random.default_rng(cfg.seed + 1)
    worst = 0.0
    for _ in range(20):
        u = circuit_operator(random_circuit(rng, cfg.samples))
        worst = max(worst, abs(abs(np.linalg.det(u)) - 1), float(np.max(np.abs(u.conj().T @ u - np.eye(2)))))
    return worst


def _refinement(cfg: CheckConfig) -> float:
    worst = 0.0
    for eta, th in ((0.3, 0.7), (math.pi / 6, math.pi / 4), (1.1, 2.5)):
        reports = []
        for samples in (cfg.samples, 2 * cfg.samples):
            rec = transit(Circuit.two_pi_converters(eta, samples=samples, gouy_per_lens=cfg.gouy_per_lens),
                          SpherePoint(th))
            reports.append(geometric_phase(rec.path_a, tol=1e-11))
        worst = max(worst, *(abs(wrap_angle(a - b)) for a, b in zip(*reports)))
    return worst


def _pump_oracle(cfg: CheckConfig) -> float:
    worst = 0.0
    for al in _grid(0, math.pi, 10):
        for be in _grid(0, 2 * math.pi, 10):
            for th in _grid(0, math.pi, 10):
                prm = EntanglementParams(al, be)
                got = pump_from_target(target_from_entanglement(prm, th))
                ref = closed_form_pump(prm, th)
                worst = max(worst, *(abs(got[k] - ref[k]) for k in (-2, 0, 2)))
    return worst


def _round_trip(cfg: CheckConfig) -> float:
    rng = np.random.default_rng(cfg.seed + 2)
    worst = 0.0
    for _ in range(100):
        prm = EntanglementParams(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
        target = target_from_entanglement(prm, rng.uniform(0, math.pi))
        spec = spectrum_from_pump(pump_from_target(target))
        back = first_order_block(spec)
        worst = max(worst, float(np.max(np.abs(back.as_array() - target.as_array()))))
    return worst


def _spectrum_constraints(cfg: CheckConfig) -> float:
    rng = np.random.default_rng(cfg.seed + 3)
    worst = 0.0
    for _ in range(50):
        prm = EntanglementParams(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
        pump = pump_from_target(target_from_entanglement(prm, rng.uniform(0, math.pi)))
        spec = spectrum_from_pump(pump)
        for (l1, l2), c in spec.entries.items():
            worst = max(worst, abs(c - spec[(l2, l1)]))
            if abs(c) > 1e-9:
                worst = max(worst, abs(wrap_angle(np.angle(c) - np.angle(pump[l1 + l2]))))
    return worst


def radial_overlap_quadrature(l1: int, l2: int) -> float:
    """``radial_overlap_f`` by adaptive quadrature of the radial profiles."""
    r12, r1, r2 = RadialProfile(l1 + l2), RadialProfile(l1), RadialProfile(l2)
    val, _ = integrate.quad(lambda r: r * r12(r) * r1(r) * r2(r), 0, np.inf, epsabs=1e-14, epsrel=1e-13)
    return 2 * math.pi * val


def _radial_quadrature(cfg: CheckConfig) -> float:
    return max(abs(radial_overlap_f(a, b) - radial_overlap_quadrature(a, b))
               for a in range(-4, 5) for b in range(-4, 5))


def _gauge_invariance(cfg: CheckConfig) -> float:
    rng = np.random.default_rng(cfg.seed + 4)
    worst = 0.0
    for _ in range(10):
        circ = random_circuit(rng, cfg.samples)
        path = transit(circ, SpherePoint(rng.uniform(0, math.pi), rng.uniform(-math.pi, math.pi))).path_a
        gamma = random_gauge(rng, path.s[-1])
        moved = gauge_transform(path, gamma)
        worst = max(worst,
                    abs(wrap_angle(geometric_phase(moved).geometric - geometric_phase(path).geometric)),
                    abs(invariant_projection(moved) - invariant_projection(path)))
    return worst


def _dynamic_separation(cfg: CheckConfig) -> float:
    worst = 0.0
    for eta, th, al in ((0.3, 0.7, 0.4), (math.pi / 6, 1.2, math.pi / 2), (1.0, 2.2, 2.5)):
        rec = transit(cfg.circuit(eta), SpherePoint(th, 0.3))
        prm = EntanglementParams(al, 0.9)
        direct = dynamic_phase(pair_path(rec.path_a, rec.path_b, prm), tol=1e-10)
        worst = max(worst,
                    abs(direct - entangled_dynamic_phase(rec.path_a, rec.path_b, prm)),
                    abs(dynamic_phase(product_path(rec.path_a, rec.path_b), tol=1e-10)),
                    abs(dynamic_phase(rec.path_a, tol=1e-10) + dynamic_phase(rec.path_b, tol=1e-10)),
                    abs(g_proj_solo(prm, rec.end_projections)))
    return worst


def _schmidt(cfg: CheckConfig) -> float:
    worst = abs(schmidt_number(math.pi / 2) - 2) + abs(schmidt_number(0.0) - 1)
    for al in _grid(0.05, math.pi / 2, 40):
        worst = max(worst, abs(alpha_from_schmidt(schmidt_number(al)) - al))
    for al in _grid(math.pi / 2, math.pi - 0.05, 40):
        worst = max(worst, abs(alpha_from_schmidt(schmidt_number(al), "upper") - al))
    return worst


def small_circle_case(theta0: float, sweep: float, n: int = 4000):
    """Precession about +x through ``sweep`` from a point at polar angle ``theta0``.

    Returns the sampled path and the Bloch vertices of the loop closed by the
    great-circle arc from the end back to the start.
    """
    lens = LensElement(0.0, sweep, n)
    rec = transit(Circuit((lens,)), SpherePoint(theta0, 0.3))
    arc = bloch_vector(rec.path_a.states)
    start, end = arc[0], arc[-1]
    omega = math.acos(float(np.clip(start @ end, -1, 1)))
    t = np.linspace(0, 1, n)[1:-1]
    closure = (np.sin((1 - t) * omega)[:, None] * end + np.sin(t * omega)[:, None] * start) / math.sin(omega)
    return rec.path_a, np.vstack([arc, closure])


def _solid_angle(cfg: CheckConfig) -> float:
    worst = 0.0
    for theta0, sweep in ((1.2, 2.0), (0.8, 2.5), (0.4, 1.5)):
        path, loop = small_circle_case(theta0, sweep)
        geo = geometric_phase(path, tol=1e-11).geometric
        worst = max(worst, abs(wrap_angle(geo + solid_angle_of_loop(loop) / 2)))
    return worst


def _chart(cfg: CheckConfig) -> float:
    rng = np.random.default_rng(cfg.seed + 5)
    worst = 0.0
    for _ in range(200):
        p = SpherePoint(rng.uniform(0.01, math.pi - 0.01), rng.uniform(-3.1, 3.1), rng.uniform(-1.5, 1.5))
        a, b = state_A(p).array, state_B(p).array
        gram = np.array([[np.vdot(a, a), np.vdot(a, b)], [np.vdot(b, a), np.vdot(b, b)]])
        q = chart_from_vector(a)
        worst = max(worst, float(np.max(np.abs(gram - np.eye(2)))),
                    *(abs(wrap_angle(x - y)) for x, y in zip(q, p)))
    return worst


def random_circuit(rng: np.random.Generator, samples: int = 64) -> Circuit:
    """1-6 lenses with random axes and Gouy phases, with random frame rotations."""
    elements = []
    for _ in range(int(rng.integers(1, 7))):
        if rng.random() < 0.3:
            elements.append(FrameRotation(rng.uniform(-math.pi, math.pi)))
        elements.append(LensElement(rng.uniform(0, math.pi), rng.uniform(0.05, math.pi), samples))
    return Circuit(elements)


def random_gauge(rng: np.random.Generator, length: float) -> Callable:
    """Trigonometric polynomial of degree <= 5 on ``[0, length]`` with amplitude <= pi."""
    degree = int(rng.integers(1, 6))
    coef = rng.normal(size=(degree, 2))
    coef *= rng.uniform(0.1, math.pi) / np.sum(np.abs(coef))
    k = np.arange(1, degree + 1)
    offset = rng.uniform(-math.pi, math.pi)

    def gamma(s):
        x = 2 * math.pi * np.asarray(s, dtype=float)[..., None] * k / length
        return offset + np.sum(coef[:, 0] * np.cos(x) + coef[:, 1] * np.sin(x), axis=-1)

    return gamma


CHECKS: list[tuple[str, Callable[[CheckConfig], float], float]] = [
    ("end projections vs closed form", _projection_oracle, 1e-8),
    ("antipodal projection relations", _antipodal_relations, 1e-10),
    ("g_proj vs closed form", lambda c: _measure_grid(c, "g_proj"), 1e-8),
    ("g_phi vs closed form", lambda c: _measure_grid(c, "g_phi"), 1e-7),
    ("g_phi zero without misorientation or entanglement", _g_phi_zeros, 1e-10),
    ("circuit unitarity", _unitarity, 1e-12),
    ("sample doubling stability", _refinement, 1e-8),
    ("pump vs closed form", _pump_oracle, 1e-10),
    ("pump round trip", _round_trip, 1e-9),
    ("spectrum symmetry and phase lock", _spectrum_constraints, 1e-9),
    ("radial overlap vs quadrature", _radial_quadrature, 1e-10),
    ("gauge invariance", _gauge_invariance, 1e-7),
    ("dynamic phase separation", _dynamic_separation, 1e-8),
    ("schmidt number", _schmidt, 1e-12),
    ("geometric phase vs solid angle", _solid_angle, 1e-6),
    ("chart round trip and orthonormality", _chart, 1e-10),
]


def _run_one(args) -> CheckResult:
    index, cfg = args
    name, fn, default = CHECKS[index]
    tol = cfg.tolerance(default)
    try:
        err = float(fn(cfg))
    except Exception as exc:  # a raising check is a failing check
        return CheckResult(f"{name} ({type(exc).__name__}: {exc})", False, math.inf, tol)
    return CheckResult(name, bool(err < tol), err, tol)


def run_checks(cfg: CheckConfig = CheckConfig(), jobs: int = 1) -> list[CheckResult]:
    tasks = [(i, cfg) for i in range(len(CHECKS))]
    if jobs <= 1:
        return [_run_one(t) for t in tasks]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_one, tasks))
