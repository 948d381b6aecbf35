import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biphoton_holonomy.biphoton import EntanglementParams
from biphoton_holonomy.checks import random_circuit
from biphoton_holonomy.circuit import (
    Circuit,
    FrameRotation,
    LensElement,
    circuit_from_dict,
    circuit_operator,
    closed_form_dynamic_phase,
    frame_rotation,
    lens_operator,
    load_circuit,
    oracle_g_phi,
    oracle_g_proj,
    oracle_projections,
    trajectory_export,
    transit,
)
from biphoton_holonomy.errors import ConfigError
from biphoton_holonomy.holonomy import dynamic_phase, geometric_phase, wrap_angle
from biphoton_holonomy.modes import SpherePoint, bloch_vector

I2 = np.eye(2)


def standard(eta, theta, phi=0.0):
    return transit(Circuit.two_pi_converters(eta), SpherePoint(theta, phi))


def test_standard_circuit_layout():
    elems = Circuit.two_pi_converters(0.3).elements
    assert len(elems) == 9
    assert all(isinstance(e, LensElement) for e in elems[:4] + elems[5:])
    assert elems[4] == FrameRotation(0.3)


def test_lens_operator_identity_and_unitarity():
    lens = LensElement(0.4, 1.3)
    np.testing.assert_allclose(lens_operator(lens, 0.0), I2, atol=1e-16)
    for zeta in np.linspace(0, 1, 7):
        u = lens_operator(lens, zeta)
        np.testing.assert_allclose(u.conj().T @ u, I2, atol=1e-12)
        assert abs(np.linalg.det(u) - 1) < 1e-12
    with pytest.raises(ValueError):
        lens_operator(lens, 1.5)


def test_lens_element_validation():
    with pytest.raises(ValueError):
        LensElement(0.0, 0.0)
    with pytest.raises(ValueError):
        LensElement(0.0, 1.0, samples=1)


@pytest.mark.parametrize("axis", [0.0, math.pi / 4, 0.9])
def test_two_converters_aligned_give_minus_identity(axis):
    np.testing.assert_allclose(circuit_operator(Circuit.two_pi_converters(0.0, axis=axis)), -I2, atol=1e-15)


def test_misaligned_converters_projection():
    rec = standard(math.pi / 6, math.pi / 2)
    assert rec.end_projections.p_aa == pytest.approx(-0.5, abs=1e-12)


def test_frame_rotation_examples():
    np.testing.assert_allclose(frame_rotation(0.0), I2)
    np.testing.assert_allclose(frame_rotation(math.pi), -I2, atol=1e-15)
    np.testing.assert_allclose(frame_rotation(0.4) @ frame_rotation(0.9), frame_rotation(1.3), atol=1e-15)


def test_frame_rotation_equals_conjugated_lenses():
    eta = 0.37
    rotated = Circuit((FrameRotation(eta), LensElement(0.2, 0.8)))
    explicit = frame_rotation(eta).conj().T @ circuit_operator(Circuit((LensElement(0.2, 0.8),))) @ frame_rotation(eta)
    np.testing.assert_allclose(circuit_operator(rotated), explicit, atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_circuit_operator_unitary(seed):
    u = circuit_operator(random_circuit(np.random.default_rng(seed)))
    assert abs(abs(np.linalg.det(u)) - 1) < 1e-12
    v = np.array([0.6, 0.8j])
    assert np.linalg.norm(u @ v) == pytest.approx(1, abs=1e-12)


def test_transit_examples():
    empty = transit(Circuit(()), SpherePoint(1.0, 0.5)).end_projections
    assert (empty.p_aa, empty.p_bb) == pytest.approx((1, 1))
    assert abs(empty.p_ab) < 1e-16 and abs(empty.p_ba) < 1e-16
    eta = math.pi / 6
    for theta in (0.2, 1.0, 2.5):
        p = standard(eta, theta).end_projections
        assert p.p_ab**2 == pytest.approx(-math.sin(2 * eta) ** 2 * math.sin(theta) ** 2, abs=1e-12)
    p = standard(math.pi / 4, math.pi / 2).end_projections
    assert abs(p.p_ab) == pytest.approx(1, abs=1e-12)
    assert abs(p.p_aa) < 1e-12


def test_transit_path_continuity_and_end_state():
    rec = standard(0.5, 1.0, 0.3)
    u = circuit_operator(Circuit.two_pi_converters(0.5))
    np.testing.assert_allclose(rec.path_a.final, u @ rec.path_a.initial, atol=1e-14)
    overlaps = np.abs(np.einsum("ij,ij->i", rec.path_a.states[:-1].conj(), rec.path_a.states[1:]))
    assert overlaps.min() > 0.99


def test_oracle_projection_examples():
    p = oracle_projections(0.0, 0.8)
    assert (p.p_aa, p.p_bb, p.p_ab, p.p_ba) == pytest.approx((-1, -1, 0, 0))
    p = oracle_projections(math.pi / 6, math.pi / 2)
    assert (p.p_aa, p.p_bb) == pytest.approx((-0.5, -0.5))
    assert (p.p_ab**2, p.p_ba**2) == pytest.approx((-0.75, -0.75))
    p = oracle_projections(math.pi / 4, 0.0)
    assert p.p_aa == pytest.approx(-1j)
    assert abs(p.p_ab) < 1e-16


def test_oracle_projections_match_simulation_grid():
    for eta in np.linspace(0, math.pi / 2, 5):
        for theta in np.linspace(0, math.pi, 5):
            p, o = standard(eta, theta).end_projections, oracle_projections(eta, theta)
            assert abs(p.p_aa - o.p_aa) < 1e-12 and abs(p.p_bb - o.p_bb) < 1e-12
            assert abs(p.p_ab**2 - o.p_ab**2) < 1e-12


def test_oracle_g_proj_examples():
    assert oracle_g_proj(0.4, 1.0, EntanglementParams(1.0, math.pi / 2)) == pytest.approx(0, abs=1e-16)
    assert oracle_g_proj(math.pi / 4, math.pi / 2, EntanglementParams(math.pi / 2, math.pi)) == pytest.approx(1)
    assert oracle_g_proj(math.pi / 4, math.pi / 2, EntanglementParams(math.pi / 2, 0)) == pytest.approx(-1)


def test_oracle_g_phi_zeros():
    for theta in np.linspace(0, math.pi, 5):
        assert oracle_g_phi(0.0, theta, EntanglementParams(1.1, 0.7)) == pytest.approx(0, abs=1e-12)
        assert oracle_g_phi(0.6, theta, EntanglementParams(0.0, 0.7)) == pytest.approx(0, abs=1e-12)


def test_closed_form_dynamic_phase_matches_quadrature():
    circ = Circuit.two_pi_converters(0.5)
    rec = transit(circ, SpherePoint(1.2, 0.4))
    for path in (rec.path_a, rec.path_b):
        cf = closed_form_dynamic_phase(circ, path.initial, path.s)
        assert cf[0] == 0
        assert cf[-1] == pytest.approx(dynamic_phase(path, tol=1e-11), abs=1e-9)


def test_sample_doubling_changes_phases_little():
    for eta, theta in ((0.3, 0.7), (1.1, 2.5)):
        coarse = transit(Circuit.two_pi_converters(eta, samples=64), SpherePoint(theta)).path_a
        fine = transit(Circuit.two_pi_converters(eta, samples=128), SpherePoint(theta)).path_a
        for a, b in zip(geometric_phase(coarse, tol=1e-11), geometric_phase(fine, tol=1e-11)):
            assert abs(wrap_angle(a - b)) < 1e-8


def test_trajectory_constant_path():
    rec = transit(Circuit(()), SpherePoint(1.0, 0.5, 0.2))
    traj = trajectory_export(rec)
    np.testing.assert_allclose(traj[:, 1:], np.tile([1.0, 0.5, 0.2], (len(traj), 1)), atol=1e-14)


def test_trajectory_through_pole_has_no_nan():
    for mode in ("A", "B"):
        traj = trajectory_export(standard(math.pi / 6, 0.0), mode)
        assert np.all(np.isfinite(traj))


def test_trajectory_matches_bloch_vectors():
    rec = standard(math.pi / 6, math.pi / 4)
    traj = trajectory_export(rec)
    th, ph = traj[:, 1], traj[:, 2]
    pts = np.column_stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
    np.testing.assert_allclose(pts, bloch_vector(rec.path_a.states), atol=1e-12)
    # azimuth may flip by pi only where the path crosses a pole
    away = (np.sin(th[:-1]) > 0.1) & (np.sin(th[1:]) > 0.1)
    assert np.max(np.abs(np.diff(traj[:, 2]))[away]) < 0.5
    assert np.max(np.abs(np.diff(traj[:, 3]))[away]) < 0.5


def arc_axis(points):
    """Unit normal of the plane through a circular arc of Bloch points."""
    centred = points - points.mean(axis=0)
    normal = np.linalg.svd(centred)[2][-1]
    return normal


@pytest.mark.parametrize("theta", [f * math.pi / 2 for f in (0.3, 0.6, 0.9, 1.2)])
def test_converter_arcs_turn_by_twice_misorientation(theta):
    eta = math.pi / 6
    rec = standard(eta, theta)
    pts = bloch_vector(rec.path_a.states)
    s = rec.path_a.s
    first, second = arc_axis(pts[s <= 4]), arc_axis(pts[s >= 4])
    angle = math.acos(min(1.0, abs(float(first @ second))))
    assert angle == pytest.approx(2 * eta, abs=1e-9)


def test_first_arc_is_great_circle_for_zero_azimuth():
    rec = standard(math.pi / 6, 0.6 * math.pi / 2)
    pts = bloch_vector(rec.path_a.states)[rec.path_a.s <= 4]
    normal = arc_axis(pts)
    assert np.max(np.abs(pts @ normal)) < 1e-12


def test_pole_start_gives_two_great_circles():
    eta = math.pi / 6
    rec = standard(eta, 0.0)
    pts = bloch_vector(rec.path_a.states)
    s = rec.path_a.s
    for part in (pts[s <= 4], pts[s >= 4]):
        assert np.max(np.abs(part @ arc_axis(part))) < 1e-12


def test_circuit_from_dict_forms(tmp_path):
    listed = circuit_from_dict([{"kind": "lens", "axis_deg": 45, "gouy_total_deg": 45, "samples": 16},
                                {"kind": "rotation", "eta": 0.2}])
    assert listed.elements[0] == LensElement(math.pi / 4, math.pi / 4, 16)
    assert listed.elements[1] == FrameRotation(0.2)
    assert circuit_from_dict({"elements": []}) == Circuit(())
    preset = circuit_from_dict({"preset": "two-pi-converters", "eta_deg": 30})
    assert preset == Circuit.two_pi_converters(math.radians(30))
    assert circuit_from_dict("two-pi-converters(0.5)") == Circuit.two_pi_converters(0.5)
    f = tmp_path / "c.json"
    f.write_text(json.dumps([{"kind": "lens", "axis": 0.1}]), encoding="utf-8")
    assert load_circuit(f) == Circuit((LensElement(0.1),))


@pytest.mark.parametrize("bad, fragment", [
    ([{"kind": "prism"}], "elements[0]"),
    ([{"kind": "lens"}], "axis"),
    ([{"kind": "lens", "axis": "x"}], "must be a number"),
    ([{"kind": "lens", "axis": 0, "samples": 1}], "samples"),
    ([{"kind": "lens", "axis": 0, "gouy_total": -1}], "positive"),
    ({"preset": "mirror"}, "unknown preset"),
    ("three-converters", "unknown circuit preset"),
    (5, "list"),
])
def test_circuit_from_dict_errors(bad, fragment):
    with pytest.raises(ConfigError, match=fragment.replace("[", r"\[").replace("]", r"\]")):
        circuit_from_dict(bad)


def test_load_circuit_reports_line(tmp_path):
    f = tmp_path / "bad.json"
    f.write_text('[\n {"kind": "lens",\n  "axis": }\n]', encoding="utf-8")
    with pytest.raises(ConfigError, match=r":3:"):
        load_circuit(f)
