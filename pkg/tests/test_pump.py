import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biphoton_holonomy.biphoton import EntanglementParams
from biphoton_holonomy.errors import EmptyBlock, InconsistentTarget
from biphoton_holonomy.modes import radial_overlap_f
from biphoton_holonomy.pump import (
    PumpSpec,
    TargetAmplitudes,
    closed_form_pump,
    first_order_block,
    pump_from_target,
    spectrum_csv,
    spectrum_from_pump,
    target_from_entanglement,
)

alphas = st.floats(0, math.pi)
betas = st.floats(0, 2 * math.pi)
thetas = st.floats(0, math.pi)
S = 1 / math.sqrt(2)


def spectrum_for(alpha, beta, theta, window=6):
    target = target_from_entanglement(EntanglementParams(alpha, beta), theta)
    return spectrum_from_pump(pump_from_target(target), window)


def test_target_examples():
    np.testing.assert_allclose(target_from_entanglement(EntanglementParams(0, 0), 0).as_array(), [1, 0, 0, 0])
    np.testing.assert_allclose(target_from_entanglement(EntanglementParams(math.pi, 0), 0).as_array(),
                               [0, 0, 0, 1], atol=1e-16)
    np.testing.assert_allclose(target_from_entanglement(EntanglementParams(math.pi / 2, 0), math.pi / 2).as_array(),
                               [S, 0, 0, S], atol=1e-16)


@given(alphas, betas, thetas)
def test_target_invariants(alpha, beta, theta):
    t = target_from_entanglement(EntanglementParams(alpha, beta), theta)
    assert np.sum(np.abs(t.as_array()) ** 2) == pytest.approx(1, abs=1e-10)
    assert abs(t.w_pm - t.w_mp) < 1e-12


def test_target_rejects_unnormalised():
    with pytest.raises(ValueError):
        TargetAmplitudes(1, 1, 0, 0)


def test_pump_examples():
    d = pump_from_target(target_from_entanglement(EntanglementParams(0, 0), math.pi / 2))
    assert d[0] == pytest.approx(9 / 8 * math.sqrt(math.pi), abs=1e-14)
    d = pump_from_target(target_from_entanglement(EntanglementParams(0, 0), 0.0))
    assert d[2] == pytest.approx(27 / 8 * math.sqrt(math.pi / 2), abs=1e-14)
    assert d[0] == 0 and d[-2] == 0
    assert d.support == [2]


def test_pump_rejects_asymmetric_target():
    with pytest.raises(InconsistentTarget):
        pump_from_target(TargetAmplitudes(0, S, -S, 0))


@settings(max_examples=200)
@given(alphas, betas, thetas)
def test_pump_matches_closed_form(alpha, beta, theta):
    prm = EntanglementParams(alpha, beta)
    got, ref = pump_from_target(target_from_entanglement(prm, theta)), closed_form_pump(prm, theta)
    for ell in (-2, 0, 2):
        assert abs(got[ell] - ref[ell]) < 1e-10


def test_gaussian_pump_spectrum():
    spec = spectrum_from_pump(PumpSpec({0: 1.0}))
    assert spec[(1, -1)] == pytest.approx(radial_overlap_f(1, -1))
    assert spec[(1, 1)] == 0
    np.testing.assert_allclose(first_order_block(spec).as_array(), [0, S, S, 0], atol=1e-15)


def test_first_order_block_examples():
    pure = spectrum_for(0.0, 0.0, 0.0)
    np.testing.assert_allclose(first_order_block(pure).as_array(), [1, 0, 0, 0], atol=1e-15)
    edge = spectrum_from_pump(PumpSpec({-2: 0.3, 2: 1.0}))
    block = first_order_block(edge)
    assert block.w_pm == 0 and block.w_mp == 0
    with pytest.raises(EmptyBlock):
        first_order_block(spectrum_from_pump(PumpSpec({4: 1.0})))


def test_spectrum_selection_rule_is_exact():
    spec = spectrum_for(1.0, 0.5, 0.8)
    for (l1, l2), c in spec.entries.items():
        if l1 + l2 not in (-2, 0, 2):
            assert c == 0j and type(c) is complex


@settings(max_examples=100)
@given(alphas, betas, thetas)
def test_round_trip_and_spectrum_constraints(alpha, beta, theta):
    target = target_from_entanglement(EntanglementParams(alpha, beta), theta)
    pump = pump_from_target(target)
    spec = spectrum_from_pump(pump)
    np.testing.assert_allclose(first_order_block(spec).as_array(), target.as_array(), atol=1e-9)
    for (l1, l2), c in spec.entries.items():
        assert abs(c - spec[(l2, l1)]) < 1e-10
        if abs(c) > 1e-9:
            assert abs(math.remainder(np.angle(c) - np.angle(pump[l1 + l2]), 2 * math.pi)) < 1e-9


def test_probabilities_normalised():
    spec = spectrum_for(math.pi / 2, 0.0, 0.6 * math.pi / 2)
    assert spec.probabilities().sum() == pytest.approx(1, abs=1e-14)


def test_window_tail_is_geometric():
    # the diagonal overlap f(l, -l) = 1/(sqrt(pi) 1.5**(l+1)) decays geometrically
    for ell in range(0, 8):
        assert radial_overlap_f(ell, -ell) == pytest.approx(1 / (math.sqrt(math.pi) * 1.5 ** (ell + 1)), rel=1e-14)
    wide = spectrum_for(math.pi / 2, 0.0, 0.6 * math.pi / 2, window=60)

    def tail(limit):
        return sum(abs(c) ** 2 for (a, b), c in wide.entries.items() if max(abs(a), abs(b)) > limit)

    assert tail(6) / wide.normalization > 0.1
    assert tail(26) / wide.normalization < 1e-6


SPECTRUM_SETS = [
    (math.pi / 2, 0.0, 0.6 * math.pi / 2),
    (0.0, 0.0, 0.3 * math.pi / 2),
    (math.pi / 2, 0.0, math.pi / 2),
    (math.pi / 2, math.pi, 0.6 * math.pi / 2),
]
BLOCK = {(1, 1), (1, -1), (-1, 1), (-1, -1)}


def argmax_key(table, window, mask=None):
    t = np.abs(table)
    if mask is not None:
        t = np.where(mask, t, -1)
    i, j = np.unravel_index(np.argmax(t), t.shape)
    return (int(i) - window, int(j) - window)


@pytest.mark.parametrize("alpha, beta, theta", SPECTRUM_SETS)
def test_first_order_block_dominates_nonzero_orders(alpha, beta, theta):
    spec = spectrum_for(alpha, beta, theta, window=3)
    ells = spec.ells
    nonzero = (ells[:, None] != 0) & (ells[None, :] != 0)
    assert argmax_key(spec.table(), 3, nonzero) in BLOCK


def test_reference_spectrum_peaks_in_block():
    spec = spectrum_for(math.pi / 2, 0.0, 0.6 * math.pi / 2, window=3)
    assert argmax_key(spec.table(), 3) in BLOCK


def test_gaussian_order_can_outweigh_block():
    assert radial_overlap_f(0, 0) / radial_overlap_f(1, -1) == pytest.approx(1.5, rel=1e-15)
    spec = spectrum_for(math.pi / 4, math.pi / 2, 0.9 * math.pi / 2, window=3)
    assert argmax_key(spec.table(), 3) == (0, 0)


def test_without_d0_block_peaks():
    spec = spectrum_for(math.pi / 2, 0.0, math.pi / 2, window=3)
    assert abs(spec[(0, 0)]) < 1e-15
    assert argmax_key(spec.table(), 3) in BLOCK


def test_spectrum_csv_format():
    text = spectrum_csv(spectrum_for(math.pi / 2, 0.0, 0.6 * math.pi / 2, window=2))
    lines = text.split("\n")
    assert lines[0] == "l1,l2,re_c,im_c,abs_c,probability"
    assert len(lines) == 1 + 25 + 1 and lines[-1] == ""
    assert "\r" not in text
    row = dict(zip(lines[0].split(","), lines[1 + 5 * 3 + 1].split(",")))
    assert (row["l1"], row["l2"]) == ("1", "-1")
    assert float(row["abs_c"]) > 0
