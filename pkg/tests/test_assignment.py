import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kernseg.assignment import (
    Provenance,
    final_assign,
    normalize_columns,
    normalized_errors,
    partition_from_state,
)
from kernseg.blowup import ClassState
from kernseg.kernel import Kernel, fit_interpolant

K = Kernel()


def lattice_state(unsure_pts, unsure_vals, J=2):
    """Lattice with smooth data per vertical strip; classes are the strips."""
    g = np.round(np.linspace(0, 1, 11), 10)
    x = np.array([(a, b) for b in g for a in g])
    strip = np.minimum((x[:, 0] * J).astype(int), J - 1) + 1
    f = x[:, 0] + x[:, 1] + strip - 1.0
    x = np.vstack([x, unsure_pts])
    f = np.concatenate([f, unsure_vals])
    labels = np.concatenate([strip, np.zeros(len(unsure_pts), dtype=int)])
    return ClassState.from_seeds(x, f, np.zeros(len(f)), labels, K)


def test_normalize_arithmetic():
    lo, hi, D, deg = normalize_columns(np.array([[0.0], [1.0], [2.0]]))
    np.testing.assert_allclose(D[:, 0], [0, 0.5, 1])
    assert lo[0] == 0 and hi[0] == 2 and not deg[0]


def test_normalize_degenerate_column():
    _, _, D, deg = normalize_columns(np.array([[0.3, 1.0], [0.3, 2.0]]))
    assert deg.tolist() == [True, False]
    np.testing.assert_array_equal(D[:, 0], 0)


def test_normalize_unfittable_class():
    _, _, D, deg = normalize_columns(np.array([[0.3, np.inf], [0.5, np.inf]]))
    assert np.all(np.isinf(D[:, 1]))
    assert not deg[1]


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(0, 10), min_size=2, max_size=20),
    st.floats(0.01, 100),
    st.floats(-5, 5),
)
def test_affine_invariance(d, alpha, beta):
    d = np.array(d)[:, None]
    if np.ptp(d) < 1e-6:
        return
    D1 = normalize_columns(d)[2]
    D2 = normalize_columns(alpha * d + beta)[2]
    np.testing.assert_allclose(D1, D2, atol=1e-9)


def test_no_unsure_keeps_grown():
    st = lattice_state(np.zeros((0, 2)), np.zeros(0))
    part = final_assign(st)
    np.testing.assert_array_equal(part.labels, st.grown)
    assert part.counts()["final"] == 0


def test_exact_prediction_scores_zero():
    # unsure point on class 1 data exactly, another one off by a lot
    pts = np.array([[0.33, 0.55], [0.36, 0.45]])
    vals = np.array([0.33 + 0.55, 0.36 + 0.45 + 3.0])
    st = lattice_state(pts, vals)
    ne = normalized_errors(st)
    fit1 = fit_interpolant(K, st.coords[st.grown == 1], st.values[st.grown == 1])
    np.testing.assert_allclose(ne.raw[:, 0], np.abs(vals - fit1(pts)), rtol=1e-12)
    assert ne.scaled[0, 0] == 0.0
    assert ne.scaled[1, 0] == 1.0


def test_single_unsure_point_uses_raw_errors():
    # nearer to class 2 (x >= 0.5) but carries class 1 data
    pts = np.array([[0.52, 0.35]])
    st = lattice_state(pts, [0.52 + 0.35])
    ne = normalized_errors(st)
    assert ne.degenerate.all()
    np.testing.assert_array_equal(ne.scaled, 0)
    part = final_assign(st)
    assert part.labels[-1] == 1
    assert part.provenance[-1] == Provenance.FINAL


def test_several_unsure_points_assigned_by_fit():
    pts = np.array([[0.47, 0.2], [0.52, 0.6], [0.49, 0.9], [0.55, 0.1]])
    truth = np.array([2, 1, 2, 1])
    vals = pts.sum(axis=1) + (truth - 1.0)
    st = lattice_state(pts, vals)
    part = final_assign(st)
    np.testing.assert_array_equal(part.labels[-4:], truth)
    assert np.all(part.labels > 0)


def test_targets_only_two_nearest_classes():
    # three strips; point in strip 1 carries strip-3 data, strip 3 is not among its two nearest
    pts = np.array([[0.1, 0.45], [0.12, 0.55]])
    vals = pts.sum(axis=1) + 2.0
    st = lattice_state(pts, vals, J=3)
    part = final_assign(st)
    for i in range(len(st.grown) - 2, len(st.grown)):
        assert part.labels[i] in st.nearest_classes(i, m=2)


def test_partition_invariants_and_provenance():
    pts = np.array([[0.47, 0.2], [0.52, 0.6]])
    st = lattice_state(pts, pts.sum(axis=1))
    st.grown[0] = 0  # pretend one lattice point came from blow-up
    seedless = ClassState.from_seeds(st.coords, st.values, st.sigma, st.grown, K)
    seedless.grown[0] = 1
    part = final_assign(seedless)
    assert part.provenance[0] == Provenance.BLOWUP
    assert np.all(part.labels > 0)
    sel = seedless.grown > 0
    np.testing.assert_array_equal(part.labels[sel], seedless.grown[sel])
    skipped = partition_from_state(seedless)
    assert np.count_nonzero(skipped.labels == 0) == 2
    assert skipped.counts()["unassigned"] == 2


def test_normalized_errors_requires_unsure():
    st = lattice_state(np.zeros((0, 2)), np.zeros(0))
    with pytest.raises(ValueError):
        normalized_errors(st)
