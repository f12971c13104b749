import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scissorcable.element import (
    DegenerateElementError,
    local_axes,
    parent_beam_stiffness,
    to_global,
    truss_unit_stiffness,
    uniplet_global_parts,
    uniplet_parts,
    uniplet_stiffness_by_condensation,
    uniplet_stiffness_closed_form,
)

positive = st.floats(1e-2, 1e4, allow_nan=False, allow_infinity=False)
lengths = st.floats(10.0, 5000.0)
inertia = st.just(0.0) | st.floats(1e-3, 1e5)
coords = st.tuples(*[st.floats(-5000.0, 5000.0)] * 3)


def close(a, b, rtol=1e-9):
    a, b = np.asarray(a), np.asarray(b)
    return np.max(np.abs(a - b)) <= rtol * max(np.max(np.abs(b)), 1e-300)


@settings(max_examples=200, deadline=None)
@given(e=st.floats(1e3, 3e5), a=positive, iy=inertia, iz=inertia, l1=lengths, l2=lengths)
def test_condensation_matches_closed_form(e, a, iy, iz, l1, l2):
    closed = uniplet_stiffness_closed_form(e, a, iy, iz, l1, l2).matrix
    condensed = uniplet_stiffness_by_condensation(e, a, iy, iz, l1, l2).matrix
    assert close(condensed, closed)


def test_bending_block_is_rank_one():
    # moment-free ends leave one bending mode per plane: the kink at the pivot
    _, bending = uniplet_parts(210_000.0, 290.0, 290.0, 1090.4, 948.2)
    assert np.linalg.matrix_rank(bending, tol=1e-9 * np.abs(bending).max()) == 2


def test_kink_mode_stiffness():
    # unit pivot deflection, ends held: stiffness 3EI(l1+l2)/(l1^2 l2^2)
    e, i, l1, l2 = 210_000.0, 290.0, 600.0, 400.0
    k = uniplet_stiffness_closed_form(e, 28.0, i, i, l1, l2).matrix
    assert k[4, 4] == pytest.approx(3 * e * i * (l1 + l2) / (l1**2 * l2**2), rel=1e-12)


def test_axial_part_is_two_springs_in_series_at_the_pivot():
    e, a, l1, l2 = 210_000.0, 28.0, 600.0, 400.0
    k = uniplet_stiffness_closed_form(e, a, 0.0, 0.0, l1, l2).matrix
    assert k[0, 0] == pytest.approx(e * a / l1)
    assert k[3, 3] == pytest.approx(e * a / l1 + e * a / l2)
    assert k[0, 6] == 0.0


@pytest.mark.parametrize("l1,l2", [(0.0, 1.0), (1.0, -2.0)])
def test_degenerate_lengths(l1, l2):
    with pytest.raises(DegenerateElementError):
        uniplet_parts(1.0, 1.0, 1.0, l1, l2)


def test_zero_inertia_condenses_to_axial_only():
    k = uniplet_stiffness_by_condensation(210_000.0, 10.0, 0.0, 0.0, 300.0, 700.0).matrix
    assert np.count_nonzero(k[np.ix_([1, 2, 4, 5, 7, 8], [1, 2, 4, 5, 7, 8])]) == 0


def test_parent_beam_is_symmetric_and_singular():
    k = parent_beam_stiffness(210_000.0, 28.0, 290.0, 290.0, 500.0, 700.0)
    assert np.allclose(k, k.T)
    # each segment has rank 5 (axial plus two bending planes, no torsion)
    assert np.linalg.matrix_rank(k, tol=1e-10 * np.abs(k).max()) == 10


@settings(max_examples=100, deadline=None)
@given(a=coords, b=coords)
def test_local_axes_right_handed(a, b):
    if np.linalg.norm(np.subtract(b, a)) < 1.0:
        return
    r = local_axes(a, b)
    assert np.allclose(r @ r.T, np.eye(3), atol=1e-12)
    assert np.linalg.det(r) == pytest.approx(1.0)
    assert np.allclose(r[0], np.subtract(b, a) / np.linalg.norm(np.subtract(b, a)))


def test_local_axes_vertical_member_uses_global_x_reference():
    r = local_axes((0, 0, 0), (0, 0, 5))
    assert np.allclose(r[1], np.cross([1, 0, 0], [0, 0, 1]))


def test_to_global_rejects_reflection():
    with pytest.raises(ValueError):
        to_global(np.eye(6), np.diag([1.0, 1.0, -1.0]))


def _rigid_modes(points):
    """Three translations and three rotations of a point set, as columns."""
    pts = np.asarray(points, dtype=float)
    modes = []
    for axis in np.eye(3):
        modes.append(np.tile(axis, len(pts)))
        modes.append(np.cross(axis, pts - pts.mean(axis=0)).ravel())
    return np.column_stack(modes)


@settings(max_examples=100, deadline=None)
@given(pi=coords, pk=coords, t=st.floats(0.1, 0.9), iy=inertia, iz=inertia)
def test_uniplet_annihilates_rigid_motion(pi, pk, t, iy, iz):
    pi, pk = np.array(pi), np.array(pk)
    if np.linalg.norm(pk - pi) < 10.0:
        return
    pj = pi + t * (pk - pi)
    axial, bending = uniplet_global_parts(210_000.0, iy, iz, pi, pj, pk)
    k = 28.0 * axial + bending
    modes = _rigid_modes([pi, pj, pk])
    assert np.max(np.abs(k @ modes)) <= 1e-8 * np.abs(k).max() * np.abs(modes).max()


@settings(max_examples=100, deadline=None)
@given(a=coords, b=coords)
def test_truss_annihilates_rigid_motion(a, b):
    if np.linalg.norm(np.subtract(b, a)) < 1.0:
        return
    k = truss_unit_stiffness(210_000.0, a, b)
    modes = _rigid_modes([a, b])
    assert np.max(np.abs(k @ modes)) <= 1e-8 * np.abs(k).max() * np.abs(modes).max()


def test_truss_zero_length():
    with pytest.raises(DegenerateElementError):
        truss_unit_stiffness(1.0, (1, 2, 3), (1, 2, 3))
