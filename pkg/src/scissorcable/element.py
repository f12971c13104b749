"""Element stiffness matrices: two-node truss and three-node uniplet.

The uniplet is a straight bar i-j-k whose middle node j is the scissor pivot.
Its joints carry no moment, so the 15-DoF beam stiffness (3 translations and
2 bending rotations per node) condenses onto the 9 translations.  Two routes
are provided: the closed-form coefficients and an explicit condensation of
the parent beam.  They are independent and are checked against each other in
the tests.

Local DoF order for a uniplet: ``[ix iy iz jx jy jz kx ky kz]`` with local x
along i->k.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DegenerateElementError(ValueError):
    pass


@dataclass(frozen=True)
class UnipletStiffness:
    matrix: np.ndarray
    l1: float
    l2: float

    @property
    def m(self) -> float:
        return 1.0 / self.l1

    @property
    def n(self) -> float:
        return 1.0 / self.l2


def truss_stiffness_global(section, material, node_a, node_b) -> np.ndarray:
    """6x6 axial-only stiffness of a bar or active cable in global axes."""
    return section.area * truss_unit_stiffness(material.elastic_modulus, node_a, node_b)


def truss_unit_stiffness(modulus, node_a, node_b) -> np.ndarray:
    """Truss stiffness per unit area (``K / A``)."""
    d = np.asarray(node_b, dtype=float) - np.asarray(node_a, dtype=float)
    length = np.linalg.norm(d)
    if length == 0.0:
        raise DegenerateElementError("zero-length member")
    d = d / length
    k = modulus / length * np.outer(d, d)
    return np.block([[k, -k], [-k, k]])


def _check_lengths(l1, l2):
    if not (l1 > 0 and l2 > 0):
        raise DegenerateElementError(f"semi-lengths must be positive, got {l1}, {l2}")


def uniplet_parts(modulus, iy, iz, l1, l2) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form uniplet stiffness split as ``K = A * axial + bending``."""
    _check_lengths(l1, l2)
    m, n = 1.0 / l1, 1.0 / l2
    axial = np.zeros((9, 9))
    axial[np.ix_([0, 3, 6], [0, 3, 6])] = modulus * np.array(
        [[m, -m, 0.0], [-m, m + n, -n], [0.0, -n, n]]
    )

    bending = np.zeros((9, 9))
    s = m + n
    for dofs, inertia in (([1, 4, 7], iz), ([2, 5, 8], iy)):
        c = 3.0 * modulus * inertia / s
        block = c * np.array([
            [m**3 * n, -m**3 * n - m**2 * n**2, m**2 * n**2],
            [-m**3 * n - m**2 * n**2, m**3 * n + m * n**3 + 2 * m**2 * n**2, -m * n**3 - m**2 * n**2],
            [m**2 * n**2, -m * n**3 - m**2 * n**2, m * n**3],
        ])
        bending[np.ix_(dofs, dofs)] = block
    return axial, bending


def uniplet_stiffness_closed_form(modulus, area, iy, iz, l1, l2) -> UnipletStiffness:
    axial, bending = uniplet_parts(modulus, iy, iz, l1, l2)
    return UnipletStiffness(area * axial + bending, float(l1), float(l2))


def _beam_segment(modulus, area, iy, iz, length) -> np.ndarray:
    """10x10 Euler-Bernoulli segment, per node ``[u v w ry rz]``, no torsion."""
    k = np.zeros((10, 10))
    ea = modulus * area / length
    k[np.ix_([0, 5], [0, 5])] = ea * np.array([[1, -1], [-1, 1]])

    L = length
    # v / rz plane
    kz = modulus * iz / L**3 * np.array([
        [12, 6 * L, -12, 6 * L],
        [6 * L, 4 * L**2, -6 * L, 2 * L**2],
        [-12, -6 * L, 12, -6 * L],
        [6 * L, 2 * L**2, -6 * L, 4 * L**2],
    ])
    k[np.ix_([1, 4, 6, 9], [1, 4, 6, 9])] = kz
    # w / ry plane: positive ry lifts w towards -x, hence the sign flips
    ky = modulus * iy / L**3 * np.array([
        [12, -6 * L, -12, -6 * L],
        [-6 * L, 4 * L**2, 6 * L, 2 * L**2],
        [-12, 6 * L, 12, 6 * L],
        [-6 * L, 2 * L**2, 6 * L, 4 * L**2],
    ])
    k[np.ix_([2, 3, 7, 8], [2, 3, 7, 8])] = ky
    return k


def parent_beam_stiffness(modulus, area, iy, iz, l1, l2) -> np.ndarray:
    """15x15 stiffness ordered as 9 translations then 6 rotations."""
    _check_lengths(l1, l2)
    full = np.zeros((15, 15))
    for first, length in ((0, l1), (1, l2)):
        seg = _beam_segment(modulus, area, iy, iz, length)
        idx = []
        for node in (first, first + 1):
            idx += [3 * node, 3 * node + 1, 3 * node + 2, 9 + 2 * node, 9 + 2 * node + 1]
        full[np.ix_(idx, idx)] += seg
    return full


def uniplet_stiffness_by_condensation(modulus, area, iy, iz, l1, l2) -> UnipletStiffness:
    """Condense the rotations out of the parent beam (moment-free joints)."""
    full = parent_beam_stiffness(modulus, area, iy, iz, l1, l2)
    d = np.arange(9)
    theta = np.arange(9, 15)
    k_dd = full[np.ix_(d, d)]
    # rotations about an axis with (numerically) zero second moment carry no stiffness
    diag = np.diag(full)
    theta = theta[diag[theta] > 1e-14 * diag[d].max()]
    if theta.size == 0:
        return UnipletStiffness(k_dd, float(l1), float(l2))
    k_dt = full[np.ix_(d, theta)]
    k_tt = full[np.ix_(theta, theta)]
    try:
        reduced = k_dd - k_dt @ np.linalg.solve(k_tt, k_dt.T)
    except np.linalg.LinAlgError as exc:
        raise DegenerateElementError("singular rotational block") from exc
    return UnipletStiffness(0.5 * (reduced + reduced.T), float(l1), float(l2))


def local_axes(node_a, node_b) -> np.ndarray:
    """Rows are the local x, y, z unit vectors in global coordinates.

    x runs a->b; y = global Z cross x, or global X cross x when the member is
    within |cos| > 0.99 of global Z; z completes the right-handed triad.
    """
    x = np.asarray(node_b, dtype=float) - np.asarray(node_a, dtype=float)
    length = np.linalg.norm(x)
    if length == 0.0:
        raise DegenerateElementError("zero-length member")
    x = x / length
    ref = np.array([1.0, 0.0, 0.0]) if abs(x[2]) > 0.99 else np.array([0.0, 0.0, 1.0])
    y = np.cross(ref, x)
    y /= np.linalg.norm(y)
    z = np.cross(x, y)
    return np.vstack([x, y, z])


def to_global(local, rotation) -> np.ndarray:
    """Congruence transform ``T^T K T`` with one rotation block per node."""
    local = np.asarray(getattr(local, "matrix", local), dtype=float)
    rotation = np.asarray(rotation, dtype=float)
    if rotation.shape != (3, 3):
        raise ValueError("rotation must be 3x3")
    if (np.max(np.abs(rotation @ rotation.T - np.eye(3))) > 1e-10
            or abs(np.linalg.det(rotation) - 1.0) > 1e-10):
        raise ValueError("rotation is not orthonormal")
    n_nodes, rem = divmod(local.shape[0], 3)
    if rem or local.shape[0] != local.shape[1]:
        raise ValueError("local matrix must be square with 3 DoFs per node")
    t = np.kron(np.eye(n_nodes), rotation)
    return t.T @ local @ t


def uniplet_global_parts(modulus, iy, iz, pi, pj, pk) -> tuple[np.ndarray, np.ndarray]:
    """Global ``(axial per unit area, bending)`` parts of a uniplet i-j-k."""
    pi, pj, pk = (np.asarray(p, dtype=float) for p in (pi, pj, pk))
    l1 = float(np.linalg.norm(pj - pi))
    l2 = float(np.linalg.norm(pk - pj))
    axial, bending = uniplet_parts(modulus, iy, iz, l1, l2)
    rot = local_axes(pi, pk)
    return to_global(axial, rot), to_global(bending, rot)
