"""Polar scissor-arch geometry and generators for analysable models.

Geometry parameters use one length unit throughout (metres in the bundled
fixtures); builders take ``unit_to_mm`` to produce models in millimetres.
Angles are degrees at every interface.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    Material,
    Member,
    MemberKind,
    Model,
    Node,
    PointLoad,
    Section,
    Support,
    build_model,
)

DEFAULT_UNIPLET = Section(1, area=28.0, iy=290.0, iz=290.0)
DEFAULT_CABLE = Section(2, area=6.28)
STEEL = Material(1, elastic_modulus=210_000.0, density=7.85e-6)

ARCH_PATTERNS = {
    "chords": ("inner", "outer"),
    "inner": ("inner",),
    "outer": ("outer",),
}
CONNECTOR_PATTERNS = ("duplets", "cables")


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class PolarUnitGeometry:
    inner_radius: float
    width: float
    outer_radius: float
    total_angle: float
    unit_angle: float
    unit_count: int
    bar_length: float
    outer_semi: float  # l_1, pivot to outer hinge
    inner_semi: float  # l_2, pivot to inner hinge
    duplet_angle: float

    @property
    def arm_ratio(self) -> float:
        """l_2 / l_1, equal to R_b / R."""
        return self.inner_semi / self.outer_semi


def polar_unit_parameters(inner_radius, width, total_angle, unit_angle) -> PolarUnitGeometry:
    if not (inner_radius > 0 and width > 0):
        raise GeometryError("inner radius and width must be positive")
    if not 0 < unit_angle < 180:
        raise GeometryError("unit angle must lie in (0, 180) degrees")
    if not unit_angle <= total_angle <= 360:
        raise GeometryError("total angle must lie in [unit angle, 360] degrees")
    ratio = total_angle / unit_angle
    count = round(ratio)
    if abs(ratio - count) > 1e-9:
        raise GeometryError(
            f"total angle {total_angle} is not a whole multiple of unit angle {unit_angle}"
        )
    rb = float(inner_radius)
    r = rb + float(width)
    phi = math.radians(unit_angle)
    length = math.sqrt(rb**2 + r**2 - 2.0 * r * rb * math.cos(phi))
    l1 = length * r / (r + rb)
    l2 = length * rb / (r + rb)
    s = rb / l2 * math.sin(phi / 2.0)
    if s > 1.0:
        raise GeometryError(f"duplet angle undefined: asin argument {s:.6g} > 1")
    beta = 2.0 * math.degrees(math.asin(s))
    return PolarUnitGeometry(
        inner_radius=rb,
        width=float(width),
        outer_radius=r,
        total_angle=float(total_angle),
        unit_angle=float(unit_angle),
        unit_count=int(count),
        bar_length=length,
        outer_semi=l1,
        inner_semi=l2,
        duplet_angle=beta,
    )


def verify_deployability(units) -> tuple[bool, float]:
    """Check that the semi-bar ratio ``a_i / b_i`` is the same for every unit.

    Returns ``(ok, deviation)`` where deviation is the largest relative
    departure from the first unit's ratio.
    """
    units = list(units)
    if not units:
        raise ValueError("no units given")
    ratios = np.array([a / b for a, b in units], dtype=float)
    if np.any(~np.isfinite(ratios)) or np.any(ratios <= 0):
        raise ValueError("semi-bar lengths must be positive")
    deviation = float(np.max(np.abs(ratios - ratios[0])) / ratios[0])
    return deviation <= 1e-9, deviation


def _polar(radius, theta):
    return (radius * math.cos(theta), radius * math.sin(theta), 0.0)


def build_polar_arch(
    geom: PolarUnitGeometry,
    *,
    uniplet_section: Section = DEFAULT_UNIPLET,
    cable_section: Section = DEFAULT_CABLE,
    material: Material = STEEL,
    pattern: str = "chords",
    loads=(),
    unit_to_mm: float = 1000.0,
) -> Model:
    """Planar arch of ``N`` polar duplets, symmetric about the vertical axis.

    Node ids: inner hinges ``1..N+1``, outer hinges ``N+2..2N+2``, pivots
    ``2N+3..3N+2``, each numbered from the right-hand end.  Cables come
    first (inner chords, then outer chords), followed by the uniplets of
    each unit.  Both end stations are pinned.
    """
    if pattern not in ARCH_PATTERNS:
        raise GeometryError(f"unknown cable pattern {pattern!r}; choose from {sorted(ARCH_PATTERNS)}")
    n = geom.unit_count
    rb = geom.inner_radius * unit_to_mm
    r = geom.outer_radius * unit_to_mm
    phi = math.radians(geom.unit_angle)
    start = math.radians(90.0 - geom.total_angle / 2.0)
    inner = list(range(1, n + 2))
    outer = list(range(n + 2, 2 * n + 3))
    pivot = list(range(2 * n + 3, 3 * n + 3))

    xyz = {}
    for s in range(n + 1):
        theta = start + s * phi
        xyz[inner[s]] = _polar(rb, theta)
        xyz[outer[s]] = _polar(r, theta)
    t = geom.inner_semi / geom.bar_length
    for s in range(n):
        a = np.array(xyz[inner[s]])
        b = np.array(xyz[outer[s + 1]])
        p = a + t * (b - a)
        xyz[pivot[s]] = (float(p[0]), float(p[1]), 0.0)
    nodes = [Node(i, xyz[i]) for i in inner + outer + pivot]

    members = []
    for ring in ARCH_PATTERNS[pattern]:
        ids = inner if ring == "inner" else outer
        for s in range(n):
            members.append(Member(len(members) + 1, MemberKind.CABLE, (ids[s], ids[s + 1]),
                                  cable_section.id, material.id))
    for s in range(n):
        members.append(Member(len(members) + 1, MemberKind.UNIPLET, (inner[s], pivot[s], outer[s + 1]),
                              uniplet_section.id, material.id))
        members.append(Member(len(members) + 1, MemberKind.UNIPLET, (outer[s], pivot[s], inner[s + 1]),
                              uniplet_section.id, material.id))

    fixed = (True, True, True)
    supports = [Support(i, fixed) for i in (inner[0], outer[0], inner[-1], outer[-1])]
    return build_model(
        nodes, members, _unique([uniplet_section, cable_section]), [material],
        supports, loads, planar=True,
    )


def _unique(sections):
    out = {}
    for s in sections:
        out.setdefault(s.id, s)
    return list(out.values())


def pivot_ids(model: Model) -> set[int]:
    return {m.nodes[1] for m in model.members if m.kind is MemberKind.UNIPLET}


def arch_semi_bars(model: Model) -> list[tuple[float, float]]:
    """``(a_i, b_i)`` per uniplet: the semi-bar at the outer end, then the inner one.

    Assumes the arch is centred on the origin, as built by :func:`build_polar_arch`.
    """
    units = []
    for m in model.members:
        if m.kind is not MemberKind.UNIPLET:
            continue
        pi, pj, pk = (model.position(n) for n in m.nodes)
        s1, s2 = np.linalg.norm(pj - pi), np.linalg.norm(pk - pj)
        if np.linalg.norm(pi[:2]) > np.linalg.norm(pk[:2]):
            units.append((float(s1), float(s2)))
        else:
            units.append((float(s2), float(s1)))
    return units


def hinge_stations(model: Model) -> list[tuple[int, int]]:
    """``(inner, outer)`` hinge node pairs grouped by polar angle."""
    pivots = pivot_ids(model)
    groups: dict[float, list[int]] = {}
    for node in model.nodes:
        if node.id in pivots:
            continue
        x, y, _ = node.xyz
        key = round(math.degrees(math.atan2(y, x)), 6)
        groups.setdefault(key, []).append(node.id)
    stations = []
    for key in sorted(groups):
        ids = sorted(groups[key], key=lambda i: np.linalg.norm(model.position(i)))
        if len(ids) != 2:
            raise GeometryError(f"expected an inner and outer hinge at {key} degrees, found {ids}")
        stations.append((ids[0], ids[1]))
    return stations


def extrude_to_3d(
    arch: Model,
    spacing: float,
    pattern: str = "duplets",
    *,
    unit_to_mm: float = 1000.0,
    uniplet_section: int | None = None,
    cable_section: int | None = None,
) -> Model:
    """Two copies of a planar arch, ``spacing`` apart along z, tied at every hinge station.

    ``duplets``: per station, a transverse duplet (pivot at the mid point of
    the panel, one new node) plus a cable between the inner hinges and one
    between the outer hinges.  ``cables``: the same two cables plus the two
    panel diagonals as cables; no nodes are added.
    """
    if not arch.planar:
        raise GeometryError("extrude_to_3d needs a planar arch")
    if pattern not in CONNECTOR_PATTERNS:
        raise GeometryError(f"unknown connector pattern {pattern!r}; choose from {CONNECTOR_PATTERNS}")
    dz = spacing * unit_to_mm
    if not dz > 0:
        raise GeometryError("transverse spacing must be positive (coincident nodes otherwise)")

    uniplets = [m for m in arch.members if m.kind is MemberKind.UNIPLET]
    cables = [m for m in arch.members if m.kind is MemberKind.CABLE]
    u_sec = uniplet_section if uniplet_section is not None else uniplets[0].section
    c_sec = cable_section if cable_section is not None else cables[0].section
    mat = arch.members[0].material

    node_off = max(n.id for n in arch.nodes)
    mem_off = max(m.id for m in arch.members)
    nodes = list(arch.nodes) + [Node(n.id + node_off, (n.xyz[0], n.xyz[1], dz)) for n in arch.nodes]
    members = list(arch.members) + [
        Member(m.id + mem_off, m.kind, tuple(i + node_off for i in m.nodes), m.section, m.material)
        for m in arch.members
    ]
    next_node = 2 * node_off + 1
    next_member = 2 * mem_off + 1
    for inner, outer in hinge_stations(arch):
        ib, ob = inner + node_off, outer + node_off
        new = []
        if pattern == "duplets":
            mid = 0.5 * (np.asarray(arch.position(inner)) + np.asarray(arch.position(outer)))
            nodes.append(Node(next_node, (float(mid[0]), float(mid[1]), dz / 2.0)))
            new += [(MemberKind.UNIPLET, (inner, next_node, ob), u_sec),
                    (MemberKind.UNIPLET, (outer, next_node, ib), u_sec)]
            next_node += 1
        new += [(MemberKind.CABLE, (inner, ib), c_sec), (MemberKind.CABLE, (outer, ob), c_sec)]
        if pattern == "cables":
            new += [(MemberKind.CABLE, (inner, ob), c_sec), (MemberKind.CABLE, (outer, ib), c_sec)]
        for kind, ends, sec in new:
            members.append(Member(next_member, kind, ends, sec, mat))
            next_member += 1

    fixed = (True, True, True)
    supports = []
    for s in arch.supports:
        supports += [Support(s.node, fixed), Support(s.node + node_off, fixed)]
    loads = list(arch.load_case.loads) + [
        PointLoad(p.node + node_off, p.force) for p in arch.load_case.loads
    ]
    return build_model(nodes, members, arch.sections, arch.materials, supports, loads, planar=False)


def build_pantograph_grid(
    nx: int,
    ny: int,
    spacing_x: float,
    spacing_y: float,
    height: float,
    *,
    uniplet_section: Section = DEFAULT_UNIPLET,
    cable_section: Section = Section(2, area=28.0),
    bar_section: Section = Section(3, area=28.0),
    material: Material = STEEL,
    top_cables: bool = True,
    loads=(),
) -> Model:
    """Flat space pantograph on an ``(nx+1) x (ny+1)`` hinge grid, lengths in mm.

    Top hinges are numbered first, then bottom hinges, row by row; duplet
    pivots follow.  Every grid edge carries a duplet in its vertical plane,
    every bottom-layer edge and both diagonals of every bottom bay a
    cable, and the four corners a vertical bar.  With ``top_cables`` the
    top-layer edges carry cables too; without them the panels can tilt about
    their bottom chords against pivot bending alone.
    The bottom corners are fixed.
    """
    if nx < 1 or ny < 1:
        raise GeometryError("grid needs at least one bay in each direction")
    if not (spacing_x > 0 and spacing_y > 0 and height > 0):
        raise GeometryError("grid dimensions must be positive")
    per_layer = (nx + 1) * (ny + 1)

    def top(i, j):
        return 1 + j * (nx + 1) + i

    def bottom(i, j):
        return top(i, j) + per_layer

    nodes = []
    for j in range(ny + 1):
        for i in range(nx + 1):
            nodes.append(Node(top(i, j), (i * spacing_x, j * spacing_y, height)))
    for j in range(ny + 1):
        for i in range(nx + 1):
            nodes.append(Node(bottom(i, j), (i * spacing_x, j * spacing_y, 0.0)))

    edges = [((i, j), (i + 1, j)) for j in range(ny + 1) for i in range(nx)]
    edges += [((i, j), (i, j + 1)) for i in range(nx + 1) for j in range(ny)]
    members = []
    next_node = 2 * per_layer + 1
    for a, b in edges:
        pa = np.array(nodes[top(*a) - 1].xyz)
        pb = np.array(nodes[top(*b) - 1].xyz)
        mid = 0.5 * (pa + pb)
        nodes.append(Node(next_node, (float(mid[0]), float(mid[1]), height / 2.0)))
        for ends in ((top(*a), next_node, bottom(*b)), (bottom(*a), next_node, top(*b))):
            members.append(Member(len(members) + 1, MemberKind.UNIPLET, ends,
                                  uniplet_section.id, material.id))
        next_node += 1
    cable_ends = [(bottom(*a), bottom(*b)) for a, b in edges]
    if top_cables:
        cable_ends += [(top(*a), top(*b)) for a, b in edges]
    # crossed diagonals: a square cable grid alone has in-plane shear mechanisms
    for j in range(ny):
        for i in range(nx):
            cable_ends += [(bottom(i, j), bottom(i + 1, j + 1)), (bottom(i + 1, j), bottom(i, j + 1))]
    for ends in cable_ends:
        members.append(Member(len(members) + 1, MemberKind.CABLE, ends, cable_section.id, material.id))
    corners = [(0, 0), (nx, 0), (0, ny), (nx, ny)]
    for c in corners:
        members.append(Member(len(members) + 1, MemberKind.BAR, (bottom(*c), top(*c)),
                              bar_section.id, material.id))
    supports = [Support(bottom(*c), (True, True, True)) for c in corners]
    return build_model(
        nodes, members, _unique([uniplet_section, cable_section, bar_section]), [material],
        supports, loads, planar=False,
    )
