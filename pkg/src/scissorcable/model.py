"""Domain types for cable-stiffened scissor structures.

All quantities are stored in N, mm, N/mm^2 and kg/mm^3.  Documents may use
other units; conversion happens in :mod:`scissorcable.document`.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

AXES = ("x", "y", "z")

# |cross(j - i, k - i)| / |k - i| <= COLLINEAR_TOL * |k - i|
COLLINEAR_TOL = 1e-6


class MemberKind(str, Enum):
    BAR = "bar"
    CABLE = "cable"
    UNIPLET = "uniplet"


@dataclass(frozen=True)
class Node:
    id: int
    xyz: tuple[float, float, float]


@dataclass(frozen=True)
class Section:
    id: int
    area: float
    iy: float = 0.0
    iz: float = 0.0


@dataclass(frozen=True)
class Material:
    """Linear elastic material; ``density`` is a mass density."""

    id: int
    elastic_modulus: float
    density: float


@dataclass(frozen=True)
class Member:
    """Bar/cable (2 nodes) or uniplet (3 nodes, pivot in the middle)."""

    id: int
    kind: MemberKind
    nodes: tuple[int, ...]
    section: int
    material: int


@dataclass(frozen=True)
class Support:
    node: int
    fixed: tuple[bool, bool, bool]


@dataclass(frozen=True)
class PointLoad:
    node: int
    force: tuple[float, float, float]


@dataclass(frozen=True)
class LoadCase:
    name: str = "default"
    loads: tuple[PointLoad, ...] = ()


class ModelError(ValueError):
    """Raised by :func:`build_model`; ``violations`` lists every problem found."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class Model:
    nodes: tuple[Node, ...]
    members: tuple[Member, ...]
    sections: tuple[Section, ...]
    materials: tuple[Material, ...]
    supports: tuple[Support, ...] = ()
    load_case: LoadCase = field(default_factory=LoadCase)
    planar: bool = False

    @cached_property
    def node_index(self) -> dict[int, int]:
        return {n.id: i for i, n in enumerate(self.nodes)}

    @cached_property
    def member_index(self) -> dict[int, int]:
        return {m.id: i for i, m in enumerate(self.members)}

    @cached_property
    def section_map(self) -> dict[int, Section]:
        return {s.id: s for s in self.sections}

    @cached_property
    def material_map(self) -> dict[int, Material]:
        return {m.id: m for m in self.materials}

    @cached_property
    def coordinates(self) -> np.ndarray:
        return np.array([n.xyz for n in self.nodes], dtype=float).reshape(-1, 3)

    def position(self, node_id: int) -> np.ndarray:
        return self.coordinates[self.node_index[node_id]]

    @cached_property
    def cables(self) -> tuple[Member, ...]:
        return tuple(m for m in self.members if m.kind is MemberKind.CABLE)

    def length(self, member: Member) -> float:
        """Chord length; for a uniplet this is L_1 + L_2."""
        a = self.position(member.nodes[0])
        b = self.position(member.nodes[-1])
        return float(np.linalg.norm(b - a))

    @cached_property
    def lengths(self) -> np.ndarray:
        return np.array([self.length(m) for m in self.members])

    @cached_property
    def areas(self) -> np.ndarray:
        return np.array([self.section_map[m.section].area for m in self.members])

    @cached_property
    def densities(self) -> np.ndarray:
        return np.array([self.material_map[m.material].density for m in self.members])

    def weight(self, areas=None) -> float:
        """Sum of density * length * area over all members, in kg."""
        a = self.areas if areas is None else np.asarray(areas, dtype=float)
        return float(np.sum(self.densities * self.lengths * a))

    @cached_property
    def load_vector(self) -> np.ndarray:
        f = np.zeros(3 * len(self.nodes))
        for load in self.load_case.loads:
            i = self.node_index[load.node]
            f[3 * i:3 * i + 3] += load.force
        return f

    @cached_property
    def assembly(self):
        # stiffness building blocks are reused by every solve on this model
        from .solver import Assembly

        return Assembly.from_model(self)

    def with_member_areas(self, areas) -> "Model":
        """Copy of the model with one private section per member."""
        areas = np.asarray(areas, dtype=float)
        base = max(s.id for s in self.sections) + 1
        sections = list(self.sections)
        members = []
        for k, (m, a) in enumerate(zip(self.members, areas)):
            s = self.section_map[m.section]
            sections.append(Section(base + k, float(a), s.iy, s.iz))
            members.append(dataclasses.replace(m, section=base + k))
        used = {m.section for m in members}
        return dataclasses.replace(
            self,
            members=tuple(members),
            sections=tuple(s for s in sections if s.id in used),
        )

    def with_loads(self, loads) -> "Model":
        return dataclasses.replace(self, load_case=LoadCase(self.load_case.name, tuple(loads)))


@dataclass(frozen=True)
class DofMap:
    """Global translational DoFs: node ``k`` owns indices ``3k, 3k+1, 3k+2``."""

    node_ids: tuple[int, ...]
    free: np.ndarray
    fixed: np.ndarray
    dofs_per_node: int

    @property
    def n_dofs(self) -> int:
        return 3 * len(self.node_ids)

    @property
    def n_free(self) -> int:
        return len(self.free)

    @property
    def n_fixed(self) -> int:
        return len(self.fixed)

    def label(self, dof: int) -> str:
        return f"node {self.node_ids[dof // 3]} {AXES[dof % 3]}"

    def node_dofs(self, node_id: int) -> np.ndarray:
        k = self.node_ids.index(node_id)
        return np.arange(3 * k, 3 * k + 3)


def dof_map(model: Model) -> DofMap:
    fixed_mask = np.zeros(3 * len(model.nodes), dtype=bool)
    if model.planar:
        fixed_mask[2::3] = True
    for s in model.supports:
        i = model.node_index[s.node]
        fixed_mask[3 * i:3 * i + 3] |= np.asarray(s.fixed, dtype=bool)
    return DofMap(
        node_ids=tuple(n.id for n in model.nodes),
        free=np.flatnonzero(~fixed_mask),
        fixed=np.flatnonzero(fixed_mask),
        dofs_per_node=2 if model.planar else 3,
    )


def _collinear_offset(a, b, c) -> float:
    ik = c - a
    return float(np.linalg.norm(np.cross(b - a, ik)) / np.linalg.norm(ik))


def check_model(model: Model, check_stability: bool = True) -> list[str]:
    """Return every invariant violation found in ``model`` (empty if valid)."""
    errors = []

    def dupes(ids, what):
        seen = set()
        for i in ids:
            if i in seen:
                errors.append(f"duplicate {what} id {i}")
            seen.add(i)

    dupes([n.id for n in model.nodes], "node")
    dupes([m.id for m in model.members], "member")
    dupes([s.id for s in model.sections], "section")
    dupes([m.id for m in model.materials], "material")

    for n in model.nodes:
        if len(n.xyz) != 3 or not np.all(np.isfinite(n.xyz)):
            errors.append(f"node {n.id}: coordinates must be 3 finite numbers")
        elif model.planar and abs(n.xyz[2]) > 0.0:
            errors.append(f"node {n.id}: planar model requires z = 0")
    for s in model.sections:
        if not s.area > 0:
            errors.append(f"section {s.id}: area must be positive")
        if s.iy < 0 or s.iz < 0:
            errors.append(f"section {s.id}: second moments must be non-negative")
    for m in model.materials:
        if not (m.elastic_modulus > 0 and m.density > 0):
            errors.append(f"material {m.id}: modulus and density must be positive")

    node_ids = {n.id for n in model.nodes}
    section_ids = {s.id for s in model.sections}
    material_ids = {m.id for m in model.materials}
    for m in model.members:
        expected = 3 if m.kind is MemberKind.UNIPLET else 2
        if len(m.nodes) != expected:
            errors.append(f"member {m.id}: {m.kind.value} needs {expected} nodes, got {len(m.nodes)}")
            continue
        missing = [n for n in m.nodes if n not in node_ids]
        if missing:
            errors.append(f"member {m.id}: unknown node(s) {missing}")
            continue
        if m.section not in section_ids:
            errors.append(f"member {m.id}: unknown section {m.section}")
        if m.material not in material_ids:
            errors.append(f"member {m.id}: unknown material {m.material}")
        if len(set(m.nodes)) != len(m.nodes):
            errors.append(f"member {m.id}: repeated node")
            continue
        pts = [np.asarray(model.position(n)) for n in m.nodes]
        if np.linalg.norm(pts[-1] - pts[0]) == 0.0:
            errors.append(f"member {m.id}: zero length")
            continue
        if m.kind is MemberKind.UNIPLET:
            a, b, c = pts
            chord = np.linalg.norm(c - a)
            offset = _collinear_offset(a, b, c)
            t = np.dot(b - a, c - a) / chord**2
            if offset > COLLINEAR_TOL * chord or not 0.0 < t < 1.0:
                errors.append(
                    f"member {m.id}: uniplet pivot {m.nodes[1]} is not on segment "
                    f"{m.nodes[0]}-{m.nodes[2]} (offset {offset:.6g})"
                )

    for s in model.supports:
        if s.node not in node_ids:
            errors.append(f"support references unknown node {s.node}")
    for load in model.load_case.loads:
        if load.node not in node_ids:
            errors.append(f"load references unknown node {load.node}")
        elif not np.all(np.isfinite(load.force)):
            errors.append(f"load at node {load.node}: force must be finite")

    if errors or not check_stability:
        return errors

    from .solver import UnstableStructureError, assemble, factorize

    flags = {c.id: True for c in model.cables}
    try:
        factorize(assemble(model, flags))
    except UnstableStructureError as exc:
        errors.append(f"unstable structure with all cables active: {exc}")
    return errors


def build_model(
    nodes,
    members,
    sections,
    materials,
    supports=(),
    loads=(),
    planar: bool = False,
    load_case_name: str = "default",
) -> Model:
    """Assemble and validate a :class:`Model`; raises :class:`ModelError`."""
    model = Model(
        nodes=tuple(nodes),
        members=tuple(members),
        sections=tuple(sections),
        materials=tuple(materials),
        supports=tuple(supports),
        load_case=LoadCase(load_case_name, tuple(loads)),
        planar=planar,
    )
    errors = check_model(model)
    if errors:
        raise ModelError(errors)
    return model
