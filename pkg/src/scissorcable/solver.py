"""Direct stiffness assembly, linear solve and the active/passive cable loop."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve
from scipy.linalg.lapack import dpotrf

from .element import truss_unit_stiffness, uniplet_global_parts
from .model import DofMap, MemberKind, Model, dof_map

# relative Cholesky pivot below which a free DoF is treated as a mechanism
PIVOT_TOL = 1e-11
# a cable counts as taut while its chord elongation exceeds -SLACK_TOL mm,
# i.e. force > -1e-9 * EA/L
SLACK_TOL = 1e-9


class UnstableStructureError(ValueError):
    def __init__(self, message, dof=None):
        super().__init__(message)
        self.dof = dof


class CableIterationError(RuntimeError):
    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = tuple(history)


@dataclass
class Assembly:
    """Area-separable stiffness data of a model, built once and reused.

    The global stiffness is ``sum_e active_e * (A_e * axial_e + bending_e)``
    scattered into a dense ``3n x 3n`` matrix.
    """

    dofmap: DofMap
    scatter: np.ndarray
    owner: np.ndarray
    axial: np.ndarray
    bending: np.ndarray
    # axial force of member e is A_e * (strain_rows[e] @ u); elongation is (gauge[e] @ u)
    strain_rows: np.ndarray
    gauge: np.ndarray
    cable_index: np.ndarray

    @classmethod
    def from_model(cls, model: Model) -> "Assembly":
        dm = dof_map(model)
        n = dm.n_dofs
        scatter, owner, axial, bending = [], [], [], []
        strain_rows = np.zeros((len(model.members), n))
        gauge = np.zeros((len(model.members), n))
        for e, m in enumerate(model.members):
            mat = model.material_map[m.material]
            sec = model.section_map[m.section]
            pts = [model.position(nid) for nid in m.nodes]
            if m.kind is MemberKind.UNIPLET:
                ka, kb = uniplet_global_parts(mat.elastic_modulus, sec.iy, sec.iz, *pts)
            else:
                ka = truss_unit_stiffness(mat.elastic_modulus, *pts)
                kb = np.zeros_like(ka)
            dofs = np.concatenate([3 * model.node_index[nid] + np.arange(3) for nid in m.nodes])
            scatter.append((dofs[:, None] * n + dofs[None, :]).ravel())
            owner.append(np.full(dofs.size**2, e))
            axial.append(ka.ravel())
            bending.append(kb.ravel())

            chord = pts[-1] - pts[0]
            length = np.linalg.norm(chord)
            d = chord / length
            a = 3 * model.node_index[m.nodes[0]]
            b = 3 * model.node_index[m.nodes[-1]]
            gauge[e, a:a + 3] -= d
            gauge[e, b:b + 3] += d
            strain_rows[e] = gauge[e] * mat.elastic_modulus / length
        cable_index = np.array(
            [i for i, m in enumerate(model.members) if m.kind is MemberKind.CABLE], dtype=int
        )
        return cls(
            dofmap=dm,
            scatter=np.concatenate(scatter) if scatter else np.zeros(0, dtype=int),
            owner=np.concatenate(owner) if owner else np.zeros(0, dtype=int),
            axial=np.concatenate(axial) if axial else np.zeros(0),
            bending=np.concatenate(bending) if bending else np.zeros(0),
            strain_rows=strain_rows,
            gauge=gauge,
            cable_index=cable_index,
        )

    def stiffness(self, active: np.ndarray, areas: np.ndarray) -> np.ndarray:
        n = self.dofmap.n_dofs
        w = active[self.owner] * (areas[self.owner] * self.axial + self.bending)
        k = np.bincount(self.scatter, weights=w, minlength=n * n).reshape(n, n)
        return 0.5 * (k + k.T)


@dataclass
class AssembledSystem:
    k: np.ndarray
    f: np.ndarray
    dofmap: DofMap

    @property
    def k_ff(self) -> np.ndarray:
        fr = self.dofmap.free
        return self.k[np.ix_(fr, fr)]

    @property
    def f_f(self) -> np.ndarray:
        return self.f[self.dofmap.free]


@dataclass
class StaticSolution:
    displacements: np.ndarray  # (n_nodes, 3) mm
    reactions: np.ndarray  # (n_nodes, 3) N, zero on free DoFs
    residual: float  # ||K_ff u_f - F_f|| / ||F_f||


@dataclass(frozen=True)
class CableState:
    cable_ids: tuple[int, ...]
    active: tuple[bool, ...]
    iterations: int
    history: tuple[tuple[bool, ...], ...]
    # cables whose converged force is zero within the slack tolerance
    zero_force: tuple[int, ...] = ()

    @property
    def active_ids(self) -> tuple[int, ...]:
        return tuple(c for c, a in zip(self.cable_ids, self.active) if a)

    @property
    def passive_ids(self) -> tuple[int, ...]:
        return tuple(c for c, a in zip(self.cable_ids, self.active) if not a)


@dataclass
class SolveResult:
    node_ids: tuple[int, ...]
    member_ids: tuple[int, ...]
    displacements: np.ndarray
    reactions: np.ndarray
    forces: np.ndarray  # tension positive
    cable_state: CableState
    residual: float = 0.0
    elongations: np.ndarray = field(default=None, repr=False)

    @property
    def max_displacement(self) -> float:
        return float(np.max(np.linalg.norm(self.displacements, axis=1), initial=0.0))

    def displacement(self, node_id: int) -> np.ndarray:
        return self.displacements[self.node_ids.index(node_id)]

    def reaction(self, node_id: int) -> np.ndarray:
        return self.reactions[self.node_ids.index(node_id)]

    def force(self, member_id: int) -> float:
        return float(self.forces[self.member_ids.index(member_id)])


def _member_mask(model: Model, flags) -> np.ndarray:
    """Per-member 0/1 mask; ``flags`` maps cable id -> active or lists cables in order."""
    mask = np.ones(len(model.members))
    idx = model.assembly.cable_index
    if flags is None:
        return mask
    if isinstance(flags, CableState):
        flags = dict(zip(flags.cable_ids, flags.active))
    if isinstance(flags, dict):
        for i in idx:
            mask[i] = float(bool(flags[model.members[i].id]))
    else:
        flags = list(flags)
        if len(flags) != len(idx):
            raise ValueError(f"expected {len(idx)} cable flags, got {len(flags)}")
        mask[idx] = np.asarray(flags, dtype=float)
    return mask


def _areas(model: Model, areas) -> np.ndarray:
    return model.areas if areas is None else np.asarray(areas, dtype=float)


def assemble(model: Model, flags=None, areas=None) -> AssembledSystem:
    """Global stiffness (all 3n DoFs) and load vector; passive cables add nothing."""
    asm = model.assembly
    k = asm.stiffness(_member_mask(model, flags), _areas(model, areas))
    return AssembledSystem(k=k, f=model.load_vector.copy(), dofmap=asm.dofmap)


def factorize(system: AssembledSystem):
    """Cholesky factor of ``K_ff``; raises :class:`UnstableStructureError`."""
    k_ff = system.k_ff
    if k_ff.size == 0:
        return np.zeros((0, 0)), False
    c, info = dpotrf(k_ff, lower=False, clean=True, overwrite_a=False)
    scale = np.max(np.abs(np.diag(k_ff)))
    bad = None
    if info > 0:
        bad = info - 1
    elif info < 0:
        raise ValueError(f"dpotrf argument error {info}")
    else:
        pivots = np.diag(c) ** 2
        small = np.flatnonzero(pivots <= PIVOT_TOL * scale)
        if small.size:
            bad = int(small[0])
    if bad is not None or scale == 0.0:
        bad = 0 if bad is None else bad
        dof = int(system.dofmap.free[bad])
        raise UnstableStructureError(
            f"unstable configuration: near-null DoF at {system.dofmap.label(dof)}", dof=dof
        )
    return c, False


def solve_static(system: AssembledSystem) -> StaticSolution:
    dm = system.dofmap
    factor = factorize(system)
    u = np.zeros(dm.n_dofs)
    f_f = system.f_f
    if dm.n_free:
        u[dm.free] = cho_solve(factor, f_f)
    r = system.k @ u - system.f
    r[dm.free] = 0.0
    norm_f = np.linalg.norm(f_f)
    res = np.linalg.norm(system.k_ff @ u[dm.free] - f_f)
    return StaticSolution(
        displacements=u.reshape(-1, 3),
        reactions=r.reshape(-1, 3),
        residual=float(res / norm_f) if norm_f > 0 else float(res),
    )


def member_forces(model: Model, displacements, flags=None, areas=None) -> np.ndarray:
    """Axial force per member from chord elongation (tension positive).

    Passive cables report 0.  For a uniplet this is EA/(L1+L2) times the
    change of the i-k chord.
    """
    u = np.asarray(displacements, dtype=float).ravel()
    asm = model.assembly
    forces = _areas(model, areas) * (asm.strain_rows @ u)
    # + 0.0 turns the -0.0 of masked compression into 0.0
    return forces * _member_mask(model, flags) + 0.0


def elongations(model: Model, displacements) -> np.ndarray:
    return model.assembly.gauge @ np.asarray(displacements, dtype=float).ravel()


def eliminate_nodes(system: AssembledSystem, node_ids) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Statically condense the free DoFs of unloaded ``node_ids``.

    Returns ``(K, F, dofs)``: the Schur complement over the remaining free
    DoFs, its load vector and the global indices of those DoFs.
    """
    dm = system.dofmap
    drop = set()
    for nid in node_ids:
        drop.update(dm.node_dofs(nid).tolist())
    free = dm.free
    inner = np.array([d for d in free if d in drop], dtype=int)
    outer = np.array([d for d in free if d not in drop], dtype=int)
    if np.any(system.f[inner] != 0.0):
        raise ValueError("cannot condense loaded nodes")
    k = system.k
    k_oo = k[np.ix_(outer, outer)]
    k_oi = k[np.ix_(outer, inner)]
    k_ii = k[np.ix_(inner, inner)]
    reduced = k_oo - k_oi @ np.linalg.solve(k_ii, k_oi.T)
    return 0.5 * (reduced + reduced.T), system.f[outer], outer


def analyze(model: Model, flags=None, areas=None) -> SolveResult:
    """One linear solve with a fixed cable set."""
    system = assemble(model, flags, areas)
    sol = solve_static(system)
    mask = _member_mask(model, flags)
    cable_ids = tuple(c.id for c in model.cables)
    active = tuple(bool(mask[i]) for i in model.assembly.cable_index)
    return SolveResult(
        node_ids=system.dofmap.node_ids,
        member_ids=tuple(m.id for m in model.members),
        displacements=sol.displacements,
        reactions=sol.reactions,
        forces=member_forces(model, sol.displacements, flags, areas),
        cable_state=CableState(cable_ids, active, 1, (active,)),
        residual=sol.residual,
        elongations=elongations(model, sol.displacements),
    )


def taut(model: Model, displacements) -> tuple[bool, ...]:
    """Cables whose chord would not shorten under ``displacements``."""
    el = elongations(model, displacements)
    return tuple(bool(el[i] > -SLACK_TOL) for i in model.assembly.cable_index)


def iterate_cable_status(model: Model, areas=None, max_iterations: int = 100) -> SolveResult:
    """Resolve the active/passive cable set by repeated linear analysis.

    Starts with every cable active.  After each solve, cables with tension
    (or zero force) become active and cables that would shorten become
    passive.  Stops when two consecutive flag sets agree.
    """
    cable_ids = tuple(c.id for c in model.cables)
    flags = tuple(True for _ in cable_ids)
    history = [flags]
    for it in range(1, max_iterations + 1):
        try:
            result = analyze(model, flags, areas)
        except UnstableStructureError as exc:
            removed = [c for c, a in zip(cable_ids, flags) if not a]
            raise UnstableStructureError(
                f"iteration {it}: structure unstable with cables {removed} passive ({exc})",
                dof=exc.dof,
            ) from exc
        new = taut(model, result.displacements)
        if new == flags:
            el = result.elongations
            zero = tuple(
                cable_ids[k] for k, i in enumerate(model.assembly.cable_index)
                if flags[k] and abs(el[i]) <= SLACK_TOL
            )
            result.cable_state = CableState(cable_ids, flags, it, tuple(history), zero)
            return result
        if new in history:
            raise CableIterationError(
                f"cable status cycles at iteration {it}: {_fmt(cable_ids, flags)} -> {_fmt(cable_ids, new)}",
                history=history + [new],
            )
        history.append(new)
        flags = new
    raise CableIterationError(f"no convergence in {max_iterations} iterations", history)


def _fmt(ids, flags) -> str:
    return "{" + ", ".join(f"{c}:{'A' if a else 'P'}" for c, a in zip(ids, flags)) + "}"


def consistent_cable_sets(model: Model, areas=None) -> list[tuple[bool, ...]]:
    """Every cable subset that is self-consistent, found by enumeration.

    A subset is consistent when the structure is stable with exactly those
    cables active, each active cable is taut and each passive cable would
    slacken.  Cost is ``2**n_cables`` solves; use for small models only.
    """
    n = len(model.cables)
    found = []
    for bits in range(2**n):
        flags = tuple(bool(bits >> k & 1) for k in range(n))
        try:
            sol = solve_static(assemble(model, flags, areas))
        except UnstableStructureError:
            continue
        if taut(model, sol.displacements) == flags:
            found.append(flags)
    return found
