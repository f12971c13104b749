"""Model builders shared by the test modules."""
from __future__ import annotations

import numpy as np

from scissorcable.model import Material, Member, MemberKind, Node, PointLoad, Section, Support, build_model

STEEL = Material(1, 210_000.0, 7.85e-6)
BAR = Section(1, 28.0, 290.0, 290.0)
CABLE = Section(2, 6.28)
FIXED = (True, True, True)


def two_bar_truss(load=(0.0, -1000.0, 0.0)):
    """Symmetric planar V: supports at (0,0) and (2000,0), apex at (1000,-1000)."""
    nodes = [Node(1, (0.0, 0.0, 0.0)), Node(2, (2000.0, 0.0, 0.0)), Node(3, (1000.0, -1000.0, 0.0))]
    members = [Member(1, MemberKind.BAR, (1, 3), 1, 1), Member(2, MemberKind.BAR, (2, 3), 1, 1)]
    return build_model(nodes, members, [BAR], [STEEL], [Support(1, FIXED), Support(2, FIXED)],
                       [PointLoad(3, load)], planar=True)


def single_bar(length=1000.0, force=10_000.0, area=28.0, density=7.85e-6):
    """Axial bar along x, pinned at node 1, node 2 free only along the bar."""
    nodes = [Node(1, (0.0, 0.0, 0.0)), Node(2, (length, 0.0, 0.0))]
    members = [Member(1, MemberKind.BAR, (1, 2), 1, 1)]
    return build_model(
        nodes, members, [Section(1, area)], [Material(1, 210_000.0, density)],
        [Support(1, FIXED), Support(2, (False, True, True))],
        [PointLoad(2, (force, 0.0, 0.0))],
    )


def random_cable_truss(rng: np.random.Generator, n_cables: int | None = None):
    """Random stable planar truss (a triangle strip of bars) with up to 6 cables.

    The bars alone are stable, so every cable subset gives a solvable system.
    """
    n_nodes = int(rng.integers(4, 8))
    base = np.column_stack([np.arange(n_nodes) * 800.0, np.where(np.arange(n_nodes) % 2, 700.0, 0.0)])
    xy = base + rng.uniform(-150.0, 150.0, base.shape)
    nodes = [Node(i + 1, (float(x), float(y), 0.0)) for i, (x, y) in enumerate(xy)]
    members = []
    for i in range(n_nodes - 1):
        members.append(Member(len(members) + 1, MemberKind.BAR, (i + 1, i + 2), 1, 1))
    for i in range(n_nodes - 2):
        members.append(Member(len(members) + 1, MemberKind.BAR, (i + 1, i + 3), 1, 1))
    candidates = [(a, b) for a in range(1, n_nodes + 1) for b in range(a + 3, n_nodes + 1)]
    candidates += [(a, b) for a in range(1, n_nodes - 1) for b in (a + 1, a + 2)]
    if n_cables is None:
        n_cables = int(rng.integers(1, 7))
    picks = rng.choice(len(candidates), size=min(n_cables, len(candidates)), replace=False)
    sections = [BAR, CABLE]
    for k in picks:
        members.append(Member(len(members) + 1, MemberKind.CABLE, candidates[k], 2, 1))
    loads = [PointLoad(i + 1, (float(fx), float(fy), 0.0))
             for i, (fx, fy) in enumerate(rng.uniform(-2000.0, 2000.0, (n_nodes, 2))) if i >= 2]
    supports = [Support(1, FIXED), Support(2, FIXED)]
    return build_model(nodes, members, sections, [STEEL], supports, loads, planar=True)
