"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` and read the "acceptance criteria"
section of the terminal summary.
"""
import math
import time

import numpy as np
import pytest

from scissorcable import fixtures
from scissorcable.document import optimizer_settings, to_model
from scissorcable.element import (
    truss_unit_stiffness,
    uniplet_global_parts,
    uniplet_stiffness_by_condensation,
    uniplet_stiffness_closed_form,
)
from scissorcable.geometry import (
    arch_semi_bars,
    build_polar_arch,
    pivot_ids,
    polar_unit_parameters,
    verify_deployability,
)
from scissorcable.optimizer import DesignSpace, TLBOConfig, evaluate_candidate, optimize
from scissorcable.solver import (
    assemble,
    consistent_cable_sets,
    eliminate_nodes,
    iterate_cable_status,
    solve_static,
)

from support import random_cable_truss, single_bar


@pytest.fixture(scope="module")
def models():
    return {name: to_model(fixtures.load(name)) for name in fixtures.NAMES}


def test_criterion_1_stiffness_equivalence(verdict):
    rng = np.random.default_rng(20240601)
    n = 1000
    draws = np.column_stack([
        rng.uniform(1e3, 3e5, n),  # E
        rng.uniform(0.1, 1e4, n),  # A
        rng.uniform(0.0, 1e6, n),  # Iy
        rng.uniform(0.0, 1e6, n),  # Iz
        rng.uniform(10.0, 5000.0, n),  # l1
        rng.uniform(10.0, 5000.0, n),  # l2
    ])
    worst = 0.0
    t0 = time.perf_counter()
    for e, a, iy, iz, l1, l2 in draws:
        closed = uniplet_stiffness_closed_form(e, a, iy, iz, l1, l2).matrix
        condensed = uniplet_stiffness_by_condensation(e, a, iy, iz, l1, l2).matrix
        worst = max(worst, np.max(np.abs(condensed - closed)) / np.max(np.abs(closed)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 1.0
    verdict("CRITERION 1", ok, f"max relative entry difference {worst:.2e} over {n} draws, {elapsed:.2f} s")
    assert ok


def _translations(n_nodes):
    return np.column_stack([np.tile(axis, n_nodes) for axis in np.eye(3)])


def test_criterion_2_rigid_body_nullspace(models, verdict):
    rng = np.random.default_rng(7)
    worst = 0.0
    # single elements in random orientations
    for _ in range(200):
        a, b = rng.uniform(-3000, 3000, (2, 3))
        k = truss_unit_stiffness(210_000.0, a, b)
        t = _translations(2)
        worst = max(worst, np.linalg.norm(k @ t) / (np.linalg.norm(k) * np.linalg.norm(t)))
        pj = a + rng.uniform(0.1, 0.9) * (b - a)
        axial, bending = uniplet_global_parts(210_000.0, *rng.uniform(0, 1e4, 2), a, pj, b)
        k = rng.uniform(1, 100) * axial + bending
        t = _translations(3)
        worst = max(worst, np.linalg.norm(k @ t) / (np.linalg.norm(k) * np.linalg.norm(t)))
    # assembled structures with every support removed
    for model in models.values():
        k = assemble(model).k
        t = _translations(len(model.nodes))
        worst = max(worst, np.linalg.norm(k @ t) / (np.linalg.norm(k) * np.linalg.norm(t)))
    ok = worst <= 1e-8
    verdict("CRITERION 2", ok, f"max ||K t|| / (||K|| ||t||) = {worst:.2e} (elements and Problems 1-4)")
    assert ok


# published values: displacements (mm), reactions and member forces (N)
PUBLISHED_DISPLACEMENTS = {2: (-0.166, -0.019), 4: (-0.026, -0.067), 5: (-0.156, -0.238)}
PUBLISHED_REACTIONS = {1: [(0.0, 0.0)], 3: [(-339.3, 566.9)], 6: [(772.4, 3566.09), (772.4, 3566.2)],
                    7: [(366.9, 366.9)]}
# obtained and provided columns; either is accepted where they differ
PUBLISHED_FORCES = {1: (0.0,), 2: (27.6,), 3: (518.9,), 4: (227.6, 228.1), 5: (480.0, 480.2),
                 6: (1092.3, 1092.6), 7: (2793.7, 2793.3)}


def test_criterion_3_problem1_regression(models, verdict):
    model = models["problem1"]
    t0 = time.perf_counter()
    result = iterate_cable_status(model)
    elapsed = time.perf_counter() - t0
    failures = []
    for node, want in PUBLISHED_DISPLACEMENTS.items():
        got = result.displacement(node)[:2]
        if np.max(np.abs(got - want)) > 0.001:
            failures.append(f"displacement node {node}: {got} vs {want}")
    for node, options in PUBLISHED_REACTIONS.items():
        got = result.reaction(node)[:2]
        if not any(np.max(np.abs(got - want)) <= 0.5 for want in options):
            failures.append(f"reaction node {node}: {got} vs {options}")
    for member, options in PUBLISHED_FORCES.items():
        got = result.force(member)
        if not any(abs(got - want) <= 0.5 for want in options):
            failures.append(f"force member {member}: {got:.2f} vs {options}")
    state = result.cable_state
    if (len(state.active_ids), len(state.passive_ids)) != (2, 1):
        failures.append(f"cable set active {state.active_ids} passive {state.passive_ids}")
    if elapsed >= 1.0:
        failures.append(f"runtime {elapsed:.2f} s")
    ok = not failures
    detail = (f"3 displacements, 4 reactions, 7 forces within tolerance; cables active "
              f"{list(state.active_ids)}, passive {list(state.passive_ids)}; {elapsed * 1e3:.1f} ms"
              if ok else "; ".join(failures))
    verdict("CRITERION 3", ok, detail)
    assert ok, detail


def test_criterion_4_problem2_regression(models, verdict):
    model = models["problem2"]
    t0 = time.perf_counter()
    system = assemble(model)  # all cables active
    full = solve_static(system)
    max_90 = float(np.max(np.linalg.norm(full.displacements, axis=1)))
    # 50-node duplet model: pivots condensed out of the stiffness
    k, f, dofs = eliminate_nodes(system, sorted(pivot_ids(model)))
    u50 = np.zeros(system.dofmap.n_dofs)
    u50[dofs] = np.linalg.solve(k, f)
    max_50 = float(np.max(np.linalg.norm(u50.reshape(-1, 3), axis=1)))
    elapsed = time.perf_counter() - t0

    # bottom layer: ids 26..50 on a 5 x 5 grid; mirror in x, in y and about the diagonal
    bottom = full.displacements[25:50, 2].reshape(5, 5)
    scale = np.abs(bottom).max()
    asym = max(np.abs(bottom - bottom[:, ::-1]).max(), np.abs(bottom - bottom[::-1, :]).max(),
               np.abs(bottom - bottom.T).max()) / scale
    checks = {
        "90-node max 12.699 +/- 0.01 mm": abs(max_90 - 12.699) <= 0.01,
        "50-node max 12.699 +/- 0.01 mm": abs(max_50 - 12.699) <= 0.01,
        "bottom layer symmetric to 1e-6": asym <= 1e-6,
        "runtime < 5 s": elapsed < 5.0,
    }
    ok = all(checks.values())
    detail = (f"max deflection {max_90:.4f} mm (90 nodes), {max_50:.4f} mm (50 nodes) vs 12.699; "
              f"bottom-layer asymmetry {asym:.1e}; {elapsed:.2f} s; failed: "
              + (", ".join(k for k, v in checks.items() if not v) or "none"))
    verdict("CRITERION 4", ok, detail)
    # the equivalence of the two formulations is checked regardless of the load level
    assert abs(max_90 - max_50) <= 1e-9 * max_90
    assert ok, detail


def test_criterion_5_cable_oracle(verdict):
    rng = np.random.default_rng(5)
    t0 = time.perf_counter()
    mismatches, passive = 0, 0
    for _ in range(50):
        model = random_cable_truss(rng)
        assert len(model.cables) <= 6
        oracle = consistent_cable_sets(model)
        state = iterate_cable_status(model).cable_state
        mismatches += state.active not in oracle
        passive += len(state.passive_ids) > 0
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 30.0
    verdict("CRITERION 5", ok, f"{50 - mismatches}/50 models match the 2^c oracle "
                               f"({passive} with slack cables), {elapsed:.2f} s")
    assert ok


# goldens from the implementer's own evaluation, frozen after the desk check
GOLDEN_L, GOLDEN_L1, GOLDEN_L2, GOLDEN_BETA = (
    2.0385897616829602, 1.090408477179258, 0.9481812845037024, 155.76267860059266)


def test_criterion_6_geometry_closure(verdict):
    g = polar_unit_parameters(3.0, 0.45, 180.0, 36.0)
    rb, r, phi = 3.0, 3.45, math.radians(36.0)
    length = math.sqrt(rb**2 + r**2 - 2 * r * rb * math.cos(phi))
    l1, l2 = length * r / (r + rb), length * rb / (r + rb)
    beta = 2 * math.degrees(math.asin(rb / l2 * math.sin(phi / 2)))
    rel = max(abs(got / want - 1) for got, want in [
        (g.bar_length, length), (g.outer_semi, l1), (g.inner_semi, l2), (g.duplet_angle, beta),
        (g.bar_length, GOLDEN_L), (g.outer_semi, GOLDEN_L1), (g.inner_semi, GOLDEN_L2),
        (g.duplet_angle, GOLDEN_BETA)])
    desk = (abs(length - 2.0386) < 5e-5 and abs(l1 - 1.0904) < 5e-5 and abs(l2 - 0.9482) < 5e-5
            and abs(beta - 155.8) < 0.05)
    worst_ratio = 0.0
    for rb_, t_, a_, p_ in [(3.0, 0.45, 180, 36), (1.0, 0.2, 90, 15), (10.0, 2.0, 240, 20),
                            (0.7, 0.3, 180, 60), (5.0, 0.1, 120, 8)]:
        arch = build_polar_arch(polar_unit_parameters(rb_, t_, a_, p_))
        worst_ratio = max(worst_ratio, verify_deployability(arch_semi_bars(arch))[1])
    ok = g.unit_count == 5 and rel <= 1e-9 and desk and worst_ratio <= 1e-12
    verdict("CRITERION 6", ok, f"N = {g.unit_count}, L = {g.bar_length:.4f} m, l1 = {g.outer_semi:.4f} m, "
                               f"l2 = {g.inner_semi:.4f} m, beta = {g.duplet_angle:.2f} deg; max relative "
                               f"error {rel:.1e}; ratio spread {worst_ratio:.1e}")
    assert ok


# (force N, area mm2, length mm, stress limit, deflection limit mm, exponent)
PENALTY_CASES = [
    (10_000.0, 100.0, 1000.0, 200.0, 5.0, 2.0),  # feasible
    (30_000.0, 100.0, 1000.0, 200.0, 5.0, 1.0),  # stress only
    (30_000.0, 100.0, 1000.0, 200.0, 5.0, 2.0),
    (10_000.0, 5.0, 1000.0, 1e6, 5.0, 2.0),  # deflection only
    (10_000.0, 5.0, 1000.0, 200.0, 5.0, 2.0),  # both
    (50_000.0, 28.0, 2500.0, 200.0, 5.0, 3.0),
    (-20_000.0, 80.0, 1500.0, 200.0, 1.0, 2.0),  # compression
    (1_000.0, 6.28, 707.1, 200.0, 5.0, 0.5),
    (100.0, 0.785, 3000.0, 80.0, 0.5, 2.0),
    (0.0, 10.0, 1000.0, 200.0, 5.0, 2.0),  # unloaded
]


def test_criterion_7_penalty_analytics(verdict):
    e, rho = 210_000.0, 7.85e-6
    worst = 0.0
    feasible_seen = False
    for force, area, length, sy, dmax, eps in PENALTY_CASES:
        model = single_bar(length=length, force=force, area=area, density=rho)
        space = DesignSpace.for_model(model, 0.1, 1e4, sy, dmax, eps)
        c = evaluate_candidate(model, space, [area])
        # hand values: statically determinate bar
        w = rho * length * area
        stress = abs(force) / area
        delta = abs(force) * length / (e * area)
        phi_s = (stress - sy) / sy if stress > sy else 0.0
        phi_d = (delta - dmax) / dmax if delta > dmax else 0.0
        psi = (1 + phi_s + phi_d) ** eps
        for got, want in [(c.weight, w), (c.stress_penalty, phi_s), (c.deflection_penalty, phi_d),
                          (c.penalty, psi), (c.fitness, psi * w)]:
            worst = max(worst, abs(got - want) / max(abs(want), 1e-300) if want else abs(got))
        assert c.feasible == (phi_s == 0 and phi_d == 0)
        feasible_seen |= c.feasible and c.penalty == 1.0 and c.fitness == c.weight
    ok = worst <= 1e-12 and feasible_seen
    verdict("CRITERION 7", ok, f"10 single-member cases, max relative error {worst:.1e}, "
                               f"feasible case has psi = 1")
    assert ok


def _space(model, spec):
    return DesignSpace.for_model(model, spec.lower, spec.upper, spec.stress_limit, spec.deflection_limit,
                                 spec.penalty_exponent, spec.catalog, spec.groups)


def test_criterion_8_tlbo_behaviour(models, verdict):
    t0 = time.perf_counter()
    model = models["problem1"]
    spec = optimizer_settings(fixtures.load("problem1"))
    space = _space(model, spec)
    assert (spec.population, spec.iterations, spec.stress_limit, spec.deflection_limit) == (50, 100, 200, 5)

    reductions, monotone = [], True
    for seed in range(10):
        result = optimize(model, space, TLBOConfig(spec.population, spec.iterations, seed))
        reductions.append(result.weight_reduction)
        monotone &= bool(np.all(np.diff(result.history.best_fitness) <= 0))
    median = float(np.median(reductions))

    reference = optimize(model, space, TLBOConfig(spec.population, spec.iterations, 0)).history.to_csv()
    parallel = optimize(model, space, TLBOConfig(spec.population, spec.iterations, 0, workers=2))
    deterministic = parallel.history.to_csv() == reference

    # single bar, stress bound active: A* = F / sigma_y
    bar = single_bar(force=10_000.0)
    bar_space = DesignSpace.for_model(bar, 1.0, 200.0, 200.0, 5.0)
    recovered = 0
    for seed in range(10):
        best = optimize(bar, bar_space, TLBOConfig(10, 30, seed)).best.x[0]
        recovered += abs(best - 50.0) <= 0.01 * 50.0
    elapsed = time.perf_counter() - t0

    checks = {"a": monotone, "b": deterministic, "c": 0.70 <= median <= 0.82, "d": recovered == 10,
              "runtime": elapsed < 120.0}
    ok = all(checks.values())
    verdict("CRITERION 8", ok, f"(a) monotone {monotone}; (b) workers 1 vs 2 identical {deterministic}; "
                               f"(c) median reduction {100 * median:.1f}% over 10 seeds "
                               f"[{100 * min(reductions):.1f}, {100 * max(reductions):.1f}]; "
                               f"(d) single bar recovered {recovered}/10; {elapsed:.1f} s")
    assert ok


def _mirror_map(model, transform):
    """Cable id -> id of the cable whose end points are the transformed end points."""
    key = {}
    for c in model.cables:
        ends = frozenset(tuple(np.round(model.position(n), 6)) for n in c.nodes)
        key[ends] = c.id
    mapping = {}
    for c in model.cables:
        ends = frozenset(tuple(np.round(transform(model.position(n)), 6)) for n in c.nodes)
        mapping[c.id] = key[ends]
    return mapping


def test_criterion_9_problems_3_and_4(models, verdict):
    details, ok = [], True
    for name in ("problem3", "problem4"):
        model = models[name]
        state = iterate_cable_status(model).cable_state
        active = dict(zip(state.cable_ids, state.active))
        transforms = [lambda p: p * [-1, 1, 1]]
        if name == "problem4":
            z = model.coordinates[:, 2].max()
            transforms.append(lambda p, z=z: np.array([p[0], p[1], z - p[2]]))
        symmetric = all(active[a] == active[b]
                        for t in transforms for a, b in _mirror_map(model, t).items())

        spec = optimizer_settings(fixtures.load(name))
        space = _space(model, spec)
        result = optimize(model, space, TLBOConfig(spec.population, spec.iterations, 0))
        best = result.best
        honest = best.feasible == (best.penalty == 1.0) and (best.penalty == 1.0) == (
            best.stress_penalty == 0 and best.deflection_penalty == 0)
        areas = space.member_areas(best.x)
        bounded = bool(np.all((best.x >= space.lower) & (best.x <= space.upper)))
        ok &= symmetric and honest and bounded
        details.append(f"{name}: passive {list(state.passive_ids)} mirror-symmetric {symmetric}, "
                       f"best {'feasible' if best.feasible else 'reported infeasible'} "
                       f"(psi - 1 = {best.penalty - 1:.1e}, w = {best.weight:.3f} kg, "
                       f"areas {areas.min():.3f}-{areas.max():.3f} mm2 within bounds {bounded})")
    verdict("CRITERION 9", ok, "; ".join(details))
    assert ok
