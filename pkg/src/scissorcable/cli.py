"""Command line interface: ``scissorcable {analyze,optimize,geometry,validate}``.

Exit codes (stable):

====  ==========================================================
0     success
2     usage error (bad or missing arguments)
3     input file missing or unreadable
4     document syntax or schema error
5     invalid model (bad references, degenerate or unstable geometry)
6     solver failure (singular stiffness, cable status does not settle)
7     optimizer configuration error
8     invalid geometry parameters
====  ==========================================================
"""
from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

from .document import (
    DocumentError,
    from_model,
    load_document,
    optimizer_settings,
    serialize,
    to_model,
)
from .geometry import (
    ARCH_PATTERNS,
    CONNECTOR_PATTERNS,
    DEFAULT_CABLE,
    DEFAULT_UNIPLET,
    STEEL,
    GeometryError,
    build_polar_arch,
    extrude_to_3d,
    polar_unit_parameters,
)
from .model import MemberKind, ModelError, PointLoad, Section, check_model
from .optimizer import ConfigError, DesignSpace, TLBOConfig, optimize
from .solver import CableIterationError, UnstableStructureError, analyze, iterate_cable_status
from . import reporting

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MISSING_FILE = 3
EXIT_PARSE = 4
EXIT_MODEL = 5
EXIT_SOLVER = 6
EXIT_OPTIMIZER = 7
EXIT_GEOMETRY = 8


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _load(path):
    path = Path(path)
    if not path.is_file():
        raise CliError(f"no such file: {path}", EXIT_MISSING_FILE)
    try:
        doc = load_document(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_MISSING_FILE) from exc
    except DocumentError as exc:
        raise CliError(f"{path}: {exc}", EXIT_PARSE) from exc
    try:
        model = to_model(doc)
    except DocumentError as exc:
        raise CliError(f"{path}: {exc}", EXIT_PARSE) from exc
    except GeometryError as exc:
        raise CliError(f"{path}: invalid geometry: {exc}", EXIT_GEOMETRY) from exc
    except ModelError as exc:
        raise CliError(f"{path}: invalid model:\n  " + "\n  ".join(exc.violations), EXIT_MODEL) from exc
    return doc, model


def _solve(model, areas=None, all_active=False):
    try:
        if all_active:
            return analyze(model, areas=areas)
        return iterate_cable_status(model, areas)
    except (UnstableStructureError, CableIterationError) as exc:
        raise CliError(f"solver failure: {exc}", EXIT_SOLVER) from exc


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_analyze(args) -> int:
    _, model = _load(args.model)
    t0 = time.perf_counter()
    result = _solve(model, all_active=args.all_cables_active)
    elapsed = time.perf_counter() - t0
    out = _out_dir(args)
    paths = reporting.write_analysis(out, model, result, args.full_precision, args.paper_signs)
    if args.plot:
        paths.append(reporting.plot_structure(model, result, out / "structure.svg"))

    state = result.cable_state
    if args.all_cables_active:
        print(f"linear solve with all cables active, {elapsed:.3f} s")
    else:
        print(f"converged in {state.iterations} iteration(s), {elapsed:.3f} s")
    print(f"active cables: {list(state.active_ids)}  passive cables: {list(state.passive_ids)}")
    print(f"max displacement: {result.max_displacement:.3f} mm")
    print()
    print(reporting.displacement_table(result, args.full_precision), end="")
    print()
    print(reporting.reaction_table(model, result, args.full_precision), end="")
    print()
    print(reporting.member_force_table(model, result, args.full_precision, args.paper_signs), end="")
    for p in paths:
        print(f"wrote {p}", file=sys.stderr)
    return EXIT_OK


def _optimizer_config(args, doc):
    spec = optimizer_settings(doc)
    overrides = {k: getattr(args, k) for k in (
        "population", "iterations", "seed", "stress_limit", "deflection_limit",
        "lower", "upper", "penalty_exponent") if getattr(args, k) is not None}
    if spec is None:
        required = ("stress_limit", "deflection_limit", "lower", "upper")
        missing = [k for k in required if k not in overrides]
        if missing:
            flags = ", ".join("--" + k.replace("_", "-") for k in missing)
            raise CliError(f"document has no optimizer block; supply {flags}", EXIT_OPTIMIZER)
        from .document import OptimizerSpec
        spec = OptimizerSpec(**{k: overrides.pop(k) for k in required})
    return replace(spec, **overrides)


def cmd_optimize(args) -> int:
    doc, model = _load(args.model)
    spec = _optimizer_config(args, doc)
    try:
        space = DesignSpace.for_model(
            model, spec.lower, spec.upper, spec.stress_limit, spec.deflection_limit,
            spec.penalty_exponent, spec.catalog, spec.groups,
        )
        config = TLBOConfig(spec.population, spec.iterations, spec.seed, args.workers)
    except ConfigError as exc:
        raise CliError(f"optimizer configuration: {exc}", EXIT_OPTIMIZER) from exc
    _solve(model)  # fail early if the given design cannot be analysed

    t0 = time.perf_counter()
    result = optimize(model, space, config)
    elapsed = time.perf_counter() - t0
    out = _out_dir(args)
    (out / "convergence.csv").write_text(result.history.to_csv(), encoding="utf-8")
    summary = reporting.optimization_summary(model, result, args.full_precision, args.paper_signs)
    (out / "optimization_summary.csv").write_text(summary, encoding="utf-8")
    if args.plot:
        reporting.plot_convergence(result.history, out / "convergence.svg")

    best = result.best
    print(f"TLBO: NP={config.population}, iterations={config.iterations}, seed={config.seed}, "
          f"{result.population.evaluations} evaluations, {elapsed:.1f} s")
    print(f"initial weight: {result.initial.weight:.4f} kg  optimised weight: {best.weight:.4f} kg  "
          f"reduction: {100 * result.weight_reduction:.1f}%")
    status = "feasible" if best.feasible else (
        f"INFEASIBLE (stress penalty {best.stress_penalty:.3g}, "
        f"deflection penalty {best.deflection_penalty:.3g})")
    print(f"best design is {status}; max stress {best.max_stress:.1f} N/mm2, "
          f"max deflection {best.max_deflection:.3f} mm")
    print()
    print(summary, end="")
    print(f"wrote {out / 'convergence.csv'}", file=sys.stderr)
    return EXIT_OK


def cmd_geometry(args) -> int:
    try:
        geom = polar_unit_parameters(args.inner_radius, args.width, args.alpha, args.phi)
    except GeometryError as exc:
        raise CliError(f"invalid geometry: {exc}", EXIT_GEOMETRY) from exc
    if args.three_d and args.spacing is None:
        raise CliError("--three-d needs --spacing", EXIT_USAGE)

    uniplet = Section(1, args.uniplet_area, args.uniplet_inertia, args.uniplet_inertia)
    cable = Section(2, args.cable_area)
    n = geom.unit_count
    loads = []
    if args.outer_load:
        # downward on every interior outer hinge
        loads = [PointLoad(nid, (0.0, -args.outer_load, 0.0)) for nid in range(n + 3, 2 * n + 2)]
    try:
        model = build_polar_arch(geom, uniplet_section=uniplet, cable_section=cable, material=STEEL,
                                 pattern=args.pattern, loads=loads, unit_to_mm=1000.0)
        if args.three_d:
            model = extrude_to_3d(model, args.spacing, args.connector, unit_to_mm=1000.0)
    except GeometryError as exc:
        raise CliError(f"invalid geometry: {exc}", EXIT_GEOMETRY) from exc
    errors = check_model(model)
    if errors:
        raise CliError("generated model is invalid:\n  " + "\n  ".join(errors), EXIT_MODEL)

    header = "\n".join([
        "PROVENANCE: generated by `scissorcable geometry`",
        f"  R_b = {args.inner_radius} m, t = {args.width} m, alpha = {args.alpha} deg, "
        f"phi = {args.phi} deg",
        f"  N = {n} duplets, L = {geom.bar_length!r} m, l1 = {geom.outer_semi!r} m, "
        f"l2 = {geom.inner_semi!r} m, beta = {geom.duplet_angle!r} deg",
        f"  cable pattern = {args.pattern}"
        + (f", 3D spacing = {args.spacing} m, connectors = {args.connector}" if args.three_d else ""),
        f"  {len(model.nodes)} nodes, {len(model.members)} members "
        f"({sum(m.kind is MemberKind.CABLE for m in model.members)} cables)",
    ])
    title = f"polar arch, {n} duplets" + (" (two arches, 3D)" if args.three_d else "")
    text = serialize(from_model(model, title=title), header=header)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        print(f"wrote {args.output}: {len(model.nodes)} nodes, {len(model.members)} members, "
              f"{n} duplets per arch", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_validate(args) -> int:
    doc, model = _load(args.model)
    errors = check_model(model)
    if errors:
        raise CliError("invalid model:\n  " + "\n  ".join(errors), EXIT_MODEL)
    if doc.optimizer is not None:
        spec = optimizer_settings(doc)
        try:
            DesignSpace.for_model(model, spec.lower, spec.upper, spec.stress_limit,
                                  spec.deflection_limit, spec.penalty_exponent, spec.catalog,
                                  spec.groups)
            TLBOConfig(spec.population, spec.iterations, spec.seed)
        except ConfigError as exc:
            raise CliError(f"optimizer configuration: {exc}", EXIT_OPTIMIZER) from exc
    n_cables = len(model.cables)
    print(f"{args.model}: ok ({len(model.nodes)} nodes, {len(model.members)} members, "
          f"{n_cables} cables, {len(model.supports)} supports, {len(model.load_case.loads)} loads)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scissorcable",
        description="Static analysis and TLBO weight optimisation of scissor structures with cables.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def output_flags(p):
        p.add_argument("--out-dir", default=".", help="directory for CSV and SVG output")
        p.add_argument("--full-precision", action="store_true",
                       help="write full float precision instead of 3/1 decimals")
        p.add_argument("--paper-signs", action="store_true",
                       help="report compression as positive axial force")
        p.add_argument("--no-plot", dest="plot", action="store_false", help="skip SVG figures")

    p = sub.add_parser("analyze", help="solve a model with tension-only cables")
    p.add_argument("model", help="model document (YAML)")
    output_flags(p)
    p.add_argument("--all-cables-active", action="store_true",
                   help="single linear solve with every cable taut (no status iteration)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("optimize", help="minimise weight over member areas with TLBO")
    p.add_argument("model", help="model document (YAML)")
    output_flags(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1, help="processes evaluating candidates")
    p.add_argument("--population", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--stress-limit", type=float, help="allowable stress (N/mm2)")
    p.add_argument("--deflection-limit", type=float, help="allowable nodal deflection (mm)")
    p.add_argument("--lower", type=float, help="lower area bound (mm2)")
    p.add_argument("--upper", type=float, help="upper area bound (mm2)")
    p.add_argument("--penalty-exponent", type=float)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("geometry", help="generate a polar scissor arch document")
    p.add_argument("--inner-radius", "--rb", type=float, required=True, help="R_b (m)")
    p.add_argument("--width", "-t", type=float, required=True, help="arch depth t (m)")
    p.add_argument("--alpha", type=float, required=True, help="total angle (deg)")
    p.add_argument("--phi", type=float, required=True, help="angle per unit (deg)")
    p.add_argument("--pattern", choices=sorted(ARCH_PATTERNS), default="chords",
                   help="discrete cable layout")
    p.add_argument("--three-d", action="store_true", help="two arches tied by connectors")
    p.add_argument("--spacing", type=float, help="distance between the arches (m)")
    p.add_argument("--connector", choices=CONNECTOR_PATTERNS, default="duplets")
    p.add_argument("--uniplet-area", type=float, default=DEFAULT_UNIPLET.area, help="mm2")
    p.add_argument("--uniplet-inertia", type=float, default=DEFAULT_UNIPLET.iy, help="mm4")
    p.add_argument("--cable-area", type=float, default=DEFAULT_CABLE.area, help="mm2")
    p.add_argument("--outer-load", type=float, default=0.0,
                   help="downward load (N) on each interior outer hinge")
    p.add_argument("--output", "-o", help="file to write (default: stdout)")
    p.set_defaults(func=cmd_geometry)

    p = sub.add_parser("validate", help="check a model document without solving")
    p.add_argument("model", help="model document (YAML)")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
