"""Model documents: YAML text <-> typed document <-> :class:`Model`.

A document stores values in its declared units; :func:`to_model` converts
them to N and mm.  Unknown keys are rejected, and errors carry the line
number and the path of the offending field.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import jsonschema
import yaml

from .geometry import (
    ARCH_PATTERNS,
    CONNECTOR_PATTERNS,
    build_pantograph_grid,
    build_polar_arch,
    extrude_to_3d,
    polar_unit_parameters,
)
from .model import (
    Material,
    Member,
    MemberKind,
    Model,
    Node,
    ModelError,
    PointLoad,
    Section,
    Support,
    build_model,
    check_model,
)

SCHEMA_VERSION = 1

LENGTH = {"mm": 1.0, "cm": 10.0, "m": 1000.0}
FORCE = {"N": 1.0, "kN": 1000.0}
MODULUS = {"N/mm2": 1.0, "MPa": 1.0, "GPa": 1000.0, "kN/mm2": 1000.0, "kN/m2": 1e-3, "Pa": 1e-6}
DENSITY = {"kg/m3": 1e-9, "kg/mm3": 1.0}


class DocumentError(ValueError):
    def __init__(self, message, location=None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


@dataclass(frozen=True)
class Units:
    length: str = "mm"
    force: str = "N"
    section: str = "mm"  # length unit for areas and second moments
    modulus: str = "N/mm2"  # also used for stress limits
    density: str = "kg/m3"


@dataclass(frozen=True)
class PolarArchSpec:
    inner_radius: float
    width: float
    total_angle: float
    unit_angle: float
    uniplet_section: int
    cable_section: int
    material: int
    pattern: str = "chords"
    three_d: bool = False
    spacing: float | None = None
    connector_pattern: str = "duplets"
    kind: str = "polar_arch"


@dataclass(frozen=True)
class PantographGridSpec:
    nx: int
    ny: int
    spacing_x: float
    spacing_y: float
    height: float
    uniplet_section: int
    cable_section: int
    bar_section: int
    material: int
    top_cables: bool = True
    kind: str = "pantograph_grid"


@dataclass(frozen=True)
class OptimizerSpec:
    stress_limit: float
    deflection_limit: float
    lower: float
    upper: float
    population: int = 25
    iterations: int = 100
    seed: int = 0
    penalty_exponent: float = 2.0
    catalog: tuple[float, ...] | None = None
    groups: tuple[tuple[int, ...], ...] | None = None


@dataclass(frozen=True)
class ModelDocument:
    units: Units = field(default_factory=Units)
    planar: bool = False
    nodes: tuple[Node, ...] = ()
    sections: tuple[Section, ...] = ()
    materials: tuple[Material, ...] = ()
    members: tuple[Member, ...] = ()
    supports: tuple[Support, ...] = ()
    loads: tuple[PointLoad, ...] = ()
    generator: PolarArchSpec | PantographGridSpec | None = None
    optimizer: OptimizerSpec | None = None
    title: str = ""
    provenance: str = ""
    schema_version: int = SCHEMA_VERSION


_num = {"type": "number"}
_int = {"type": "integer"}
_vec3 = {"type": "array", "items": _num, "minItems": 2, "maxItems": 3}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


SCHEMA = _obj(
    {
        "schema_version": {"const": SCHEMA_VERSION},
        "title": {"type": "string"},
        "provenance": {"type": "string"},
        "units": _obj({
            "length": {"enum": list(LENGTH)},
            "force": {"enum": list(FORCE)},
            "section": {"enum": list(LENGTH)},
            "modulus": {"enum": list(MODULUS)},
            "density": {"enum": list(DENSITY)},
        }),
        "planar": {"type": "boolean"},
        "nodes": {"type": "array", "items": _obj({"id": _int, "xyz": _vec3}, ["id", "xyz"])},
        "sections": {"type": "array", "items": _obj(
            {"id": _int, "area": _num, "iy": _num, "iz": _num}, ["id", "area"])},
        "materials": {"type": "array", "items": _obj(
            {"id": _int, "elastic_modulus": _num, "density": _num},
            ["id", "elastic_modulus", "density"])},
        "members": {"type": "array", "items": _obj(
            {"id": _int, "kind": {"enum": [k.value for k in MemberKind]},
             "nodes": {"type": "array", "items": _int, "minItems": 2, "maxItems": 3},
             "section": _int, "material": _int},
            ["id", "kind", "nodes", "section", "material"])},
        "supports": {"type": "array", "items": _obj(
            {"node": _int, "fixed": {"type": "array", "items": {"type": "boolean"},
                                     "minItems": 3, "maxItems": 3}},
            ["node", "fixed"])},
        "loads": {"type": "array", "items": _obj({"node": _int, "force": _vec3}, ["node", "force"])},
        "generator": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["polar_arch", "pantograph_grid"]},
                "inner_radius": _num, "width": _num, "total_angle": _num, "unit_angle": _num,
                "pattern": {"enum": list(ARCH_PATTERNS)}, "three_d": {"type": "boolean"},
                "spacing": _num, "connector_pattern": {"enum": list(CONNECTOR_PATTERNS)},
                "nx": _int, "ny": _int, "spacing_x": _num, "spacing_y": _num, "height": _num,
                "top_cables": {"type": "boolean"},
                "uniplet_section": _int, "cable_section": _int, "bar_section": _int, "material": _int,
            },
            "required": ["kind"],
            "additionalProperties": False,
            "allOf": [
                {"if": {"properties": {"kind": {"const": "polar_arch"}}},
                 "then": {"required": ["inner_radius", "width", "total_angle", "unit_angle",
                                       "uniplet_section", "cable_section", "material"]}},
                {"if": {"properties": {"kind": {"const": "pantograph_grid"}}},
                 "then": {"required": ["nx", "ny", "spacing_x", "spacing_y", "height",
                                       "uniplet_section", "cable_section", "bar_section", "material"]}},
            ],
        },
        "optimizer": _obj(
            {"population": _int, "iterations": _int, "seed": _int,
             "stress_limit": _num, "deflection_limit": _num, "penalty_exponent": _num,
             "lower": _num, "upper": _num,
             "catalog": {"type": "array", "items": _num, "minItems": 1},
             "groups": {"type": "array", "items": {"type": "array", "items": _int, "minItems": 1}}},
            ["stress_limit", "deflection_limit", "lower", "upper"],
        ),
    },
    ["schema_version"],
)

_POLAR_FIELDS = {f.name for f in dataclasses.fields(PolarArchSpec)}
_GRID_FIELDS = {f.name for f in dataclasses.fields(PantographGridSpec)}


def _line_of(root, path) -> int | None:
    """1-based line of the YAML node at ``path`` (or its deepest existing parent)."""
    node = root
    for key in path:
        if isinstance(node, yaml.MappingNode):
            match = [v for k, v in node.value if k.value == key]
            if not match:
                break
            node = match[0]
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
        else:
            break
    return node.start_mark.line + 1 if node is not None else None


def _where(root, path) -> str:
    dotted = "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in path).lstrip(".")
    line = _line_of(root, path) if root is not None else None
    return f"line {line}, field {dotted or '<root>'}" if line else f"field {dotted or '<root>'}"


def parse_model_document(data: bytes | str) -> ModelDocument:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        raw = yaml.safe_load(text)
        root = yaml.compose(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else None
        raise DocumentError(f"syntax error: {exc.problem}", where) from exc
    if not isinstance(raw, dict):
        raise DocumentError("document must be a mapping", "line 1")
    errors = sorted(jsonschema.Draft7Validator(SCHEMA).iter_errors(raw), key=lambda e: list(e.path))
    if errors:
        err = errors[0]
        raise DocumentError(f"schema violation: {err.message}", _where(root, list(err.absolute_path)))
    doc = _typed(raw)
    _check_ids(doc, root)
    return doc


def _xyz(v):
    v = [float(c) for c in v]
    return tuple(v + [0.0] * (3 - len(v)))


def _typed(raw: dict) -> ModelDocument:
    gen = raw.get("generator")
    if gen is not None:
        cls = PolarArchSpec if gen["kind"] == "polar_arch" else PantographGridSpec
        allowed = _POLAR_FIELDS if cls is PolarArchSpec else _GRID_FIELDS
        extra = set(gen) - allowed
        if extra:
            raise DocumentError(f"schema violation: {sorted(extra)} not valid for {gen['kind']}",
                                "field generator")
        gen = cls(**gen)
    opt = raw.get("optimizer")
    if opt is not None:
        opt = dict(opt)
        if "catalog" in opt:
            opt["catalog"] = tuple(float(a) for a in opt["catalog"])
        if "groups" in opt:
            opt["groups"] = tuple(tuple(g) for g in opt["groups"])
        opt = OptimizerSpec(**opt)
    return ModelDocument(
        schema_version=raw["schema_version"],
        title=raw.get("title", ""),
        provenance=raw.get("provenance", ""),
        units=Units(**raw.get("units", {})),
        planar=raw.get("planar", False),
        nodes=tuple(Node(n["id"], _xyz(n["xyz"])) for n in raw.get("nodes", ())),
        sections=tuple(Section(s["id"], float(s["area"]), float(s.get("iy", 0.0)), float(s.get("iz", 0.0)))
                       for s in raw.get("sections", ())),
        materials=tuple(Material(m["id"], float(m["elastic_modulus"]), float(m["density"]))
                        for m in raw.get("materials", ())),
        members=tuple(Member(m["id"], MemberKind(m["kind"]), tuple(m["nodes"]), m["section"], m["material"])
                      for m in raw.get("members", ())),
        supports=tuple(Support(s["node"], tuple(s["fixed"])) for s in raw.get("supports", ())),
        loads=tuple(PointLoad(p["node"], _xyz(p["force"])) for p in raw.get("loads", ())),
        generator=gen,
        optimizer=opt,
    )


def _check_ids(doc: ModelDocument, root=None):
    for key, items in (("nodes", doc.nodes), ("sections", doc.sections),
                       ("materials", doc.materials), ("members", doc.members)):
        seen = set()
        for k, item in enumerate(items):
            if item.id in seen:
                raise DocumentError(f"duplicate {key[:-1]} id {item.id}", _where(root, [key, k, "id"]))
            seen.add(item.id)
    if doc.generator is not None and (doc.nodes or doc.members):
        raise DocumentError("a generator block cannot be combined with explicit nodes or members",
                            _where(root, ["generator"]))


def to_dict(doc: ModelDocument) -> dict:
    out: dict = {"schema_version": doc.schema_version}
    if doc.title:
        out["title"] = doc.title
    if doc.provenance:
        out["provenance"] = doc.provenance
    out["units"] = dataclasses.asdict(doc.units)
    out["planar"] = doc.planar
    if doc.generator is not None:
        gen = dataclasses.asdict(doc.generator)
        out["generator"] = {"kind": gen.pop("kind"), **{k: v for k, v in gen.items() if v is not None}}
    out["nodes"] = [{"id": n.id, "xyz": list(n.xyz)} for n in doc.nodes]
    out["sections"] = [{"id": s.id, "area": s.area, "iy": s.iy, "iz": s.iz} for s in doc.sections]
    out["materials"] = [{"id": m.id, "elastic_modulus": m.elastic_modulus, "density": m.density}
                        for m in doc.materials]
    out["members"] = [{"id": m.id, "kind": m.kind.value, "nodes": list(m.nodes),
                       "section": m.section, "material": m.material} for m in doc.members]
    out["supports"] = [{"node": s.node, "fixed": list(s.fixed)} for s in doc.supports]
    out["loads"] = [{"node": p.node, "force": list(p.force)} for p in doc.loads]
    if doc.optimizer is not None:
        opt = dataclasses.asdict(doc.optimizer)
        for key in ("catalog", "groups"):
            if opt[key] is None:
                del opt[key]
            else:
                opt[key] = [list(g) if isinstance(g, (tuple, list)) else g for g in opt[key]]
        out["optimizer"] = opt
    return out


class _Dumper(yaml.SafeDumper):
    pass


def _list_flow(dumper, data):
    # short numeric/boolean rows read better inline
    flow = all(isinstance(v, (int, float, bool)) for v in data)
    return dumper.represent_sequence("tag:yaml.org,2002:seq", data, flow_style=flow)


_Dumper.add_representer(list, _list_flow)


def serialize(doc: ModelDocument, header: str = "") -> str:
    body = yaml.dump(to_dict(doc), Dumper=_Dumper, sort_keys=False, width=100)
    if header:
        body = "".join(f"# {line}\n" if line else "#\n" for line in header.splitlines()) + body
    return body


def to_model(doc: ModelDocument) -> Model:
    """Convert to internal units, run the generator if any, and validate."""
    u = doc.units
    lf, ff, sf = LENGTH[u.length], FORCE[u.force], LENGTH[u.section]
    ef, df = MODULUS[u.modulus], DENSITY[u.density]
    sections = {s.id: Section(s.id, s.area * sf**2, s.iy * sf**4, s.iz * sf**4) for s in doc.sections}
    materials = {m.id: Material(m.id, m.elastic_modulus * ef, m.density * df) for m in doc.materials}
    loads = [PointLoad(p.node, tuple(c * ff for c in p.force)) for p in doc.loads]

    gen = doc.generator
    if gen is None:
        nodes = [Node(n.id, tuple(c * lf for c in n.xyz)) for n in doc.nodes]
        return build_model(nodes, doc.members, sections.values(), materials.values(),
                           doc.supports, loads, planar=doc.planar)

    missing = [i for i in (gen.uniplet_section, gen.cable_section, getattr(gen, "bar_section", None))
               if i is not None and i not in sections]
    if missing or gen.material not in materials:
        raise DocumentError(f"generator references unknown section/material {missing or gen.material}",
                            "field generator")
    if isinstance(gen, PolarArchSpec):
        geom = polar_unit_parameters(gen.inner_radius, gen.width, gen.total_angle, gen.unit_angle)
        arch = build_polar_arch(
            geom,
            uniplet_section=sections[gen.uniplet_section],
            cable_section=sections[gen.cable_section],
            material=materials[gen.material],
            pattern=gen.pattern,
            unit_to_mm=lf,
            loads=[] if gen.three_d else loads,
        )
        if not gen.three_d:
            return arch
        if gen.spacing is None:
            raise DocumentError("three_d generator needs a spacing", "field generator.spacing")
        model = extrude_to_3d(arch, gen.spacing, gen.connector_pattern, unit_to_mm=lf).with_loads(loads)
        errors = check_model(model, check_stability=False)
        if errors:
            raise ModelError(errors)
        return model
    model = build_pantograph_grid(
        gen.nx, gen.ny, gen.spacing_x * lf, gen.spacing_y * lf, gen.height * lf,
        uniplet_section=sections[gen.uniplet_section],
        cable_section=sections[gen.cable_section],
        bar_section=sections[gen.bar_section],
        material=materials[gen.material],
        top_cables=gen.top_cables,
        loads=loads,
    )
    return model


def optimizer_settings(doc: ModelDocument) -> OptimizerSpec | None:
    """The optimizer block in N and mm (stress in N/mm2, areas in mm2)."""
    opt = doc.optimizer
    if opt is None:
        return None
    u = doc.units
    af = LENGTH[u.section] ** 2
    return dataclasses.replace(
        opt,
        stress_limit=opt.stress_limit * MODULUS[u.modulus],
        deflection_limit=opt.deflection_limit * LENGTH[u.length],
        lower=opt.lower * af,
        upper=opt.upper * af,
        catalog=None if opt.catalog is None else tuple(a * af for a in opt.catalog),
    )


def from_model(model: Model, **kwargs) -> ModelDocument:
    """Explicit document (mm, N, N/mm2, kg/m3) describing ``model``."""
    return ModelDocument(
        units=Units(),
        planar=model.planar,
        nodes=model.nodes,
        sections=model.sections,
        materials=tuple(Material(m.id, m.elastic_modulus, m.density / DENSITY["kg/m3"])
                        for m in model.materials),
        members=model.members,
        supports=model.supports,
        loads=model.load_case.loads,
        **kwargs,
    )


def load_document(path) -> ModelDocument:
    with open(path, "rb") as fh:
        return parse_model_document(fh.read())


def load_model(path) -> Model:
    return to_model(load_document(path))
