"""Static analysis and weight optimisation of scissor structures with discrete cables."""
from .element import (
    uniplet_stiffness_by_condensation,
    uniplet_stiffness_closed_form,
)
from .model import Material, Member, MemberKind, Model, Node, PointLoad, Section, Support, build_model
from .solver import analyze, iterate_cable_status
from .optimizer import DesignSpace, TLBOConfig, evaluate_candidate, optimize

__all__ = [
    "DesignSpace",
    "Material",
    "Member",
    "MemberKind",
    "Model",
    "Node",
    "PointLoad",
    "Section",
    "Support",
    "TLBOConfig",
    "analyze",
    "build_model",
    "evaluate_candidate",
    "iterate_cable_status",
    "optimize",
    "uniplet_stiffness_by_condensation",
    "uniplet_stiffness_closed_form",
]

__version__ = "0.1.0"
