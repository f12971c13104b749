"""Bundled model documents for the four validation and demonstration problems."""
from importlib import resources
from pathlib import Path

NAMES = ("problem1", "problem2", "problem3", "problem4")


def path(name: str) -> Path:
    if name not in NAMES:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(NAMES)}")
    return Path(str(resources.files(__name__).joinpath(f"{name}.yaml")))


def load(name: str):
    from ..document import load_document
    return load_document(path(name))
