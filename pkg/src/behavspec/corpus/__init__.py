"""Pedestrian-crossing example corpus shipped with the package."""

from importlib import resources
from pathlib import Path

SPEC_V1 = "corpus_v1.nspec"
SPEC_V2 = "corpus_v2.nspec"
SCENARIOS = ("A.nscen", "B.nscen", "C.nscen")


def path(name: str) -> Path:
    return Path(str(resources.files(__name__).joinpath(name)))


def read(name: str) -> str:
    return resources.files(__name__).joinpath(name).read_text(encoding="utf-8")
