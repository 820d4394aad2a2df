"""Named test bodies shipped with the package."""
from __future__ import annotations

import json
from importlib import resources

from .polytope import Polytope, polytope_from_dict


def zoo_names() -> list[str]:
    root = resources.files("revlw") / "zoo"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def zoo_path(name: str):
    return resources.files("revlw") / "zoo" / f"{name}.json"


def load_zoo(name: str) -> Polytope:
    path = zoo_path(name)
    if not path.is_file():
        raise KeyError(f"no zoo body named {name!r}; known: {', '.join(zoo_names())}")
    return polytope_from_dict(json.loads(path.read_text()), where=f"zoo:{name}")
