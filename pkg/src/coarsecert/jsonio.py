"""Versioned JSON artifacts: spaces, partitions of unity, trees, reports.

All files are UTF-8 JSON with a schema version field "v": 1, written with
sorted keys and a trailing newline so identical runs produce byte-identical
files.  Weights round-trip exactly: they are emitted through Python's
shortest-exact float representation (17 significant digits suffice and are
never exceeded).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, List, Union

from .covers import DecompositionTree
from .errors import InvalidInputError
from .metric import FiniteMetricSpace, PointSubset, load_graph, load_matrix, load_points
from .simplex import PartitionOfUnity, SimplexPoint, parse_vertex, vertex_key

SCHEMA_VERSION = 1


def dumps_canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def save_json(path: Union[str, Path], obj: dict) -> None:
    Path(path).write_text(dumps_canonical(obj), encoding="utf-8")


def load_json(path: Union[str, Path]) -> dict:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(obj, dict):
        raise InvalidInputError(f"{path}: expected a JSON object")
    if obj.get("v") != SCHEMA_VERSION:
        raise InvalidInputError(f"{path}: unsupported schema version {obj.get('v')!r}")
    return obj


# ---------------------------------------------------------------------------
# spaces
# ---------------------------------------------------------------------------

def space_to_json(kind: str, n: int, data, meta: dict = None) -> dict:
    return {"v": SCHEMA_VERSION, "kind": kind, "n": int(n), "data": data,
            "meta": meta or {}}


def space_from_json(obj: dict) -> FiniteMetricSpace:
    kind = obj.get("kind")
    n = int(obj.get("n", 0))
    data = obj.get("data")
    meta = obj.get("meta") or {}
    if kind == "matrix":
        return load_matrix(data, meta=meta)
    if kind == "graph":
        return load_graph(n, data, meta=meta)
    if kind == "points":
        return load_points(data["coords"], data["p"], meta=meta)
    raise InvalidInputError(f"unknown space kind {kind!r}")


def load_space(path: Union[str, Path]) -> FiniteMetricSpace:
    return space_from_json(load_json(path))


# ---------------------------------------------------------------------------
# partitions of unity
# ---------------------------------------------------------------------------

def pou_to_json(pou: PartitionOfUnity, space_ref: str = "") -> dict:
    entries: Dict[str, list] = {}
    for x in pou.domain.ids:
        pairs = sorted(pou(x).items())
        entries[str(x)] = [[vertex_key(v), float(f"{w:.17g}")] for v, w in pairs]
    return {"v": SCHEMA_VERSION, "space": space_ref, "entries": entries}


def pou_from_json(obj: dict, space: FiniteMetricSpace) -> PartitionOfUnity:
    entries = obj.get("entries")
    if not isinstance(entries, dict):
        raise InvalidInputError("pou file needs an 'entries' object")
    assignment = {}
    for key, pairs in entries.items():
        x = int(key)
        if not (0 <= x < space.n):
            raise InvalidInputError(f"pou references unknown point id {x}")
        weights = {}
        for vk, w in pairs:
            weights[parse_vertex(vk)] = float(w)
        assignment[x] = SimplexPoint(weights)
    return PartitionOfUnity(space, assignment)


def load_pou(path: Union[str, Path], space: FiniteMetricSpace) -> PartitionOfUnity:
    return pou_from_json(load_json(path), space)


# ---------------------------------------------------------------------------
# trees and families
# ---------------------------------------------------------------------------

def tree_to_json(tree: DecompositionTree) -> dict:
    obj = tree.to_json()
    obj["v"] = SCHEMA_VERSION
    return obj


def tree_from_json(obj: dict) -> DecompositionTree:
    return DecompositionTree.from_json(obj)


def load_tree(path: Union[str, Path]) -> DecompositionTree:
    return tree_from_json(load_json(path))


def families_to_json(families: List[List[PointSubset]], R: float = None) -> dict:
    return {
        "v": SCHEMA_VERSION,
        "kind": "families",
        "R": R,
        "families": [[list(member.ids) for member in fam] for fam in families],
    }


def families_from_json(obj: dict) -> List[List[PointSubset]]:
    return [[PointSubset(tuple(member)) for member in fam]
            for fam in obj.get("families", [])]


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

def report_to_json(report_dict: dict) -> dict:
    out = dict(report_dict)
    out["v"] = SCHEMA_VERSION
    return out
