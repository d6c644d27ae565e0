"""JSON documents (format tag ``ruelle-kit/1``) for spaces, maps, systems, graphs and results.

Numbers given as JSON integers or as strings like ``"3/10"`` are read as
exact rationals; JSON floats select floating-point mode.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import Any

from .errors import SchemaError
from .exact import ExpSum
from .kgraph import Edge, KGraph, KGraphMeasure, Path
from .ksystem import GroupoidElement, KRuelleSystem
from .nkmod import NkVector
from .ruelle import RPFSolution
from .symspace import (
    SFT,
    Composition,
    CylinderFunction,
    CylinderMeasure,
    FactorMap,
    FullShift,
    Product,
    Shift,
    SymbolBijection,
    format_word,
    make_word,
)

FORMAT = "ruelle-kit/1"

__all__ = [
    "FORMAT",
    "parse_number",
    "number_to_json",
    "space_from_json",
    "space_to_json",
    "map_from_json",
    "map_to_json",
    "function_from_json",
    "function_to_json",
    "measure_from_json",
    "measure_to_json",
    "system_from_json",
    "system_to_json",
    "elements_from_json",
    "graph_from_json",
    "graph_to_json",
    "rpf_solution_to_json",
    "kgraph_measure_to_json",
    "dumps",
]


def _need(doc: dict, key: str, where: str):
    if not isinstance(doc, dict) or key not in doc:
        raise SchemaError(f"{where}: missing key {key!r}")
    return doc[key]


def parse_number(x):
    if isinstance(x, bool):
        raise SchemaError(f"expected a number, got {x!r}")
    if isinstance(x, int):
        return x
    if isinstance(x, float):
        return x
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError):
            raise SchemaError(f"cannot read {x!r} as a number") from None
    raise SchemaError(f"expected a number, got {x!r}")


def number_to_json(x):
    """Integers stay integers, other rationals become ``"p/q"`` strings, the rest floats."""
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, int) and not isinstance(x, bool):
        return x
    return float(x)


# -- spaces and maps --------------------------------------------------------


def space_from_json(doc) -> Any:
    kind = _need(doc, "kind", "space")
    try:
        if kind == "full_shift":
            return FullShift(int(_need(doc, "n", "space")))
        if kind == "sft":
            return SFT(_need(doc, "matrix", "space"))
        if kind == "product":
            return Product(tuple(space_from_json(f) for f in _need(doc, "factors", "space")))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"space: {exc}") from exc
    raise SchemaError(f"space: unknown kind {kind!r}")


def space_to_json(space) -> dict:
    if isinstance(space, FullShift):
        return {"kind": "full_shift", "n": space.n}
    if isinstance(space, SFT):
        return {"kind": "sft", "matrix": [list(r) for r in space.matrix]}
    return {"kind": "product", "factors": [space_to_json(f) for f in space.factors]}


def map_from_json(doc):
    kind = _need(doc, "kind", "map")
    if kind == "shift":
        return Shift()
    if kind == "symbol_bijection":
        return SymbolBijection(tuple(int(x) for x in _need(doc, "perm", "map")))
    if kind == "composition":
        return Composition(tuple(map_from_json(m) for m in _need(doc, "maps", "map")))
    if kind == "factor_map":
        return FactorMap(int(_need(doc, "index", "map")), map_from_json(_need(doc, "map", "map")))
    raise SchemaError(f"map: unknown kind {kind!r}")


def map_to_json(m) -> dict:
    if isinstance(m, Shift):
        return {"kind": "shift"}
    if isinstance(m, SymbolBijection):
        return {"kind": "symbol_bijection", "perm": list(m.perm)}
    if isinstance(m, Composition):
        return {"kind": "composition", "maps": [map_to_json(x) for x in m.maps]}
    return {"kind": "factor_map", "index": m.index, "map": map_to_json(m.map)}


# -- functions and measures -------------------------------------------------


def function_from_json(space, doc) -> CylinderFunction:
    if isinstance(doc, (int, float, str)) and not isinstance(doc, bool):
        return CylinderFunction.constant(space, parse_number(doc))
    if "constant" in doc:
        return CylinderFunction.constant(space, parse_number(doc["constant"]))
    depth = int(_need(doc, "depth", "function"))
    values = _need(doc, "values", "function")
    try:
        return CylinderFunction(space, depth, {make_word(space, k): parse_number(v) for k, v in values.items()})
    except ValueError as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"function: {exc}") from exc


def function_to_json(f: CylinderFunction) -> dict:
    if f.depth == 0:
        return {"constant": number_to_json(next(iter(f.values.values())))}
    return {"depth": f.depth, "values": {format_word(f.space, w): number_to_json(v) for w, v in f.values.items()}}


def measure_from_json(space, doc) -> CylinderMeasure:
    masses = _need(doc, "masses", "measure")
    try:
        return CylinderMeasure(space, {make_word(space, k): parse_number(v) for k, v in masses.items()})
    except ValueError as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"measure: {exc}") from exc


def measure_to_json(mu: CylinderMeasure) -> dict:
    return {"depth": mu.depth, "masses": {format_word(mu.space, w): number_to_json(v) for w, v in mu.masses.items()}}


# -- systems ------------------------------------------------------------------


def _check_format(doc: dict, kind: str):
    if not isinstance(doc, dict):
        raise SchemaError("document must be a JSON object")
    fmt = doc.get("format", FORMAT)
    if fmt != FORMAT:
        raise SchemaError(f"unsupported format {fmt!r}; expected {FORMAT!r}")
    t = doc.get("type", kind)
    if t != kind:
        raise SchemaError(f"expected a {kind!r} document, got {t!r}")


def system_from_json(doc: dict) -> KRuelleSystem:
    _check_format(doc, "system")
    space = space_from_json(_need(doc, "space", "system"))
    maps = [map_from_json(m) for m in _need(doc, "maps", "system")]
    pots = [function_from_json(space, p) for p in _need(doc, "potentials", "system")]
    return KRuelleSystem(space, maps, pots)


def system_to_json(system: KRuelleSystem) -> dict:
    return {
        "format": FORMAT,
        "type": "system",
        "space": space_to_json(system.space),
        "maps": [map_to_json(m) for m in system.maps],
        "potentials": [function_to_json(p) for p in system.potentials],
    }


def elements_from_json(space, docs) -> list[tuple[object, GroupoidElement]]:
    out = []
    for d in docs:
        coef = parse_number(d.get("coef", 1))
        try:
            g = GroupoidElement(
                make_word(space, _need(d, "u", "element")),
                NkVector(tuple(_need(d, "p", "element"))),
                NkVector(tuple(_need(d, "q", "element"))),
                make_word(space, _need(d, "v", "element")),
            )
        except ValueError as exc:
            if isinstance(exc, SchemaError):
                raise
            raise SchemaError(f"element: {exc}") from exc
        out.append((coef, g))
    return out


# -- graphs -------------------------------------------------------------------


def graph_from_json(doc: dict) -> KGraph:
    _check_format(doc, "kgraph")
    rank = int(_need(doc, "rank", "kgraph"))
    edges = []
    for e in _need(doc, "edges", "kgraph"):
        color = int(_need(e, "color", "edge"))
        edges.append(Edge(str(_need(e, "id", "edge")), color - 1, str(_need(e, "src", "edge")), str(_need(e, "rng", "edge"))))
    squares = []
    for s in doc.get("squares", []):
        ef, fe = _need(s, "ef", "square"), _need(s, "fe", "square")
        if len(ef) != 2 or len(fe) != 2:
            raise SchemaError("square: ef and fe must list two edges each")
        squares.append((tuple(map(str, ef)), tuple(map(str, fe))))
    return KGraph(rank, [str(v) for v in _need(doc, "vertices", "kgraph")], edges, squares, doc.get("h"))


def graph_to_json(graph: KGraph, **extra) -> dict:
    doc = {
        "format": FORMAT,
        "type": "kgraph",
        "rank": graph.rank,
        "vertices": list(graph.vertices),
        "edges": [{"id": e.id, "color": e.color + 1, "src": e.src, "rng": e.rng} for e in graph.edges.values()],
        "squares": [{"ef": list(ef), "fe": list(fe)} for ef, fe in graph.squares],
        "h": dict(graph.h),
    }
    doc.update(extra)
    return doc


def path_label(p: Path) -> str:
    return ".".join(p.edges) if p.edges else p.r


# -- results ------------------------------------------------------------------


def rpf_solution_to_json(sol: RPFSolution) -> dict:
    space = sol.measure.space
    return {
        "format": FORMAT,
        "type": "rpf_solution",
        "lambda": sol.eigenvalue,
        "mu": {format_word(space, w): float(v) for w, v in sol.measure.masses.items()},
        "h": {format_word(space, w): float(v) for w, v in sol.eigenfunction.values.items()},
        "residuals": dict(sol.residuals),
        "iterations": sol.iterations,
        "depth": sol.depth,
        "uniqueness": sol.uniqueness,
        "primitivity_certificate": sol.primitivity_certificate,
    }


def kgraph_measure_to_json(m: KGraphMeasure) -> dict:
    return {
        "format": FORMAT,
        "type": "kgraph_measure",
        "eigenvalues": list(m.eigenvalues),
        "vertex_masses": dict(m.vertex_masses),
        "theta": m.theta,
        "witness": list(m.witness),
        "residuals": list(m.residuals),
    }


def _default(o):
    if isinstance(o, (Fraction, ExpSum)):
        return float(o)
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _clean(o):
    if isinstance(o, float) and not math.isfinite(o):
        return None
    if isinstance(o, dict):
        return {str(k): _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    return o


def dumps(doc) -> str:
    """Deterministic JSON: sorted keys, shortest round-trip floats."""
    return json.dumps(_clean(doc), sort_keys=True, default=_default, indent=2)
