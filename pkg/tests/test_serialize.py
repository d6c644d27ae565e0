import json
import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ruelle_kit.catalog import abc_system, cuntz_tensor_system, two_vertex_graph
from ruelle_kit.errors import SchemaError
from ruelle_kit.serialize import (
    dumps,
    function_from_json,
    function_to_json,
    graph_from_json,
    graph_to_json,
    map_from_json,
    map_to_json,
    measure_from_json,
    measure_to_json,
    parse_number,
    space_from_json,
    space_to_json,
    system_from_json,
    system_to_json,
)
from ruelle_kit.symspace import (
    SFT,
    CylinderFunction,
    CylinderMeasure,
    FactorMap,
    FullShift,
    Product,
    Shift,
    SymbolBijection,
    compose,
)

SPACES = [FullShift(3), SFT(((1, 1), (1, 0))), Product((FullShift(2), SFT(((1, 1), (1, 0)))))]


def test_parse_number_modes():
    assert parse_number(3) == 3 and isinstance(parse_number(3), int)
    assert parse_number("-7/10") == Fraction(-7, 10)
    assert isinstance(parse_number(0.25), float)
    for bad in ("x/2", True, None, [1]):
        with pytest.raises(SchemaError):
            parse_number(bad)


@pytest.mark.parametrize("space", SPACES)
def test_space_roundtrip(space):
    assert space_from_json(json.loads(dumps(space_to_json(space)))) == space


def test_map_roundtrip():
    m = compose(FactorMap(1, Shift()), SymbolBijection((1, 0)), Shift())
    assert map_from_json(json.loads(dumps(map_to_json(m)))) == m
    with pytest.raises(SchemaError):
        map_from_json({"kind": "teleport"})


@given(st.lists(st.fractions(max_denominator=50), min_size=4, max_size=4), st.booleans())
def test_function_roundtrip_keeps_exactness(vals, as_float):
    space = SFT(((1, 1), (1, 0)))
    words = sorted(CylinderFunction.constant(space, 0).refine(2).values)
    vals = [float(v) for v in vals] if as_float else vals
    f = CylinderFunction(space, 2, dict(zip(words, vals[: len(words)])))
    g = function_from_json(space, json.loads(dumps(function_to_json(f))))
    assert g.values == f.values
    assert g.is_exact == f.is_exact


def test_measure_roundtrip():
    mu = CylinderMeasure.uniform(Product((FullShift(2), FullShift(3))), 1)
    back = measure_from_json(mu.space, json.loads(dumps(measure_to_json(mu))))
    assert back.masses == mu.masses


@pytest.mark.parametrize("system", [abc_system(), cuntz_tensor_system()])
def test_system_roundtrip(system):
    back = system_from_json(json.loads(dumps(system_to_json(system))))
    assert back.space == system.space and back.maps == system.maps
    assert all(a.equals(b) and a.is_exact == b.is_exact for a, b in zip(back.potentials, system.potentials))


def test_graph_roundtrip():
    g = two_vertex_graph()
    back = graph_from_json(json.loads(dumps(graph_to_json(g))))
    assert back.vertices == g.vertices and back.edges == g.edges and dict(back.h) == dict(g.h)
    assert sorted(back.squares) == sorted(g.squares)


def test_schema_errors():
    with pytest.raises(SchemaError):
        system_from_json({"format": "ruelle-kit/1", "type": "kgraph"})
    with pytest.raises(SchemaError):
        system_from_json({"format": "ruelle-kit/1", "type": "system", "space": {"kind": "full_shift", "n": 2}})
    with pytest.raises(SchemaError):
        space_from_json({"kind": "torus"})
    with pytest.raises(SchemaError):
        graph_from_json({"format": "ruelle-kit/1", "type": "kgraph", "rank": 2, "vertices": ["v"], "edges": [], "squares": [{"ef": ["a"], "fe": ["b", "c"]}]})


def test_dumps_is_deterministic_and_shortest():
    doc = {"b": 0.1 + 0.2, "a": [Fraction(1, 3), math.inf]}
    text = dumps(doc)
    assert text == dumps(dict(reversed(list(doc.items()))))
    assert '"0.30000000000000004"' not in text and "0.30000000000000004" in text
    assert json.loads(text)["a"][1] is None
