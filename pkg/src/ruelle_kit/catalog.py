"""Ready-made systems and graphs used by the tests, examples and CLI."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Sequence

from .kgraph import Edge, KGraph
from .ksystem import KRuelleSystem
from .symspace import (
    CylinderFunction,
    FactorMap,
    FullShift,
    MarkovRule,
    Product,
    Shift,
    SymbolBijection,
    compose,
)

__all__ = [
    "cantor_system",
    "abc_system",
    "abc_measure_rule",
    "cuntz_system",
    "cuntz_tensor_system",
    "cuntz_graph",
    "tensor_graph",
    "two_vertex_graph",
]


def cantor_system(k: int, a: Sequence | None = None, constants: Sequence | None = None) -> KRuelleSystem:
    """``sigma_i(x)_n = x_{n+1} + (i - 1) mod k`` on the full ``k``-shift.

    ``phi(x) = a[j]`` when ``x_0 + ... + x_{k-1} = j mod k``; the potentials
    are ``phi + c_i``.  Adding a multiple of ``k`` to every symbol does not
    change the sum mod ``k``, so ``phi o sigma_i`` does not depend on ``i``.
    """
    space = FullShift(k)
    maps = [compose(SymbolBijection(tuple((s + i) % k for s in range(k))), Shift()) for i in range(k)]
    a = [_exactish(x) for x in (a if a is not None else [0] * k)]
    constants = [_exactish(x) for x in (constants if constants is not None else [0] * k)]
    phi = CylinderFunction.from_callable(space, k, lambda w: a[sum(w[0]) % k])
    return KRuelleSystem(space, maps, [phi + c for c in constants])


def _exactish(x):
    return Fraction(x) if isinstance(x, (int, Fraction)) else float(x)


def abc_system(a=Fraction(3, 10), b=Fraction(-7, 10), c=Fraction(1, 5)) -> KRuelleSystem:
    """Full 2-shift, ``sigma_1`` the shift, ``sigma_2`` the flip ``x -> x + 1``.

    ``phi_1(x) = a`` if ``x_0 + x_1`` is even else ``b``; ``phi_2 = c``.
    """
    a, b, c = _exactish(a), _exactish(b), _exactish(c)
    X = FullShift(2)
    phi1 = CylinderFunction.from_callable(X, 2, lambda w: a if (w[0][0] + w[0][1]) % 2 == 0 else b)
    return KRuelleSystem(X, [Shift(), SymbolBijection((1, 0))], [phi1, CylinderFunction.constant(X, c)])


def abc_measure_rule(a, b) -> MarkovRule:
    """``mu(Z[x_0..x_n]) = 1/2 prod exp(psi(x_j + x_{j+1})) / (e^a + e^b)`` with ``psi(0)=a, psi(1)=b``."""
    a, b = float(a), float(b)
    z = math.exp(a) + math.exp(b)
    p = [[math.exp(a) / z, math.exp(b) / z], [math.exp(b) / z, math.exp(a) / z]]
    return MarkovRule([0.5, 0.5], p)


def cuntz_system(n: int, phi=1) -> KRuelleSystem:
    X = FullShift(n)
    return KRuelleSystem(X, [Shift()], [CylinderFunction.constant(X, _exactish(phi))])


def cuntz_tensor_system(ns: Sequence[int] = (2, 3), phis: Sequence = (1, 1)) -> KRuelleSystem:
    """Product of full shifts with the shift on each factor and constant potentials."""
    X = Product(tuple(FullShift(n) for n in ns))
    maps = [FactorMap(i, Shift()) for i in range(len(ns))]
    return KRuelleSystem(X, maps, [CylinderFunction.constant(X, _exactish(p)) for p in phis])


def tensor_graph(ns: Sequence[int], h: float = 1.0) -> KGraph:
    """One vertex, ``ns[i]`` loops of color ``i``; squares commute the colors."""
    k = len(ns)
    edges = [Edge(f"c{i + 1}_{j}", i, "v", "v") for i in range(k) for j in range(ns[i])]
    squares = []
    for i, j in itertools.combinations(range(k), 2):
        for a in range(ns[i]):
            for b in range(ns[j]):
                e, f = f"c{i + 1}_{a}", f"c{j + 1}_{b}"
                squares.append(((e, f), (f, e)))
    return KGraph(k, ["v"], edges, squares, {e.id: h for e in edges})


def cuntz_graph(n: int, h: float = 1.0) -> KGraph:
    return tensor_graph([n], h)


def two_vertex_graph() -> KGraph:
    """A primitive 2-vertex 2-graph with commuting non-symmetric vertex matrices.

    Blue (color 1) realizes ``[[1,1],[1,0]]``, red (color 2) realizes
    ``[[2,1],[1,1]]``.  Squares pair blue-red and red-blue paths with the
    same endpoints in sorted order.  ``h`` is a color weight plus a vertex
    gradient, hence square-consistent.
    """
    blue = [("b0", "u", "u"), ("b1", "u", "v"), ("b2", "v", "u")]  # (id, range, source)
    red = [("r0", "u", "u"), ("r1", "u", "u"), ("r2", "u", "v"), ("r3", "v", "u"), ("r4", "v", "v")]
    edges = [Edge(i, 0, s, r) for i, r, s in blue] + [Edge(i, 1, s, r) for i, r, s in red]
    rng = {e.id: e.rng for e in edges}
    src = {e.id: e.src for e in edges}
    squares = []
    for x in ("u", "v"):
        for z in ("u", "v"):
            ef = sorted((e, f) for e, _, _ in blue for f, _, _ in red if rng[e] == x and src[e] == rng[f] and src[f] == z)
            fe = sorted((f, e) for f, _, _ in red for e, _, _ in blue if rng[f] == x and src[f] == rng[e] and src[e] == z)
            assert len(ef) == len(fe)
            squares.extend(zip(ef, fe))
    grad = {"u": 0.0, "v": 0.3}
    weight = {0: 0.5, 1: 1.25}
    h = {e.id: weight[e.color] + grad[e.rng] - grad[e.src] for e in edges}
    return KGraph(2, ["u", "v"], edges, squares, h)
