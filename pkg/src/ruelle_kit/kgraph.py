"""Finite higher-rank graphs, their path calculus, eigenmeasures and KMS checks.

Paths are written range-first: ``lam = mu nu`` means ``s(mu) = r(nu)`` and
``r(lam) = r(mu)``.  Every path is stored in color normal form (all color-0
edges first, then color 1, ...), reached by rewriting with the square tables.
Colors are 0-based here and 1-based in JSON.

A square for colors ``i < j`` pairs the path ``e f`` (``e`` of color ``i``,
``f`` of color ``j``) with ``f' e'`` (``f'`` of color ``j``, ``e'`` of color
``i``) with the same range and source.
"""

from __future__ import annotations

import cmath
import itertools
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DegenerateSpaceError, GraphError, NotPrimitiveError, VerificationError
from .nkmod import NkVector

log = logging.getLogger(__name__)

__all__ = [
    "Edge",
    "Path",
    "KGraph",
    "ValidationReport",
    "KGraphMeasure",
    "Dynamics",
    "FiniteOperator",
    "KMSReport",
    "validate",
    "is_strongly_connected",
    "is_primitive",
    "counting_matrix",
    "factorize",
    "minimal_common_extensions",
    "vertex_matrices",
    "kgraph_rpf_solve",
    "verify_rpf_identity",
    "cylinder_additivity_residual",
    "convolve",
    "adjoint",
    "gauge_action",
    "unnormalized_dynamics",
    "normalized_dynamics",
    "omega",
    "kms_check",
    "kms_check_bruteforce",
    "perron_log_eigenvalues",
    "kgraph_beta_search",
]

MEMORY_GUARD = 10**6


@dataclass(frozen=True)
class Edge:
    id: str
    color: int
    src: str
    rng: str


@dataclass(frozen=True)
class Path:
    edges: tuple[str, ...]
    r: str
    s: str
    degree: tuple[int, ...]

    def __len__(self):
        return len(self.edges)

    @property
    def is_vertex(self) -> bool:
        return not self.edges


@dataclass
class ValidationReport:
    valid: bool
    violations: list[dict]
    source_free: bool
    strongly_connected: bool
    primitive_witness: tuple[int, ...] | None

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "violations": self.violations,
            "source_free": self.source_free,
            "strongly_connected": self.strongly_connected,
            "primitive_witness": list(self.primitive_witness) if self.primitive_witness is not None else None,
        }


class KGraph:
    """A finite k-colored graph with factorization squares and optional edge weights ``h``.

    Construction only checks references; ``validate`` reports square, cube
    and source-freeness problems.
    """

    def __init__(
        self,
        rank: int,
        vertices: Sequence[str],
        edges: Iterable[Edge],
        squares: Iterable[tuple[tuple[str, str], tuple[str, str]]],
        h: Mapping[str, float] | None = None,
    ):
        if rank < 1:
            raise GraphError("rank must be at least 1")
        self.rank = rank
        self.vertices = tuple(str(v) for v in vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise GraphError("duplicate vertex ids")
        self.edges: dict[str, Edge] = {}
        for e in edges:
            if e.id in self.edges or e.id in self.vertices:
                raise GraphError(f"duplicate id {e.id!r}")
            if not 0 <= e.color < rank:
                raise GraphError(f"edge {e.id!r} has color {e.color + 1} outside 1..{rank}")
            if e.src not in self.vertices or e.rng not in self.vertices:
                raise GraphError(f"edge {e.id!r} references an unknown vertex")
            self.edges[e.id] = e
        self.squares: list[tuple[tuple[str, str], tuple[str, str]]] = []
        for ef, fe in squares:
            ef, fe = tuple(ef), tuple(fe)
            for x in ef + fe:
                if x not in self.edges:
                    raise GraphError(f"square references unknown edge {x!r}")
            # store with the lower color first in the "ef" slot
            if self.edges[ef[0]].color > self.edges[ef[1]].color:
                ef, fe = fe, ef
            self.squares.append((ef, fe))
        self.h = {k: float(v) for k, v in (h or {}).items()}
        self._swap: dict[tuple[str, str], tuple[str, str]] = {}
        for ef, fe in self.squares:
            self._swap.setdefault(ef, fe)
            self._swap.setdefault(fe, ef)
        self._by_range: dict[tuple[str, int], list[str]] = defaultdict(list)
        for e in self.edges.values():
            self._by_range[(e.rng, e.color)].append(e.id)
        for lst in self._by_range.values():
            lst.sort()
        self._cache_compose: dict = {}
        self._cache_factor: dict = {}

    # -- basic path calculus --------------------------------------------

    def color(self, e: str) -> int:
        return self.edges[e].color

    def edges_into(self, v: str, color: int) -> list[str]:
        """``v Lambda^{e_color}``: edges of this color with range ``v``."""
        return self._by_range.get((v, color), [])

    def vertex(self, v: str) -> Path:
        return Path((), v, v, (0,) * self.rank)

    def _swap_pair(self, x: str, y: str) -> tuple[str, str]:
        try:
            return self._swap[(x, y)]
        except KeyError:
            raise GraphError(f"no square for the path {x}{y}") from None

    def _rewrite(self, seq: list[str], target: Sequence[int]) -> list[str]:
        seq = list(seq)
        for pos in range(len(seq)):
            want = target[pos]
            if self.color(seq[pos]) == want:
                continue
            j = next((q for q in range(pos + 1, len(seq)) if self.color(seq[q]) == want), None)
            if j is None:
                raise GraphError("target color sequence does not match the path degree")
            for q in range(j, pos, -1):
                seq[q - 1], seq[q] = self._swap_pair(seq[q - 1], seq[q])
        return seq

    def path(self, edges: Sequence[str], vertex: str | None = None) -> Path:
        """A path from any composable edge word, rewritten to normal form."""
        edges = tuple(edges)
        if not edges:
            if vertex is None:
                raise GraphError("a vertex path needs its vertex")
            return self.vertex(vertex)
        for a, b in zip(edges, edges[1:]):
            if self.edges[a].src != self.edges[b].rng:
                raise GraphError(f"edges {a!r} and {b!r} are not composable")
        colors = sorted(self.color(e) for e in edges)
        seq = tuple(self._rewrite(list(edges), colors))
        deg = [0] * self.rank
        for c in colors:
            deg[c] += 1
        return Path(seq, self.edges[seq[0]].rng, self.edges[seq[-1]].src, tuple(deg))

    def compose(self, a: Path, b: Path) -> Path:
        if a.s != b.r:
            raise GraphError("paths are not composable")
        if a.is_vertex:
            return b
        if b.is_vertex:
            return a
        key = (a.edges, b.edges)
        got = self._cache_compose.get(key)
        if got is None:
            got = self.path(a.edges + b.edges)
            self._cache_compose[key] = got
        return got

    def factorize(self, lam: Path, m: Sequence[int], n: Sequence[int] | None = None) -> tuple[Path, Path]:
        m = tuple(int(x) for x in m)
        n = tuple(a - b for a, b in zip(lam.degree, m)) if n is None else tuple(int(x) for x in n)
        if len(m) != self.rank or any(x < 0 for x in n) or tuple(a + b for a, b in zip(m, n)) != lam.degree:
            raise GraphError(f"m + n = {tuple(a + b for a, b in zip(m, n))} differs from d(path) = {lam.degree}")
        key = (lam.edges, lam.r, m)
        got = self._cache_factor.get(key)
        if got is not None:
            return got
        if sum(m) == 0:
            got = (self.vertex(lam.r), lam)
        elif sum(n) == 0:
            got = (lam, self.vertex(lam.s))
        else:
            target = [c for c in range(self.rank) for _ in range(m[c])] + [c for c in range(self.rank) for _ in range(n[c])]
            seq = self._rewrite(list(lam.edges), target)
            k = sum(m)
            got = (self.path(seq[:k]), self.path(seq[k:]))
        self._cache_factor[key] = got
        return got

    def h_of(self, lam: Path, h: Mapping[str, float] | None = None) -> float:
        h = self.h if h is None else h
        return math.fsum(h.get(e, 0.0) for e in lam.edges)

    def paths(self, max_degree: Sequence[int], r: str | None = None, exact_degree: bool = False) -> list[Path]:
        """All paths with ``d <= max_degree`` (or ``d == max_degree``), optionally with range ``r``."""
        bound = tuple(max_degree)
        out: list[Path] = []
        starts = [r] if r is not None else list(self.vertices)

        def grow(v0: str, seq: tuple, cur: str, color: int, counts: list[int]):
            if not exact_degree or tuple(counts) == bound:
                out.append(Path(seq, v0, cur, tuple(counts)) if seq else self.vertex(v0))
            for c in range(color, self.rank):
                if counts[c] >= bound[c]:
                    continue
                if exact_degree and any(counts[d] < bound[d] for d in range(color, c)):
                    continue
                for e in self.edges_into(cur, c):
                    counts[c] += 1
                    grow(v0, seq + (e,), self.edges[e].src, c, counts)
                    counts[c] -= 1

        for v in starts:
            grow(v, (), v, 0, [0] * self.rank)
        return out

    def extensions(self, v: str, n: Sequence[int]) -> list[Path]:
        """``v Lambda^n``."""
        return self.paths(n, r=v, exact_degree=True)


# --------------------------------------------------------------------------
# validation and structure


def _adjacency(graph: KGraph, color: int) -> np.ndarray:
    idx = {v: i for i, v in enumerate(graph.vertices)}
    a = np.zeros((len(idx), len(idx)), dtype=np.int64)
    for e in graph.edges.values():
        if e.color == color:
            a[idx[e.rng], idx[e.src]] += 1
    return a


def counting_matrix(graph: KGraph, n: Sequence[int]) -> np.ndarray:
    """``M[v][w] = |v Lambda^n w|``."""
    size = len(graph.vertices)
    out = np.eye(size, dtype=np.int64)
    for c, p in enumerate(n):
        out = out @ np.linalg.matrix_power(_adjacency(graph, c), int(p))
    return out


def is_strongly_connected(graph: KGraph) -> bool:
    idx = {v: i for i, v in enumerate(graph.vertices)}
    reach = np.eye(len(idx), dtype=bool)
    for e in graph.edges.values():
        reach[idx[e.rng], idx[e.src]] = True
    for _ in range(len(idx)):
        reach = (reach.astype(np.int64) @ reach.astype(np.int64)) > 0
    return bool(reach.all())


def is_primitive(graph: KGraph, bound: int | None = None) -> NkVector | None:
    """A nonzero ``n`` with ``|n| <= bound`` and ``Lambda^n`` hitting every vertex pair, else None.

    Multiples of ``(1, ..., 1)`` are tried first, then all degrees by length.
    """
    k = graph.rank
    size = len(graph.vertices)
    if bound is None:
        bound = k * ((size - 1) ** 2 + 1)
    for t in range(1, bound // k + 1):
        n = (t,) * k
        if (counting_matrix(graph, n) > 0).all():
            return NkVector(n)
    for total in range(1, bound + 1):
        for n in itertools.product(range(total + 1), repeat=k):
            if sum(n) == total and (counting_matrix(graph, n) > 0).all():
                return NkVector(n)
    return None


def _source_free(graph: KGraph) -> bool:
    return all(graph.edges_into(v, c) for v in graph.vertices for c in range(graph.rank))


def validate(graph: KGraph) -> ValidationReport:
    """Square bijectivity per color pair, cube consistency (k >= 3) and structural flags."""
    bad: list[dict] = []
    E = graph.edges
    for i, j in itertools.combinations(range(graph.rank), 2):
        dom = {(e, f) for e in E for f in E if E[e].color == i and E[f].color == j and E[e].src == E[f].rng}
        cod = {(f, e) for f in E for e in E if E[f].color == j and E[e].color == i and E[f].src == E[e].rng}
        seen_ef: dict = {}
        seen_fe: dict = {}
        for ef, fe in graph.squares:
            if E[ef[0]].color != i or E[ef[1]].color != j:
                continue
            if ef not in dom:
                bad.append({"kind": "square_not_composable", "pair": list(ef)})
                continue
            if fe not in cod:
                bad.append({"kind": "square_target_not_composable", "pair": list(ef), "target": list(fe)})
                continue
            if E[fe[0]].rng != E[ef[0]].rng or E[fe[1]].src != E[ef[1]].src:
                bad.append({"kind": "square_endpoints_differ", "pair": list(ef), "target": list(fe)})
            if ef in seen_ef:
                bad.append({"kind": "square_duplicate_source", "pair": list(ef)})
            if fe in seen_fe:
                bad.append({"kind": "square_not_injective", "pair": list(ef), "colliding_with": list(seen_fe[fe]), "target": list(fe)})
            seen_ef[ef] = fe
            seen_fe.setdefault(fe, ef)
        for ef in sorted(dom - set(seen_ef)):
            bad.append({"kind": "missing_square", "pair": list(ef)})
        for fe in sorted(cod - set(seen_fe)):
            bad.append({"kind": "square_not_surjective", "target": list(fe)})
    if not bad and graph.rank >= 3:
        bad.extend(_cube_violations(graph))
    sc = is_strongly_connected(graph)
    witness = is_primitive(graph) if sc and not bad else None
    return ValidationReport(
        valid=not bad,
        violations=bad,
        source_free=_source_free(graph),
        strongly_connected=sc,
        primitive_witness=witness.coords if witness is not None else None,
    )


def _cube_violations(graph: KGraph) -> list[dict]:
    out = []
    E = graph.edges
    for i, j, l in itertools.combinations(range(graph.rank), 3):
        for e in E:
            if E[e].color != i:
                continue
            for f in graph.edges_into(E[e].src, j):
                for g in graph.edges_into(E[f].src, l):
                    a = [e, f, g]
                    b = [e, f, g]
                    for p in (0, 1, 0):
                        a[p], a[p + 1] = graph._swap_pair(a[p], a[p + 1])
                    for p in (1, 0, 1):
                        b[p], b[p + 1] = graph._swap_pair(b[p], b[p + 1])
                    if a != b:
                        out.append({"kind": "cube_inconsistent", "path": [e, f, g], "routes": [a, b]})
    return out


def factorize(graph: KGraph, lam: Path, m: Sequence[int], n: Sequence[int] | None = None) -> tuple[Path, Path]:
    """The unique ``(mu, nu)`` with ``lam = mu nu``, ``d(mu) = m``."""
    return graph.factorize(lam, m, n)


def minimal_common_extensions(graph: KGraph, mu: Path, rho: Path) -> list[tuple[Path, Path]]:
    """Pairs ``(alpha, beta)`` with ``mu alpha = rho beta`` of degree ``d(mu) v d(rho)``."""
    if mu.r != rho.r:
        return []
    top = tuple(max(a, b) for a, b in zip(mu.degree, rho.degree))
    da = tuple(t - a for t, a in zip(top, mu.degree))
    out = []
    for alpha in graph.extensions(mu.s, da):
        lam = graph.compose(mu, alpha)
        head, beta = graph.factorize(lam, rho.degree)
        if head == rho:
            out.append((alpha, beta))
    return out


# --------------------------------------------------------------------------
# eigenmeasures


def _check_h(graph: KGraph, h: Mapping[str, float], tol: float = 1e-12) -> None:
    for ef, fe in graph.squares:
        lhs = h.get(ef[0], 0.0) + h.get(ef[1], 0.0)
        rhs = h.get(fe[0], 0.0) + h.get(fe[1], 0.0)
        if abs(lhs - rhs) > tol * max(1.0, abs(lhs)):
            raise GraphError(f"h is not square-consistent on {ef} / {fe}")


def vertex_matrices(graph: KGraph, h: Mapping[str, float] | None = None, theta: float = 0.0) -> list[np.ndarray]:
    """``A_i[v][w] = sum of exp(-theta h(e))`` over color-``i`` edges from ``w`` to ``v``."""
    h = graph.h if h is None else h
    _check_h(graph, h)
    idx = {v: i for i, v in enumerate(graph.vertices)}
    mats = [np.zeros((len(idx), len(idx))) for _ in range(graph.rank)]
    for e in graph.edges.values():
        mats[e.color][idx[e.rng], idx[e.src]] += math.exp(-theta * h.get(e.id, 0.0))
    return mats


@dataclass
class KGraphMeasure:
    graph: KGraph
    h: dict
    theta: float
    vertex_masses: dict
    eigenvalues: tuple[float, ...]
    witness: tuple[int, ...]
    residuals: tuple[float, ...] = ()

    def mass(self, lam: Path) -> float:
        """``mu(Z(lam)) = lambda^{-d(lam)} exp(-theta h(lam)) m[s(lam)]``."""
        scale = math.prod(l ** (-d) for l, d in zip(self.eigenvalues, lam.degree))
        return scale * math.exp(-self.theta * self.graph.h_of(lam, self.h)) * self.vertex_masses[lam.s]


def kgraph_rpf_solve(
    graph: KGraph, h: Mapping[str, float] | None = None, theta: float = 0.0, tol: float = 1e-12, max_iter: int = 100_000
) -> KGraphMeasure:
    """Common Perron data of the vertex matrices via a primitive product ``prod A_i^{n_i}``."""
    h = dict(graph.h if h is None else h)
    rep = validate(graph)
    if not rep.valid:
        raise GraphError(f"invalid graph: {rep.violations[0]}")
    if not rep.source_free:
        raise GraphError("graph has a source")
    if rep.primitive_witness is None:
        raise NotPrimitiveError("no primitivity witness found")
    mats = vertex_matrices(graph, h, theta)
    for a, b in itertools.combinations(mats, 2):
        scale = max(1.0, float(np.abs(a @ b).max()))
        if float(np.abs(a @ b - b @ a).max()) > 1e-12 * scale:
            raise GraphError("vertex matrices do not commute")
    prod = np.eye(len(graph.vertices))
    for a, p in zip(mats, rep.primitive_witness):
        prod = prod @ np.linalg.matrix_power(a, p)
    m = np.full(len(graph.vertices), 1.0 / len(graph.vertices))
    for _ in range(max_iter):
        nxt = prod @ m
        nxt /= nxt.sum()
        done = float(np.abs(nxt - m).max()) <= tol * 1e-2
        m = nxt
        if done:
            break
    lams, res = [], []
    for a in mats:
        am = a @ m
        lam = float(am.sum() / m.sum())
        r = float(np.abs(am - lam * m).max()) / lam
        if r > max(tol, 1e-10):
            raise VerificationError(f"vertex vector is not a common eigenvector (residual {r:.3g})")
        lams.append(lam)
        res.append(r)
    return KGraphMeasure(
        graph=graph,
        h=h,
        theta=float(theta),
        vertex_masses={v: float(x) for v, x in zip(graph.vertices, m)},
        eigenvalues=tuple(lams),
        witness=tuple(rep.primitive_witness),
        residuals=tuple(res),
    )


def _cocycle_along(graph: KGraph, lam: Path, h: Mapping[str, float]) -> float:
    """``sum_i sum_j h`` of the edge read at step ``(n_1, .., n_{i-1}, j)``, found by factorization."""
    total = 0.0
    pre = [0] * graph.rank
    for c in range(graph.rank):
        for _ in range(lam.degree[c]):
            _, rest = graph.factorize(lam, tuple(pre))
            unit = tuple(1 if d == c else 0 for d in range(graph.rank))
            step, _ = graph.factorize(rest, unit)
            total += h.get(step.edges[0], 0.0)
            pre[c] += 1
    return total


def verify_rpf_identity(graph: KGraph, measure: KGraphMeasure, sample_paths: Iterable[Path], tol: float = 1e-10) -> bool:
    """``mu(Z(lam)) = lambda^{-d(lam)} int_{Z(s(lam))} exp(c(d(lam))(lam x)) dmu(x)`` on each sample.

    The right side refines ``Z(s(lam))`` by one color-0 step and reads the
    cocycle off a factorization of ``lam tau``.
    """
    unit = tuple(1 if d == 0 else 0 for d in range(graph.rank))
    for lam in sample_paths:
        lhs = measure.mass(lam)
        scale = math.prod(l ** (-d) for l, d in zip(measure.eigenvalues, lam.degree))
        rhs = 0.0
        for tau in graph.extensions(lam.s, unit):
            lt = graph.compose(lam, tau)
            head, _ = graph.factorize(lt, lam.degree)
            if head != lam:
                raise VerificationError("factorization does not return the prefix")
            rhs += math.exp(-measure.theta * _cocycle_along(graph, head, measure.h)) * measure.mass(tau)
        rhs *= scale
        if abs(lhs - rhs) > tol:
            return False
    return True


def cylinder_additivity_residual(measure: KGraphMeasure, lam: Path, color: int) -> float:
    """``|mu(Z(lam)) - sum_e mu(Z(lam e))|`` over color-``color`` edges ``e`` into ``s(lam)``."""
    g = measure.graph
    parts = [measure.mass(g.compose(lam, g.path((e,)))) for e in g.edges_into(lam.s, color)]
    return abs(measure.mass(lam) - math.fsum(parts))


# --------------------------------------------------------------------------
# convolution algebra


class FiniteOperator:
    """A finite combination of matrix units ``E_{lam, mu}`` with complex coefficients."""

    def __init__(self, graph: KGraph, terms: Mapping[tuple[Path, Path], complex] | None = None):
        self.graph = graph
        self.terms: dict[tuple[Path, Path], complex] = {}
        for (a, b), c in (terms or {}).items():
            if a.s != b.s:
                raise GraphError("matrix unit needs s(lam) == s(mu)")
            if c != 0:
                self.terms[(a, b)] = self.terms.get((a, b), 0) + c

    @classmethod
    def unit(cls, graph: KGraph, lam: Path, mu: Path, coef: complex = 1) -> "FiniteOperator":
        return cls(graph, {(lam, mu): coef})

    def __add__(self, other: "FiniteOperator") -> "FiniteOperator":
        t = dict(self.terms)
        for k, c in other.terms.items():
            t[k] = t.get(k, 0) + c
        return FiniteOperator(self.graph, {k: c for k, c in t.items() if c != 0})

    def scale(self, c: complex) -> "FiniteOperator":
        return FiniteOperator(self.graph, {k: v * c for k, v in self.terms.items()})

    def __mul__(self, other: "FiniteOperator") -> "FiniteOperator":
        return convolve(self, other)

    def canonical(self, top: Sequence[int] | None = None) -> dict:
        """Refine every unit so that ``d(lam) ^ d(mu) == top``; a faithful normal form."""
        g = self.graph
        if top is None:
            top = tuple(max((min(a.degree[c], b.degree[c]) for a, b in self.terms), default=0) for c in range(g.rank))
        out: dict = {}
        for (a, b), c in self.terms.items():
            low = tuple(min(x, y) for x, y in zip(a.degree, b.degree))
            n = tuple(t - l for t, l in zip(top, low))
            if any(x < 0 for x in n):
                raise ValueError("canonical degree is below a unit's degree")
            for e in g.extensions(a.s, n):
                key = (g.compose(a, e), g.compose(b, e))
                out[key] = out.get(key, 0) + c
        return {k: v for k, v in out.items() if abs(v) > 0}

    def equals(self, other: "FiniteOperator", tol: float = 1e-12) -> bool:
        g = self.graph
        units = list(self.terms) + list(other.terms)
        top = tuple(max((min(a.degree[c], b.degree[c]) for a, b in units), default=0) for c in range(g.rank))
        x, y = self.canonical(top), other.canonical(top)
        return all(abs(x.get(k, 0) - y.get(k, 0)) <= tol for k in set(x) | set(y))

    def __repr__(self):
        return f"FiniteOperator({len(self.terms)} units)"


def convolve(a: FiniteOperator, b: FiniteOperator) -> FiniteOperator:
    """``E_{lam,mu} E_{rho,tau} = sum over minimal common extensions of E_{lam alpha, tau beta}``."""
    g = a.graph
    out: dict = {}
    for (lam, mu), c1 in a.terms.items():
        for (rho, tau), c2 in b.terms.items():
            for alpha, beta in minimal_common_extensions(g, mu, rho):
                key = (g.compose(lam, alpha), g.compose(tau, beta))
                out[key] = out.get(key, 0) + c1 * c2
    return FiniteOperator(g, {k: v for k, v in out.items() if v != 0})


def adjoint(a: FiniteOperator) -> FiniteOperator:
    return FiniteOperator(a.graph, {(mu, lam): complex(c).conjugate() for (lam, mu), c in a.terms.items()})


@dataclass(frozen=True)
class Dynamics:
    """``c(lam, mu) = <weights, d(lam) - d(mu)> + h_scale (h(lam) - h(mu))``."""

    weights: tuple[float, ...]
    h_scale: float
    h: Mapping[str, float] = field(default_factory=dict, hash=False)

    def cocycle(self, graph: KGraph, lam: Path, mu: Path) -> float:
        lin = math.fsum(w * (a - b) for w, a, b in zip(self.weights, lam.degree, mu.degree))
        if self.h_scale == 0:
            return lin
        return lin + self.h_scale * (graph.h_of(lam, self.h) - graph.h_of(mu, self.h))


def unnormalized_dynamics(measure: KGraphMeasure) -> Dynamics:
    """The dynamics of the potentials ``-theta h`` themselves: ``c = -theta (h(lam) - h(mu))``."""
    return Dynamics((0.0,) * measure.graph.rank, -measure.theta, measure.h)


def normalized_dynamics(measure: KGraphMeasure, beta: float) -> Dynamics:
    """``c = (<ln lambda, d(lam) - d(mu)> + theta (h(lam) - h(mu))) / beta``."""
    if beta == 0:
        raise ValueError("beta must be nonzero")
    return Dynamics(tuple(math.log(l) / beta for l in measure.eigenvalues), measure.theta / beta, measure.h)


def gauge_action(op: FiniteOperator, dynamics: Dynamics, z: complex) -> FiniteOperator:
    """Multiply the coefficient of ``E_{lam,mu}`` by ``exp(i z c(lam, mu))``; ``z`` may be complex."""
    g = op.graph
    return FiniteOperator(
        g, {(a, b): c * cmath.exp(1j * z * dynamics.cocycle(g, a, b)) for (a, b), c in op.terms.items()}
    )


def omega(measure: KGraphMeasure, op: FiniteOperator) -> complex:
    """``omega(E_{lam,mu}) = [lam == mu] mu(Z(lam))``, extended linearly."""
    return sum((c * measure.mass(a) for (a, b), c in op.terms.items() if a == b), 0j)


@dataclass
class KMSReport:
    beta: float
    degree_bound: tuple[int, ...]
    pairs_nominal: int
    pairs_nonzero: int
    max_violation: float
    worst_pair: tuple | None
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tol

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "degree_bound": list(self.degree_bound),
            "pairs_nominal": self.pairs_nominal,
            "pairs_nonzero": self.pairs_nonzero,
            "max_violation": self.max_violation,
            "passed": self.passed,
            "tol": self.tol,
            "worst_pair": self.worst_pair,
        }


def _refuse_degenerate(graph: KGraph) -> None:
    if all(len(graph.edges_into(v, c)) == 1 for v in graph.vertices for c in range(graph.rank)):
        raise DegenerateSpaceError("every vertex has a single edge of each color; the path space has atoms")


def _unit_label(u: tuple[Path, Path]) -> list:
    return [list(u[0].edges) or [u[0].r], list(u[1].edges) or [u[1].r]]


def kms_check(
    graph: KGraph,
    measure: KGraphMeasure,
    beta: float,
    dynamics: Dynamics,
    degree_bound: Sequence[int] | None = None,
    tol: float = 1e-9,
) -> KMSReport:
    """Worst ``|omega(f g) - omega(g alpha_{i beta}(f))|`` over unit pairs with path degrees <= bound.

    Both sides are sums over minimal common extensions.  Writing them as
    ``W[f, g] = sum over (alpha, beta) with d(alpha) ^ d(beta) = 0 of
    [mu alpha = rho beta][lam alpha = tau beta] mu(Z(lam alpha))`` makes only
    the nonzero pairs appear, so the check is exact without visiting every
    pair.
    """
    _refuse_degenerate(graph)
    bound = tuple(degree_bound) if degree_bound is not None else (2,) * graph.rank
    paths = graph.paths(bound)
    by_source: dict[str, list[Path]] = defaultdict(list)
    for p in paths:
        by_source[p.s].append(p)
    n_units = sum(len(v) ** 2 for v in by_source.values())

    # cores (alpha, beta): same source, disjoint degree supports
    weights: dict[tuple, float] = defaultdict(float)
    for alpha in paths:
        for beta_ in by_source[alpha.s]:
            if any(a and b for a, b in zip(alpha.degree, beta_.degree)):
                continue
            pairs = []
            for x in paths:
                if x.s != alpha.r:
                    continue
                dy = tuple(a + b - c for a, b, c in zip(x.degree, alpha.degree, beta_.degree))
                if any(d < 0 or d > bd for d, bd in zip(dy, bound)):
                    continue
                xa = graph.compose(x, alpha)
                y, tail = graph.factorize(xa, dy)
                if tail == beta_:
                    pairs.append((x, y, xa))
            for lam, tau, lam_alpha in pairs:
                m = measure.mass(lam_alpha)
                for mu, rho, _ in pairs:
                    weights[(lam, mu, rho, tau)] += m
            if len(weights) > MEMORY_GUARD:
                raise MemoryError(f"more than {MEMORY_GUARD} nonzero unit pairs; lower the degree bound")

    worst, worst_pair = 0.0, None
    for (lam, mu, rho, tau), w_fg in weights.items():
        w_gf = weights.get((rho, tau, lam, mu), 0.0)
        for f, g, a, b in (((lam, mu), (rho, tau), w_fg, w_gf), ((rho, tau), (lam, mu), w_gf, w_fg)):
            c = dynamics.cocycle(graph, f[0], f[1])
            v = abs(a - math.exp(-beta * c) * b)
            if v > worst:
                worst, worst_pair = v, (_unit_label(f), _unit_label(g))
    return KMSReport(float(beta), bound, n_units * n_units, len(weights), worst, worst_pair, tol)


def kms_check_bruteforce(
    graph: KGraph, measure: KGraphMeasure, beta: float, dynamics: Dynamics, degree_bound: Sequence[int], tol: float = 1e-9
) -> KMSReport:
    """Direct evaluation with ``convolve`` over every unit pair; for small bounds only."""
    _refuse_degenerate(graph)
    bound = tuple(degree_bound)
    paths = graph.paths(bound)
    units = [(a, b) for a in paths for b in paths if a.s == b.s]
    worst, worst_pair, nonzero = 0.0, None, 0
    for f in units:
        F = FiniteOperator.unit(graph, *f)
        Fz = gauge_action(F, dynamics, 1j * beta)
        for g in units:
            G = FiniteOperator.unit(graph, *g)
            lhs = omega(measure, convolve(F, G))
            rhs = omega(measure, convolve(G, Fz))
            if lhs != 0:
                nonzero += 1
            v = abs(lhs - rhs)
            if v > worst:
                worst, worst_pair = v, (_unit_label(f), _unit_label(g))
    return KMSReport(float(beta), bound, len(units) ** 2, nonzero, worst, worst_pair, tol)


def perron_log_eigenvalues(graph: KGraph, h: Mapping[str, float] | None = None, theta: float = 0.0) -> tuple[float, ...]:
    """``ln`` of the spectral radius of each vertex matrix.

    Weights of color ``i`` are computed as ``exp(-theta h(e) - s_i)`` with
    ``s_i`` the largest exponent of that color, and ``s_i`` is added back, so
    large ``|theta|`` cannot overflow.
    """
    h = graph.h if h is None else h
    _check_h(graph, h)
    s = [-math.inf] * graph.rank
    for e in graph.edges.values():
        s[e.color] = max(s[e.color], -theta * h.get(e.id, 0.0))
    idx = {v: i for i, v in enumerate(graph.vertices)}
    mats = [np.zeros((len(idx), len(idx))) for _ in range(graph.rank)]
    for e in graph.edges.values():
        mats[e.color][idx[e.rng], idx[e.src]] += math.exp(-theta * h.get(e.id, 0.0) - s[e.color])
    return tuple(math.log(float(max(abs(np.linalg.eigvals(a))))) + si for a, si in zip(mats, s))


def kgraph_beta_search(
    graph: KGraph,
    h: Mapping[str, float] | None = None,
    theta: float = 1.0,
    beta_interval: tuple[float, float] = (-50.0, 50.0),
    tol: float = 1e-10,
    grid: int = 101,
    match_tol: float = 1e-8,
    jobs: int = 1,
):
    """``beta`` with every Perron eigenvalue of ``-beta phi^{h,theta}`` equal to 1.

    Scaling the potentials ``-theta h`` by ``-beta`` is the same as using
    ``theta' = -beta theta`` in the vertex matrices.
    """
    from .ksystem import common_roots

    h = graph.h if h is None else h
    return common_roots(
        lambda b: perron_log_eigenvalues(graph, h, -b * theta), graph.rank, beta_interval, tol, grid, match_tol, jobs
    )
