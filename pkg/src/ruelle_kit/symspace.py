"""Symbolic spaces, the commuting-map catalog, cylinder functions and measures.

Points of a space are one-sided sequences (one per factor for products).  A
word is stored as a tuple of per-factor symbol tuples, so a word on a
non-product space is ``((0, 1, 1),)``.  Words may be *ragged* (factors of
different lengths); this happens naturally for preimages under maps that act
on a single factor of a product.  A word of uniform length ``m`` names a
depth-``m`` cylinder.

Catalog maps are ``Shift``, ``SymbolBijection``, ``FactorMap`` and
``Composition``.  ``Composition((S, T))`` is ``S o T``: ``T`` acts first.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import DepthError, InvalidMapError, InvalidSpaceError, RefinementError
from .exact import ExpSum, close, is_exact

Word = tuple[tuple[int, ...], ...]

__all__ = [
    "FullShift",
    "SFT",
    "Product",
    "Shift",
    "SymbolBijection",
    "Composition",
    "FactorMap",
    "IDENTITY",
    "MapCertificate",
    "CylinderFunction",
    "CylinderMeasure",
    "MarkovRule",
    "make_word",
    "format_word",
    "admissible_words",
    "is_admissible",
    "word_lengths",
    "truncate",
    "compose",
    "power",
    "validate_map",
    "consumption",
    "lookahead",
    "image_word",
    "branch_preimages",
    "preimage_words",
    "preimage_bound",
    "maps_commute",
    "compose_with_map",
    "measure_consistency_check",
    "measure_refine",
    "exactness_certificate",
    "certificates",
    "word_metric",
    "holder_constant",
]


# --------------------------------------------------------------------------
# spaces


class _Alphabet:
    @property
    def factors(self):
        return (self,)

    @property
    def size(self) -> int:
        raise NotImplementedError

    def allows(self, a: int, b: int) -> bool:
        raise NotImplementedError

    @property
    def is_full(self) -> bool:
        raise NotImplementedError

    def matrix_array(self) -> np.ndarray:
        return np.array(
            [[1 if self.allows(a, b) else 0 for b in range(self.size)] for a in range(self.size)],
            dtype=np.int64,
        )


@dataclass(frozen=True)
class FullShift(_Alphabet):
    n: int

    def __post_init__(self):
        if int(self.n) < 1:
            raise InvalidSpaceError(f"alphabet size must be positive, got {self.n}")

    @property
    def size(self) -> int:
        return self.n

    def allows(self, a: int, b: int) -> bool:
        return True

    @property
    def is_full(self) -> bool:
        return True


@dataclass(frozen=True)
class SFT(_Alphabet):
    matrix: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in row) for row in self.matrix)
        object.__setattr__(self, "matrix", rows)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise InvalidSpaceError("transition matrix must be square and non-empty")
        if any(x not in (0, 1) for r in rows for x in r):
            raise InvalidSpaceError("transition matrix must be zero-one")
        for a in range(n):
            if not any(rows[a]):
                raise InvalidSpaceError(f"transition matrix has a zero row at {a}")
            if not any(rows[b][a] for b in range(n)):
                raise InvalidSpaceError(f"transition matrix has a zero column at {a}")

    @property
    def size(self) -> int:
        return len(self.matrix)

    def allows(self, a: int, b: int) -> bool:
        return self.matrix[a][b] == 1

    @property
    def is_full(self) -> bool:
        return all(all(r) for r in self.matrix)


@dataclass(frozen=True)
class Product:
    factors: tuple

    def __post_init__(self):
        facs = tuple(self.factors)
        object.__setattr__(self, "factors", facs)
        if not facs:
            raise InvalidSpaceError("a product needs at least one factor")
        for f in facs:
            if not isinstance(f, (FullShift, SFT)):
                raise InvalidSpaceError("product factors must be full shifts or SFTs (no nesting)")


SymbolicSpace = Union[FullShift, SFT, Product]


# --------------------------------------------------------------------------
# words


def _factor_admissible(factor: _Alphabet, s: Sequence[int]) -> bool:
    if any(not 0 <= x < factor.size for x in s):
        return False
    return all(factor.allows(s[i], s[i + 1]) for i in range(len(s) - 1))


def is_admissible(space: SymbolicSpace, w: Word) -> bool:
    facs = space.factors
    return len(w) == len(facs) and all(_factor_admissible(f, s) for f, s in zip(facs, w))


def make_word(space: SymbolicSpace, spec) -> Word:
    """Build a word from a string (``"0110"``, ``"01|12"``, ``"10.3"``) or tuples."""
    facs = space.factors
    if isinstance(spec, str):
        parts = spec.split("|") if len(facs) > 1 else [spec]
        if len(parts) != len(facs):
            raise ValueError(f"word {spec!r} does not have {len(facs)} factors")
        w = []
        for part in parts:
            if "." in part:
                w.append(tuple(int(t) for t in part.split(".") if t != ""))
            else:
                w.append(tuple(int(ch) for ch in part))
        w = tuple(w)
    else:
        spec = tuple(spec)
        if spec and all(isinstance(x, (int, np.integer)) for x in spec):
            if len(facs) != 1:
                raise ValueError("flat symbol tuples are only valid for non-product spaces")
            w = (tuple(int(x) for x in spec),)
        elif not spec and len(facs) == 1:
            w = ((),)
        else:
            w = tuple(tuple(int(x) for x in s) for s in spec)
    if not is_admissible(space, w):
        raise ValueError(f"word {spec!r} is not admissible")
    return w


def format_word(space: SymbolicSpace, w: Word) -> str:
    out = []
    for f, s in zip(space.factors, w):
        if f.size <= 10:
            out.append("".join(str(x) for x in s))
        else:
            out.append(".".join(str(x) for x in s))
    return "|".join(out)


def word_lengths(w: Word) -> tuple[int, ...]:
    return tuple(len(s) for s in w)


def truncate(w: Word, m) -> Word:
    if isinstance(m, int):
        m = (m,) * len(w)
    return tuple(s[:k] for s, k in zip(w, m))


def _factor_words(factor: _Alphabet, m: int) -> list[tuple[int, ...]]:
    words: list[tuple[int, ...]] = [()]
    for _ in range(m):
        words = [s + (b,) for s in words for b in range(factor.size) if not s or factor.allows(s[-1], b)]
    return words


def _factor_extensions(factor: _Alphabet, s: tuple[int, ...], length: int) -> list[tuple[int, ...]]:
    words = [s]
    for _ in range(length - len(s)):
        words = [u + (b,) for u in words for b in range(factor.size) if not u or factor.allows(u[-1], b)]
    return words


def admissible_words(space: SymbolicSpace, m) -> list[Word]:
    """All admissible words of depth ``m`` (an int or per-factor lengths), lexicographic."""
    facs = space.factors
    lengths = (m,) * len(facs) if isinstance(m, int) else tuple(m)
    if any(k < 0 for k in lengths):
        raise DepthError("depth must be nonnegative")
    return list(_words_cached(space, lengths))


@functools.lru_cache(maxsize=512)
def _words_cached(space: SymbolicSpace, lengths: tuple[int, ...]) -> tuple[Word, ...]:
    per = [_factor_words(f, k) for f, k in zip(space.factors, lengths)]
    return tuple(tuple(c) for c in itertools.product(*per))


def extensions(space: SymbolicSpace, w: Word, lengths) -> list[Word]:
    facs = space.factors
    if isinstance(lengths, int):
        lengths = (lengths,) * len(facs)
    per = [_factor_extensions(f, s, max(k, len(s))) for f, s, k in zip(facs, w, lengths)]
    return [tuple(c) for c in itertools.product(*per)]


# --------------------------------------------------------------------------
# catalog maps


@dataclass(frozen=True)
class Shift:
    """The left shift, applied to every factor."""


@dataclass(frozen=True)
class SymbolBijection:
    """A permutation of the alphabet applied coordinatewise (to every factor)."""

    perm: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "perm", tuple(int(x) for x in self.perm))

    def inverse(self) -> tuple[int, ...]:
        inv = [0] * len(self.perm)
        for a, b in enumerate(self.perm):
            inv[b] = a
        return tuple(inv)


@dataclass(frozen=True)
class Composition:
    maps: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "maps", tuple(self.maps))


@dataclass(frozen=True)
class FactorMap:
    index: int
    map: object


CatalogMap = Union[Shift, SymbolBijection, Composition, FactorMap]
IDENTITY = Composition(())


def compose(*maps) -> Composition:
    """``compose(S, T)`` is ``S o T``.  Nested compositions are flattened."""
    flat: list = []
    for m in maps:
        if isinstance(m, Composition):
            flat.extend(m.maps)
        else:
            flat.append(m)
    return Composition(tuple(flat))


def power(tmap, n: int) -> Composition:
    return compose(*([tmap] * n))


def _sub(space: SymbolicSpace, j: int) -> _Alphabet:
    facs = space.factors
    if not 0 <= j < len(facs):
        raise InvalidMapError(f"factor index {j} out of range for {len(facs)} factors")
    return facs[j]


def validate_map(space: SymbolicSpace, tmap) -> None:
    """Raise InvalidMapError unless ``tmap`` is a catalog map on ``space``."""
    if isinstance(tmap, Shift):
        return
    if isinstance(tmap, SymbolBijection):
        for f in space.factors:
            if sorted(tmap.perm) != list(range(f.size)):
                raise InvalidMapError(f"{tmap.perm} is not a permutation of an alphabet of size {f.size}")
            p = tmap.perm
            for a in range(f.size):
                for b in range(f.size):
                    if f.allows(a, b) != f.allows(p[a], p[b]):
                        raise InvalidMapError(f"bijection {p} does not preserve admissibility at ({a},{b})")
        return
    if isinstance(tmap, Composition):
        for m in tmap.maps:
            validate_map(space, m)
        return
    if isinstance(tmap, FactorMap):
        sub = _sub(space, tmap.index)
        if _contains_factor_map(tmap.map):
            raise InvalidMapError("factor maps cannot be nested")
        validate_map(sub, tmap.map)
        return
    raise InvalidMapError(f"unknown catalog map {tmap!r}")


def _contains_factor_map(tmap) -> bool:
    if isinstance(tmap, FactorMap):
        return True
    if isinstance(tmap, Composition):
        return any(_contains_factor_map(m) for m in tmap.maps)
    return False


def consumption(space: SymbolicSpace, tmap) -> tuple[int, ...]:
    """Symbols consumed per factor."""
    r = len(space.factors)
    if isinstance(tmap, Shift):
        return (1,) * r
    if isinstance(tmap, SymbolBijection):
        return (0,) * r
    if isinstance(tmap, Composition):
        out = [0] * r
        for m in tmap.maps:
            out = [a + b for a, b in zip(out, consumption(space, m))]
        return tuple(out)
    if isinstance(tmap, FactorMap):
        c = consumption(_sub(space, tmap.index), tmap.map)[0]
        out = [0] * r
        out[tmap.index] = c
        return tuple(out)
    raise InvalidMapError(f"unknown catalog map {tmap!r}")


def lookahead(space: SymbolicSpace, tmap) -> tuple[int, ...]:
    """Per-factor image depth needed before preimage branches depend only on the word.

    A shift on a non-full SFT factor has preimages ``a x`` restricted by
    ``A[a][x0]``, so the first image symbol must be known.
    """
    cons = consumption(space, tmap)
    return tuple(1 if (c > 0 and not f.is_full) else 0 for f, c in zip(space.factors, cons))


def image_word(space: SymbolicSpace, tmap, w: Word) -> Word:
    """Image of the cylinder word under the map (lengths drop by the consumption)."""
    return _apply_form(_normal_form(len(space.factors), tmap), w)


def _apply_form(form, w: Word) -> Word:
    out = []
    for s, (drop, perm) in zip(w, form):
        if len(s) < drop:
            raise DepthError("cannot shift an empty factor word")
        s = s[drop:] if drop else s
        out.append(tuple(perm[x] for x in s) if perm is not None else s)
    return tuple(out)


@functools.lru_cache(maxsize=4096)
def _normal_form(nfac: int, tmap) -> tuple[tuple[int, tuple[int, ...] | None], ...]:
    # Shifts and symbol bijections commute, so every catalog map is, per
    # factor, "drop this many symbols, then relabel".
    if isinstance(tmap, Shift):
        return ((1, None),) * nfac
    if isinstance(tmap, SymbolBijection):
        return ((0, tmap.perm),) * nfac
    if isinstance(tmap, FactorMap):
        if not 0 <= tmap.index < nfac:
            raise InvalidMapError(f"factor index {tmap.index} out of range for {nfac} factors")
        inner = _normal_form(1, tmap.map)[0]
        return tuple(inner if j == tmap.index else (0, None) for j in range(nfac))
    if isinstance(tmap, Composition):
        form = [(0, None)] * nfac
        for m in reversed(tmap.maps):
            nxt = _normal_form(nfac, m)
            form = [(d1 + d2, _then(p1, p2)) for (d1, p1), (d2, p2) in zip(form, nxt)]
        return tuple(form)
    raise InvalidMapError(f"unknown catalog map {tmap!r}")


def _then(p1, p2):
    if p1 is None:
        return p2
    if p2 is None:
        return p1
    return tuple(p2[x] for x in p1)


def _image_word_slow(space: SymbolicSpace, tmap, w: Word) -> Word:
    if isinstance(tmap, Composition):
        for m in reversed(tmap.maps):
            w = _image_word_slow(space, m, w)
        return w
    if isinstance(tmap, Shift):
        if any(len(s) == 0 for s in w):
            raise DepthError("cannot shift an empty factor word")
        return tuple(s[1:] for s in w)
    if isinstance(tmap, SymbolBijection):
        p = tmap.perm
        return tuple(tuple(p[x] for x in s) for s in w)
    if isinstance(tmap, FactorMap):
        j = tmap.index
        inner = _image_word_slow(_sub(space, j), tmap.map, (w[j],))[0]
        return w[:j] + (inner,) + w[j + 1 :]
    raise InvalidMapError(f"unknown catalog map {tmap!r}")


def branch_preimages(space: SymbolicSpace, tmap, w: Word) -> list[Word]:
    """Words ``v`` with ``image(v) == w``, one per local inverse branch.

    Lengths of ``v`` are ``len(w_i) + consumption_i``; ``Z[v]`` for distinct
    ``v`` are disjoint and their union is the preimage of ``Z[w]``.
    """
    if isinstance(tmap, Composition):
        words = [w]
        for m in tmap.maps:
            words = [v for u in words for v in branch_preimages(space, m, u)]
        return words
    if isinstance(tmap, Shift):
        per = []
        for f, s in zip(space.factors, w):
            per.append([(a,) + s for a in range(f.size) if not s or f.allows(a, s[0])])
        return [tuple(c) for c in itertools.product(*per)]
    if isinstance(tmap, SymbolBijection):
        inv = tmap.inverse()
        return [tuple(tuple(inv[x] for x in s) for s in w)]
    if isinstance(tmap, FactorMap):
        j = tmap.index
        subs = branch_preimages(_sub(space, j), tmap.map, (w[j],))
        return [w[:j] + (v[0],) + w[j + 1 :] for v in subs]
    raise InvalidMapError(f"unknown catalog map {tmap!r}")


def preimage_words(space: SymbolicSpace, tmap, w: Word, target_depth: int) -> list[Word]:
    """Depth-``target_depth`` words partitioning the preimage of ``Z[w]``."""
    cons = consumption(space, tmap)
    need = max(len(s) + c for s, c in zip(w, cons))
    if target_depth < need:
        raise DepthError(f"target depth {target_depth} < {need} needed to determine images of {w}")
    out = []
    for v in branch_preimages(space, tmap, w):
        out.extend(extensions(space, v, target_depth))
    return sorted(out)


def preimage_bound(space: SymbolicSpace, tmap) -> int:
    """Uniform bound on the number of preimages of a point."""
    return math.prod(f.size**c for f, c in zip(space.factors, consumption(space, tmap)))


def maps_commute(space: SymbolicSpace, maps: Sequence, depth: int | None = None) -> bool:
    """Exact commutation check of catalog maps on all words of a fixed depth."""
    if depth is None:
        total = [0] * len(space.factors)
        for m in maps:
            total = [a + b for a, b in zip(total, consumption(space, m))]
        depth = max(total) + 2
    words = admissible_words(space, depth)
    for i in range(len(maps)):
        for j in range(i + 1, len(maps)):
            st = compose(maps[i], maps[j])
            ts = compose(maps[j], maps[i])
            for w in words:
                if image_word(space, st, w) != image_word(space, ts, w):
                    return False
    return True


# --------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class MapCertificate:
    positively_expansive: str  # "yes" | "no" | "unknown"
    exact_certificate: int | None


def exactness_certificate(space: SymbolicSpace, power_bound: int | None = None) -> int | None:
    """Least ``m`` with ``A^m`` entrywise positive, or None up to ``power_bound``."""
    best = 0
    for f in space.factors:
        a = f.matrix_array() > 0
        n = a.shape[0]
        bound = power_bound if power_bound is not None else (n - 1) ** 2 + 1
        p = a.copy()
        found = None
        for m in range(1, bound + 1):
            if p.all():
                found = m
                break
            p = (p.astype(np.int64) @ a.astype(np.int64)) > 0
        if found is None:
            return None
        best = max(best, found)
    return best


def certificates(space: SymbolicSpace, tmap) -> MapCertificate:
    """Expansivity and exactness certificates for a catalog map.

    Every catalog map acts on factor ``i`` as a relabelling composed with
    ``shift^{c_i}``; it is positively expansive exactly when every factor is
    consumed, and then exact exactly when each factor matrix is primitive.
    """
    cons = consumption(space, tmap)
    if all(c >= 1 for c in cons):
        return MapCertificate("yes", exactness_certificate(space))
    if all(f.size == 1 for f in space.factors):
        return MapCertificate("unknown", None)
    return MapCertificate("no", None)


def word_metric(x: Word, y: Word, beta: float) -> float:
    """``beta ** N`` for the first disagreement ``N``; 0.0 when the prefixes agree.

    A 0.0 result only says the distance is below ``beta ** depth``.
    """
    if not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    if word_lengths(x) != word_lengths(y):
        raise ValueError("prefixes must have equal shape")
    first = None
    for s, t in zip(x, y):
        for i, (a, b) in enumerate(zip(s, t)):
            if a != b:
                first = i if first is None else min(first, i)
                break
    return 0.0 if first is None else beta**first


# --------------------------------------------------------------------------
# cylinder functions


def _check_value(v):
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, (int, Fraction, ExpSum)):
        return v
    return float(v)


class CylinderFunction:
    """A locally constant real function, constant on depth-``m`` cylinders."""

    __slots__ = ("space", "depth", "values")

    def __init__(self, space: SymbolicSpace, depth: int, values: Mapping):
        if depth < 0:
            raise DepthError("depth must be nonnegative")
        vals = {}
        for key, v in values.items():
            w = make_word(space, key) if not (isinstance(key, tuple) and key and isinstance(key[0], tuple)) else key
            vals[w] = _check_value(v)
        expected = admissible_words(space, depth)
        missing = [w for w in expected if w not in vals]
        if missing:
            raise ValueError(f"missing values for {len(missing)} depth-{depth} words, e.g. {format_word(space, missing[0])!r}")
        if len(vals) != len(expected):
            raise ValueError(f"values contain words that are not admissible depth-{depth} words")
        self.space = space
        self.depth = depth
        self.values = {w: vals[w] for w in expected}

    @classmethod
    def _trusted(cls, space: SymbolicSpace, depth: int, values: dict) -> "CylinderFunction":
        # values already keyed by every admissible depth-``depth`` word, in order
        obj = cls.__new__(cls)
        obj.space, obj.depth, obj.values = space, depth, values
        return obj

    @classmethod
    def constant(cls, space: SymbolicSpace, c) -> "CylinderFunction":
        return cls(space, 0, {tuple(() for _ in space.factors): c})

    @classmethod
    def from_callable(cls, space: SymbolicSpace, depth: int, fn: Callable[[Word], object]) -> "CylinderFunction":
        if depth < 0:
            raise DepthError("depth must be nonnegative")
        return cls._trusted(space, depth, {w: _check_value(fn(w)) for w in _words_cached(space, (depth,) * len(space.factors))})

    @classmethod
    def indicator(cls, space: SymbolicSpace, w: Word) -> "CylinderFunction":
        m = max(word_lengths(w)) if w else 0
        return cls.from_callable(space, m, lambda v: 1 if all(s[: len(p)] == p for s, p in zip(v, w)) else 0)

    def __call__(self, w: Word):
        if any(len(s) < self.depth for s in w):
            raise DepthError(f"word of lengths {word_lengths(w)} is shorter than depth {self.depth}")
        return self.values[truncate(w, self.depth)]

    def refine(self, depth: int) -> "CylinderFunction":
        if depth < self.depth:
            raise DepthError("refinement cannot lower the depth")
        if depth == self.depth:
            return self
        return CylinderFunction.from_callable(self.space, depth, self)

    def reduced(self) -> "CylinderFunction":
        """The same function at the smallest depth that still represents it."""
        f = self
        while f.depth > 0:
            coarse = {}
            ok = True
            for w, v in f.values.items():
                key = truncate(w, f.depth - 1)
                if key in coarse and coarse[key] != v:
                    ok = False
                    break
                coarse[key] = v
            if not ok:
                break
            f = CylinderFunction(f.space, f.depth - 1, coarse)
        return f

    @property
    def is_exact(self) -> bool:
        return all(is_exact(v) for v in self.values.values())

    def items(self):
        return self.values.items()

    def map(self, fn) -> "CylinderFunction":
        return CylinderFunction._trusted(self.space, self.depth, {w: _check_value(fn(v)) for w, v in self.values.items()})

    def _binary(self, other, op) -> "CylinderFunction":
        if isinstance(other, CylinderFunction):
            if other.space != self.space:
                raise ValueError("functions live on different spaces")
            d = max(self.depth, other.depth)
            a, b = self.refine(d), other.refine(d)
            bv = b.values
            return CylinderFunction._trusted(self.space, d, {w: _check_value(op(v, bv[w])) for w, v in a.values.items()})
        return CylinderFunction._trusted(self.space, self.depth, {w: _check_value(op(v, other)) for w, v in self.values.items()})

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    def __radd__(self, other):
        return self._binary(other, lambda a, b: b + a)

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b)

    def __rmul__(self, other):
        return self._binary(other, lambda a, b: b * a)

    def __neg__(self):
        return self.map(lambda v: -v)

    def __truediv__(self, other):
        if isinstance(other, CylinderFunction):
            return self._binary(other, lambda a, b: a / b)
        if isinstance(other, (int, Fraction)) and self.is_exact and not any(
            isinstance(v, ExpSum) for v in self.values.values()
        ):
            return self.map(lambda v: Fraction(v) / other)
        return self.map(lambda v: float(v) / float(other))

    def equals(self, other: "CylinderFunction", tol: float = 1e-12) -> bool:
        """Equality after refining both sides to the larger depth."""
        if other.space != self.space:
            return False
        d = max(self.depth, other.depth)
        a, b = self.refine(d), other.refine(d)
        return all(close(a.values[w], b.values[w], tol) for w in a.values)

    def max(self) -> float:
        return max(float(v) for v in self.values.values())

    def min(self) -> float:
        return min(float(v) for v in self.values.values())

    def to_float(self) -> "CylinderFunction":
        return self.map(float)

    def __repr__(self):
        return f"CylinderFunction(depth={self.depth}, n_words={len(self.values)})"


def compose_with_map(f: CylinderFunction, tmap) -> CylinderFunction:
    """``f o tmap`` as a cylinder function of depth ``depth(f) + max consumption``."""
    space = f.space
    depth = f.depth + max(consumption(space, tmap))
    form = _normal_form(len(space.factors), tmap)
    d, vals = f.depth, f.values
    # image words have every factor of length >= depth(f)
    return CylinderFunction.from_callable(space, depth, lambda w: vals[truncate(_apply_form(form, w), d)])


def holder_constant(f: CylinderFunction, beta: float) -> float:
    """Lipschitz constant of ``f`` for the word metric with parameter ``beta``."""
    return (f.max() - f.min()) * beta ** (-f.depth)


# --------------------------------------------------------------------------
# cylinder measures


class MarkovRule:
    """Markov cylinder masses ``init[w0] * prod P[w_j][w_{j+1}]`` on a single-factor space."""

    def __init__(self, initial: Sequence, transition: Sequence[Sequence]):
        self.initial = list(initial)
        self.transition = [list(r) for r in transition]

    def __call__(self, w: Word):
        (s,) = w
        if not s:
            return sum(self.initial, 0 * self.initial[0]) if self.initial else 0
        m = self.initial[s[0]]
        for a, b in zip(s, s[1:]):
            m = m * self.transition[a][b]
        return m


class CylinderMeasure:
    """Nonnegative masses on cylinders, stored at one or more depths.

    ``depth`` is the largest stored word length.  Masses of shorter cylinders
    are obtained by summing deeper stored masses when they are not stored.
    """

    __slots__ = ("space", "masses", "depth")

    def __init__(self, space: SymbolicSpace, masses: Mapping):
        stored = {}
        for key, v in masses.items():
            w = make_word(space, key) if not (isinstance(key, tuple) and key and isinstance(key[0], tuple)) else key
            if len(set(word_lengths(w))) > 1:
                raise ValueError("measure words must have uniform length")
            v = _check_value(v)
            if float(v) < 0:
                raise ValueError(f"negative mass at {format_word(space, w)!r}")
            stored[w] = v
        if not stored:
            raise ValueError("a measure needs at least one mass")
        self.space = space
        self.masses = stored
        self.depth = max(max(word_lengths(w), default=0) for w in stored)

    @classmethod
    def from_function(cls, space: SymbolicSpace, depth: int, fn: Callable[[Word], object]) -> "CylinderMeasure":
        return cls(space, {w: fn(w) for w in admissible_words(space, depth)})

    @classmethod
    def uniform(cls, space: SymbolicSpace, depth: int) -> "CylinderMeasure":
        words = admissible_words(space, depth)
        return cls(space, {w: Fraction(1, len(words)) for w in words})

    def mass(self, w: Word):
        if w in self.masses:
            return self.masses[w]
        lengths = word_lengths(w)
        if len(set(lengths)) > 1:
            m = max(lengths)
            return sum((self.mass(v) for v in extensions(self.space, w, m)), 0)
        m = lengths[0] if lengths else 0
        if m >= self.depth:
            raise DepthError(f"mass of a depth-{m} cylinder is not determined by a depth-{self.depth} measure")
        children = extensions(self.space, w, m + 1)
        return sum((self.mass(c) for c in children), 0)

    def top(self) -> dict[Word, object]:
        return {w: self.mass(w) for w in admissible_words(self.space, self.depth)}

    def marginal(self, m: int) -> "CylinderMeasure":
        if m > self.depth:
            raise DepthError("cannot marginalize to a larger depth")
        return CylinderMeasure(self.space, {w: self.mass(w) for w in admissible_words(self.space, m)})

    def total(self):
        return self.mass(tuple(() for _ in self.space.factors))

    def vector(self, words: Sequence[Word]) -> np.ndarray:
        return np.array([float(self.mass(w)) for w in words])

    def integrate(self, f: CylinderFunction):
        d = max(f.depth, self.depth)
        if d > self.depth:
            raise DepthError(f"function depth {f.depth} exceeds measure depth {self.depth}")
        return sum((f(w) * self.mass(w) for w in admissible_words(self.space, d)), 0)

    def scaled(self, c) -> "CylinderMeasure":
        return CylinderMeasure(self.space, {w: v * c for w, v in self.top().items()})

    def l1_distance(self, other: "CylinderMeasure") -> float:
        d = min(self.depth, other.depth)
        return math.fsum(
            abs(float(self.mass(w)) - float(other.mass(w))) for w in admissible_words(self.space, d)
        )

    def __repr__(self):
        return f"CylinderMeasure(depth={self.depth}, n_words={len(self.masses)})"


def measure_consistency_check(mu: CylinderMeasure, tol: float = 1e-12) -> bool:
    """Kolmogorov consistency of every stored mass against its one-step children."""
    for w, v in mu.masses.items():
        m = word_lengths(w)[0] if w else 0
        if m >= mu.depth:
            continue
        child_sum = 0
        for c in extensions(mu.space, w, m + 1):
            try:
                child_sum = child_sum + mu.mass(c)
            except DepthError:
                pass
        if not close(v, child_sum, tol):
            return False
    return True


def measure_refine(mu: CylinderMeasure, depth: int, rule: Callable[[Word], object] | None = None) -> CylinderMeasure:
    """Extend ``mu`` to ``depth`` using an explicit generating rule.

    The rule must reproduce the masses already stored in ``mu``.
    """
    if rule is None:
        raise RefinementError("refinement needs an explicit generating rule")
    if depth < mu.depth:
        raise DepthError("refinement cannot lower the depth")
    for w, v in mu.masses.items():
        if not close(v, rule(w), 1e-12):
            raise RefinementError(f"rule disagrees with the stored mass at {format_word(mu.space, w)!r}")
    return CylinderMeasure.from_function(mu.space, depth, rule)
