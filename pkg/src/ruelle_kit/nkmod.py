"""N^k-modules of cylinder functions and their semigroup 1-cocycles.

The carrier is always the additive group of cylinder functions on a space,
and generator ``i`` acts by ``f -> f o sigma_i``.  ``n . f`` denotes
``f o sigma^n``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import CocycleConditionError, DepthError, RankMismatchError
from .symspace import (
    CylinderFunction,
    admissible_words,
    compose,
    compose_with_map,
    consumption,
    image_word,
    maps_commute,
    power,
    truncate,
)

__all__ = [
    "NkVector",
    "NkModuleAction",
    "check_module_cocycle_condition",
    "evaluate_semigroup_cocycle",
    "cocycle_along_path",
    "SemigroupCocycle",
    "verify_cocycle_identity",
    "coboundary_tuple",
    "is_coboundary",
]


@dataclass(frozen=True, order=False)
class NkVector:
    coords: tuple[int, ...]

    def __post_init__(self):
        c = tuple(int(x) for x in self.coords)
        if any(x < 0 for x in c):
            raise ValueError(f"N^k vectors have nonnegative coordinates, got {c}")
        object.__setattr__(self, "coords", c)

    @classmethod
    def zero(cls, k: int) -> "NkVector":
        return cls((0,) * k)

    @classmethod
    def unit(cls, k: int, i: int) -> "NkVector":
        c = [0] * k
        c[i] = 1
        return cls(tuple(c))

    @classmethod
    def ones(cls, k: int) -> "NkVector":
        return cls((1,) * k)

    @staticmethod
    def upto(k: int, total: int) -> Iterator["NkVector"]:
        """All vectors of rank ``k`` with ``|n| <= total``."""
        for c in itertools.product(range(total + 1), repeat=k):
            if sum(c) <= total:
                yield NkVector(c)

    @property
    def k(self) -> int:
        return len(self.coords)

    def __len__(self):
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def _same_rank(self, other: "NkVector"):
        if len(other.coords) != len(self.coords):
            raise RankMismatchError(f"rank {len(self.coords)} vs {len(other.coords)}")

    def __add__(self, other: "NkVector") -> "NkVector":
        self._same_rank(other)
        return NkVector(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "NkVector") -> "NkVector":
        self._same_rank(other)
        return NkVector(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def diff(self, other: "NkVector") -> tuple[int, ...]:
        """The Z^k difference ``self - other``."""
        self._same_rank(other)
        return tuple(a - b for a, b in zip(self.coords, other.coords))

    def join(self, other: "NkVector") -> "NkVector":
        self._same_rank(other)
        return NkVector(tuple(max(a, b) for a, b in zip(self.coords, other.coords)))

    def meet(self, other: "NkVector") -> "NkVector":
        self._same_rank(other)
        return NkVector(tuple(min(a, b) for a, b in zip(self.coords, other.coords)))

    def __le__(self, other: "NkVector") -> bool:
        self._same_rank(other)
        return all(a <= b for a, b in zip(self.coords, other.coords))

    def __ge__(self, other: "NkVector") -> bool:
        return other <= self

    def norm(self) -> int:
        return sum(self.coords)

    def __repr__(self):
        return f"NkVector{self.coords}"


def _vec(n, k: int) -> NkVector:
    v = n if isinstance(n, NkVector) else NkVector(tuple(n))
    if v.k != k:
        raise RankMismatchError(f"vector of rank {v.k} used with an action of rank {k}")
    return v


class NkModuleAction:
    """The action ``n . f = f o sigma^n`` of commuting catalog maps on cylinder functions."""

    def __init__(self, space, maps: Sequence):
        self.space = space
        self.maps = tuple(maps)

    @property
    def rank(self) -> int:
        return len(self.maps)

    def map_for(self, n) -> object:
        """The catalog map ``sigma^n = sigma_1^{n_1} o ... o sigma_k^{n_k}``."""
        n = _vec(n, self.rank)
        return compose(*(power(m, c) for m, c in zip(self.maps, n.coords)))

    def generator(self, i: int, f: CylinderFunction) -> CylinderFunction:
        return compose_with_map(f, self.maps[i])

    def act(self, n, f: CylinderFunction) -> CylinderFunction:
        n = _vec(n, self.rank)
        if n.norm() == 0:
            return f
        return compose_with_map(f, self.map_for(n))

    def generators_commute(self, depth: int | None = None) -> bool:
        return maps_commute(self.space, self.maps, depth)


def _check_rank(action: NkModuleAction, entries: Sequence) -> None:
    if len(entries) != action.rank:
        raise RankMismatchError(f"tuple has {len(entries)} entries, action has rank {action.rank}")


def check_module_cocycle_condition(action: NkModuleAction, entries: Sequence[CylinderFunction], tol: float = 1e-12) -> bool:
    """``a_i + e_i a_j == a_j + e_j a_i`` for every pair ``i < j``."""
    _check_rank(action, entries)
    for i, j in itertools.combinations(range(action.rank), 2):
        lhs = entries[i] + action.generator(i, entries[j])
        rhs = entries[j] + action.generator(j, entries[i])
        if not lhs.equals(rhs, tol):
            return False
    return True


def evaluate_semigroup_cocycle(
    action: NkModuleAction, entries: Sequence[CylinderFunction], n, check: bool = True
) -> CylinderFunction:
    """``c_a(n) = sum_i (n_1 e_1 + ... + n_{i-1} e_{i-1}) . sum_{j < n_i} (j e_i) . a_i``."""
    _check_rank(action, entries)
    n = _vec(n, action.rank)
    if check and not check_module_cocycle_condition(action, entries):
        raise CocycleConditionError("tuple fails the module cocycle condition")
    total = CylinderFunction.constant(action.space, 0)
    prefix = [0] * action.rank
    for i in range(action.rank):
        inner = CylinderFunction.constant(action.space, 0)
        term = entries[i]
        for _ in range(n[i]):
            inner = inner + term
            term = action.generator(i, term)
        if n[i]:
            total = total + action.act(NkVector(tuple(prefix)), inner)
        prefix[i] = n[i]
    return total


def cocycle_along_path(action: NkModuleAction, entries: Sequence[CylinderFunction], steps: Sequence[int]) -> CylinderFunction:
    """Rebuild ``f(n)`` from ``f(0) = 0`` and ``f(n + e_i) = f(n) + n . a_i`` along ``steps``.

    Any cocycle with ``f(e_i) = a_i`` must satisfy this recursion, so agreement
    with ``evaluate_semigroup_cocycle`` for every ordering of the steps is the
    uniqueness statement.
    """
    _check_rank(action, entries)
    f = CylinderFunction.constant(action.space, 0)
    pos = [0] * action.rank
    for i in steps:
        f = f + action.act(NkVector(tuple(pos)), entries[i])
        pos[i] += 1
    return f


class SemigroupCocycle:
    """Memoized ``n -> c_a(n)`` for repeated evaluation over many ``n``.

    Values are built by ``c(n + e_i) = c(n) + n . a_i`` stepping along the
    lowest nonzero coordinate, which agrees with the closed formula once the
    cocycle condition holds.
    """

    def __init__(self, action: NkModuleAction, entries: Sequence[CylinderFunction], check: bool = True):
        _check_rank(action, entries)
        if check and not check_module_cocycle_condition(action, entries):
            raise CocycleConditionError("tuple fails the module cocycle condition")
        self.action = action
        self.entries = tuple(entries)
        self._values: dict[tuple[int, ...], CylinderFunction] = {
            (0,) * action.rank: CylinderFunction.constant(action.space, 0)
        }

    def __call__(self, n) -> CylinderFunction:
        n = _vec(n, self.action.rank).coords
        hit = self._values.get(n)
        if hit is not None:
            return hit
        i = next(j for j, c in enumerate(n) if c)
        prev = n[:i] + (n[i] - 1,) + n[i + 1 :]
        val = self(prev) + self.action.act(prev, self.entries[i])
        self._values[n] = val
        return val


def verify_cocycle_identity(
    action: NkModuleAction, entries: Sequence[CylinderFunction] | SemigroupCocycle, m, n, tol: float = 1e-12
) -> bool:
    """``c(m + n) == c(m) + m . c(n)``.

    Pass a ``SemigroupCocycle`` as ``entries`` to reuse values across calls.
    """
    m, n = _vec(m, action.rank), _vec(n, action.rank)
    if isinstance(entries, SemigroupCocycle):
        c = entries
    else:
        c = lambda v: evaluate_semigroup_cocycle(action, entries, v, check=False)  # noqa: E731
    lhs = c(m + n)
    rhs = c(m) + action.act(m, c(n))
    return lhs.equals(rhs, tol)


def coboundary_tuple(action: NkModuleAction, alpha: CylinderFunction) -> list[CylinderFunction]:
    return [alpha - action.generator(i, alpha) for i in range(action.rank)]


def is_coboundary(
    action: NkModuleAction, entries: Sequence[CylinderFunction], search_depth: int, tol: float = 1e-10
) -> CylinderFunction | None:
    """Look for ``alpha`` of depth ``search_depth`` with ``a_i = alpha - alpha o sigma_i``.

    Least squares over the cylinder values of ``alpha``; returns it when the
    residual is below ``tol`` and None otherwise.  A None answer only rules out
    coboundaries of depth at most ``search_depth``.
    """
    _check_rank(action, entries)
    need = max((a.depth for a in entries), default=0)
    if search_depth < need:
        raise DepthError(f"search depth {search_depth} is below the entry depth {need}")
    space = action.space
    unknowns = admissible_words(space, search_depth)
    index = {w: j for j, w in enumerate(unknowns)}
    rows, rhs = [], []
    for i, a in enumerate(entries):
        cons = consumption(space, action.maps[i])
        depth = max(search_depth + max(cons), a.depth)
        for w in admissible_words(space, depth):
            row = np.zeros(len(unknowns))
            row[index[truncate(w, search_depth)]] += 1.0
            row[index[truncate(image_word(space, action.maps[i], w), search_depth)]] -= 1.0
            rows.append(row)
            rhs.append(float(a(w)))
    if not rows:
        return CylinderFunction.constant(space, 0)
    mat, b = np.array(rows), np.array(rhs)
    sol, *_ = np.linalg.lstsq(mat, b, rcond=None)
    residual = float(np.max(np.abs(mat @ sol - b)))
    if residual >= tol:
        return None
    sol = np.where(np.abs(sol) < 1e-14, 0.0, sol)
    return CylinderFunction(space, search_depth, {w: float(sol[index[w]]) for w in unknowns})
