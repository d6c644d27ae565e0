"""Ruelle transfer operators, their duals, composition, and the RPF solver.

``(L f)(x) = sum over T(y) = x of exp(phi(y)) f(y)``.  On cylinder data the
sum runs over the inverse branches of a cylinder word, so everything is
computed exactly when potentials and functions are rational (weights become
``ExpSum`` values) and in floating point otherwise.

Matrix convention: ``transfer_matrix`` returns ``M`` with rows indexed by the
output word ``w`` and columns by the input word ``u``, so that
``(L f)|_m = M @ f|_m``.  The dual acts by the transpose.  For the golden-mean
shift with ``phi = 0`` this gives ``[[1, 1], [1, 0]]``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConvergenceError, DepthError, InvalidSpaceError, NotPrimitiveError
from .exact import ExpSum, as_exact, exp_weight, is_exact
from .symspace import (
    CylinderFunction,
    CylinderMeasure,
    admissible_words,
    branch_preimages,
    certificates,
    compose,
    compose_with_map,
    consumption,
    lookahead,
    truncate,
    validate_map,
)

log = logging.getLogger(__name__)

__all__ = [
    "RuelleTriple",
    "RPFSolution",
    "TransferMatrix",
    "apply_ruelle",
    "compose_triples",
    "transfer_matrix",
    "dual_apply",
    "rpf_solve",
    "primitivity_certificate",
    "operators_equal",
]


@dataclass(frozen=True)
class RuelleTriple:
    space: object
    map: object
    potential: CylinderFunction

    def __post_init__(self):
        validate_map(self.space, self.map)
        if self.potential.space != self.space:
            raise InvalidSpaceError("potential lives on a different space")

    def scaled(self, c) -> "RuelleTriple":
        return RuelleTriple(self.space, self.map, self.potential * c)


@dataclass
class TransferMatrix:
    words: list
    entries: list  # entries[row w][col u]

    def array(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.entries], dtype=float)

    @property
    def is_exact(self) -> bool:
        return all(is_exact(x) for row in self.entries for x in row)


@dataclass
class RPFSolution:
    eigenvalue: float
    measure: CylinderMeasure
    eigenfunction: CylinderFunction
    residuals: dict
    iterations: int
    depth: int
    uniqueness: str = "unknown"
    primitivity_certificate: int | None = None


def _output_depth(triple: RuelleTriple, depth: int) -> int:
    cons = consumption(triple.space, triple.map)
    la = lookahead(triple.space, triple.map)
    return max(depth - min(cons), max(la), 0)


def _min_depth(triple: RuelleTriple) -> int:
    return _output_depth(triple, triple.potential.depth)


def apply_ruelle(triple: RuelleTriple, f: CylinderFunction) -> CylinderFunction:
    """``L f`` at depth ``max(max(depth phi, depth f) - min consumption, lookahead, 0)``."""
    phi = triple.potential
    m = _output_depth(triple, max(phi.depth, f.depth))
    exact = phi.is_exact and f.is_exact
    out = {}
    for w in admissible_words(triple.space, m):
        acc = 0
        for v in branch_preimages(triple.space, triple.map, w):
            acc = acc + exp_weight(phi(v), exact) * f(v)
        out[w] = as_exact(acc)
    return CylinderFunction(triple.space, m, out)


def compose_triples(first: RuelleTriple, second: RuelleTriple) -> RuelleTriple:
    """``(S, phi), (T, psi) -> (S o T, phi o T + psi)``; then ``L_first L_second = L_result``."""
    if first.space != second.space:
        raise InvalidSpaceError("triples live on different spaces")
    pot = compose_with_map(first.potential, second.map) + second.potential
    return RuelleTriple(first.space, compose(first.map, second.map), pot)


def transfer_matrix(triple: RuelleTriple, m: int) -> TransferMatrix:
    need = max(_min_depth(triple), 1)
    if m < need:
        raise DepthError(f"transfer matrix needs depth >= {need}, got {m}")
    words = admissible_words(triple.space, m)
    index = {w: j for j, w in enumerate(words)}
    exact = triple.potential.is_exact
    rows = []
    for w in words:
        row = [0] * len(words)
        for v in branch_preimages(triple.space, triple.map, w):
            j = index[truncate(v, m)]
            row[j] = row[j] + exp_weight(triple.potential(v), exact)
        rows.append([as_exact(x) for x in row])
    return TransferMatrix(words, rows)


def dual_apply(triple: RuelleTriple, mu: CylinderMeasure) -> CylinderMeasure:
    """``(L* mu)(Z[u]) = sum_w mu(Z[w]) M[w][u]`` at the depth of ``mu``."""
    tm = transfer_matrix(triple, mu.depth)
    masses = [mu.mass(w) for w in tm.words]
    out = {}
    for j, u in enumerate(tm.words):
        acc = 0
        for i, row in enumerate(tm.entries):
            if row[j] != 0 and masses[i] != 0:
                acc = acc + masses[i] * row[j]
        out[u] = as_exact(acc)
    return CylinderMeasure(triple.space, out)


def primitivity_certificate(mat: np.ndarray, bound: int | None = None) -> int | None:
    """Least ``p`` with ``mat^p > 0`` entrywise, searched up to the Wielandt bound."""
    n = mat.shape[0]
    if bound is None:
        bound = n * n - 2 * n + 2
    a = (mat > 0).astype(np.int64)
    p = a.copy()
    for k in range(1, bound + 1):
        if p.all():
            return k
        p = ((p @ a) > 0).astype(np.int64)
    return None


def rpf_solve(
    triple: RuelleTriple,
    depth: int,
    tol: float = 1e-12,
    max_iter: int = 100_000,
    rng: np.random.Generator | None = None,
) -> RPFSolution:
    """Power iteration for the Perron data of the depth-``depth`` transfer matrix.

    ``h`` is scaled to max 1, ``mu`` to mass 1 and ``lambda`` is the mass of
    ``M^T mu``.  Residuals are reported relative to ``lambda``.  With ``rng``
    the start vectors are random positive vectors instead of constants.
    """
    tm = transfer_matrix(triple, depth)
    mat = tm.array()
    cert = primitivity_certificate(mat)
    if cert is None:
        raise NotPrimitiveError(f"depth-{depth} transfer matrix has no positive power up to the Wielandt bound")
    n = mat.shape[0]
    if rng is None:
        h = np.ones(n)
        mu = np.full(n, 1.0 / n)
    else:
        h = rng.uniform(0.1, 1.0, n)
        mu = rng.uniform(0.1, 1.0, n)
        mu /= mu.sum()
    h /= h.max()
    lam = float((mat.T @ mu).sum())
    res_h = res_mu = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        mh = mat @ h
        h = mh / mh.max()
        nu = mat.T @ mu
        lam = float(nu.sum())
        mu = nu / lam
        res_h = float(np.max(np.abs(mat @ h - lam * h))) / lam
        res_mu = float(np.sum(np.abs(mat.T @ mu - lam * mu))) / lam
        if res_h <= tol and res_mu <= tol:
            break
    else:
        raise ConvergenceError(f"no convergence after {max_iter} iterations (residuals {res_h:.3g}, {res_mu:.3g})")
    log.debug("rpf_solve converged in %d iterations, lambda=%r", it, lam)
    cert_info = certificates(triple.space, triple.map)
    unique = "certified" if cert_info.positively_expansive == "yes" and cert_info.exact_certificate is not None else "unknown"
    words = tm.words
    return RPFSolution(
        eigenvalue=lam,
        measure=CylinderMeasure(triple.space, {w: max(float(x), 0.0) for w, x in zip(words, mu)}),
        eigenfunction=CylinderFunction(triple.space, depth, {w: float(x) for w, x in zip(words, h)}),
        residuals={"h": res_h, "mu": res_mu},
        iterations=it,
        depth=depth,
        uniqueness=unique,
        primitivity_certificate=cert,
    )


def operators_equal(a: RuelleTriple, b: RuelleTriple | Sequence[RuelleTriple], depth: int, tol: float = 1e-12):
    """Compare ``L_a`` with ``L_b`` (or a product ``L_b1 L_b2 ...``) on every depth-``depth`` indicator.

    Returns None when the operators agree, else the first word whose
    indicator separates them.
    """
    seq = list(b) if isinstance(b, (list, tuple)) else [b]
    for w in admissible_words(a.space, depth):
        f = CylinderFunction.indicator(a.space, w)
        lhs = apply_ruelle(a, f)
        rhs = f
        for t in reversed(seq):
            rhs = apply_ruelle(t, rhs)
        if not lhs.equals(rhs, tol):
            return w
    return None
