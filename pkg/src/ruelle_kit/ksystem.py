"""k-Ruelle dynamical systems: cocycles, joint eigendata, quasi-invariance and KMS data."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import (
    BracketError,
    CertificateError,
    DegenerateSpaceError,
    InvalidMapError,
    InvalidSpaceError,
    RankMismatchError,
    VerificationError,
)
from .nkmod import NkModuleAction, NkVector, check_module_cocycle_condition, evaluate_semigroup_cocycle
from .ruelle import RPFSolution, RuelleTriple, compose_triples, dual_apply, operators_equal, rpf_solve
from .symspace import (
    CylinderFunction,
    CylinderMeasure,
    certificates,
    consumption,
    image_word,
    maps_commute,
    validate_map,
    word_lengths,
)

log = logging.getLogger(__name__)

__all__ = [
    "KRuelleSystem",
    "GroupoidElement",
    "JointRPFSolution",
    "BetaSearchResult",
    "check_cocycle_condition",
    "groupoid_cocycle_eval",
    "groupoid_multiply",
    "operators_commute",
    "commutation_witness",
    "psi_triple",
    "joint_rpf_solve",
    "normalize_system",
    "normalized_potential_system",
    "quasi_invariance_residuals",
    "quasi_invariance_check",
    "kms_functional",
    "beta_search",
    "common_roots",
]


class KRuelleSystem:
    """A space with k commuting catalog maps and k cylinder potentials.

    Commutation of the maps is enforced here.  The cocycle condition on the
    potentials is not, so that violating systems can be studied; use
    ``check_cocycle_condition``.
    """

    def __init__(self, space, maps: Sequence, potentials: Sequence[CylinderFunction], check_commute: bool = True):
        maps, potentials = tuple(maps), tuple(potentials)
        if len(maps) != len(potentials):
            raise RankMismatchError(f"{len(maps)} maps but {len(potentials)} potentials")
        if not maps:
            raise RankMismatchError("a system needs rank at least 1")
        for m in maps:
            validate_map(space, m)
        for p in potentials:
            if p.space != space:
                raise InvalidSpaceError("potential lives on a different space")
        if check_commute and not maps_commute(space, maps):
            raise InvalidMapError("maps do not commute")
        self.space = space
        self.maps = maps
        self.potentials = potentials

    @property
    def rank(self) -> int:
        return len(self.maps)

    @property
    def action(self) -> NkModuleAction:
        return NkModuleAction(self.space, self.maps)

    def triple(self, i: int) -> RuelleTriple:
        return RuelleTriple(self.space, self.maps[i], self.potentials[i])

    def with_potentials(self, potentials: Sequence[CylinderFunction]) -> "KRuelleSystem":
        return KRuelleSystem(self.space, self.maps, potentials, check_commute=False)

    def scaled(self, c) -> "KRuelleSystem":
        return self.with_potentials([p * c for p in self.potentials])

    def cocycle(self, n) -> CylinderFunction:
        return evaluate_semigroup_cocycle(self.action, self.potentials, n, check=False)


def check_cocycle_condition(system: KRuelleSystem, tol: float = 1e-12) -> bool:
    """``phi_i + phi_j o sigma_i == phi_j + phi_i o sigma_j`` for all ``i < j``."""
    return check_module_cocycle_condition(system.action, system.potentials, tol)


# --------------------------------------------------------------------------
# groupoid


@dataclass(frozen=True)
class GroupoidElement:
    """The bisection ``{(x, p - q, y) : x in Z[u], y in Z[v], sigma^p x = sigma^q y}``."""

    u: tuple
    p: NkVector
    q: NkVector
    v: tuple

    @property
    def lag(self) -> tuple[int, ...]:
        return self.p.diff(self.q)

    def is_valid(self, system: KRuelleSystem) -> bool:
        a = system.action
        try:
            return image_word(system.space, a.map_for(self.p), self.u) == image_word(
                system.space, a.map_for(self.q), self.v
            )
        except ValueError:
            return False

    def is_unit(self) -> bool:
        return self.p == self.q and self.u == self.v


def groupoid_cocycle_eval(system: KRuelleSystem, g: GroupoidElement):
    """``c_phi(p)(u) - c_phi(q)(v)``; constant on the bisection when the words are deep enough."""
    if not g.is_valid(system):
        raise ValueError("groupoid element fails sigma^p(u) == sigma^q(v)")
    return system.cocycle(g.p)(g.u) - system.cocycle(g.q)(g.v)


def groupoid_multiply(g: GroupoidElement, h: GroupoidElement) -> GroupoidElement:
    """``(x, p - q, y)(y, p' - q', z) = (x, (p + p') - (q + q'), z)`` on matching frames."""
    if g.v != h.u:
        raise ValueError("elements are not composable on the same word frame")
    return GroupoidElement(g.u, g.p + h.p, g.q + h.q, h.v)


# --------------------------------------------------------------------------
# operators


def _default_check_depth(system: KRuelleSystem) -> int:
    cons = max(max(consumption(system.space, m)) for m in system.maps)
    return max(3, max(p.depth for p in system.potentials) + cons + 1)


def commutation_witness(system: KRuelleSystem, depth: int | None = None):
    """``(i, j, word)`` for the first indicator separating ``L_i L_j`` and ``L_j L_i``, else None."""
    depth = depth or _default_check_depth(system)
    for i in range(system.rank):
        for j in range(i + 1, system.rank):
            ti, tj = system.triple(i), system.triple(j)
            w = operators_equal(compose_triples(ti, tj), [tj, ti], depth)
            if w is not None:
                return (i, j, w)
    return None


def operators_commute(system: KRuelleSystem, depth: int | None = None) -> bool:
    return commutation_witness(system, depth) is None


def psi_triple(system: KRuelleSystem, n) -> RuelleTriple:
    """The triple ``(sigma^n, c_phi(n))`` whose operator is ``Psi(n)``."""
    return RuelleTriple(system.space, system.action.map_for(n), system.cocycle(n))


# --------------------------------------------------------------------------
# joint eigendata


@dataclass
class JointRPFSolution:
    eigenvalues: tuple[float, ...]
    measure: CylinderMeasure
    residuals: tuple[float, ...]
    base: RPFSolution
    depth: int

    @property
    def uniqueness(self) -> str:
        return self.base.uniqueness


def _product_triple(system: KRuelleSystem) -> RuelleTriple:
    t = system.triple(0)
    for i in range(1, system.rank):
        t = compose_triples(t, system.triple(i))
    return t


def joint_rpf_solve(
    system: KRuelleSystem, depth: int, tol: float = 1e-10, max_iter: int = 100_000, rng=None
) -> JointRPFSolution:
    """Common eigenmeasure from the product operator ``L_1 ... L_k``, then ``lambda_i = (L_i* mu)(X)``."""
    prod = _product_triple(system)
    cert = certificates(system.space, prod.map)
    if cert.positively_expansive != "yes" or cert.exact_certificate is None:
        raise CertificateError("sigma^(1,...,1) lacks expansivity/exactness certificates")
    base = rpf_solve(prod, depth, tol=min(tol, 1e-12), max_iter=max_iter, rng=rng)
    mu = base.measure
    lams, res = [], []
    for i in range(system.rank):
        nu = dual_apply(system.triple(i), mu)
        lam = float(nu.total())
        r = nu.l1_distance(mu.scaled(lam)) / lam
        lams.append(lam)
        res.append(r)
        if r > tol:
            raise VerificationError(f"coordinate {i}: ||L* mu - lambda mu||_1 / lambda = {r:.3g} > {tol:.3g}")
    return JointRPFSolution(tuple(lams), mu, tuple(res), base, depth)


def normalize_system(system: KRuelleSystem, solution: JointRPFSolution, beta: float = 1.0) -> KRuelleSystem:
    """Dynamics potentials ``varsigma_i = (ln lambda_i - phi_i) / beta``."""
    if beta == 0:
        raise ValueError("beta must be nonzero")
    pots = [(math.log(lam) - p) * (1.0 / beta) for lam, p in zip(solution.eigenvalues, system.potentials)]
    return system.with_potentials(pots)


def normalized_potential_system(system: KRuelleSystem, solution: JointRPFSolution) -> KRuelleSystem:
    """``(sigma, phi - ln lambda)``, i.e. ``-beta varsigma``: every eigenvalue becomes 1."""
    return system.with_potentials([p - math.log(lam) for lam, p in zip(solution.eigenvalues, system.potentials)])


def quasi_invariance_residuals(system: KRuelleSystem, mu: CylinderMeasure, beta: float | None = None) -> list[float]:
    sys_ = system if beta is None else system.scaled(-beta)
    return [dual_apply(sys_.triple(i), mu).l1_distance(mu) for i in range(sys_.rank)]


def quasi_invariance_check(system: KRuelleSystem, mu: CylinderMeasure, tol: float = 1e-10, beta: float | None = None) -> bool:
    """``L_i* mu == mu`` for every coordinate.

    With ``beta`` the system's potentials are read as dynamics data
    ``varsigma`` and the operators use ``-beta varsigma``.
    """
    return all(r <= tol for r in quasi_invariance_residuals(system, mu, beta))


def kms_functional(mu: CylinderMeasure, terms: Sequence[tuple[object, GroupoidElement]]):
    """``omega(f) = sum of coef * mu(Z[u] & Z[v])`` over diagonal terms (``p == q``).

    Off-diagonal terms meet the unit space only in periodic points and
    contribute 0; that is refused on degenerate spaces, where such sets can
    carry mass.
    """
    total = 0
    for coef, g in terms:
        if g.p != g.q:
            if all(f.size == 1 for f in mu.space.factors):
                raise DegenerateSpaceError("off-diagonal evaluation refused on a space with one point")
            continue
        inter = _intersect(g.u, g.v)
        if inter is None:
            continue
        total = total + coef * mu.mass(inter)
    return total


def _intersect(u, v):
    out = []
    for s, t in zip(u, v):
        short, long_ = (s, t) if len(s) <= len(t) else (t, s)
        if long_[: len(short)] != short:
            return None
        out.append(long_)
    return tuple(out)


# --------------------------------------------------------------------------
# inverse temperature search


@dataclass
class BetaSearchResult:
    betas: list[float]
    coordinate_roots: list  # per coordinate: list of roots or "unconstrained"


def _log_eigenvalues(system: KRuelleSystem, beta: float, depth: int) -> tuple[float, ...]:
    """``ln lambda_i`` of the system with potentials ``-beta phi_i``, shifted to avoid overflow."""
    pots, shifts = [], []
    for p in system.potentials:
        q = p * (-beta)
        c = q.max()
        pots.append(q - c)
        shifts.append(c)
    sol = joint_rpf_solve(system.with_potentials(pots), depth)
    return tuple(math.log(lam) + c for lam, c in zip(sol.eigenvalues, shifts))


def common_roots(
    log_eigs,
    rank: int,
    beta_interval: tuple[float, float] = (-50.0, 50.0),
    tol: float = 1e-10,
    grid: int = 101,
    match_tol: float = 1e-8,
    jobs: int = 1,
) -> BetaSearchResult:
    """Common zeros in ``beta`` of the coordinates of ``log_eigs(beta)`` (a length-``rank`` tuple).

    Each coordinate's roots are bracketed on a grid and refined with Brent's
    method; the coordinate root sets are intersected within ``match_tol``.
    A coordinate that does not depend on ``beta`` is unconstrained if it is
    zero and rootless otherwise.
    """
    lo, hi = map(float, beta_interval)
    if not lo < hi:
        raise ValueError("beta interval must be nonempty")
    xs = np.linspace(lo, hi, grid)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            vals = list(ex.map(lambda b: log_eigs(float(b)), xs))
    else:
        vals = [log_eigs(float(b)) for b in xs]
    vals = np.array(vals, dtype=float).reshape(grid, rank)

    per: list = []
    for i in range(rank):
        g = vals[:, i]
        if np.ptp(g) < 1e-12 * max(1.0, float(np.max(np.abs(g)))):
            per.append("unconstrained" if abs(g[0]) < tol else [])
            continue
        f = lambda b, i=i: log_eigs(b)[i]
        roots: list[float] = []
        for j in range(grid - 1):
            a, b = g[j], g[j + 1]
            if a == 0.0:
                roots.append(float(xs[j]))
            elif a * b < 0:
                roots.append(float(brentq(f, xs[j], xs[j + 1], xtol=tol, rtol=4 * np.finfo(float).eps)))
        if g[-1] == 0.0:
            roots.append(float(xs[-1]))
        per.append(roots)

    constrained = [r for r in per if r != "unconstrained"]
    if not constrained:
        raise BracketError("no coordinate constrains beta")
    if all(len(r) == 0 for r in constrained):
        raise BracketError(f"no coordinate has a root in [{lo}, {hi}]")
    betas = [
        b for b in constrained[0] if all(any(abs(b - c) <= match_tol for c in other) for other in constrained[1:])
    ]
    log.debug("roots per coordinate: %s", per)
    return BetaSearchResult(betas, per)


def beta_search(
    system: KRuelleSystem,
    beta_interval: tuple[float, float] = (-50.0, 50.0),
    tol: float = 1e-10,
    depth: int | None = None,
    grid: int = 101,
    match_tol: float = 1e-8,
    jobs: int = 1,
) -> BetaSearchResult:
    """All ``beta`` in the interval with ``lambda_i(-beta phi) = 1`` for every ``i``."""
    if depth is None:
        prod_cons = sum(max(consumption(system.space, m)) for m in system.maps)
        depth = max(1, max(p.depth for p in system.potentials) + prod_cons)
    return common_roots(
        lambda b: _log_eigenvalues(system, b, depth), system.rank, beta_interval, tol, grid, match_tol, jobs
    )
