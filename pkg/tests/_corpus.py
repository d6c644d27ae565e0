"""Random systems for the property and acceptance suites.

Every generator documents why its label (passing or violating the module
cocycle condition) holds, so the labels do not depend on the library.
"""

from __future__ import annotations

import random
from fractions import Fraction

from ruelle_kit.catalog import cantor_system
from ruelle_kit.ksystem import KRuelleSystem
from ruelle_kit.nkmod import NkModuleAction, coboundary_tuple
from ruelle_kit.symspace import SFT, CylinderFunction, FullShift, Shift, SymbolBijection, compose

X2 = FullShift(2)
GOLDEN = SFT(((1, 1), (1, 0)))
FLIP = SymbolBijection((1, 0))


def rat(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-9, 9), rng.randint(1, 9))


def random_function(rng, space, depth) -> CylinderFunction:
    return CylinderFunction.from_callable(space, depth, lambda w: rat(rng))


def flip_invariant(rng, depth) -> CylinderFunction:
    table = {}

    def value(w):
        key = w[0] if w[0][0] == 0 else tuple(1 - x for x in w[0])
        if key not in table:
            table[key] = rat(rng)
        return table[key]

    return CylinderFunction.from_callable(X2, depth, value)


# -- passing tuples (rank 2) -------------------------------------------------


def passing_cantor(rng) -> KRuelleSystem:
    # phi o sigma_i is independent of i by construction
    return cantor_system(2, [rat(rng), rat(rng)], [rat(rng), rat(rng)])


def passing_flip_invariant(rng) -> KRuelleSystem:
    # a1 + c == c + a1 o flip because a1 is flip invariant
    a1 = flip_invariant(rng, rng.randint(1, 2))
    return KRuelleSystem(X2, [Shift(), FLIP], [a1, CylinderFunction.constant(X2, rat(rng))])


def passing_coboundary(rng) -> KRuelleSystem:
    # a_i = alpha - alpha o sigma_i always satisfies the condition; adding a
    # passing tuple keeps it passing since the condition is linear
    maps = rng.choice([[Shift(), FLIP], [Shift(), compose(FLIP, Shift())]])
    alpha = random_function(rng, X2, rng.randint(1, 2))
    entries = coboundary_tuple(NkModuleAction(X2, maps), alpha)
    c = [rat(rng), rat(rng)]
    return KRuelleSystem(X2, maps, [e + k for e, k in zip(entries, c)])


PASSING = [passing_cantor, passing_flip_invariant, passing_coboundary]


# -- violating tuples (rank 2) -------------------------------------------------


def violating_flip(rng) -> KRuelleSystem:
    # needs a1 == a1 o flip, false when a1(0) != a1(1)
    u = rat(rng)
    v = u + rng.choice([-1, 1]) * Fraction(rng.randint(1, 9), rng.randint(1, 9))
    a1 = CylinderFunction(X2, 1, {((0,),): u, ((1,),): v})
    return KRuelleSystem(X2, [Shift(), FLIP], [a1, CylinderFunction.constant(X2, rat(rng))])


def violating_shift(rng) -> KRuelleSystem:
    # with a1 = 0 it needs a2 o shift == a2, false for nonconstant depth-1 a2
    u = rat(rng)
    v = u + rng.choice([-1, 1]) * Fraction(rng.randint(1, 9), rng.randint(1, 9))
    a2 = CylinderFunction(X2, 1, {((0,),): u, ((1,),): v})
    return KRuelleSystem(X2, [Shift(), FLIP], [CylinderFunction.constant(X2, 0), a2])


VIOLATING = [violating_flip, violating_shift]


def passing_corpus(count: int, seed: int = 0) -> list[KRuelleSystem]:
    rng = random.Random(seed)
    return [PASSING[i % len(PASSING)](rng) for i in range(count)]


def violating_corpus(count: int, seed: int = 1) -> list[KRuelleSystem]:
    rng = random.Random(seed)
    return [VIOLATING[i % len(VIOLATING)](rng) for i in range(count)]
