"""Seeded generators for expressions, witnesses, and stochastic data.

Everything takes an explicit random.Random so a seed fully determines
the output; nothing here touches global RNG state.  These feed both the
law-check command and the property tests.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .core import NestedExpression, expression
from .engine import Witness, witness_from_value
from .errors import UnsupportedInstance
from .instances import (
    DIST,
    LIST,
    MULTISET,
    TERMINAL,
    ActionMonad,
    AlgebraInstance,
)


def split_units(rng: random.Random, n: int, k: int) -> list[int]:
    """n indistinguishable units into k nonnegative integer parts."""
    if k <= 0:
        return []
    cuts = sorted(rng.randint(0, n) for _ in range(k - 1))
    parts = []
    prev = 0
    for c in cuts + [n]:
        parts.append(c - prev)
        prev = c
    return parts


def random_weights(rng: random.Random, k: int, max_den: int = 12) -> list[Fraction]:
    """k positive rationals summing to one, denominators bounded."""
    den = rng.randint(max(k, 2), max(k, max_den))
    parts = split_units(rng, den - k, k)
    return [Fraction(part + 1, den) for part in parts]


def split_fraction(rng: random.Random, total: Fraction, k: int) -> list[Fraction]:
    """k nonnegative rationals with the given exact sum."""
    grain = rng.randint(1, 4)
    units = total.numerator * grain
    parts = split_units(rng, units, k)
    return [Fraction(part, total.denominator * grain) for part in parts]


def random_rational(rng: random.Random, max_num: int = 12, max_den: int = 12) -> Fraction:
    return Fraction(rng.randint(-max_num, max_num), rng.randint(1, max_den))


def random_point(rng: random.Random, dim: int, max_num: int = 6, max_den: int = 12) -> tuple:
    return tuple(random_rational(rng, max_num, max_den) for _ in range(dim))


# ---------------------------------------------------------------------------
# Law-check samples.


def random_payload(monad, depth: int, rng: random.Random, carrier):
    """A random payload of the requested nesting depth."""
    if depth == 0:
        return carrier.sample(rng)
    if monad == MULTISET:
        k = rng.randint(0, 3)
        pairs = [
            (random_payload(monad, depth - 1, rng, carrier), rng.randint(1, 2))
            for _ in range(k)
        ]
        return MULTISET.bag(pairs, depth - 1)
    if monad == LIST:
        return tuple(
            random_payload(monad, depth - 1, rng, carrier)
            for _ in range(rng.randint(0, 3))
        )
    if monad == DIST:
        k = rng.randint(1, 3)
        ws = random_weights(rng, k)
        pairs = [
            (random_payload(monad, depth - 1, rng, carrier), w) for w in ws
        ]
        return DIST.mix(pairs, depth - 1)
    if isinstance(monad, ActionMonad):
        g = rng.choice(monad.monoid.elements)
        return (g, random_payload(monad, depth - 1, rng, carrier))
    if monad == TERMINAL:
        return TERMINAL.POINT
    raise UnsupportedInstance(f"no sampler for {monad.tag}")


def random_expression(
    monad, depth: int, rng: random.Random, carrier
) -> NestedExpression:
    return NestedExpression(monad, depth, random_payload(monad, depth, rng, carrier))


def law_samples(
    algebra: AlgebraInstance, rng: random.Random, count: int, max_depth: int = 3
) -> list[NestedExpression]:
    """Expressions over the algebra's instance, cycling through depths.

    The unit laws need depth >= 1 and associativity needs depth >= 3,
    so the mix covers every depth the checks can consume.
    """
    out = []
    for i in range(count):
        depth = (i % max_depth) + 1
        out.append(random_expression(algebra.monad, depth, rng, algebra.carrier))
    return out


# ---------------------------------------------------------------------------
# Witness pairs for composition tests.


def random_enumerable_expression(
    algebra: AlgebraInstance, rng: random.Random, max_size: int = 8
) -> NestedExpression:
    """A depth-1 expression whose fiber stays comfortably enumerable."""
    monad = algebra.monad
    if monad == MULTISET or monad == LIST:
        size = rng.randint(2, max_size)
        atoms = [algebra.carrier.sample(rng) for _ in range(size)]
        return expression(monad, 1, atoms)
    if isinstance(monad, ActionMonad):
        g = rng.choice(monad.monoid.elements)
        x = algebra.carrier.sample(rng)
        return expression(monad, 1, (g, x))
    if monad == TERMINAL:
        return expression(monad, 1, TERMINAL.POINT)
    raise UnsupportedInstance(f"{monad.tag} expressions are not enumerable")


def random_witness(
    p: NestedExpression, algebra: AlgebraInstance, rng: random.Random, limit: int = 10
) -> Witness:
    fiber = algebra.monad.mu_fiber(p.payload, limit)
    payload = rng.choice(fiber)
    return witness_from_value(
        NestedExpression(algebra.monad, 2, payload), algebra
    )


def random_composable_pair(
    algebra: AlgebraInstance, rng: random.Random, max_size: int = 8
) -> tuple[Witness, Witness]:
    """Two witnesses sharing a middle expression, ready to compose."""
    p = random_enumerable_expression(algebra, rng, max_size)
    first = random_witness(p, algebra, rng)
    second = random_witness(first.target, algebra, rng)
    return first, second


# ---------------------------------------------------------------------------
# Stochastic data.


def random_point_distribution(
    rng: random.Random,
    dim: int = 1,
    max_points: int = 5,
    max_den: int = 12,
    max_num: int = 6,
) -> NestedExpression:
    k = rng.randint(1, max_points)
    ws = random_weights(rng, k, max_den)
    pairs = [(random_point(rng, dim, max_num, max_den), w) for w in ws]
    return NestedExpression(DIST, 1, DIST.mix(pairs, 0))


def random_blockwise_witness_value(
    p: NestedExpression, rng: random.Random, max_blocks: int = 3
) -> NestedExpression:
    """A random depth-2 value averaging back to p.

    Splits every point's mass across a few blocks and normalizes each
    block, so the outer flattening is p by construction; an empty block
    simply never appears.
    """
    k = rng.randint(1, max_blocks)
    shares: list[list] = [[] for _ in range(k)]
    for a, w in p.payload:
        for j, piece in enumerate(split_fraction(rng, w, k)):
            if piece > 0:
                shares[j].append((a, piece))
    outer = []
    for rows in shares:
        if not rows:
            continue
        weight = sum((w for _, w in rows), Fraction(0))
        block = DIST.mix(((a, w / weight) for a, w in rows), 0)
        outer.append((block, weight))
    return NestedExpression(DIST, 2, DIST.mix(outer, 1))


def random_contraction(
    p: NestedExpression, rng: random.Random, algebra
) -> NestedExpression:
    """A distribution p provably partially evaluates to.

    Push each block of a random decomposition to its barycenter; the
    decomposition itself certifies the relation.
    """
    value = random_blockwise_witness_value(p, rng)
    pairs = [(algebra.eval_payload(block), w) for block, w in value.payload]
    return NestedExpression(DIST, 1, DIST.mix(pairs, 0))


def random_lift_triple(rng: random.Random, labels: str = "abc"):
    """(p, alpha, f) satisfying the lift precondition exactly.

    p lives on small integer atoms, f collapses them onto letter
    labels, and alpha is a random decomposition of the image built by
    splitting each label's mass across blocks.
    """
    size = rng.randint(2, 5)
    atoms = rng.sample(range(10), size)
    ws = random_weights(rng, size)
    p = NestedExpression(DIST, 1, DIST.mix(zip(atoms, ws), 0))
    table = {a: rng.choice(labels) for a in atoms}

    def f(a):
        return table[a]

    image_pairs: dict = {}
    for a, w in p.payload:
        lab = table[a]
        image_pairs[lab] = image_pairs.get(lab, Fraction(0)) + w
    image = NestedExpression(DIST, 1, DIST.mix(image_pairs.items(), 0))
    alpha = random_blockwise_witness_value(image, rng)
    return p, alpha, f
