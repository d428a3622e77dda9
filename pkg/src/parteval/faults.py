"""Deliberately broken instances, used to prove the law checks have teeth.

A law harness that never fails is worthless as evidence.  Each wrapper
here perturbs exactly one structure map and leaves the rest delegating,
so a failing report pins the blame where it was planted.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .core import AlgebraInstance, MonadInstance
from .errors import UnsupportedInstance
from .instances import DIST, LIST, MULTISET, ActionMonad


class CorruptedMult(MonadInstance):
    """Delegates everything except flattening, which it quietly damages.

    Multisets lose one copy of their least child, lists lose their
    head, mixtures get their weights squared and renormalized, and
    actions forget the accumulated group element.  All four perturb
    depth-3 flattening paths asymmetrically, so associativity fails on
    generic samples and the unit laws fail on most.
    """

    def __init__(self, inner: MonadInstance):
        self.inner = inner
        self.tag = f"corrupt-mult({inner.tag})"

    def from_raw(self, raw, depth):
        return self.inner.from_raw(raw, depth)

    def fmap(self, f, payload, depth, result_child_depth):
        return self.inner.fmap(f, payload, depth, result_child_depth)

    def unit(self, payload):
        return self.inner.unit(payload)

    def mult(self, payload, depth):
        good = self.inner.mult(payload, depth)
        if self.inner == MULTISET:
            if not good:
                return good
            head, m = good[0]
            rest = ((head, m - 1),) if m > 1 else ()
            return rest + good[1:]
        if self.inner == LIST:
            return good[1:]
        if self.inner == DIST:
            squared = [(c, w * w) for c, w in good]
            total = sum((w for _, w in squared), Fraction(0))
            return tuple((c, w / total) for c, w in squared)
        if isinstance(self.inner, ActionMonad):
            g, child = good
            return (self.inner.monoid.identity, child)
        raise UnsupportedInstance(f"no corruption defined for {self.inner.tag}")

    def key(self, payload, depth):
        return self.inner.key(payload, depth)

    def iter_children(self, payload, depth):
        return self.inner.iter_children(payload, depth)

    def check_payload(self, payload, depth, carrier=None):
        # The corrupted mixture no longer sums to 1; laws still have to
        # compare values, so structural checks pass through unchecked
        # for distributions.
        if self.inner == DIST:
            return
        return self.inner.check_payload(payload, depth, carrier)

    def render(self, payload, depth):
        return self.inner.render(payload, depth)

    def mu_fiber(self, payload, limit=10):
        return self.inner.mu_fiber(payload, limit)


def corrupted_mult(inner: MonadInstance) -> CorruptedMult:
    return CorruptedMult(inner)


def corrupted_eval(algebra: AlgebraInstance) -> AlgebraInstance:
    """Same carrier, same instance, but evaluation ignores its input."""
    sentinel = algebra.carrier.sample(random.Random(0))
    return AlgebraInstance(
        algebra.monad,
        algebra.carrier,
        f"corrupt-eval({algebra.name})",
        lambda payload: sentinel,
    )


def misindexed_face(x, j):
    """A face map that flattens one layer too early.

    Index j behaves like index max(j - 1, 0), so the last face never
    evaluates; the simplicial identity families catch it immediately.
    """
    from .bar import face

    return face(x, max(j - 1, 0))
