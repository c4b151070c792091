"""Dense factor tables over discrete variables.

A factor's values are stored in row-major order over its scope, the last
scope variable varying fastest, and the scope is always kept sorted by
variable id. Two factors therefore align by plain reshaping, without any
permutation step, which is what the product, quotient and marginalization
below rely on.
"""
from __future__ import annotations

import logging
from functools import reduce
from typing import Iterable, Mapping, Sequence

import numpy as np

from .exceptions import CardinalityMismatchError, PositivityError, UndefinedQuotientError

logger = logging.getLogger(__name__)


class Factor:
    """Nonnegative (usually) real-valued table over an ordered set of variables"""

    __slots__ = ('scope', 'cards', 'values')

    def __init__(self, scope: Sequence[int], cards: Sequence[int], values):
        scope = tuple(int(v) for v in scope)
        cards = tuple(int(c) for c in cards)
        if len(scope) != len(cards):
            raise ValueError(f"scope {scope} and cardinalities {cards} differ in length")
        if len(set(scope)) != len(scope):
            raise ValueError(f"duplicate variables in scope {scope}")

        values = np.asarray(values, dtype=float)
        size = int(np.prod(cards, dtype=np.int64)) if cards else 1
        if values.size != size:
            raise ValueError(f"factor over {scope} needs {size} values, got {values.size}")
        values = values.reshape(cards)

        order = sorted(range(len(scope)), key=scope.__getitem__)
        if order != list(range(len(scope))):
            values = values.transpose(order)
            scope = tuple(scope[i] for i in order)
            cards = tuple(cards[i] for i in order)

        values = np.ascontiguousarray(values)
        values.setflags(write=False)
        self.scope = scope
        self.cards = cards
        self.values = values

    @classmethod
    def scalar(cls, value: float) -> 'Factor':
        return cls((), (), [value])

    @classmethod
    def ones(cls, scope: Sequence[int], cards: Sequence[int]) -> 'Factor':
        return cls(scope, cards, np.ones(cards if cards else ()))

    @staticmethod
    def product(factors: Iterable['Factor']) -> 'Factor':
        return reduce(Factor.multiply, factors, Factor.scalar(1.0))

    def __repr__(self):
        return f"<Factor over {self.scope} cards={self.cards}>"

    @property
    def size(self) -> int:
        return int(self.values.size)

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def cardinality(self, variable: int) -> int:
        return self.cards[self.scope.index(variable)]

    def total(self) -> float:
        return float(self.values.sum())

    def index_of(self, assignment: Mapping[int, int]) -> int:
        """Flat index of the entry selected by ``assignment``"""
        if not self.scope:
            return 0
        return int(np.ravel_multi_index(tuple(assignment[v] for v in self.scope), self.cards))

    def assignment_of(self, index: int) -> dict[int, int]:
        if not self.scope:
            return {}
        states = np.unravel_index(int(index), self.cards)
        return {v: int(s) for v, s in zip(self.scope, states)}

    def value_at(self, assignment: Mapping[int, int]) -> float:
        return float(self.values[tuple(assignment[v] for v in self.scope)])

    def _aligned(self, other: 'Factor'):
        """Union scope plus both value arrays reshaped to broadcast over it"""
        cards = dict(zip(self.scope, self.cards))
        for v, c in zip(other.scope, other.cards):
            if cards.setdefault(v, c) != c:
                raise CardinalityMismatchError(
                    f"variable {v} has cardinality {cards[v]} in one factor and {c} in another"
                )
        scope = tuple(sorted(cards))
        union_cards = tuple(cards[v] for v in scope)

        def expand(f: 'Factor') -> np.ndarray:
            mine = set(f.scope)
            return f.values.reshape(tuple(cards[v] if v in mine else 1 for v in scope))

        return scope, union_cards, expand(self), expand(other)

    def multiply(self, other: 'Factor') -> 'Factor':
        scope, cards, a, b = self._aligned(other)
        return Factor(scope, cards, a * b)

    def divide(self, other: 'Factor') -> 'Factor':
        """Aligned quotient with 0/0 = 0; x/0 for x != 0 is undefined"""
        scope, cards, a, b = self._aligned(other)
        num, den = np.broadcast_arrays(a, b)
        if cards:
            num = num.reshape(cards)
            den = den.reshape(cards)
        zero = den == 0
        if np.any(zero & (num != 0)):
            raise UndefinedQuotientError(
                f"division by zero entries of the factor over {other.scope} "
                f"with a nonzero numerator over {self.scope}",
                scope=other.scope,
            )
        out = np.zeros(num.shape, dtype=float)
        np.divide(num, den, out=out, where=~zero)
        return Factor(scope, cards, out)

    def marginalize(self, drop: Iterable[int]) -> 'Factor':
        """Sum out the variables in ``drop``"""
        drop = set(drop)
        if not drop:
            return self
        missing = drop.difference(self.scope)
        if missing:
            raise ValueError(f"cannot sum out {sorted(missing)}: not in scope {self.scope}")
        axes = tuple(i for i, v in enumerate(self.scope) if v in drop)
        keep = [i for i, v in enumerate(self.scope) if v not in drop]
        return Factor(
            [self.scope[i] for i in keep],
            [self.cards[i] for i in keep],
            self.values.sum(axis=axes),
        )

    def marginalize_to(self, keep: Iterable[int]) -> 'Factor':
        keep = set(keep)
        return self.marginalize(v for v in self.scope if v not in keep)

    def map_power(self, exponent: float) -> 'Factor':
        if exponent == 1:
            return self
        if np.any(self.values < 0):
            raise PositivityError(f"factor over {self.scope} has negative entries", scope=self.scope)
        if exponent < 0 and np.any(self.values == 0):
            raise PositivityError(
                f"factor over {self.scope} has zero entries and cannot be raised to {exponent}",
                scope=self.scope,
            )
        return Factor(self.scope, self.cards, np.power(self.values, exponent))

    def map_log(self) -> 'Factor':
        """Elementwise natural logarithm"""
        if np.any(self.values <= 0):
            raise PositivityError(
                f"factor over {self.scope} has nonpositive entries; its logarithm is undefined",
                scope=self.scope,
            )
        return Factor(self.scope, self.cards, np.log(self.values))

    def scale(self, c: float) -> 'Factor':
        return Factor(self.scope, self.cards, self.values * c)

    def ordered_values(self, order: Sequence[int]) -> np.ndarray:
        """Flat values laid out over ``order`` instead of the sorted scope"""
        if sorted(order) != list(self.scope):
            raise ValueError(f"{tuple(order)} is not a permutation of {self.scope}")
        axes = [self.scope.index(v) for v in order]
        return self.values.transpose(axes).ravel()
