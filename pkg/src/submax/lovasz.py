"""The Lovász extension of a set function, in both of its exact forms.

The sorted-slice formula evaluates the extension with at most n+1 oracle
calls; the convex-closure LP (2^n distribution variables, solved by the
exact simplex) is the point-wise largest convex extension.  The two agree
exactly precisely when the function is submodular, which makes their
comparison a sharp correctness oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .core import GroundSet, SizeError, SubmodularOracle, bit_indices
from .geometry import EQ, lp_solve

CLOSURE_MAX = 12


@dataclass(frozen=True)
class FractionalPoint:
    """A point of the unit cube [0,1]^E, stored as exact coordinates."""

    ground: GroundSet
    values: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.values) != self.ground.n:
            raise ValueError("coordinate count must match the ground set")
        if any(v < 0 or v > 1 for v in self.values):
            raise ValueError("coordinates must lie in [0, 1]")

    @classmethod
    def from_coords(cls, ground: GroundSet, coords: dict[str, Fraction]) -> "FractionalPoint":
        unknown = set(coords) - set(ground.elements)
        if unknown:
            raise ValueError(f"coordinates for unknown elements: {sorted(unknown)}")
        return cls(ground, tuple(Fraction(coords.get(e, 0)) for e in ground.elements))

    @classmethod
    def indicator(cls, ground: GroundSet, mask: int) -> "FractionalPoint":
        ground.check_mask(mask)
        return cls(ground, tuple(Fraction(1 if (mask >> i) & 1 else 0)
                                 for i in range(ground.n)))

    def level_set(self, threshold: Fraction) -> int:
        mask = 0
        for i, v in enumerate(self.values):
            if v >= threshold:
                mask |= 1 << i
        return mask


def lovasz_value(f: SubmodularOracle, x: FractionalPoint) -> Fraction:
    """Sorted-slice evaluation of the extension at x.

    With coordinates sorted increasingly as x_1 <= ... <= x_n and the
    sentinels x_0 = 0, x_{n+1} = 1, the value is
    sum_i (x_i - x_{i-1}) * f({e : x(e) >= x_i}); zero-width slices (ties)
    are skipped, so at most n+1 oracle calls are made.
    """
    levels = sorted(x.values) + [Fraction(1)]
    total = Fraction(0)
    prev = Fraction(0)
    for threshold in levels:
        width = threshold - prev
        if width > 0:
            total += width * f(x.level_set(threshold))
        prev = threshold
    return total


def convex_closure_value(f: SubmodularOracle,
                         x: FractionalPoint) -> tuple[Fraction, dict[int, Fraction]]:
    """Exact convex-closure LP at x: the cheapest distribution over subsets
    whose indicator mean is x.

    Returns the optimal value and one optimal distribution (mask -> weight).
    Coordinates fixed at 0 or 1 pin the support to an interval of subsets,
    which prunes the 2^n columns.  Capped at n = 12.
    """
    ground = f.ground
    if ground.n > CLOSURE_MAX:
        raise SizeError(f"convex-closure LP limited to n <= {CLOSURE_MAX}")
    ones = x.level_set(Fraction(1))
    support = 0
    for i, v in enumerate(x.values):
        if v > 0:
            support |= 1 << i
    free = bit_indices(support & ~ones)
    columns = []
    for sub in range(1 << len(free)):
        mask = ones
        for pos, idx in enumerate(free):
            if (sub >> pos) & 1:
                mask |= 1 << idx
        columns.append(mask)
    columns.sort()
    objective = [f(mask) for mask in columns]
    constraints = []
    for i in free:
        bit = 1 << i
        row = [Fraction(1 if mask & bit else 0) for mask in columns]
        constraints.append((row, EQ, x.values[i]))
    constraints.append(([Fraction(1)] * len(columns), EQ, Fraction(1)))
    res = lp_solve(objective, constraints, sense="min")
    assert res.optimal, "the distribution LP is feasible for every x in the cube"
    dist = {mask: w for mask, w in zip(columns, res.x) if w > 0}
    return res.value, dist
