"""Neighborhood functions over feasibility families.

A neighborhood function maps a feasible set S to a finite list of feasible
sets that always contains S itself, and carries the conic parameter alpha it
claims to satisfy.  Shipped backends: (k,p)-swap neighborhoods, polyhedral
neighborhoods (exact, via the adjacency LP, for explicit families; the
O(n^2) add/delete/swap superset for a single matroid), and ground-set
restrictions of any backend.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Optional, Sequence

from . import geometry
from .core import FeasibilityFamily, GroundSet, bit_indices, subset_key
from .constraints import Matroid

EXHAUSTIVE_PAIR_LIMIT = 64
DEFAULT_SAMPLED_PAIRS = 500


def swap_neighborhood(family: FeasibilityFamily, ground: GroundSet, S: int,
                      k: int, p: int, within: Optional[int] = None) -> list[int]:
    """All feasible T with |T \\ S| <= p and |S \\ T| <= (k-1)p + 1.

    Enumerated by choosing at most p additions and at most (k-1)p+1 deletions,
    filtered by membership; S itself is always included.
    """
    if k < 1 or p < 1:
        raise ValueError("k and p must be at least 1")
    if not family.contains(S):
        raise ValueError("S must be feasible")
    within = ground.full_mask if within is None else within
    adds = bit_indices(within & ~S)
    dels = bit_indices(S)
    max_add = min(p, len(adds))
    max_del = min((k - 1) * p + 1, len(dels))
    out = set()
    for na in range(max_add + 1):
        for combo_a in combinations(adds, na):
            add_mask = sum(1 << i for i in combo_a)
            for nd in range(max_del + 1):
                for combo_d in combinations(dels, nd):
                    cand = (S & ~sum(1 << i for i in combo_d)) | add_mask
                    if cand in out or not family.contains(cand):
                        continue
                    out.add(cand)
    assert S in out
    return sorted(out, key=subset_key)


def matroid_polyhedral_neighborhood(matroid: Matroid, ground: GroundSet, S: int,
                                    within: Optional[int] = None) -> list[int]:
    """Superset of the polyhedral neighbors of S in a matroid polytope.

    Returns the feasible sets among {S} ∪ {S+e} ∪ {S-e} ∪ {S-e+f}: the
    matroid polytope has only O(n^2) edge directions at a vertex and all of
    them are of these shapes, so this list contains every true polyhedral
    neighbor; supersets of 1-conic neighbor lists stay 1-conic because the
    cone only grows.
    """
    within = ground.full_mask if within is None else within
    out = {S}
    inside = bit_indices(S)
    outside = bit_indices(within & ~S)
    for e in inside:
        out.add(S & ~(1 << e))
    for f_ in outside:
        cand = S | (1 << f_)
        if matroid.independent(cand):
            out.add(cand)
    for e in inside:
        base = S & ~(1 << e)
        for f_ in outside:
            cand = base | (1 << f_)
            if matroid.independent(cand):
                out.add(cand)
    return sorted(out, key=subset_key)


def explicit_polyhedral_neighborhood(family: FeasibilityFamily, ground: GroundSet,
                                     S: int, within: Optional[int] = None) -> list[int]:
    """Exact polyhedral neighborhood of S: S plus every feasible T whose
    indicator vector is polytope-adjacent to chi^S (adjacency LP)."""
    fam = family if within is None else family.restrict(within)
    out = [S]
    for U in fam.members():
        if U != S and geometry.vertex_adjacency(ground, fam, S, U):
            out.append(U)
    return sorted(out, key=subset_key)


def polyhedral_neighborhood(family: FeasibilityFamily, ground: GroundSet,
                            S: int) -> list[int]:
    """Polyhedral neighborhood via the backend-appropriate rule."""
    matroid = family.params.get("matroid")
    if matroid is not None:
        return matroid_polyhedral_neighborhood(matroid, ground, S)
    if family.backend in ("explicit", "k_exchange_explicit") or family._members is not None:
        return explicit_polyhedral_neighborhood(family, ground, S)
    raise ValueError(f"polyhedral neighborhoods unsupported for backend {family.backend!r}")


@dataclass
class NeighborhoodFunction:
    """A neighborhood enumeration with its claimed conic parameter.

    ``enumerate(S)`` returns a deduplicated list sorted by (cardinality,
    lexicographic) order; S's presence is asserted on every call and
    feasibility of all neighbors is re-checked under __debug__.
    """

    ground: GroundSet
    family: FeasibilityFamily
    claimed_alpha: Fraction
    backend: str
    _enumerate: Callable[[int, Optional[int]], list[int]]
    restriction: Optional[int] = None

    def enumerate(self, S: int) -> list[int]:
        out = self._enumerate(S, self.restriction)
        if self.restriction is not None:
            out = [A for A in out if A & ~self.restriction == 0]
        assert S in out, "neighborhoods must contain the set itself"
        if __debug__:
            assert all(self.family.contains(A) for A in out)
        return out

    def restrict(self, within: int) -> "NeighborhoodFunction":
        """The restricted neighborhood N_{E'}(S) = {A in N(S) : A ⊆ E'}.

        Restriction preserves the conic parameter and never enlarges any
        neighborhood.
        """
        base = self.restriction if self.restriction is not None else self.ground.full_mask
        return NeighborhoodFunction(
            self.ground, self.family, self.claimed_alpha, self.backend,
            self._enumerate, restriction=base & within)


def swap_neighborhood_function(ground: GroundSet, family: FeasibilityFamily,
                               k: int, p: int) -> NeighborhoodFunction:
    alpha = Fraction(k - 1) + Fraction(1, p)
    return NeighborhoodFunction(
        ground, family, alpha, f"swap(k={k},p={p})",
        lambda S, within: swap_neighborhood(family, ground, S, k, p, within))


def polyhedral_neighborhood_function(ground: GroundSet,
                                     family: FeasibilityFamily) -> NeighborhoodFunction:
    matroid = family.params.get("matroid")
    if matroid is not None:
        enum = lambda S, within: matroid_polyhedral_neighborhood(matroid, ground, S, within)
        backend = "polyhedral_matroid"
    elif family._members is not None or family.backend == "explicit":
        enum = lambda S, within: explicit_polyhedral_neighborhood(family, ground, S, within)
        backend = "polyhedral_explicit"
    else:
        raise ValueError(f"polyhedral neighborhoods unsupported for backend {family.backend!r}")
    return NeighborhoodFunction(ground, family, Fraction(1), backend, enum)


@dataclass
class ConicCheckRecord:
    S: int
    T: int
    ok: bool
    support_size: Optional[int] = None


@dataclass
class ConicCheckReport:
    alpha: Fraction
    exhaustive: bool
    records: list[ConicCheckRecord] = field(default_factory=list)

    @property
    def pairs_checked(self) -> int:
        return len(self.records)

    @property
    def failures(self) -> list[ConicCheckRecord]:
        return [r for r in self.records if not r.ok]

    @property
    def all_passed(self) -> bool:
        return not self.failures


def empirical_conic_check(ground: GroundSet, family: FeasibilityFamily,
                          N: NeighborhoodFunction, alpha: Fraction,
                          samples: Optional[int] = None,
                          seed: int = 0) -> ConicCheckReport:
    """Run the cone-membership test over (S, T) pairs of the family.

    Exhaustive over all ordered pairs when the family has at most 64 members
    (or when samples is None and enumeration is cheap); otherwise checks
    `samples` pairs drawn with a seeded RNG (default 500).  Failures are data,
    not errors: the report lists them per pair.
    """
    alpha = Fraction(alpha)
    members = family.members()
    exhaustive = samples is None and len(members) <= EXHAUSTIVE_PAIR_LIMIT
    report = ConicCheckReport(alpha=alpha, exhaustive=exhaustive)
    if exhaustive:
        pairs = [(S, T) for S in members for T in members]
    else:
        rng = random.Random(seed)
        count = samples if samples is not None else DEFAULT_SAMPLED_PAIRS
        pairs = [(rng.choice(members), rng.choice(members)) for _ in range(count)]
    neighborhood_cache: dict[int, list[int]] = {}
    for S, T in pairs:
        neighbors = neighborhood_cache.get(S)
        if neighbors is None:
            neighbors = neighborhood_cache[S] = N.enumerate(S)
        cert = geometry.cone_membership(ground, S, T, neighbors, alpha)
        report.records.append(ConicCheckRecord(
            S, T, cert is not None,
            None if cert is None else cert.support_size))
    return report
