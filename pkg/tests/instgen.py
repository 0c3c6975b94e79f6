"""Seeded random instance generators shared by the test suite.

Everything here is deterministic in the seed, so the suite is byte-stable
run to run.
"""

from __future__ import annotations

import random
from fractions import Fraction

from submax import (
    FeasibilityFamily, GroundSet, Matroid, coverage_function, directed_cut_function,
    k_intersection_family, modular_function,
)
from submax.core import iter_submasks


def names(n: int) -> list[str]:
    return [f"e{i + 1}" for i in range(n)]


def random_ground(rng: random.Random, n_min=3, n_max=6) -> GroundSet:
    return GroundSet.of(names(rng.randint(n_min, n_max)))


def random_modular(rng: random.Random, ground: GroundSet, offset=False):
    weights = {e: Fraction(rng.randint(0, 12), rng.randint(1, 3)) for e in ground.elements}
    off = Fraction(rng.randint(0, 4)) if offset and rng.random() < 0.5 else Fraction(0)
    return modular_function(ground, weights, off)


def random_coverage(rng: random.Random, ground: GroundSet):
    n_items = rng.randint(2, 2 * ground.n)
    items = [f"u{i}" for i in range(n_items)]
    covers = {e: [it for it in items if rng.random() < 0.45] for e in ground.elements}
    covered = sorted({it for its in covers.values() for it in its})
    item_weights = {it: Fraction(rng.randint(1, 5)) for it in covered}
    return coverage_function(ground, covers, item_weights)


def random_cut(rng: random.Random, ground: GroundSet):
    arcs = []
    for u in ground.elements:
        for v in ground.elements:
            if u != v and rng.random() < 0.4:
                arcs.append((u, v, Fraction(rng.randint(1, 6))))
    if not arcs:
        a, b = ground.elements[0], ground.elements[-1]
        arcs.append((a, b, Fraction(1)))
    return directed_cut_function(ground, arcs)


def random_submodular(rng: random.Random, ground: GroundSet, monotone_only=False):
    kinds = ["modular", "coverage"] if monotone_only else ["modular", "coverage", "cut"]
    kind = rng.choice(kinds)
    if kind == "modular":
        return random_modular(rng, ground, offset=True)
    if kind == "coverage":
        return random_coverage(rng, ground)
    return random_cut(rng, ground)


def random_down_closed_family(rng: random.Random, ground: GroundSet,
                              max_size: int | None = None) -> FeasibilityFamily:
    """Union of the down-closures of a few random generator sets."""
    full = ground.full_mask
    members = {0}
    for _ in range(rng.randint(1, 4)):
        top = rng.randrange(1, full + 1)
        members.update(iter_submasks(top))
    if max_size is not None:
        while len(members) > max_size:
            # removing a maximal member keeps the family down-closed
            maximal = [m for m in members
                       if not any(other != m and m & ~other == 0 for other in members)]
            members.discard(max(maximal, key=lambda m: (m.bit_count(), m)))
    return FeasibilityFamily.explicit(ground, members)


def random_family(rng: random.Random, ground: GroundSet,
                  size: int | None = None) -> FeasibilityFamily:
    """Arbitrary non-empty explicit family (usually not down-closed)."""
    full = ground.full_mask
    size = size if size is not None else rng.randint(2, min(16, full + 1))
    size = min(size, full + 1)
    members = set(rng.sample(range(full + 1), size))
    return FeasibilityFamily.explicit(ground, members)


def random_matroid(rng: random.Random, ground: GroundSet) -> Matroid:
    kind = rng.choice(["uniform", "partition", "graphic"])
    if kind == "uniform":
        return Matroid.uniform(ground, rng.randint(1, ground.n))
    if kind == "partition":
        elems = list(ground.elements)
        rng.shuffle(elems)
        blocks = []
        while elems:
            take = rng.randint(1, min(3, len(elems)))
            blocks.append(elems[:take])
            elems = elems[take:]
        caps = [rng.randint(1, max(1, len(b))) for b in blocks]
        return Matroid.partition(ground, blocks, caps)
    # random connected-ish multigraph on a few vertices; elements are edges
    n_vertices = rng.randint(2, max(2, ground.n - 1))
    verts = [f"v{i}" for i in range(n_vertices)]
    endpoints = {}
    for e in ground.elements:
        u, v = rng.sample(verts, 2)
        endpoints[e] = (u, v)
    return Matroid.graphic(ground, endpoints)


def random_k_intersection(rng: random.Random, ground: GroundSet, k: int):
    matroids = [random_matroid(rng, ground) for _ in range(k)]
    return k_intersection_family(matroids), matroids
