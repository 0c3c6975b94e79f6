"""Concrete feasibility families.

Matroids with trivial independence oracles (uniform, partition, graphic),
their intersections, and a 2-exchange example (degree-bounded subgraphs /
b-matchings).  Every backend answers membership exactly; brute-force checks
of the matroid exchange axiom and of the bounded-exchange property are
provided as test oracles for toy sizes.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Optional, Sequence

from .core import (
    FeasibilityFamily, GroundSet, SizeError, bit_indices, iter_submasks, subset_key,
)

EXCHANGE_CHECK_MAX = 8


@dataclass(frozen=True)
class Matroid:
    """A matroid given by one of the shipped independence oracles.

    kind is one of "uniform", "partition", "graphic"; params hold the
    kind-specific data already resolved to ground-set indices.
    """

    ground: GroundSet
    kind: str
    params: dict

    @classmethod
    def uniform(cls, ground: GroundSet, rank: int) -> "Matroid":
        if rank < 0:
            raise ValueError("rank must be non-negative")
        return cls(ground, "uniform", {"rank": rank})

    @classmethod
    def partition(cls, ground: GroundSet, blocks: Sequence[Iterable[str]],
                  capacities: Sequence[int]) -> "Matroid":
        if len(blocks) != len(capacities):
            raise ValueError("one capacity per block")
        block_masks = [ground.mask_of(b) for b in blocks]
        seen = 0
        for bm in block_masks:
            if bm & seen:
                raise ValueError("partition blocks must be disjoint")
            seen |= bm
        if any(c < 0 for c in capacities):
            raise ValueError("capacities must be non-negative")
        # elements outside every block are unconstrained
        return cls(ground, "partition",
                   {"blocks": tuple(block_masks), "capacities": tuple(capacities)})

    @classmethod
    def graphic(cls, ground: GroundSet, endpoints: dict[str, tuple[str, str]]) -> "Matroid":
        """Ground elements are edges; endpoints maps each to its two vertices."""
        if set(endpoints) != set(ground.elements):
            raise ValueError("endpoints must cover exactly the ground set")
        verts = sorted({v for uv in endpoints.values() for v in uv})
        vidx = {v: i for i, v in enumerate(verts)}
        edges = [None] * ground.n
        for e, (u, v) in endpoints.items():
            edges[ground.index(e)] = (vidx[u], vidx[v])
        return cls(ground, "graphic",
                   {"edges": tuple(edges), "n_vertices": len(verts),
                    "labels": {e: tuple(uv) for e, uv in endpoints.items()}})

    def independent(self, mask: int) -> bool:
        if self.kind == "uniform":
            return mask.bit_count() <= self.params["rank"]
        if self.kind == "partition":
            for bm, cap in zip(self.params["blocks"], self.params["capacities"]):
                if (mask & bm).bit_count() > cap:
                    return False
            return True
        if self.kind == "graphic":
            parent = list(range(self.params["n_vertices"]))

            def find(x):
                while parent[x] != x:
                    parent[x] = parent[parent[x]]
                    x = parent[x]
                return x

            for i in bit_indices(mask):
                u, v = self.params["edges"][i]
                ru, rv = find(u), find(v)
                if ru == rv:
                    return False
                parent[ru] = rv
            return True
        raise ValueError(f"unknown matroid kind {self.kind!r}")

    def rank(self, mask: int) -> int:
        """Closed-form rank, used as an independent cross-check of the oracle."""
        if self.kind == "uniform":
            return min(mask.bit_count(), self.params["rank"])
        if self.kind == "partition":
            free = mask
            total = 0
            for bm, cap in zip(self.params["blocks"], self.params["capacities"]):
                total += min((mask & bm).bit_count(), cap)
                free &= ~bm
            return total + free.bit_count()
        if self.kind == "graphic":
            # rank = #touched vertices - #components of the edge-induced graph
            parent = {}

            def find(x):
                while parent[x] != x:
                    parent[x] = parent[parent[x]]
                    x = parent[x]
                return x

            comps = 0
            touched = set()
            for i in bit_indices(mask):
                u, v = self.params["edges"][i]
                for w in (u, v):
                    if w not in parent:
                        parent[w] = w
                        touched.add(w)
                        comps += 1
                ru, rv = find(u), find(v)
                if ru != rv:
                    parent[ru] = rv
                    comps -= 1
            return len(touched) - comps

    def family(self) -> FeasibilityFamily:
        return FeasibilityFamily(self.ground, self.independent, True,
                                 f"matroid:{self.kind}", params={"matroid": self})


def k_intersection_family(matroids: Sequence[Matroid]) -> FeasibilityFamily:
    """Common independent sets of k >= 1 matroids on one ground set."""
    if not matroids:
        raise ValueError("need at least one matroid")
    ground = matroids[0].ground
    if any(m.ground is not ground and m.ground != ground for m in matroids):
        raise ValueError("matroids must share the ground set")

    def contains(mask: int) -> bool:
        return all(m.independent(mask) for m in matroids)

    return FeasibilityFamily(ground, contains, True, "k_intersection",
                             params={"matroids": tuple(matroids), "k": len(matroids)})


def b_matching_family(ground: GroundSet, endpoints: dict[str, tuple[str, str]],
                      degree_bounds: dict[str, int]) -> FeasibilityFamily:
    """Degree-bounded edge sets of a graph (a 2-exchange system).

    Ground elements are edges; a set is feasible when every vertex v is
    covered at most degree_bounds[v] times (default bound 1, i.e. matching).
    """
    if set(endpoints) != set(ground.elements):
        raise ValueError("endpoints must cover exactly the ground set")
    verts = sorted({v for uv in endpoints.values() for v in uv})
    bounds = {v: int(degree_bounds.get(v, 1)) for v in verts}
    if any(b < 0 for b in bounds.values()):
        raise ValueError("degree bounds must be non-negative")
    incident = {v: 0 for v in verts}
    for e, (u, v) in endpoints.items():
        if u == v:
            raise ValueError("loops are not supported")
        incident[u] |= 1 << ground.index(e)
        incident[v] |= 1 << ground.index(e)

    def contains(mask: int) -> bool:
        return all((mask & inc).bit_count() <= bounds[v] for v, inc in incident.items())

    return FeasibilityFamily(ground, contains, True, "b_matching",
                             params={"endpoints": dict(endpoints), "bounds": bounds, "k": 2})


def k_exchange_explicit_family(ground: GroundSet, masks: Iterable[int],
                               k: int) -> FeasibilityFamily:
    """Explicitly listed independence system with a claimed exchange parameter.

    The claim is checked by brute force at construction for n <= 8.
    """
    fam = FeasibilityFamily.explicit(ground, masks)
    if not fam.is_down_closed:
        raise ValueError("a k-exchange system must be down-closed")
    if ground.n <= EXCHANGE_CHECK_MAX:
        ok, witness = check_k_exchange(fam, k)
        if not ok:
            raise ValueError(f"family is not a {k}-exchange system; witness {witness}")
    return FeasibilityFamily(ground, fam.contains, True, "k_exchange_explicit",
                             members_list=fam.members(), params={"k": k})


def check_exchange_axiom(m: Matroid):
    """Brute-force check of the matroid augmentation axiom (n <= 8).

    Returns (True, None) or (False, (I, J)) for an independent pair with
    |I| < |J| that admits no augmenting element.
    """
    ground = m.ground
    if ground.n > EXCHANGE_CHECK_MAX:
        raise SizeError(f"exchange-axiom check limited to n <= {EXCHANGE_CHECK_MAX}")
    indep = [mask for mask in range(1 << ground.n) if m.independent(mask)]
    if 0 not in indep:
        return False, (0, 0)
    by_size: dict[int, list[int]] = {}
    for mask in indep:
        by_size.setdefault(mask.bit_count(), []).append(mask)
    for i_mask in indep:
        si = i_mask.bit_count()
        for sj in (s for s in by_size if s > si):
            for j_mask in by_size[sj]:
                gain = j_mask & ~i_mask
                if not any(m.independent(i_mask | (1 << b)) for b in bit_indices(gain)):
                    return False, (i_mask, j_mask)
    return True, None


def check_down_closed(family: FeasibilityFamily, within: Optional[int] = None) -> bool:
    """Exhaustively verify down-closure at desk scale."""
    members = family.members(within)
    member_set = set(members)
    return all(sub in member_set for m in members for sub in iter_submasks(m))


def check_k_exchange(family: FeasibilityFamily, k: int,
                     max_pairs: Optional[int] = None):
    """Brute-force check of the bounded-exchange property with parameter k.

    For every S, T in the family, searches exhaustively for a multiset
    {Y_e subseteq S\\T : e in T\\S} with |Y_e| <= k, every element of S\\T
    used at most k times, and (S \\ union of chosen Y_e) ∪ T' feasible for
    every T' subseteq T\\S.  Exponential; toy instances only.
    """
    members = family.members()
    pairs = 0
    for s_mask in members:
        for t_mask in members:
            add = bit_indices(t_mask & ~s_mask)
            if not add:
                continue
            pairs += 1
            if max_pairs is not None and pairs > max_pairs:
                return True, None
            if not _exchange_multiset_exists(family, s_mask, t_mask, add, k):
                return False, (s_mask, t_mask)
    return True, None


def _exchange_multiset_exists(family, s_mask, t_mask, add, k) -> bool:
    drop_pool = bit_indices(s_mask & ~t_mask)
    candidates = []
    for size in range(min(k, len(drop_pool)) + 1):
        candidates.extend(
            sum(1 << b for b in combo) for combo in combinations(drop_pool, size))

    usage_cap = {b: k for b in drop_pool}

    def feasible_assignment(assign: list[int]) -> bool:
        # condition (iii): every sub-collection of additions keeps feasibility
        for picked in range(1 << len(add)):
            removed = 0
            added = 0
            for pos in range(len(add)):
                if (picked >> pos) & 1:
                    removed |= assign[pos]
                    added |= 1 << add[pos]
            if not family.contains((s_mask & ~removed) | added):
                return False
        return True

    def search(pos: int, counts: dict[int, int], assign: list[int]) -> bool:
        if pos == len(add):
            return feasible_assignment(assign)
        e_bit = 1 << add[pos]
        for y in candidates:
            if not family.contains((s_mask & ~y) | e_bit):
                continue  # prune: T' = {e} already fails
            ok = True
            for b in bit_indices(y):
                if counts[b] + 1 > usage_cap[b]:
                    ok = False
                    break
            if not ok:
                continue
            for b in bit_indices(y):
                counts[b] += 1
            assign.append(y)
            if search(pos + 1, counts, assign):
                return True
            assign.pop()
            for b in bit_indices(y):
                counts[b] -= 1
        return False

    return search(0, {b: 0 for b in drop_pool}, [])


def bipartite_matching_instance(left: Sequence[str], right: Sequence[str],
                                edges: Optional[Sequence[tuple[str, str]]] = None):
    """Bipartite-matching feasibility as the intersection of the two side
    partition matroids.  Returns (ground, family, matroid_left, matroid_right).

    Edge element ids are "u-v".  Defaults to the complete bipartite graph.
    """
    if edges is None:
        edges = [(u, v) for u in left for v in right]
    ids = [f"{u}-{v}" for u, v in edges]
    ground = GroundSet.of(ids)
    left_blocks = [[f"{u}-{v}" for (uu, v) in edges if uu == u] for u in left]
    right_blocks = [[f"{u}-{v}" for (u, vv) in edges if vv == v] for v in right]
    m_left = Matroid.partition(ground, left_blocks, [1] * len(left))
    m_right = Matroid.partition(ground, right_blocks, [1] * len(right))
    return ground, k_intersection_family([m_left, m_right]), m_left, m_right
