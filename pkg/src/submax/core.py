"""Ground-set and oracle primitives shared by every other module.

Subsets of the ground set are represented as int bitmasks over a fixed,
immutable element ordering (n <= 64).  That ordering doubles as the
lexicographic tie-break order used by the brute-force solvers and by the
deterministic linear-optimization oracle in :mod:`submax.hardness`.

All values on the correctness-critical path are exact
:class:`fractions.Fraction` instances; no tolerance enters any guarantee
check.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Optional, Sequence

MAX_GROUND = 64
BRUTE_FORCE_MAX = 20
TABLE_CHECK_MAX = 16


class SizeError(ValueError):
    """An operation was asked to enumerate more than it allows."""


class NegativeValueError(ValueError):
    """A set function produced (or was built from) a negative value."""


def parse_rational(text) -> Fraction:
    """Parse an exact rational from an int or a "p/q" / "p" string.

    Floats are rejected: inputs carry no floating literals.
    """
    if isinstance(text, bool):
        raise ValueError(f"not a rational: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, Fraction):
        return text
    if isinstance(text, float):
        raise ValueError(f"floating literal rejected (write it as p/q): {text!r}")
    if isinstance(text, str):
        return Fraction(text.strip())
    raise ValueError(f"not a rational: {text!r}")


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def bit_indices(mask: int) -> tuple[int, ...]:
    """Indices of the set bits of ``mask``, ascending."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def subset_key(mask: int) -> tuple[int, tuple[int, ...]]:
    """Total order on subsets: smallest cardinality first, then lexicographic
    on the ascending index tuple.  Shared by every arg-max tie-break."""
    return (mask.bit_count(), bit_indices(mask))


def iter_submasks(mask: int) -> Iterator[int]:
    """All 2^popcount submasks of ``mask`` (including 0 and mask itself)."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


@dataclass(frozen=True)
class GroundSet:
    """A fixed, ordered ground set.

    The element ordering is total and immutable; bit i of a subset mask
    refers to ``elements[i]``.
    """

    elements: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.elements)) != len(self.elements):
            raise ValueError("ground-set element identifiers must be distinct")
        if len(self.elements) > MAX_GROUND:
            raise SizeError(f"ground set larger than {MAX_GROUND} elements")
        object.__setattr__(self, "_index", {e: i for i, e in enumerate(self.elements)})

    @classmethod
    def of(cls, elements: Iterable[str]) -> "GroundSet":
        return cls(tuple(elements))

    @property
    def n(self) -> int:
        return len(self.elements)

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def index(self, element: str) -> int:
        return self._index[element]

    def mask_of(self, elements: Iterable[str]) -> int:
        m = 0
        for e in elements:
            m |= 1 << self._index[e]
        return m

    def ids_of(self, mask: int) -> tuple[str, ...]:
        return tuple(self.elements[i] for i in bit_indices(mask))

    def singleton_masks(self, within: Optional[int] = None) -> list[int]:
        within = self.full_mask if within is None else within
        return [1 << i for i in bit_indices(within)]

    def check_mask(self, mask: int) -> int:
        if mask & ~self.full_mask:
            raise ValueError(f"mask {mask:#x} has bits outside the ground set")
        return mask

    def format_set(self, mask: int) -> str:
        return "{" + ",".join(self.ids_of(mask)) + "}"


class SubmodularOracle:
    """Value oracle for a non-negative set function, with call accounting.

    Non-negativity is checked on every call.  The call counter increments by
    exactly one per evaluation and is updated under a lock so concurrent
    evaluation stays consistent.  No values are cached: search
    instrumentation relies on one oracle call per scanned neighbor.
    """

    def __init__(self, ground: GroundSet, evaluator: Callable[[int], Fraction],
                 declared_monotone: bool = False, spec: Optional["FunctionSpec"] = None):
        self.ground = ground
        self._evaluator = evaluator
        self.declared_monotone = declared_monotone
        self.spec = spec
        self._calls = 0
        self._lock = threading.Lock()

    @property
    def call_count(self) -> int:
        return self._calls

    def evaluate(self, mask: int) -> Fraction:
        self.ground.check_mask(mask)
        value = Fraction(self._evaluator(mask))
        if value < 0:
            raise NegativeValueError(
                f"f({self.ground.format_set(mask)}) = {value} < 0")
        with self._lock:
            self._calls += 1
        return value

    __call__ = evaluate

    def table(self) -> list[Fraction]:
        """Materialize all 2^n values (does not touch the call counter)."""
        if self.ground.n > TABLE_CHECK_MAX:
            raise SizeError(f"refusing to materialize a table for n = {self.ground.n}")
        return [Fraction(self._evaluator(m)) for m in range(1 << self.ground.n)]


@dataclass(frozen=True)
class FunctionSpec:
    """Serializable description of a shipped function family."""

    kind: str  # coverage | directed_cut | modular | explicit_table
    params: dict


def modular_function(ground: GroundSet, weights: dict[str, Fraction],
                     offset: Fraction = Fraction(0)) -> SubmodularOracle:
    """f(S) = offset + sum of element weights; monotone and submodular.

    Weights and offset must be non-negative; the offset exercises the
    f(empty) > 0 regime.
    """
    offset = Fraction(offset)
    w = [Fraction(weights.get(e, 0)) for e in ground.elements]
    if offset < 0 or any(x < 0 for x in w):
        raise NegativeValueError("modular weights and offset must be non-negative")

    def ev(mask: int) -> Fraction:
        total = offset
        for i in bit_indices(mask):
            total += w[i]
        return total

    spec = FunctionSpec("modular", {
        "weights": {e: format_rational(weights.get(e, Fraction(0))) for e in ground.elements},
        "offset": format_rational(offset),
    })
    return SubmodularOracle(ground, ev, declared_monotone=True, spec=spec)


def coverage_function(ground: GroundSet, covers: dict[str, Iterable[str]],
                      item_weights: Optional[dict[str, Fraction]] = None) -> SubmodularOracle:
    """Weighted coverage f(S) = total weight of items covered by S."""
    items = sorted({it for c in covers.values() for it in c})
    item_idx = {it: i for i, it in enumerate(items)}
    w = [Fraction(1)] * len(items)
    if item_weights:
        for it, q in item_weights.items():
            if it not in item_idx:
                raise ValueError(f"weight for unknown item {it!r}")
            w[item_idx[it]] = Fraction(q)
    if any(x < 0 for x in w):
        raise NegativeValueError("coverage item weights must be non-negative")
    cover_masks = [0] * ground.n
    for e, its in covers.items():
        m = 0
        for it in its:
            m |= 1 << item_idx[it]
        cover_masks[ground.index(e)] = m

    def ev(mask: int) -> Fraction:
        covered = 0
        for i in bit_indices(mask):
            covered |= cover_masks[i]
        total = Fraction(0)
        for i in bit_indices(covered):
            total += w[i]
        return total

    spec = FunctionSpec("coverage", {
        "covers": {e: sorted(covers.get(e, ())) for e in ground.elements},
        "item_weights": {it: format_rational(q) for it, q in zip(items, w)},
    })
    return SubmodularOracle(ground, ev, declared_monotone=True, spec=spec)


def directed_cut_function(ground: GroundSet,
                          arcs: Sequence[tuple[str, str, Fraction]]) -> SubmodularOracle:
    """f(S) = total weight of arcs leaving S.  Submodular, not monotone.

    Ground-set elements are the vertices of the digraph.
    """
    parsed = []
    for u, v, q in arcs:
        q = Fraction(q)
        if q < 0:
            raise NegativeValueError("cut arc weights must be non-negative")
        parsed.append((ground.index(u), ground.index(v), q))

    def ev(mask: int) -> Fraction:
        total = Fraction(0)
        for iu, iv, q in parsed:
            if (mask >> iu) & 1 and not (mask >> iv) & 1:
                total += q
        return total

    spec = FunctionSpec("directed_cut", {
        "arcs": [[ground.elements[iu], ground.elements[iv], format_rational(q)]
                 for iu, iv, q in parsed],
    })
    return SubmodularOracle(ground, ev, declared_monotone=False, spec=spec)


def explicit_table_function(ground: GroundSet, values: Sequence,
                            declared_monotone: bool = False,
                            declared_submodular: bool = False) -> SubmodularOracle:
    """Set function given by its full 2^n value table, indexed by mask.

    Negative entries are rejected at construction.  When declared submodular
    or monotone, the corresponding property is verified here (n <= 16).
    """
    table = [Fraction(parse_rational(v)) for v in values]
    n = ground.n
    if len(table) != 1 << n:
        raise ValueError(f"table must have 2^{n} entries, got {len(table)}")
    if any(v < 0 for v in table):
        raise NegativeValueError("explicit table contains a negative value")
    if declared_submodular:
        ok, witness = check_submodular(table, n)
        if not ok:
            s, t = witness
            raise ValueError(
                f"table declared submodular but violates it at S={s:#x}, T={t:#x}")
    if declared_monotone:
        for m in range(1 << n):
            for i in range(n):
                if not (m >> i) & 1 and table[m] > table[m | (1 << i)]:
                    raise ValueError("table declared monotone but is not")

    spec = FunctionSpec("explicit_table", {
        "values": [format_rational(v) for v in table],
        "monotone": declared_monotone,
        "submodular": declared_submodular,
    })
    return SubmodularOracle(ground, lambda m: table[m],
                            declared_monotone=declared_monotone, spec=spec)


def check_submodular(table: Sequence[Fraction], n: int):
    """Exact submodularity check for an explicit table (n <= 16).

    Uses the local characterization
    f(S+x) + f(S+y) >= f(S+x+y) + f(S) for all S and distinct x, y not in S,
    which is equivalent to the pairwise inequality; a local violation is
    returned as the violating pair (S+x, S+y).
    """
    if n > TABLE_CHECK_MAX:
        raise SizeError(f"submodularity check limited to n <= {TABLE_CHECK_MAX}")
    if len(table) != 1 << n:
        raise ValueError("table size does not match n")
    for s in range(1 << n):
        free = bit_indices(~s & ((1 << n) - 1))
        for a in range(len(free)):
            x = 1 << free[a]
            fx = table[s | x]
            for b in range(a + 1, len(free)):
                y = 1 << free[b]
                if fx + table[s | y] < table[s | x | y] + table[s]:
                    return False, (s | x, s | y)
    return True, None


class FeasibilityFamily:
    """Membership oracle for a family of feasible subsets.

    ``contains`` must be a pure predicate on masks.  Explicit backends carry
    their member list; oracle backends can still enumerate members by brute
    force at desk scale.
    """

    def __init__(self, ground: GroundSet, contains: Callable[[int], bool],
                 is_down_closed: bool, backend: str,
                 members_list: Optional[Sequence[int]] = None,
                 params: Optional[dict] = None):
        self.ground = ground
        self.contains = contains
        self.is_down_closed = is_down_closed
        self.backend = backend
        self._members = None if members_list is None else tuple(sorted(members_list, key=subset_key))
        self.params = params or {}

    def members(self, within: Optional[int] = None) -> list[int]:
        """All feasible sets (optionally restricted to subsets of ``within``),
        sorted by cardinality then lexicographic order."""
        if self._members is not None:
            if within is None:
                return list(self._members)
            return [m for m in self._members if m & ~within == 0]
        within = self.ground.full_mask if within is None else within
        if within.bit_count() > BRUTE_FORCE_MAX:
            raise SizeError("enumerating an oracle family beyond n = 20")
        found = [m for m in iter_submasks(within) if self.contains(m)]
        found.sort(key=subset_key)
        return found

    def restrict(self, within: int) -> "FeasibilityFamily":
        """The family F ∩ 2^within over the same ground set."""
        members = None if self._members is None else [m for m in self._members if m & ~within == 0]
        return FeasibilityFamily(
            self.ground,
            lambda m, _w=within, _c=self.contains: (m & ~_w == 0) and _c(m),
            self.is_down_closed, self.backend, members, self.params)

    @classmethod
    def explicit(cls, ground: GroundSet, masks: Iterable[int],
                 down_closed: Optional[bool] = None) -> "FeasibilityFamily":
        member_set = frozenset(ground.check_mask(m) for m in masks)
        if not member_set:
            raise ValueError("feasibility family must be non-empty")
        if down_closed is None:
            down_closed = all(sub in member_set
                              for m in member_set for sub in iter_submasks(m))
        elif down_closed and 0 not in member_set:
            raise ValueError("a down-closed family must contain the empty set")
        return cls(ground, member_set.__contains__, down_closed, "explicit",
                   members_list=member_set)


class PruningError(ValueError):
    """Pruning was requested for a family where it is not justified."""


def prune_ground_set(ground: GroundSet, family: FeasibilityFamily,
                     f: SubmodularOracle, within: Optional[int] = None) -> int:
    """Drop elements u with {u} infeasible or f({u}) <= f(empty).

    Only valid for down-closed families: there, submodularity makes every
    such u useless, so the optimum over the reduced ground set is unchanged.
    Returns the mask of surviving elements.
    """
    if not family.is_down_closed:
        raise PruningError("pruning is only justified for down-closed families")
    within = ground.full_mask if within is None else ground.check_mask(within)
    f_empty = f(0)
    kept = 0
    for s in ground.singleton_masks(within):
        if family.contains(s) and f(s) > f_empty:
            kept |= s
    return kept


def brute_force_opt(f: SubmodularOracle, family: FeasibilityFamily,
                    ground: GroundSet, within: Optional[int] = None) -> tuple[int, Fraction]:
    """Reference maximizer of f over the family, by full enumeration.

    Ties are broken by smallest cardinality, then lexicographic order on the
    fixed element numbering.  Enumeration is capped at 20 elements.
    """
    within = ground.full_mask if within is None else ground.check_mask(within)
    if within.bit_count() > BRUTE_FORCE_MAX:
        raise SizeError(f"brute force limited to {BRUTE_FORCE_MAX} elements")
    best_mask = None
    best_value = None
    for m in iter_submasks(within):
        if not family.contains(m):
            continue
        v = f(m)
        if best_value is None or v > best_value or \
                (v == best_value and subset_key(m) < subset_key(best_mask)):
            best_mask, best_value = m, v
    if best_mask is None:
        raise ValueError("feasibility family has no member inside the ground set")
    return best_mask, best_value
