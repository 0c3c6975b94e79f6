"""Simulator of the linear-optimization-oracle hardness construction.

A ground set of n = sqrt_n^2 elements is split block-major into sqrt_n
blocks of sqrt_n elements; a secret transversal picks one uniform element
per block.  Feasible sets either touch at most beta blocks (standard) or
hide inside the secret transversal (special), and the objective counts
touched blocks.  The linear-optimization oracle answers argmax w(F) with a
deterministic tie-breaking rule that prefers standard sets, then smallest
cardinality, then the lexicographically smallest set; an adversary that only
sees oracle answers almost never finds a special set.
"""

from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import mpmath

from .core import (
    FeasibilityFamily, FunctionSpec, GroundSet, SizeError, SubmodularOracle,
    bit_indices, subset_key,
)

EXACT_DETECTION_MAX_SQRT = 8
STANDARD, SPECIAL = "standard", "special"


def beta_from_c(n: int, c: int) -> int:
    """beta = c * ceil(log n / log log n), natural logs.

    Defined for n >= 16 (below that, log log n is too small for the formula
    to make sense; pass beta explicitly instead).  The ratio of logarithms
    is never an exact integer for integral n >= 2 (log n is transcendental),
    so a 60-digit evaluation cannot misround the ceiling.
    """
    if n < 16:
        raise ValueError("the beta formula needs n >= 16; give beta explicitly")
    if c < 1:
        raise ValueError("c must be a positive integer")
    with mpmath.workdps(60):
        ratio = mpmath.log(n) / mpmath.log(mpmath.log(n))
        return c * int(mpmath.ceil(ratio))


@dataclass(frozen=True)
class HardnessInstance:
    """One sampled instance of the block construction."""

    ground: GroundSet
    sqrt_n: int
    blocks: tuple[int, ...]      # block masks, block-major element order
    secret: int                  # mask of the secret transversal
    beta: int
    c: Optional[int] = None
    d: Optional[int] = None
    seed: Optional[int] = None

    @property
    def n(self) -> int:
        return self.sqrt_n * self.sqrt_n

    def coverage(self, mask: int) -> int:
        """Number of blocks the set touches; this is the objective."""
        return sum(1 for bm in self.blocks if mask & bm)

    def oracle(self) -> SubmodularOracle:
        spec = FunctionSpec("hardness_coverage", {"sqrt_n": self.sqrt_n})
        return SubmodularOracle(self.ground, lambda m: Fraction(self.coverage(m)),
                                declared_monotone=True, spec=spec)

    def membership(self, mask: int) -> tuple[bool, Optional[str]]:
        """(feasible, class tag).  Feasible sets with objective value at most
        beta are standard; the rest hide inside the secret set and are special."""
        self.ground.check_mask(mask)
        touched = self.coverage(mask)
        if touched <= self.beta:
            return True, STANDARD
        if mask & ~self.secret == 0:
            return True, SPECIAL
        return False, None

    def family(self) -> FeasibilityFamily:
        return FeasibilityFamily(
            self.ground, lambda m: self.membership(m)[0], True, "hardness",
            params={"instance": self})

    def optimum(self) -> tuple[int, Fraction]:
        """The secret set is the unique maximizer, with value sqrt_n."""
        return self.secret, Fraction(self.sqrt_n)


def generate_instance(sqrt_n: int, c: Optional[int] = None,
                      beta: Optional[int] = None, d: Optional[int] = None,
                      seed: int = 0) -> HardnessInstance:
    """Sample an instance: block-major element ids s<i>e<j>, one uniform
    secret element per block.  beta comes from an explicit override, from c,
    or from d via c = 2d + 2.  Deterministic given the seed."""
    if sqrt_n < 2:
        raise ValueError("sqrt_n must be at least 2")
    n = sqrt_n * sqrt_n
    ids = [f"s{i + 1}e{j + 1}" for i in range(sqrt_n) for j in range(sqrt_n)]
    ground = GroundSet.of(ids)
    blocks = tuple(((1 << sqrt_n) - 1) << (i * sqrt_n) for i in range(sqrt_n))
    if beta is None:
        if c is None:
            if d is None:
                raise ValueError("give beta, c, or d")
            c = 2 * d + 2
        beta = beta_from_c(n, c)
    if beta < 1:
        raise ValueError("beta must be at least 1")
    rng = random.Random(seed)
    secret = 0
    for i in range(sqrt_n):
        secret |= 1 << (i * sqrt_n + rng.randrange(sqrt_n))
    return HardnessInstance(ground, sqrt_n, blocks, secret, beta, c, d, seed)


def _clean_weights(inst: HardnessInstance, w: Sequence[Fraction],
                   auto_clamp: bool) -> list[Fraction]:
    if len(w) != inst.n:
        raise ValueError("weight vector length must equal the ground-set size")
    w = [Fraction(v) for v in w]
    if any(v < 0 for v in w):
        if not auto_clamp:
            raise ValueError("negative weights rejected (pass auto_clamp=True to use max(w,0))")
        w = [max(v, Fraction(0)) for v in w]
    return w


def _block_stats(inst: HardnessInstance, w: Sequence[Fraction]):
    """Per block: (positive-weight sum, positive count, block index, positive mask)."""
    stats = []
    for idx, bm in enumerate(inst.blocks):
        pos_mask = 0
        total = Fraction(0)
        count = 0
        for i in bit_indices(bm):
            if w[i] > 0:
                pos_mask |= 1 << i
                total += w[i]
                count += 1
        stats.append((total, count, idx, pos_mask))
    return stats


def max_standard_value(inst: HardnessInstance, w: Sequence[Fraction]) -> Fraction:
    """max w(U) over standard feasible U: the beta largest positive block sums."""
    sums = sorted((t[0] for t in _block_stats(inst, w)), reverse=True)
    return sum(sums[:inst.beta], Fraction(0))


def linopt_oracle(inst: HardnessInstance, w: Sequence[Fraction],
                  auto_clamp: bool = False) -> int:
    """The deterministic linear-optimization oracle.

    Maximizes w(F) over the feasible family; among optima it disregards
    special sets whenever a standard optimum exists, then takes the smallest
    cardinality, then the lexicographically minimal set under the block-major
    numbering.  Polynomial-time realization: the best standard set takes the
    positive-weight elements of the best at-most-beta blocks, where blocks
    are ordered by (descending positive sum, ascending positive count,
    ascending block index) -- positive count before index because smaller
    support means smaller cardinality, which outranks lexicographic order.
    The special side can win only strictly, in which case the positive part
    of the secret set necessarily has more than beta elements and is the
    unique smallest special optimum.
    """
    w = _clean_weights(inst, w, auto_clamp)
    stats = [t for t in _block_stats(inst, w) if t[0] > 0]
    stats.sort(key=lambda t: (-t[0], t[1], t[2]))
    chosen = stats[:min(inst.beta, len(stats))]
    std_value = sum((t[0] for t in chosen), Fraction(0))
    std_mask = 0
    for t in chosen:
        std_mask |= t[3]
    special_value = sum((w[i] for i in bit_indices(inst.secret)), Fraction(0))
    if special_value > std_value:
        special_mask = 0
        for i in bit_indices(inst.secret):
            if w[i] > 0:
                special_mask |= 1 << i
        return special_mask
    return std_mask


def linopt_brute_force(inst: HardnessInstance, w: Sequence[Fraction],
                       auto_clamp: bool = False) -> int:
    """Reference oracle: full enumeration of 2^n subsets with the identical
    tie-breaking rule.  Independent of the polynomial-time construction."""
    if inst.n > 20:
        raise SizeError("brute-force oracle limited to n <= 20")
    w = _clean_weights(inst, w, auto_clamp)
    half = inst.n // 2
    lo_bits, hi_bits = half, inst.n - half
    lo_sum = [Fraction(0)] * (1 << lo_bits)
    for m in range(1, 1 << lo_bits):
        low = m & -m
        lo_sum[m] = lo_sum[m ^ low] + w[low.bit_length() - 1]
    hi_sum = [Fraction(0)] * (1 << hi_bits)
    for m in range(1, 1 << hi_bits):
        low = m & -m
        hi_sum[m] = hi_sum[m ^ low] + w[half + low.bit_length() - 1]

    best = None
    best_rank = None
    for mask in range(1 << inst.n):
        feasible, tag = inst.membership(mask)
        if not feasible:
            continue
        value = lo_sum[mask & ((1 << lo_bits) - 1)] + hi_sum[mask >> lo_bits]
        rank = (-value, 0 if tag == STANDARD else 1, mask.bit_count(),
                bit_indices(mask))
        if best_rank is None or rank < best_rank:
            best, best_rank = mask, rank
    return best


def normalize_weights(inst: HardnessInstance, w: Sequence[Fraction]) -> list[Fraction]:
    """Per-block normalization: each weight is divided by its block total, so
    every block sums to 0 or 1.  Preserves which side (standard or special)
    wins strictly."""
    w = _clean_weights(inst, w, auto_clamp=False)
    out = list(w)
    for bm in inst.blocks:
        idxs = bit_indices(bm)
        total = sum((w[i] for i in idxs), Fraction(0))
        for i in idxs:
            out[i] = w[i] / total if total > 0 else Fraction(0)
        block_sum = sum((out[i] for i in idxs), Fraction(0))
        assert block_sum in (Fraction(0), Fraction(1))
    return out


@dataclass(frozen=True)
class DetectionEstimate:
    probability: Fraction
    exact: bool
    trials: Optional[int]
    standard_max: Fraction


def detection_probability(inst: HardnessInstance, w: Sequence[Fraction],
                          trials: Optional[int] = None, exact: bool = False,
                          seed: int = 0) -> DetectionEstimate:
    """Probability that a fresh uniform transversal outweighs every standard
    set: Pr[w(T') > max standard value] over independent per-block choices.

    Exact mode convolves the per-block weight distributions (the blocks are
    independent), capped at sqrt_n <= 8; Monte-Carlo mode draws `trials`
    transversals with a seeded RNG.  Both are deterministic given the seed.
    """
    w = _clean_weights(inst, w, auto_clamp=False)
    std = max_standard_value(inst, w)
    if exact:
        if inst.sqrt_n > EXACT_DETECTION_MAX_SQRT:
            raise SizeError(f"exact mode limited to sqrt_n <= {EXACT_DETECTION_MAX_SQRT}")
        dist: dict[Fraction, Fraction] = {Fraction(0): Fraction(1)}
        pick = Fraction(1, inst.sqrt_n)
        for bm in inst.blocks:
            new: dict[Fraction, Fraction] = defaultdict(Fraction)
            for total, p in dist.items():
                for i in bit_indices(bm):
                    new[total + w[i]] += p * pick
            dist = dict(new)
        prob = sum((p for total, p in dist.items() if total > std), Fraction(0))
        return DetectionEstimate(prob, True, None, std)
    if trials is None or trials < 1:
        raise ValueError("Monte-Carlo mode needs trials >= 1")
    rng = random.Random(seed)
    block_indices = [bit_indices(bm) for bm in inst.blocks]
    hits = 0
    for _ in range(trials):
        total = Fraction(0)
        for idxs in block_indices:
            total += w[idxs[rng.randrange(inst.sqrt_n)]]
        if total > std:
            hits += 1
    return DetectionEstimate(Fraction(hits, trials), False, trials, std)


def block_uniform_weights(inst: HardnessInstance, k: int) -> list[Fraction]:
    """All-ones on the first k blocks, zero elsewhere."""
    w = [Fraction(0)] * inst.n
    for bm in inst.blocks[:k]:
        for i in bit_indices(bm):
            w[i] = Fraction(1)
    return w


def one_per_block_weights(inst: HardnessInstance, k: int) -> list[Fraction]:
    """Weight 1 on the first element of each of the first k blocks.

    After the per-block normalization this is the extremal weight shape: a
    unit block weight concentrated on a single element maximizes the chance
    that a random transversal picks it up.
    """
    w = [Fraction(0)] * inst.n
    for bm in inst.blocks[:k]:
        w[bit_indices(bm)[0]] = Fraction(1)
    return w


def detection_curve(inst: HardnessInstance, trials: int, seed: int = 0,
                    exact: bool = True) -> list[dict]:
    """Detection probabilities for two weight families, k = 0..sqrt_n blocks.

    "full_blocks" puts weight on whole blocks (probability 0 whenever the
    number of weighted blocks is at most beta, and in fact always for this
    shape); "one_per_block" concentrates each block's weight on one element,
    the extremal shape after normalization, giving the nonzero tail curve.
    Emitted for inspection: the asymptotic bound itself is not checkable at
    desk scale.
    """
    rows = []
    for family_name, maker in (("full_blocks", block_uniform_weights),
                               ("one_per_block", one_per_block_weights)):
        for k in range(inst.sqrt_n + 1):
            w = maker(inst, k)
            mc = detection_probability(inst, w, trials=trials,
                                       seed=seed + k + (0 if family_name == "full_blocks" else 10 ** 6))
            row = {"weight_family": family_name, "k_blocks": k,
                   "standard_max": mc.standard_max,
                   "mc_probability": mc.probability, "trials": trials}
            if exact and inst.sqrt_n <= EXACT_DETECTION_MAX_SQRT:
                row["exact_probability"] = detection_probability(inst, w, exact=True).probability
            rows.append(row)
    return rows


@dataclass(frozen=True)
class InstanceView:
    """What an adversary is allowed to see: everything but the secret."""

    ground: GroundSet
    sqrt_n: int
    n: int
    beta: int
    blocks: tuple[int, ...]


@dataclass
class AdversaryOutcome:
    trial: int
    queries_used: int
    detected_special: bool
    best_value: Fraction
    ratio_to_opt: Fraction
    recovered_secret: bool


@dataclass
class AdversaryReport:
    strategy: str
    sqrt_n: int
    beta: int
    query_budget: int
    outcomes: list[AdversaryOutcome] = field(default_factory=list)

    @property
    def detection_frequency(self) -> Fraction:
        if not self.outcomes:
            return Fraction(0)
        return Fraction(sum(1 for o in self.outcomes if o.detected_special),
                        len(self.outcomes))


Strategy = Callable[[InstanceView, random.Random, Callable, int], None]


def strategy_random_weights(view: InstanceView, rng: random.Random,
                            ask: Callable, budget: int) -> None:
    """Independent uniform integer weights in [0, n] per query."""
    for _ in range(budget):
        w = [Fraction(rng.randrange(0, view.n + 1)) for _ in range(view.n)]
        _, tag = ask(w)
        if tag == SPECIAL:
            return


def strategy_greedy_probe(view: InstanceView, rng: random.Random,
                          ask: Callable, budget: int) -> None:
    """Probe all-ones first, then pile weight n on every element the oracle
    has ever returned, with a random extra element to keep exploring."""
    seen = 0
    for q in range(budget):
        if q == 0 or seen == 0:
            w = [Fraction(1)] * view.n
        else:
            boosted = seen | (1 << rng.randrange(view.n))
            w = [Fraction(view.n if (boosted >> i) & 1 else 1) for i in range(view.n)]
        mask, tag = ask(w)
        if tag == SPECIAL:
            return
        seen |= mask


BUILTIN_STRATEGIES: dict[str, Strategy] = {
    "random-weights": strategy_random_weights,
    "greedy-probe": strategy_greedy_probe,
}


def recovery_weights(view: InstanceView, found: int) -> list[Fraction]:
    """Weights that force the oracle to reveal the whole secret set once any
    special set is in hand: n on the found set, 1 elsewhere."""
    return [Fraction(view.n if (found >> i) & 1 else 1) for i in range(view.n)]


def run_adversary(sqrt_n: int, query_budget: int, trials: int,
                  strategy: str | Strategy = "random-weights",
                  beta: Optional[int] = None, c: Optional[int] = None,
                  d: Optional[int] = None, seed: int = 0) -> AdversaryReport:
    """Run a query strategy against freshly sampled instances.

    Per trial: the strategy spends its budget on oracle calls; if any answer
    is special, one extra recovery call (if budget remains) retrieves the
    secret set.  The adversary's output is its best feasible discovery, never
    worse than the canonical standard guess (the first beta blocks).
    """
    if query_budget < 0:
        raise ValueError("query budget must be non-negative")
    if trials < 1:
        raise ValueError("need at least one trial")
    strat = BUILTIN_STRATEGIES[strategy] if isinstance(strategy, str) else strategy
    name = strategy if isinstance(strategy, str) else getattr(strategy, "__name__", "custom")
    report = None
    for trial in range(trials):
        inst = generate_instance(sqrt_n, c=c, beta=beta, d=d,
                                 seed=(seed * 1_000_003 + trial))
        if report is None:
            report = AdversaryReport(name, sqrt_n, inst.beta, query_budget)
        view = InstanceView(inst.ground, inst.sqrt_n, inst.n, inst.beta, inst.blocks)
        rng = random.Random(f"adversary:{seed}:{trial}")
        state = {"queries": 0, "best": None, "special": None}

        def ask(w, _inst=inst, _state=state):
            if _state["queries"] >= query_budget:
                raise RuntimeError("query budget exhausted")
            _state["queries"] += 1
            answer = linopt_oracle(_inst, w, auto_clamp=True)
            _, tag = _inst.membership(answer)
            value = Fraction(_inst.coverage(answer))
            if _state["best"] is None or value > _state["best"][1]:
                _state["best"] = (answer, value)
            if tag == SPECIAL and _state["special"] is None:
                _state["special"] = answer
            return answer, tag

        strat(view, rng, ask, query_budget)
        recovered = False
        if state["special"] is not None and state["queries"] < query_budget:
            full, _ = ask(recovery_weights(view, state["special"]))
            recovered = full == inst.secret
        guess_mask = 0
        for bm in inst.blocks[:inst.beta]:
            guess_mask |= bm
        guess_value = Fraction(inst.coverage(guess_mask))
        best_value = guess_value if state["best"] is None else max(state["best"][1], guess_value)
        report.outcomes.append(AdversaryOutcome(
            trial, state["queries"], state["special"] is not None,
            best_value, best_value / Fraction(inst.sqrt_n), recovered))
    return report
