"""Local-search procedures with full instrumentation.

Three searches ship here: plain most-improving-step search for monotone
objectives, the basic pair search whose Delta-halving anchor yields a
two-set bound against every feasible T, and the iterative wrapper that
re-runs the basic search on shrinking ground sets to handle non-monotone
objectives.  Traces record every visited set, every Delta, and the exact
number of oracle evaluations, which tests reconcile against the scanned
neighborhood sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .core import FeasibilityFamily, GroundSet, SubmodularOracle, subset_key
from .neighborhoods import NeighborhoodFunction

# 50-digit bounds on e; used to take outward-safe integral ceilings of ln
_E_LO = Fraction(27182818284590452353602874713526624977572470936999, 10 ** 49)
_E_HI = Fraction(27182818284590452353602874713526624977572470937001, 10 ** 49)


def ceil_ln(x: Fraction) -> int:
    """Smallest integer m with e^m >= x, for x >= 1.

    Evaluated by exact comparison against rational bounds on e; when the
    bounds cannot separate (x astronomically close to a power of e), the
    larger candidate wins so step counts are never under-estimated.
    """
    x = Fraction(x)
    if x < 1:
        raise ValueError("ceil_ln is used for arguments >= 1")
    if x == 1:
        return 0
    m = 1
    hi = _E_HI
    while hi < x:  # e^m definitely below x
        m += 1
        hi *= _E_HI
    # now e^m might reach x; confirm with the lower bound, else round up
    lo = _E_LO ** m
    return m if lo >= x else m + 1


@dataclass
class SearchConfig:
    epsilon: Fraction
    alpha: Fraction
    max_steps_override: Optional[int] = None

    def __post_init__(self):
        self.epsilon = Fraction(self.epsilon)
        self.alpha = Fraction(self.alpha)
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.alpha < 1:
            raise ValueError("alpha must be at least 1")


@dataclass
class StepRecord:
    j: int
    anchor: int
    scanned: int
    value: Fraction
    delta: Fraction


@dataclass
class SearchTrace:
    """Chain of sets visited by most-improving steps.

    sets_visited[j] is S_j; deltas[j] = f(S_{j+1}) - f(S_j); scanned_sizes
    lists every neighborhood scan in order (the initial singleton scan
    included), and oracle_calls is their exact sum.
    """

    sets_visited: list[int] = field(default_factory=list)
    values: list[Fraction] = field(default_factory=list)
    deltas: list[Fraction] = field(default_factory=list)
    scanned_sizes: list[int] = field(default_factory=list)
    records: list[StepRecord] = field(default_factory=list)
    anchor_index: int = 0
    steps: int = 0

    @property
    def oracle_calls(self) -> int:
        return sum(self.scanned_sizes)


@dataclass
class MostImprovingStep:
    next_set: int
    next_value: Fraction
    current_value: Fraction
    delta: Fraction
    scanned: int


def most_improving_step(f: SubmodularOracle, N: NeighborhoodFunction,
                        S: int) -> MostImprovingStep:
    """Move to the best set of N(S); never decreases f since S is its own
    neighbor.  Ties go to the smallest cardinality, then lexicographic order.
    Every neighbor costs exactly one oracle call."""
    best = None
    best_val = None
    current_val = None
    neighbors = N.enumerate(S)
    for A in neighbors:
        v = f(A)
        if A == S:
            current_val = v
        if best_val is None or v > best_val or \
                (v == best_val and subset_key(A) < subset_key(best)):
            best, best_val = A, v
    return MostImprovingStep(best, best_val, current_val,
                             best_val - current_val, len(neighbors))


def _best_feasible_singleton(f: SubmodularOracle, family: FeasibilityFamily,
                             ground: GroundSet, within: int):
    """(mask, value, scanned) for the best feasible singleton, or None."""
    best = None
    best_val = None
    scanned = 0
    for s in ground.singleton_masks(within):
        if not family.contains(s):
            continue
        v = f(s)
        scanned += 1
        if best_val is None or v > best_val or \
                (v == best_val and subset_key(s) < subset_key(best)):
            best, best_val = s, v
    return best, best_val, scanned


@dataclass
class MonotoneSearchResult:
    final_set: int
    final_value: Fraction
    step_budget: int
    trace: SearchTrace


def monotone_local_search(ground: GroundSet, family: FeasibilityFamily,
                          N: NeighborhoodFunction, f: SubmodularOracle,
                          epsilon: Fraction, start: Optional[int] = None,
                          within: Optional[int] = None,
                          alpha: Optional[Fraction] = None,
                          max_steps_override: Optional[int] = None) -> MonotoneSearchResult:
    """Most-improving-step search for monotone f.

    Performs |E| * ceil(ln((alpha+1+epsilon)/epsilon)) steps (the bound that
    needs no knowledge of the optimum; stopping early only at an exact local
    optimum, which further steps cannot leave).  The final set satisfies
    (alpha + 1 + epsilon) f(S) >= f(OPT) when N is alpha-conic.
    """
    within = ground.full_mask if within is None else ground.check_mask(within)
    alpha = N.claimed_alpha if alpha is None else Fraction(alpha)
    cfg = SearchConfig(epsilon=epsilon, alpha=alpha,
                       max_steps_override=max_steps_override)
    trace = SearchTrace()
    if start is None:
        start, start_val, scanned = _best_feasible_singleton(f, family, ground, within)
        if start is None:
            if not family.contains(0):
                raise ValueError("no feasible singleton and the empty set is infeasible")
            start, start_val, scanned = 0, f(0), 1
        trace.scanned_sizes.append(scanned)
    else:
        if not family.contains(start):
            raise ValueError("start set must be feasible")
        start_val = f(start)
        trace.scanned_sizes.append(1)
    n_e = within.bit_count()
    budget = n_e * ceil_ln((cfg.alpha + 1 + cfg.epsilon) / cfg.epsilon)
    if cfg.max_steps_override is not None:
        budget = cfg.max_steps_override
    restricted = N.restrict(within)
    current, current_val = start, start_val
    trace.sets_visited.append(current)
    trace.values.append(current_val)
    for j in range(budget):
        step = most_improving_step(f, restricted, current)
        trace.scanned_sizes.append(step.scanned)
        if step.next_set == current:
            break  # exact local optimum: every further step stays put
        trace.deltas.append(step.delta)
        trace.records.append(StepRecord(j, 0, step.scanned, step.next_value, step.delta))
        current, current_val = step.next_set, step.next_value
        trace.sets_visited.append(current)
        trace.values.append(current_val)
        trace.steps += 1
    return MonotoneSearchResult(current, current_val, budget, trace)


@dataclass
class BasicSearchResult:
    S: int
    S_value: Fraction
    Q: int
    trace: SearchTrace


def basic_local_search(ground: GroundSet, family: FeasibilityFamily,
                       alpha: Fraction, N: NeighborhoodFunction,
                       f: SubmodularOracle, epsilon: Fraction,
                       within: Optional[int] = None,
                       max_steps_override: Optional[int] = None) -> BasicSearchResult:
    """Most-improving-step search returning a pair (S, Q) that satisfies
    (alpha + 1 + epsilon) f(S) >= f(Q|T) + alpha f(Q&T) for every feasible T
    when N is alpha-conic and the family is down-closed.

    Starts from the best singleton of the (pruned) ground set.  The anchor i
    trails the step counter j: it advances whenever the current Delta has
    halved since the anchor was set, and if 2|E| steps pass without a
    halving, the pair (S_j, S_i) is good enough and is returned early.
    """
    cfg = SearchConfig(epsilon=epsilon, alpha=alpha,
                       max_steps_override=max_steps_override)
    within = ground.full_mask if within is None else ground.check_mask(within)
    n_e = within.bit_count()
    if n_e == 0:
        raise ValueError("empty ground set; callers decide what that means")
    trace = SearchTrace()
    restricted = N.restrict(within)

    s0, f0, scanned = _best_feasible_singleton(f, family, ground, within)
    if s0 is None:
        raise ValueError("no feasible singleton; prune the ground set first")
    trace.scanned_sizes.append(scanned)

    sets = [s0]
    values = [f0]
    deltas: list[Fraction] = []

    def advance(j_idx: int, anchor: int):
        step = most_improving_step(f, restricted, sets[-1])
        trace.scanned_sizes.append(step.scanned)
        sets.append(step.next_set)
        values.append(step.next_value)
        deltas.append(step.delta)
        trace.records.append(StepRecord(j_idx, anchor, step.scanned,
                                        values[j_idx], deltas[j_idx]))

    advance(0, 0)  # S_1 and Delta_0
    i = 0
    j = 0
    threshold = cfg.epsilon / (cfg.alpha * n_e)
    # trace.steps counts executions of this while loop
    while deltas[j] > threshold * values[j]:
        trace.steps += 1
        if cfg.max_steps_override is not None and trace.steps > cfg.max_steps_override:
            raise RuntimeError("basic search exceeded its step override")
        if deltas[j] <= deltas[i] / 2:
            i = j
        if j - i >= 2 * n_e:
            break  # enough steps without a Delta halving: (S_j, S_i) is good
        # advance j first, then take the most-improving step from the current
        # S_j; Delta_j = f(S_{j+1}) - f(S_j) by construction
        j += 1
        advance(j, i)
    else:
        # while-condition exit: the pair degenerates to (S_j, S_j)
        i = j
    trace.sets_visited = sets
    trace.values = values
    trace.deltas = deltas
    trace.anchor_index = i
    return BasicSearchResult(sets[j], values[j], sets[i], trace)


@dataclass
class IterativeRound:
    ground_mask: int
    S: int
    S_value: Fraction
    Q: int
    trace: Optional[SearchTrace]


@dataclass
class IterativeTrace:
    rounds: list[IterativeRound] = field(default_factory=list)
    winner_index: int = 0

    @property
    def oracle_calls(self) -> int:
        return sum(r.trace.oracle_calls for r in self.rounds if r.trace is not None)

    @property
    def total_steps(self) -> int:
        return sum(r.trace.steps for r in self.rounds if r.trace is not None)


@dataclass
class IterativeSearchResult:
    S: int
    S_value: Fraction
    trace: IterativeTrace


def iterative_local_search(ground: GroundSet, family: FeasibilityFamily,
                           alpha: Fraction, N: NeighborhoodFunction,
                           f: SubmodularOracle, epsilon: Fraction,
                           within: Optional[int] = None) -> IterativeSearchResult:
    """floor(alpha)+1 rounds of the basic search on shrinking ground sets.

    Round i runs on E_i (E_1 = E; E_{i+1} = E_i minus that round's Q_i, so
    the Q_i are pairwise disjoint and the E_i form a chain); an empty E_i
    contributes the empty pair.  The best round winner S satisfies
    (floor(alpha)+1)(alpha+1+epsilon) f(S) >= floor(alpha) f(T) for every
    feasible T when N is alpha-conic and the family is down-closed.
    """
    alpha = Fraction(alpha)
    epsilon = Fraction(epsilon)
    within = ground.full_mask if within is None else ground.check_mask(within)
    rounds = math.floor(alpha) + 1
    trace = IterativeTrace()
    e_mask = within
    for _ in range(rounds):
        if e_mask == 0:
            # the restriction to an empty ground set leaves {empty} to scan
            empty_trace = SearchTrace(sets_visited=[0], values=[f(0)],
                                      scanned_sizes=[1])
            trace.rounds.append(IterativeRound(e_mask, 0, empty_trace.values[0],
                                               0, empty_trace))
        else:
            result = basic_local_search(ground, family.restrict(e_mask), alpha,
                                        N, f, epsilon, within=e_mask)
            trace.rounds.append(IterativeRound(
                e_mask, result.S, result.S_value, result.Q, result.trace))
            e_mask &= ~trace.rounds[-1].Q
    best_idx = 0
    for idx, rnd in enumerate(trace.rounds):
        if rnd.S_value > trace.rounds[best_idx].S_value:
            best_idx = idx
    trace.winner_index = best_idx
    winner = trace.rounds[best_idx]
    return IterativeSearchResult(winner.S, winner.S_value, trace)
