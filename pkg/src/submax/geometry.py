"""Exact rational LP core and the shifted-cone machinery.

The simplex here is a dense two-phase tableau over fractions.Fraction with
Bland's anti-cycling rule, so every answer is exact and every OPTIMAL answer
is a basic (vertex) solution.  On top of it sit: cone-membership tests with
sparse lambda-certificates, the certified decomposition inequality for
submodular functions, the improving-step dichotomy, combinatorial-polytope
vertex adjacency, and the cone down-closure property used by swap
neighborhoods of independence systems.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .core import (
    FeasibilityFamily, GroundSet, SizeError, SubmodularOracle,
    bit_indices, subset_key,
)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

ADJACENCY_FAMILY_MAX = 4096
_MAX_PIVOTS = 200_000

LE, GE, EQ = "<=", ">=", "=="


class PreconditionError(ValueError):
    """A geometric precondition (cone membership, box bounds, ...) fails."""


@dataclass
class LPResult:
    status: str
    x: Optional[list[Fraction]] = None
    value: Optional[Fraction] = None
    basis: Optional[list[int]] = None  # variable indices that are basic

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def lp_solve(objective: Sequence[Fraction],
             constraints: Sequence[tuple[Sequence[Fraction], str, Fraction]],
             sense: str = "max") -> LPResult:
    """Solve max/min c.x subject to linear constraints and x >= 0, exactly.

    Each constraint is (coefficients, relation, rhs) with relation one of
    "<=", ">=", "==".  All variables are implicitly non-negative.  Returns an
    LPResult whose OPTIMAL solutions are basic: at most one nonzero per
    constraint row.
    """
    nvars = len(objective)
    c = [Fraction(v) for v in objective]
    for coeffs, rel, _ in constraints:
        if len(coeffs) != nvars:
            raise ValueError("constraint dimension does not match the objective")
        if rel not in (LE, GE, EQ):
            raise ValueError(f"unknown relation {rel!r}")
    if sense not in ("max", "min"):
        raise ValueError("sense must be 'max' or 'min'")

    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    kinds: list[str] = []
    for coeffs, rel, b in constraints:
        row = [Fraction(v) for v in coeffs]
        b = Fraction(b)
        if b < 0:
            row = [-v for v in row]
            b = -b
            rel = {LE: GE, GE: LE, EQ: EQ}[rel]
        rows.append(row)
        rhs.append(b)
        kinds.append(rel)

    m = len(rows)
    # slack / surplus columns
    n_slack = sum(1 for k in kinds if k in (LE, GE))
    total = nvars + n_slack
    art_rows = [i for i, k in enumerate(kinds) if k in (GE, EQ)]
    n_art = len(art_rows)
    width = total + n_art

    A = [row + [Fraction(0)] * (n_slack + n_art) for row in rows]
    basis = [-1] * m
    sl = nvars
    art = total
    for i, k in enumerate(kinds):
        if k == LE:
            A[i][sl] = Fraction(1)
            basis[i] = sl
            sl += 1
        elif k == GE:
            A[i][sl] = Fraction(-1)
            sl += 1
            A[i][art] = Fraction(1)
            basis[i] = art
            art += 1
        else:
            A[i][art] = Fraction(1)
            basis[i] = art
            art += 1
    b = list(rhs)
    banned = [False] * width

    def pivot(r: list[Fraction], i: int, j: int):
        piv = A[i][j]
        Ai = A[i]
        if piv != 1:
            inv = Fraction(1) / piv
            A[i] = Ai = [v * inv for v in Ai]
            b[i] *= inv
        for k in range(len(A)):
            if k == i:
                continue
            f = A[k][j]
            if f:
                A[k] = [vk - f * vi for vk, vi in zip(A[k], Ai)]
                b[k] -= f * b[i]
        f = r[j]
        if f:
            for jj in range(width):
                if Ai[jj]:
                    r[jj] -= f * Ai[jj]
        basis[i] = j

    def run(cost: list[Fraction]):
        """Minimize cost.x from the current basis; returns (status, objval).

        Bland's rule throughout: smallest eligible entering index, ties in
        the ratio test broken by smallest basic-variable index.
        """
        r = list(cost)
        for i, bv in enumerate(basis):
            f = r[bv]
            if f:
                Ai = A[i]
                for j in range(width):
                    if Ai[j]:
                        r[j] -= f * Ai[j]
        for _ in range(_MAX_PIVOTS):
            enter = -1
            for j in range(width):
                if not banned[j] and r[j] < 0:
                    enter = j
                    break
            if enter < 0:
                val = sum((cost[bv] * b[i] for i, bv in enumerate(basis) if cost[bv]),
                          Fraction(0))
                return OPTIMAL, val
            leave = -1
            best = None
            for i in range(len(A)):
                aij = A[i][enter]
                if aij > 0:
                    ratio = b[i] / aij
                    if best is None or ratio < best or \
                            (ratio == best and basis[i] < basis[leave]):
                        best = ratio
                        leave = i
            if leave < 0:
                return UNBOUNDED, None
            pivot(r, leave, enter)
        raise RuntimeError("simplex exceeded the pivot safety cap")

    if n_art:
        cost1 = [Fraction(0)] * width
        for j in range(total, width):
            cost1[j] = Fraction(1)
        status, val1 = run(cost1)
        if status != OPTIMAL:  # phase 1 is bounded below by 0
            raise RuntimeError("phase 1 cannot be unbounded")
        if val1 != 0:
            return LPResult(INFEASIBLE)
        # drive leftover artificials out of the basis, or drop their rows
        for j in range(total, width):
            banned[j] = True
        drop = []
        for i in range(len(A)):
            if basis[i] >= total:
                pivot_col = next((j for j in range(total) if A[i][j] != 0), None)
                if pivot_col is None:
                    drop.append(i)  # redundant constraint
                else:
                    pivot([Fraction(0)] * width, i, pivot_col)
        for i in sorted(drop, reverse=True):
            del A[i], b[i], basis[i]

    cost2 = [Fraction(0)] * width
    for j in range(nvars):
        cost2[j] = c[j] if sense == "min" else -c[j]
    status, _ = run(cost2)
    if status != OPTIMAL:
        return LPResult(UNBOUNDED)

    x = [Fraction(0)] * nvars
    for i, bv in enumerate(basis):
        if bv < nvars:
            x[bv] = b[i]
    value = sum((ci * xi for ci, xi in zip(c, x)), Fraction(0))
    return LPResult(OPTIMAL, x=x, value=value, basis=sorted(basis))


@dataclass(frozen=True)
class ConeCertificate:
    """Non-negative coefficients witnessing the cone decomposition

        sum_A lambda_A (chi^A - chi^S) = chi^T + (alpha-1) chi^(S&T) - alpha chi^S.

    Only strictly positive coefficients are stored; basicness of the LP
    solution bounds their number by |E|.
    """

    S: int
    T: int
    alpha: Fraction
    coefficients: dict[int, Fraction]

    @property
    def support_size(self) -> int:
        return sum(1 for v in self.coefficients.values() if v > 0)

    @property
    def lambda_total(self) -> Fraction:
        return sum(self.coefficients.values(), Fraction(0))

    def residual(self, ground: GroundSet) -> list[Fraction]:
        """Left side minus right side of the defining equation, per coordinate."""
        res = [Fraction(0)] * ground.n
        s, t, a = self.S, self.T, self.alpha
        for A, lam in self.coefficients.items():
            for i in bit_indices(A & ~s):
                res[i] += lam
            for i in bit_indices(s & ~A):
                res[i] -= lam
        for i in range(ground.n):
            bit = 1 << i
            target = Fraction(0)
            if t & bit:
                target += 1
            if s & t & bit:
                target += a - 1
            if s & bit:
                target -= a
            res[i] -= target
        return res

    def is_valid(self, ground: GroundSet) -> bool:
        return (all(v >= 0 for v in self.coefficients.values())
                and self.support_size <= ground.n
                and all(r == 0 for r in self.residual(ground)))


def cone_membership(ground: GroundSet, S: int, T: int, neighbors: Sequence[int],
                    alpha: Fraction) -> Optional[ConeCertificate]:
    """Certificate that (1/alpha)(chi^T + (alpha-1) chi^(S&T)) lies in the
    shifted cone at chi^S spanned by the neighbor directions, or None.

    Requires alpha >= 1 and S among the neighbors.  The LP is pruned first:
    coordinates outside S|T force lambda_A = 0 for any A not inside S|T, and
    coordinates in S&T force lambda_A = 0 for any A missing part of S&T, so
    only neighbors in the interval [S&T, S|T] and coordinates of S^T remain.
    The returned solution is basic, hence has at most |E| nonzero entries.
    """
    alpha = Fraction(alpha)
    if alpha < 1:
        raise ValueError("alpha must be at least 1")
    ground.check_mask(S)
    ground.check_mask(T)
    if S not in neighbors:
        raise ValueError("S must be a member of its own neighbor list")
    if T == S:
        return ConeCertificate(S, T, alpha, {})

    union, inter = S | T, S & T
    cand = sorted({A for A in neighbors
                   if A & ~union == 0 and inter & ~A == 0 and A != S},
                  key=subset_key)
    diff = bit_indices(S ^ T)
    if not cand:
        return None
    constraints = []
    for i in diff:
        bit = 1 << i
        if T & bit:  # element gained: contributions +1 from A containing it
            row = [Fraction(1 if A & bit else 0) for A in cand]
            constraints.append((row, EQ, Fraction(1)))
        else:  # element of S \ T: contributions -1 from A missing it
            row = [Fraction(1 if not A & bit else 0) for A in cand]
            constraints.append((row, EQ, alpha))
    res = lp_solve([Fraction(0)] * len(cand), constraints, sense="min")
    if not res.optimal:
        return None
    coeffs = {A: v for A, v in zip(cand, res.x) if v > 0}
    cert = ConeCertificate(S, T, alpha, coeffs)
    assert cert.is_valid(ground), "internal error: certificate fails its own equation"
    return cert


def verify_cone_inequality(f: SubmodularOracle, S: int, T: int,
                           cert: ConeCertificate) -> bool:
    """Exact check of the certified decomposition inequality

        (alpha+1) f(S) + sum_A lambda_A (f(A) - f(S)) >= f(S|T) + alpha f(S&T).

    For submodular f this must hold for every valid certificate, so a False
    return flags either non-submodularity or a bug upstream.
    """
    if (S, T) != (cert.S, cert.T):
        raise PreconditionError("certificate does not belong to this (S, T) pair")
    if not cert.is_valid(f.ground):
        raise PreconditionError("certificate violates its defining equation")
    a = cert.alpha
    fS = f(S)
    lhs = (a + 1) * fS
    for A, lam in cert.coefficients.items():
        lhs += lam * (f(A) - fS)
    rhs = f(S | T) + a * f(S & T)
    return lhs >= rhs


@dataclass(frozen=True)
class StepBound:
    """Outcome of the improving-step dichotomy at (S, T).

    branch "bound": (alpha+1) f(S) >= f(S|T) + alpha f(S&T) already holds.
    branch "improve": witness is a neighbor whose gain over f(S) is at least
    gap / (alpha * n_elements).
    """

    branch: str
    S: int
    T: int
    alpha: Fraction
    gap: Fraction
    witness: Optional[int] = None
    witness_gain: Optional[Fraction] = None
    threshold: Optional[Fraction] = None


def improving_step_bound(f: SubmodularOracle, ground: GroundSet, S: int, T: int,
                         neighbors: Sequence[int], alpha: Fraction,
                         n_elements: Optional[int] = None) -> StepBound:
    """Either S already satisfies the two-set bound against T, or some
    neighbor improves f by at least a 1/(alpha n) fraction of the gap."""
    alpha = Fraction(alpha)
    cert = cone_membership(ground, S, T, neighbors, alpha)
    if cert is None:
        raise PreconditionError("cone membership fails for (S, T); the dichotomy needs it")
    n = ground.n if n_elements is None else n_elements
    fS = f(S)
    gap = f(S | T) + alpha * f(S & T) - (alpha + 1) * fS
    if gap <= 0:
        return StepBound("bound", S, T, alpha, gap)
    best = None
    best_val = None
    for A in neighbors:
        v = f(A)
        if best_val is None or v > best_val or \
                (v == best_val and subset_key(A) < subset_key(best)):
            best, best_val = A, v
    threshold = gap / (alpha * n)
    gain = best_val - fS
    if gain < threshold:
        raise PreconditionError(
            "no neighbor achieves the guaranteed gain; "
            "f is not submodular or the inputs break the precondition")
    return StepBound("improve", S, T, alpha, gap, witness=best,
                     witness_gain=gain, threshold=threshold)


def vertex_adjacency(ground: GroundSet, family: FeasibilityFamily,
                     S: int, U: int) -> bool:
    """Whether chi^S and chi^U are adjacent vertices of the combinatorial
    polytope of the family.

    Test: minimize lambda_S + lambda_U over convex combinations of feasible
    indicator vectors equal to the midpoint (chi^S + chi^U)/2; the pair is
    adjacent iff the minimum is 1 (the midpoint has no other representation).
    Vertices with positive weight must lie in the interval [S&U, S|U], which
    keeps the LP tiny.
    """
    members = family.members()
    if len(members) > ADJACENCY_FAMILY_MAX:
        raise SizeError(f"adjacency test limited to families of size {ADJACENCY_FAMILY_MAX}")
    if not family.contains(S) or not family.contains(U):
        raise ValueError("adjacency is defined for feasible sets only")
    if S == U:
        raise ValueError("adjacency needs two distinct vertices")
    union, inter = S | U, S & U
    cand = [V for V in members if V & ~union == 0 and inter & ~V == 0]
    if len(cand) == 2:
        return True
    objective = [Fraction(1 if V in (S, U) else 0) for V in cand]
    constraints = []
    for i in bit_indices(S ^ U):
        bit = 1 << i
        row = [Fraction(1 if V & bit else 0) for V in cand]
        constraints.append((row, EQ, Fraction(1, 2)))
    constraints.append(([Fraction(1)] * len(cand), EQ, Fraction(1)))
    res = lp_solve(objective, constraints, sense="min")
    assert res.optimal, "midpoint of two vertices must be representable"
    return res.value == 1


def shifted_cone_coefficients(ground: GroundSet, S: int,
                              generator_sets: Sequence[int],
                              point: Sequence[Fraction]) -> Optional[dict[int, Fraction]]:
    """Coefficients lambda >= 0 with point = chi^S + sum lambda_A (chi^A - chi^S),
    or None when the point lies outside the shifted cone."""
    if len(point) != ground.n:
        raise ValueError("point dimension must match the ground set")
    cand = sorted(set(generator_sets), key=subset_key)
    constraints = []
    for i in range(ground.n):
        bit = 1 << i
        s_has = 1 if S & bit else 0
        row = [Fraction((1 if A & bit else 0) - s_has) for A in cand]
        target = Fraction(point[i]) - s_has
        constraints.append((row, EQ, target))
    res = lp_solve([Fraction(0)] * len(cand), constraints, sense="min")
    if not res.optimal:
        return None
    return {A: v for A, v in zip(cand, res.x) if v > 0}


def check_cone_down_closure(ground: GroundSet, S: int, neighbors: Sequence[int],
                            y: Sequence[Fraction], z: Sequence[Fraction]) -> bool:
    """Membership of y in the shifted cone at chi^S, given 0 <= y <= z with z
    inside the cone.

    For swap neighborhoods of an independence system this must always return
    True (the cone is down-closed inside the non-negative orthant), so the
    function serves as a property-test oracle.
    """
    y = [Fraction(v) for v in y]
    z = [Fraction(v) for v in z]
    if len(y) != ground.n or len(z) != ground.n:
        raise PreconditionError("vector dimensions must match the ground set")
    if any(v < 0 for v in y) or any(yv > zv for yv, zv in zip(y, z)):
        raise PreconditionError("need 0 <= y <= z coordinatewise")
    if shifted_cone_coefficients(ground, S, neighbors, z) is None:
        raise PreconditionError("z must lie in the shifted cone")
    return shifted_cone_coefficients(ground, S, neighbors, y) is not None
