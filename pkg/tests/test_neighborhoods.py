import random
from fractions import Fraction as F
from math import comb

import pytest

from submax import (
    FeasibilityFamily, GroundSet, Matroid, brute_force_opt, empirical_conic_check,
    matroid_polyhedral_neighborhood, polyhedral_neighborhood,
    polyhedral_neighborhood_function, swap_neighborhood, swap_neighborhood_function,
)

from instgen import (
    random_down_closed_family, random_family, random_ground, random_matroid,
    random_submodular,
)


def test_swap_on_free_family_from_empty_set():
    g = GroundSet.of(["e1", "e2"])
    fam = FeasibilityFamily.explicit(g, [0, 1, 2, 3])
    out = swap_neighborhood(fam, g, 0, k=1, p=1)
    assert out == [0, 1, 2]  # add at most one element


def test_swap_respects_membership():
    g = GroundSet.of(["e1", "e2"])
    fam = Matroid.uniform(g, 1).family()
    out = swap_neighborhood(fam, g, g.mask_of(["e1"]), k=2, p=1)
    assert out == [0, 1, 2]  # {e1,e2} filtered out as infeasible


def test_swap_size_bound_counting_identity():
    rng = random.Random(3)
    for _ in range(15):
        g = random_ground(rng, 3, 7)
        fam = random_down_closed_family(rng, g)
        members = fam.members()
        s = rng.choice(members)
        k, p = rng.choice([(1, 1), (2, 1), (2, 2), (3, 1)])
        out = swap_neighborhood(fam, g, s, k, p)
        ns, n_out = s.bit_count(), g.n - s.bit_count()
        bound = sum(comb(n_out, a) for a in range(min(p, n_out) + 1)) * \
            sum(comb(ns, d) for d in range(min((k - 1) * p + 1, ns) + 1))
        assert len(out) <= bound
        # definition check against direct filtering of the family
        expected = sorted(
            (t for t in members
             if (t & ~s).bit_count() <= p and (s & ~t).bit_count() <= (k - 1) * p + 1),
            key=lambda m: (m.bit_count(), m))
        assert sorted(out) == sorted(expected)


def test_swap_rejects_infeasible_center():
    g = GroundSet.of(["a", "b"])
    fam = Matroid.uniform(g, 1).family()
    with pytest.raises(ValueError):
        swap_neighborhood(fam, g, g.full_mask, 1, 1)


def test_polyhedral_on_cube_is_single_flips():
    g = GroundSet.of(["a", "b", "c"])
    fam = FeasibilityFamily.explicit(g, list(range(8)))
    for s in range(8):
        out = polyhedral_neighborhood(fam, g, s)
        flips = sorted([s] + [s ^ (1 << i) for i in range(3)],
                       key=lambda m: (m.bit_count(), m))
        assert sorted(out) == sorted(flips)
        assert len(out) == g.n + 1


def test_polyhedral_triangle():
    g = GroundSet.of(["e1", "e2"])
    fam = Matroid.uniform(g, 1).family()
    explicit = FeasibilityFamily.explicit(g, fam.members())
    out = polyhedral_neighborhood(explicit, g, g.mask_of(["e1"]))
    assert sorted(out) == [0, 1, 2]


def test_matroid_backend_is_a_superset_of_true_polyhedral_neighbors():
    rng = random.Random(12)
    for _ in range(10):
        g = random_ground(rng, 3, 6)
        m = random_matroid(rng, g)
        fam = m.family()
        explicit = FeasibilityFamily.explicit(g, fam.members())
        members = fam.members()
        s = rng.choice(members)
        fast = set(matroid_polyhedral_neighborhood(m, g, s))
        exact = set(polyhedral_neighborhood(explicit, g, s))
        assert exact <= fast
        bound = 1 + 2 * g.n + g.n * (g.n - 1)
        assert len(fast) <= bound


def test_polyhedral_unsupported_backend_errors():
    g = GroundSet.of(["a"])
    fam = FeasibilityFamily(g, lambda m: True, True, "oracle-only")
    with pytest.raises(ValueError):
        polyhedral_neighborhood(fam, g, 0)


def test_neighborhood_function_asserts_self_membership():
    g = GroundSet.of(["a", "b"])
    fam = FeasibilityFamily.explicit(g, [0, 1, 2, 3])
    n_poly = polyhedral_neighborhood_function(g, fam)
    for s in range(4):
        assert s in n_poly.enumerate(s)
        assert all(fam.contains(a) for a in n_poly.enumerate(s))


def test_restrict_to_full_ground_is_identity():
    rng = random.Random(14)
    g = random_ground(rng, 3, 6)
    fam = random_down_closed_family(rng, g)
    n_poly = polyhedral_neighborhood_function(g, fam)
    restricted = n_poly.restrict(g.full_mask)
    for s in fam.members():
        assert n_poly.enumerate(s) == restricted.enumerate(s)


def test_restrict_to_empty_ground():
    g = GroundSet.of(["a", "b"])
    fam = FeasibilityFamily.explicit(g, [0, 1, 2])
    n_poly = polyhedral_neighborhood_function(g, fam).restrict(0)
    assert n_poly.enumerate(0) == [0]


def test_restricted_swap_equals_native_swap_on_subfamily():
    rng = random.Random(16)
    for _ in range(12):
        g = random_ground(rng, 3, 6)
        fam = random_down_closed_family(rng, g)
        k, p = rng.choice([(1, 1), (2, 1), (2, 2)])
        n_swap = swap_neighborhood_function(g, fam, k, p)
        sub_mask = rng.randrange(g.full_mask + 1)
        restricted = n_swap.restrict(sub_mask)
        subfam = fam.restrict(sub_mask)
        for s in subfam.members():
            native = swap_neighborhood(subfam, g, s, k, p, within=sub_mask)
            assert restricted.enumerate(s) == native


def test_restriction_never_grows_neighborhoods():
    rng = random.Random(18)
    for _ in range(10):
        g = random_ground(rng, 3, 6)
        fam = random_down_closed_family(rng, g)
        n_poly = polyhedral_neighborhood_function(g, fam)
        sub_mask = rng.randrange(g.full_mask + 1)
        restricted = n_poly.restrict(sub_mask)
        for s in fam.restrict(sub_mask).members():
            assert len(restricted.enumerate(s)) <= len(n_poly.enumerate(s))


def test_local_optima_of_one_conic_neighborhoods_are_half_approximations():
    # exhaustive over small instances: every local optimum S of the
    # polyhedral neighborhood with monotone f satisfies 2 f(S) >= f(OPT)
    rng = random.Random(22)
    for _ in range(12):
        g = random_ground(rng, 3, 6)
        fam = random_down_closed_family(rng, g)
        f = random_submodular(rng, g, monotone_only=True)
        n_poly = polyhedral_neighborhood_function(g, fam)
        _, opt_value = brute_force_opt(f, fam, g)
        for s in fam.members():
            neigh = n_poly.enumerate(s)
            if all(f(a) <= f(s) for a in neigh):  # local optimum
                assert (F(1) + 1) * f(s) >= opt_value


def test_local_optima_of_alpha_conic_swaps_on_two_intersections():
    # 2-intersection systems: local optima of the (2,1)-swap neighborhood
    # are 1/(alpha+1) = 1/3 approximations for monotone f
    from instgen import random_k_intersection
    rng = random.Random(24)
    for _ in range(8):
        g = random_ground(rng, 3, 6)
        fam, _ = random_k_intersection(rng, g, 2)
        f = random_submodular(rng, g, monotone_only=True)
        n_swap = swap_neighborhood_function(g, fam, 2, 1)
        alpha = n_swap.claimed_alpha
        assert alpha == 2
        _, opt_value = brute_force_opt(f, fam, g)
        for s in fam.members():
            if all(f(a) <= f(s) for a in n_swap.enumerate(s)):
                assert (alpha + 1) * f(s) >= opt_value


def test_empirical_conic_check_exhaustive_pass():
    g = GroundSet.of(["a", "b", "c"])
    fam = FeasibilityFamily.explicit(g, list(range(8)))
    n_poly = polyhedral_neighborhood_function(g, fam)
    report = empirical_conic_check(g, fam, n_poly, F(1))
    assert report.exhaustive
    assert report.pairs_checked == 64
    assert report.all_passed


def test_empirical_conic_check_sampled_and_seeded():
    rng = random.Random(26)
    g = random_ground(rng, 4, 6)
    fam = random_down_closed_family(rng, g)
    n_poly = polyhedral_neighborhood_function(g, fam)
    r1 = empirical_conic_check(g, fam, n_poly, F(1), samples=40, seed=5)
    r2 = empirical_conic_check(g, fam, n_poly, F(1), samples=40, seed=5)
    assert [(a.S, a.T) for a in r1.records] == [(a.S, a.T) for a in r2.records]
    assert not r1.exhaustive and r1.pairs_checked == 40 and r1.all_passed
