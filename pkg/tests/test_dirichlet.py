from fractions import Fraction

import numpy as np
import pytest

from gelfond.dirichlet import (
    census_bound, good_index_sets, least_odd_witness, odd_elimination_census, odd_eliminate,
    partition_into_aps,
)
from gelfond.discrepancy import GuardExceeded
from oracles import discrepancy_all_arcs


def _window(x: int, lo: int, hi: int) -> list[int]:
    return [(x >> j) & 1 for j in range(lo, hi)]


# odd elimination

def test_odd_eliminate_examples():
    res = odd_eliminate(0, 8, 1, 0)
    assert res.found and res.witness_M == 1
    # omega = 2**8 has no digits in [7, 8) so M = 1 already works
    assert odd_eliminate(1 << 8, 8, 1, 0).witness_M == 1
    with pytest.raises(ValueError):
        odd_eliminate(3, 4, 0, 0)
    with pytest.raises(GuardExceeded):
        odd_eliminate(3, 40, 5, 4)


def test_witnesses_are_odd_and_zero_the_window():
    for ell, kappa, mu in ((8, 1, 0), (10, 1, 2), (12, 2, 0)):
        for omega in range(0, 1 << (4 * kappa + 4), 7):
            res = odd_eliminate(omega, ell, kappa, mu)
            for w0, M in enumerate(res.witnesses):
                x = (omega << mu) + w0
                assert M % 2 == 1 and M < 1 << (5 * kappa + 7)
                assert not any(_window(M * x, ell - kappa, ell))
                # least witness: no smaller odd multiplier works
                assert all(any(_window(k * x, ell - kappa, ell)) for k in range(1, M, 2))


def test_least_odd_witness_blocks_agree():
    xs = np.arange(1, 300, dtype=np.uint64)
    assert np.array_equal(least_odd_witness(xs, 9, 2, 1 << 17), least_odd_witness(xs, 9, 2, 1 << 17, block=5))


def test_census_bound_values():
    assert census_bound(1) == 128
    assert census_bound(2) == 3072


def test_census_exact_kappa_one():
    c = odd_elimination_census(8, 1)
    assert (c.good_count, c.total, c.sampled) == (255, 256, False)
    assert c.holds and c.bound == 128


def test_census_kappa_two_exhaustive():
    c = odd_elimination_census(12, 2)
    assert (c.good_count, c.total, c.sampled, c.omega0_per_omega) == (4093, 4096, False, 1)
    assert c.holds


def test_census_sampling_flag_and_seed():
    a = odd_elimination_census(10, 1, sample_size=2)
    b = odd_elimination_census(10, 1, sample_size=2)
    assert a.sampled and a.omega0_per_omega == 2 and a == b
    full = odd_elimination_census(10, 1)
    assert not full.sampled and full.good_count <= a.good_count
    with pytest.raises(ValueError):
        odd_elimination_census(7, 1)


# partitions into progressions

def test_partition_example():
    p = partition_into_aps(0, 10, 2, 3)
    assert sorted(p.sizes()) == [2, 2, 3, 3] and len(p.progressions) == 4
    assert partition_into_aps(0, 10, 2, 3).progressions == p.progressions
    single = partition_into_aps(5, 17, 1, 12)
    assert single.progressions == [(1, 5, 16)]
    with pytest.raises(ValueError):
        partition_into_aps(0, 3, 4, 1)
    with pytest.raises(ValueError):
        partition_into_aps(0, 10, 0, 3)


def test_partition_random_invariants():
    rng = np.random.default_rng(41)
    for _ in range(300):
        start = int(rng.integers(-50, 50))
        length = int(rng.integers(1, 400))
        T = int(rng.integers(1, length + 1))
        V = int(rng.integers(1, length // T + 1))
        p = partition_into_aps(start, start + length, T, V)
        covered = sorted(x for d, a, y in p.progressions for x in range(a, y + 1, d))
        assert covered == list(range(start, start + length))
        assert all(V / 2 <= s <= V for s in p.sizes())


# good index sets

def _good_sets_oracle(lam, tau, zeta, eta0, eta1, m, s0, s1):
    D = 2 ** (lam - 2 * tau - zeta)
    J = range(1, 2 ** (tau - zeta))
    U = 2 ** (tau - zeta)
    g0, g1 = [], []
    for n in J:
        for T in range(1, 2 ** (5 * eta0 + 7), 2):
            frac = Fraction(T * n, D) % 1
            if min(frac, 1 - frac) < Fraction(1, 2**eta0):
                g0.append(n)
                break
        slope = Fraction(n * 6 * (s0 - s1) * m[n], D)
        if discrepancy_all_arcs([k * slope for k in range(U)]) < Fraction(1, 2**eta1):
            g1.append(n)
    return g0, g1


def test_good_index_sets_against_exhaustive_oracle():
    m = {n: 1 + n % 3 for n in range(1, 16)}
    for eta0, eta1 in ((2, 1), (1, 2), (0, 3)):
        got = good_index_sets(18, 6, 2, eta0, eta1, S=2, B=3, m=m)
        assert got == _good_sets_oracle(18, 6, 2, eta0, eta1, m, 1, 0)
        assert 0 not in got[0] and 0 not in got[1]


def test_multiples_of_modulus_are_in_g0():
    # lam - 2 tau - zeta = 2, so every multiple of 4 works with T = 1
    g0, _ = good_index_sets(16, 6, 2, 3, 1, S=1, B=1, m=lambda n: 1)
    assert {n for n in range(1, 16) if n % 4 == 0} <= set(g0)


def test_bad_fraction_is_small():
    ratios = []
    for eta0 in (1, 2, 3):
        g0, _ = good_index_sets(30, 10, 2, eta0, 1, S=1, B=1, m=lambda n: 1)
        bad = 1 - len(g0) / (2**8 - 1)
        ratios.append(bad * 2**eta0)
    print(f"fitted constant for the bad fraction of G0: {max(ratios):.4f}")
    assert max(ratios) <= 1


def test_good_index_set_errors():
    with pytest.raises(ValueError):
        good_index_sets(10, 6, 2, 1, 1, S=1, B=1, m=lambda n: 1)
    with pytest.raises(ValueError):
        good_index_sets(18, 6, 2, 1, 1, S=1, B=1, m=lambda n: 1, shift0=3)
    with pytest.raises(ValueError):
        good_index_sets(18, 6, 2, 1, 1, S=1, B=1, m=lambda n: 2)
    with pytest.raises(GuardExceeded):
        good_index_sets(90, 30, 2, 1, 1, S=1, B=1, m=lambda n: 1)
