from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gelfond.digits import (
    INFINITY, DigitError, DigitWindow, carry_bound, carry_count, carry_profile, count_tm_cube_zeros,
    cube_digit_sums, cube_limbs, digit_sum, kummer_carries, legendre_valuation, thue_morse,
    thue_morse_along, tm_cube_signs, windowed_digit_sum,
)
from oracles import (
    carry_count_literal, digits_by_division, legendre_floor_sum, tm_substitution, valuation,
)

CUBES_PREFIX = "0110100010000100100000010110"
SQUARES_PREFIX = "0110110111110010111110110100"
TM_PREFIX_32 = "01101001100101101001011001101001"


# digit_sum

@pytest.mark.parametrize("n,q,expected", [(0, 2, 0), (7, 2, 3), (27, 2, 4), (0, 10, 0), (999, 10, 27)])
def test_digit_sum_examples(n, q, expected):
    assert digit_sum(n, q) == expected


def test_digit_sum_rejects_small_base():
    with pytest.raises(DigitError):
        digit_sum(5, 1)


@given(st.integers(0, 2**200), st.integers(2, 40))
def test_digit_sum_matches_division_oracle(n, q):
    assert digit_sum(n, q) == sum(digits_by_division(n, q))


@given(st.integers(0, 2**200), st.integers(2, 40))
def test_digit_sum_casting_out(n, q):
    assert (digit_sum(n, q) - n) % (q - 1) == 0


# windows

def test_windowed_examples():
    assert windowed_digit_sum(27, DigitWindow(0, 3)) == 2
    assert windowed_digit_sum(27, DigitWindow(5, 9)) == 0
    assert windowed_digit_sum(27, (0, 3)) == 2


def test_window_validation():
    with pytest.raises(DigitError):
        DigitWindow(3, 2)
    assert len(DigitWindow(4, 4)) == 0
    assert windowed_digit_sum(255, DigitWindow(4, 4)) == 0


@given(st.integers(0, 2**255))
def test_full_window_is_digit_sum(n):
    assert windowed_digit_sum(n, DigitWindow(0, INFINITY)) == digit_sum(n, 2)


@given(st.integers(0, 2**255), st.integers(0, 300))
def test_prefix_window_reduces_mod_power(n, lam):
    assert windowed_digit_sum(n, DigitWindow(0, lam)) == digit_sum(n % 2**lam, 2)


@given(st.integers(0, 2**128), st.integers(0, 140), st.integers(0, 140))
def test_window_matches_bit_extraction(n, a, b):
    lo, hi = min(a, b), max(a, b)
    bits = [(n >> j) & 1 for j in range(lo, hi)]
    assert windowed_digit_sum(n, DigitWindow(lo, hi)) == sum(bits)


# Thue-Morse

def test_thue_morse_prefix_from_the_literature():
    assert "".join(str(thue_morse(n)) for n in range(32)) == TM_PREFIX_32


def test_thue_morse_matches_substitution_fixed_point():
    word = tm_substitution(1 << 20)
    n = np.arange(1 << 20, dtype=np.uint64)
    fast = (np.bitwise_count(n) & 1).astype(int)
    assert fast.tolist() == word
    assert [thue_morse(k) for k in range(4096)] == word[:4096]


@pytest.mark.parametrize("k", range(0, 70, 7))
def test_thue_morse_powers_of_two(k):
    assert thue_morse(2**k) == 1


def test_thue_morse_along_prefixes():
    assert "".join(str(thue_morse_along(3, n)) for n in range(28)) == CUBES_PREFIX
    assert "".join(str(thue_morse_along(2, n)) for n in range(28)) == SQUARES_PREFIX
    assert thue_morse_along(3, 0) == 0
    with pytest.raises(DigitError):
        thue_morse_along(4, 2)


# bulk cube kernel

def test_cube_limbs_exact_against_python_ints():
    rng = np.random.default_rng(3)
    n = np.concatenate([rng.integers(0, 2**48, 2000, dtype=np.uint64),
                        np.array([0, 1, 2**16 - 1, 2**32 - 1, 2**48 - 1], dtype=np.uint64)])
    limbs = cube_limbs(n)
    for i, v in enumerate(n.tolist()):
        rebuilt = sum(int(limb[i]) << (16 * k) for k, limb in enumerate(limbs))
        assert rebuilt == v**3
    assert cube_digit_sums(n).tolist() == [bin(v**3).count("1") for v in n.tolist()]


def test_cube_kernel_guard():
    with pytest.raises(DigitError):
        cube_limbs(np.array([2**48], dtype=np.uint64))


def test_tm_cube_signs_against_scalar():
    s = tm_cube_signs(10**6, 10**6 + 500)
    assert s.tolist() == [1 - 2 * thue_morse(n**3) for n in range(10**6, 10**6 + 500)]


@pytest.mark.parametrize("x,expected", [(0, 0), (1, 1), (2, 1), (8, 5)])
def test_count_tm_cube_zeros_examples(x, expected):
    assert count_tm_cube_zeros(x) == expected


def test_count_tm_cube_zeros_chunking_and_oracle():
    direct = sum(1 for n in range(5000) if bin(n**3).count("1") % 2 == 0)
    assert count_tm_cube_zeros(5000) == direct
    assert count_tm_cube_zeros(5000, chunk=77) == direct


def test_count_tm_cube_zeros_frozen():
    # frozen from a full run
    assert count_tm_cube_zeros(1 << 10) == 511
    assert count_tm_cube_zeros(1 << 16) == 32614


# Legendre and Kummer

@pytest.mark.parametrize("n,p,expected", [(4, 2, 3), (0, 3, 0), (5, 5, 1), (7, 7, 1), (100, 5, 24)])
def test_legendre_examples(n, p, expected):
    assert legendre_valuation(n, p) == expected


def test_legendre_exhaustive():
    for p in (2, 3, 5, 7):
        for n in range(10**4 + 1):
            assert legendre_valuation(n, p) == legendre_floor_sum(n, p)


def test_legendre_rejects_composite():
    with pytest.raises(DigitError):
        legendre_valuation(10, 4)


@pytest.mark.parametrize("n,t,p,expected", [(2, 1, 2, 1), (9, 0, 3, 0), (4, 2, 2, 1)])
def test_kummer_examples(n, t, p, expected):
    assert kummer_carries(n, t, p) == expected


def test_kummer_exhaustive_against_binomial_valuation():
    from math import comb
    for p in (2, 3):
        for n in range(513):
            for t in range(n + 1):
                assert kummer_carries(n, t, p) == valuation(comb(n, t), p)


def test_kummer_errors():
    with pytest.raises(DigitError):
        kummer_carries(3, 4, 2)
    with pytest.raises(DigitError):
        kummer_carries(3, 1, 6)


# carry lemma

def test_carry_example():
    res = carry_count(4, 8, 1, 6)
    assert res.count == 3
    assert res.holds


@given(st.integers(1, 200), st.integers(0, 30), st.integers(0, 40))
def test_carry_trivial_cases(A, r, lam):
    assert carry_count(A, A, r, lam).count == 0
    assert carry_count(A, A + 50, 0, lam).count == 0


def test_carry_zero_start_is_flagged():
    res = carry_count(0, 10, 1, 3)
    assert res.bound is None and res.holds is None


def test_carry_range_error():
    with pytest.raises(DigitError):
        carry_count(5, 4, 1, 1)


def test_carry_bound_formula():
    assert carry_bound(4, 8, 1, 6) == (Fraction(4 * 64, 64) + 1) * (Fraction(3 * 64 + 3 * 8 + 1, 48) + 1)


@given(st.integers(0, 300), st.integers(0, 300), st.integers(0, 40), st.integers(0, 30))
def test_carry_profile_matches_direct_count(A, width, r, max_lam):
    B = A + width
    prof = carry_profile(A, B, r, max_lam)
    for lam in sorted({0, max_lam // 2, max_lam}):
        assert prof[lam] == carry_count(A, B, r, lam).count == carry_count_literal(A, B, r, lam)


def test_carry_bound_holds_on_a_sample_of_the_grid():
    # the full grid runs in the acceptance suite; spot-check the exact Fraction route here
    for A in range(1, 65, 9):
        for B in range(A, 65, 7):
            for r in range(0, B - A + 1, 3):
                for lam in range(0, 25, 4):
                    assert carry_count(A, B, r, lam).holds
