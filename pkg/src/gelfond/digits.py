"""Binary and base-q digit machinery.

Scalar helpers work on Python ints of any size. The bulk helpers work on
numpy uint64 arrays and compute cubes exactly with 16-bit limbs, which
covers every n < 2**48.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

INFINITY = 2**64 - 1  # sentinel for an unbounded window

_LIMB = 16
_LIMB_MASK = np.uint64((1 << _LIMB) - 1)
BULK_LIMIT = 1 << 48


class DigitError(ValueError):
    pass


@dataclass(frozen=True)
class DigitWindow:
    lo: int
    hi: int = INFINITY

    def __post_init__(self):
        if self.lo < 0 or self.hi < self.lo:
            raise DigitError(f"bad window [{self.lo},{self.hi})")

    def __len__(self):
        return self.hi - self.lo


def digit_sum(n: int, q: int = 2) -> int:
    if q < 2:
        raise DigitError("base must be at least 2")
    if n < 0:
        raise DigitError("n must be nonnegative")
    if q == 2:
        return n.bit_count()
    total = 0
    while n:
        n, d = divmod(n, q)
        total += d
    return total


def windowed_digit_sum(n: int, w: DigitWindow | tuple) -> int:
    """Number of binary ones of n with index in [lo, hi)."""
    lo, hi = (w.lo, w.hi) if isinstance(w, DigitWindow) else w
    if hi <= lo:
        return 0
    n >>= lo
    if hi - lo < n.bit_length():
        n &= (1 << (hi - lo)) - 1
    return n.bit_count()


def thue_morse(n: int) -> int:
    return n.bit_count() & 1


def thue_morse_along(power: int, n: int) -> int:
    """t(n**power) for power in {1, 2, 3}."""
    if power not in (1, 2, 3):
        raise DigitError("power must be 1, 2 or 3")
    return thue_morse(n**power)


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


def legendre_valuation(n: int, p: int) -> int:
    """v_p(n!) via (n - s_p(n)) / (p - 1)."""
    if not is_prime(p):
        raise DigitError(f"{p} is not prime")
    return (n - digit_sum(n, p)) // (p - 1)


def kummer_carries(n: int, t: int, p: int) -> int:
    """Number of borrows in the base-p subtraction n - t."""
    if not is_prime(p):
        raise DigitError(f"{p} is not prime")
    if t < 0 or t > n:
        raise DigitError("need 0 <= t <= n")
    borrows = 0
    borrow = 0
    while n or t:
        n, dn = divmod(n, p)
        t, dt = divmod(t, p)
        if dn - dt - borrow < 0:
            borrow = 1
            borrows += 1
        else:
            borrow = 0
    return borrows


# ---------------------------------------------------------------------------
# carry lemma


@dataclass(frozen=True)
class CarryResult:
    count: int
    bound: Fraction | None  # None when A = 0, where the bound is undefined

    @property
    def holds(self) -> bool | None:
        if self.bound is None:
            return None
        return self.count <= self.bound


def carry_bound(A: int, B: int, r: int, lam: int) -> Fraction | None:
    if A == 0:
        return None
    first = Fraction((B - A) * B * B, 1 << lam) + 1
    second = Fraction(3 * B * B * r + 3 * B * r * r + r**3, 3 * A * A) + 1
    return first * second


def carry_count(A: int, B: int, r: int, lam: int) -> CarryResult:
    """Count n in [A, B) whose cube and (n+r)**3 differ above bit lam."""
    if A < 0 or A > B:
        raise DigitError("need 0 <= A <= B")
    if r < 0 or lam < 0:
        raise DigitError("r and lambda must be nonnegative")
    count = 0
    for n in range(A, B):
        if (n**3) >> lam != ((n + r) ** 3) >> lam:
            count += 1
    return CarryResult(count, carry_bound(A, B, r, lam))


def carry_profile(A: int, B: int, r: int, max_lam: int) -> list[int]:
    """carry_count(A, B, r, lam).count for every lam in [0, max_lam].

    Two integers x < y agree after dropping lam bits exactly when
    (x ^ y).bit_length() <= lam, so one pass over n serves all lam.
    """
    if A < 0 or A > B:
        raise DigitError("need 0 <= A <= B")
    hist = [0] * (max_lam + 2)
    for n in range(A, B):
        k = min((n**3 ^ (n + r) ** 3).bit_length(), max_lam + 1)
        hist[k] += 1
    # count(lam) = #{n : bitlen > lam}
    out = []
    above = sum(hist)
    for lam in range(max_lam + 1):
        above -= hist[lam]
        out.append(above)
    return out


# ---------------------------------------------------------------------------
# bulk kernels


def _normalize(cols: list[np.ndarray]) -> list[np.ndarray]:
    out = []
    carry = np.zeros_like(cols[0])
    for c in cols:
        v = c + carry
        out.append(v & _LIMB_MASK)
        carry = v >> np.uint64(_LIMB)
    while np.any(carry):
        out.append(carry & _LIMB_MASK)
        carry = carry >> np.uint64(_LIMB)
    return out


def _mul_limbs(x: list[np.ndarray], y: list[np.ndarray]) -> list[np.ndarray]:
    # column sums stay below len * 2**32, far from overflow
    cols = [np.zeros_like(x[0]) for _ in range(len(x) + len(y) - 1)]
    for i, a in enumerate(x):
        for j, b in enumerate(y):
            cols[i + j] += a * b
    return _normalize(cols)


def to_limbs(n: np.ndarray, count: int = 3) -> list[np.ndarray]:
    n = np.asarray(n, dtype=np.uint64)
    return [(n >> np.uint64(_LIMB * k)) & _LIMB_MASK for k in range(count)]


def cube_limbs(n: np.ndarray) -> list[np.ndarray]:
    """Exact 16-bit limbs (least significant first) of n**3 for n < 2**48."""
    n = np.asarray(n, dtype=np.uint64)
    if n.size and int(n.max()) >= BULK_LIMIT:
        raise DigitError("bulk cube kernel needs n < 2**48")
    x = to_limbs(n)
    return _mul_limbs(_mul_limbs(x, x), x)


def limbs_window_popcount(limbs: list[np.ndarray], lo: int, hi: int) -> np.ndarray:
    total = np.zeros(limbs[0].shape, dtype=np.int64)
    for k, limb in enumerate(limbs):
        a, b = k * _LIMB, (k + 1) * _LIMB
        if b <= lo or a >= hi:
            continue
        part = limb
        if lo > a:
            part = part >> np.uint64(lo - a)
            a = lo
        if hi < b:
            part = part & np.uint64((1 << (hi - a)) - 1)
        total += np.bitwise_count(part).astype(np.int64)
    return total


def cube_digit_sums(n: np.ndarray) -> np.ndarray:
    limbs = cube_limbs(n)
    return limbs_window_popcount(limbs, 0, _LIMB * len(limbs))


def tm_cube_signs(start: int, stop: int) -> np.ndarray:
    """(-1)**t(n**3) for start <= n < stop as int8."""
    n = np.arange(start, stop, dtype=np.uint64)
    par = cube_digit_sums(n) & 1
    return (1 - 2 * par).astype(np.int8)


def count_tm_cube_zeros(x: int, chunk: int = 1 << 22) -> int:
    """#{n < x : t(n**3) = 0}, exactly."""
    total = 0
    for start in range(0, x, chunk):
        stop = min(x, start + chunk)
        total += int(np.count_nonzero(tm_cube_signs(start, stop) > 0))
    return total
