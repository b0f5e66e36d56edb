"""Odd-multiplier digit elimination and partitions into arithmetic progressions."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .discrepancy import GuardExceeded, _sweep

SEARCH_GUARD = 1 << 30
SAMPLE_SIZE = 1 << 10


def _window_zero(prod: np.ndarray, lo: int, hi: int) -> np.ndarray:
    return ((prod >> np.uint64(lo)) & np.uint64((1 << (hi - lo)) - 1)) == 0


def least_odd_witness(xs: np.ndarray, ell: int, kappa: int, limit: int,
                      block: int = 64) -> np.ndarray:
    """Least odd M < limit zeroing digits [ell-kappa, ell) of M*x, or 0 if none."""
    xs = np.asarray(xs, dtype=np.uint64)
    out = np.zeros(xs.size, dtype=np.int64)
    todo = np.arange(xs.size)
    for m0 in range(1, limit, 2 * block):
        if todo.size == 0:
            break
        Ms = np.arange(m0, min(limit, m0 + 2 * block), 2, dtype=np.uint64)
        prod = np.multiply.outer(xs[todo], Ms)
        ok = _window_zero(prod, ell - kappa, ell)
        hit = ok.any(axis=1)
        first = ok.argmax(axis=1)
        out[todo[hit]] = Ms[first[hit]].astype(np.int64)
        todo = todo[~hit]
    return out


@dataclass
class OddEliminationResult:
    omega: int
    found: bool
    witnesses: list = field(default_factory=list)  # least M per checked omega_0
    checked: int = 0
    sampled: bool = False

    @property
    def witness_M(self):
        return self.witnesses[0] if self.found and self.witnesses else None


def odd_eliminate(omega: int, ell: int, kappa: int, mu: int,
                  omega0s=None) -> OddEliminationResult:
    if not (ell >= kappa >= 1) or mu < 0:
        raise ValueError("need ell >= kappa >= 1 and mu >= 0")
    if (1 << mu) * (1 << (5 * kappa + 6)) > SEARCH_GUARD and omega0s is None:
        raise GuardExceeded("search space above 2**30")
    if ell + 5 * kappa + 7 > 64 or mu + omega.bit_length() > 56:
        raise GuardExceeded("products exceed 64 bits")
    sampled = omega0s is not None
    w0 = np.arange(1 << mu, dtype=np.uint64) if omega0s is None else np.asarray(omega0s, dtype=np.uint64)
    xs = (np.uint64(omega) << np.uint64(mu)) + w0
    wit = least_odd_witness(xs, ell, kappa, 1 << (5 * kappa + 7))
    found = bool(np.all(wit > 0))
    return OddEliminationResult(omega, found, [int(v) for v in wit] if found else [],
                                int(w0.size), sampled)


def census_bound(kappa: int) -> int:
    return 2 ** (3 * kappa + 4) * (2**kappa - 1)


@dataclass
class Census:
    ell: int
    kappa: int
    good_count: int
    total: int
    bound: int
    sampled: bool
    omega0_per_omega: int

    @property
    def holds(self) -> bool:
        return self.good_count >= self.bound


def odd_elimination_census(ell: int, kappa: int, seed: int = 0x5EED,
                           sample_size: int = SAMPLE_SIZE) -> Census:
    """Count omega < 2**(4 kappa + 4) with the elimination property.

    When 2**mu exceeds sample_size, each omega is checked on sample_size
    distinct omega_0 drawn with a seeded generator and the census is
    flagged as sampled.
    """
    mu = ell - 4 * kappa - 4
    if mu < 0:
        raise ValueError("need ell >= 4 kappa + 4")
    if ell + 5 * kappa + 7 > 64:
        raise GuardExceeded("products exceed 64 bits")
    n_omega = 1 << (4 * kappa + 4)
    sampled = (1 << mu) > sample_size
    rng = np.random.default_rng(seed)
    per = sample_size if sampled else 1 << mu
    good = 0
    batch = max(1, (1 << 20) // per)
    for start in range(0, n_omega, batch):
        omegas = np.arange(start, min(n_omega, start + batch), dtype=np.uint64)
        if sampled:
            w0 = np.stack([rng.choice(1 << mu, size=per, replace=False) for _ in omegas]).astype(np.uint64)
        else:
            w0 = np.broadcast_to(np.arange(per, dtype=np.uint64), (omegas.size, per))
        xs = ((omegas[:, None] << np.uint64(mu)) + w0).ravel()
        wit = least_odd_witness(xs, ell, kappa, 1 << (5 * kappa + 7)).reshape(omegas.size, per)
        good += int(np.count_nonzero(np.all(wit > 0, axis=1)))
    return Census(ell, kappa, good, n_omega, census_bound(kappa), sampled, per)


# ---------------------------------------------------------------------------
# partitions into arithmetic progressions


@dataclass
class APPartition:
    start: int
    stop: int  # the interval is [start, stop)
    T: int
    V: int
    progressions: list  # (difference, first, last)

    def sizes(self) -> list[int]:
        return [(y - a) // T + 1 for T, a, y in self.progressions]

    def check(self) -> None:
        seen = np.zeros(self.stop - self.start, dtype=int)
        for (T, a, y), size in zip(self.progressions, self.sizes()):
            if not (self.V / 2 <= size <= self.V):
                raise AssertionError(f"progression size {size} outside [V/2, V]")
            seen[np.arange(a, y + 1, T) - self.start] += 1
        if np.any(seen != 1):
            raise AssertionError("progressions do not partition the interval")


def partition_into_aps(start: int, stop: int, T: int, V: int) -> APPartition:
    """Split [start, stop) into progressions of difference T with V/2 <= size <= V.

    Each residue class holds W >= V elements; cutting it into ceil(W/V)
    pieces of nearly equal size keeps every piece within [V/2, V].
    """
    if T < 1 or V < 1:
        raise ValueError("T and V must be positive")
    if T * V > stop - start:
        raise ValueError("infeasible: T * V exceeds the interval length")
    progs = []
    for a in range(start, start + T):
        W = (stop - 1 - a) // T + 1
        q = -(-W // V)
        base, extra = divmod(W, q)
        pos = a
        for i in range(q):
            size = base + (1 if i < extra else 0)
            progs.append((T, pos, pos + (size - 1) * T))
            pos += size * T
    part = APPartition(start, stop, T, V, progs)
    part.check()
    return part


# ---------------------------------------------------------------------------
# good index sets


def _frac_dist_small(num: np.ndarray, D: int, eta: int) -> np.ndarray:
    """|| num / D || < 2**-eta for integer num, exactly."""
    r = np.mod(num, D)
    return np.minimum(r, D - r) * (1 << eta) < D


def good_index_sets(lam: int, tau: int, zeta: int, eta0: int, eta1: int,
                    S: int, B: int, m, shift0: int = 1, shift1: int = 0,
                    U: int | None = None):
    """Return (G0, G1) as sorted lists of indices n01 in [1, 2**(tau - zeta)).

    m maps n01 to a multiplier in 1..B; U defaults to 2**(tau - zeta).
    """
    if tau - zeta > 22:
        raise GuardExceeded("tau - zeta > 22")
    D_exp = lam - 2 * tau - zeta
    if D_exp < 0:
        raise ValueError("need lam >= 2 tau + zeta")
    if not (abs(shift0) <= S and abs(shift1) <= S):
        raise ValueError("shifts must lie in [-S, S]")
    D = 1 << D_exp
    n = np.arange(1, 1 << (tau - zeta), dtype=np.int64)
    limit = 1 << (5 * eta0 + 7)
    if n.size * limit // 2 > 1 << 32:
        raise GuardExceeded("odd search too large")
    in_g0 = np.zeros(n.size, dtype=bool)
    rem = n % D
    for t0 in range(1, limit, 2 * 256):
        Ts = np.arange(t0, min(limit, t0 + 512), 2, dtype=np.int64)
        todo = ~in_g0
        if not todo.any():
            break
        hit = _frac_dist_small(np.multiply.outer(rem[todo], Ts), D, eta0).any(axis=1)
        in_g0[np.flatnonzero(todo)[hit]] = True
    U = (1 << (tau - zeta)) if U is None else U
    mult = np.array([m(int(k)) if callable(m) else m[int(k)] for k in n], dtype=np.int64)
    if np.any((mult < 1) | (mult > B)):
        raise ValueError("multipliers must lie in 1..B")
    slope_num = np.mod(n * 6 * (shift0 - shift1) * mult, D)
    k = np.arange(U, dtype=np.int64)
    orbits = np.sort(np.mod(np.multiply.outer(slope_num, k), D), axis=1) / D
    disc = np.minimum(1.0, _sweep(orbits))
    in_g1 = disc < 2.0**-eta1
    return [int(v) for v in n[in_g0]], [int(v) for v in n[in_g1]]
