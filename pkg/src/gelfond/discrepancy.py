"""Discrepancy of point sets on the torus and the classical bounds around it."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .trig import e_of

GUARD = 1 << 30


class GuardExceeded(RuntimeError):
    pass


@dataclass
class TorusSequence:
    points: np.ndarray  # shape (N, dim), coordinates in [0, 1)

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float)
        if p.ndim == 1:
            p = p[:, None]
        self.points = np.mod(p, 1.0)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]


@dataclass
class DiscrepancyReport:
    value: float
    method: str  # "exact-1d" or "grid-supremum"
    grid_resolution: int = 0
    padding: float = 0.0
    etk_rhs: float | None = None
    H_used: int | None = None
    N: int = 0
    dim: int = 1

    @property
    def upper(self) -> float:
        return min(1.0, self.value + self.padding)


def log_plus(x: float) -> float:
    return 1.0 if x < math.e else math.log(x)


def _sweep(sorted_x: np.ndarray) -> np.ndarray:
    """Exact interval discrepancy of each row of an already sorted array.

    For points 0 <= x_0 <= ... <= x_{N-1} < 1 the supremum over all arcs
    equals 1/N + max_i (x_i - i/N) - min_i (x_i - i/N).
    """
    N = sorted_x.shape[-1]
    g = sorted_x - np.arange(N) / N
    return 1.0 / N + g.max(axis=-1) - g.min(axis=-1)


def discrepancy_1d(x) -> float:
    x = np.sort(np.mod(np.asarray(x, dtype=float).ravel(), 1.0))
    if x.size == 0:
        raise ValueError("empty sequence")
    return float(min(1.0, _sweep(x)))


def _arc_sums(h: np.ndarray, axis: int) -> np.ndarray:
    """Replace axis of length G by two axes (start, length) holding the sum
    over the cyclic run of cells start .. start+length-1."""
    G = h.shape[axis]
    h = np.moveaxis(h, axis, -1)
    doubled = np.concatenate([h, h], axis=-1)
    cs = np.concatenate([np.zeros(h.shape[:-1] + (1,), dtype=h.dtype),
                         np.cumsum(doubled, axis=-1)], axis=-1)
    start = np.arange(G)[:, None]
    length = np.arange(G + 1)[None, :]
    out = cs[..., start + length] - cs[..., start]
    return out  # original axes (minus this one) followed by (start, length)


def grid_discrepancy(seq: TorusSequence, G: int) -> DiscrepancyReport:
    """Supremum over boxes whose sides are cyclic runs of grid cells."""
    pts = seq.points
    N, dim = pts.shape
    if N == 0:
        raise ValueError("empty sequence")
    if (G * (G + 1)) ** dim > 1 << 24:
        raise GuardExceeded("grid too fine for this dimension")
    cells = np.minimum((pts * G).astype(np.int64), G - 1)
    hist = np.zeros((G,) * dim, dtype=np.int64)
    np.add.at(hist, tuple(cells.T), 1)
    counts = hist
    for _ in range(dim):
        counts = _arc_sums(counts, 0)
    # axes are now (s_0, l_0, s_1, l_1, ...)
    vol = np.ones((1,) * (2 * dim))
    for k in range(dim):
        shape = [1] * (2 * dim)
        shape[2 * k + 1] = G + 1
        vol = vol * (np.arange(G + 1) / G).reshape(shape)
    value = float(np.max(np.abs(counts / N - vol)))
    # any box lies between an inner and an outer grid box whose volumes
    # differ by at most 2 cells per axis
    return DiscrepancyReport(value, "grid-supremum", G, 2 * dim / G, N=N, dim=dim)


def discrepancy(seq: TorusSequence, grid_resolution: int = 0) -> DiscrepancyReport:
    if len(seq) == 0:
        raise ValueError("empty sequence")
    if seq.dim == 1 and grid_resolution == 0:
        return DiscrepancyReport(discrepancy_1d(seq.points[:, 0]), "exact-1d",
                                 N=len(seq), dim=1)
    G = grid_resolution or 16
    return grid_discrepancy(seq, G)


def etk_rhs(seq: TorusSequence, H: int) -> float:
    """1/H + sum over 0 < |h|_inf < H of |mean e(h.x)| / prod max(1, |h_i|)."""
    if H < 1:
        raise ValueError("H must be at least 1")
    pts = seq.points
    N, dim = pts.shape
    if (2 * H - 1) ** dim * N > GUARD:
        raise GuardExceeded("too many frequencies")
    rng = np.arange(-H + 1, H)
    # per-coordinate characters, then combine by broadcasting over h-vectors
    chars = [e_of(np.multiply.outer(pts[:, k], rng)) for k in range(dim)]
    weight = 1.0 / np.maximum(1, np.abs(rng))
    total = 0.0
    for idx in np.ndindex(*(len(rng),) * dim):
        if all(rng[i] == 0 for i in idx):
            continue
        prod = np.ones(N, dtype=complex)
        w = 1.0
        for k, i in enumerate(idx):
            prod = prod * chars[k][:, i]
            w *= weight[i]
        total += w * abs(prod.mean())
    return 1.0 / H + total


def koksma_hlawka_check(f: Callable, variation: float, integral: float,
                        seq: TorusSequence) -> tuple[float, float]:
    x = seq.points[:, 0]
    lhs = abs(float(np.mean(f(x))) - integral)
    rhs = variation * discrepancy_1d(x)
    return lhs, rhs


def mean_dyadic_discrepancy(U: int, eta: int) -> float:
    """sum over d < 2**eta of D_U((k d / 2**eta)_{k<U}), exactly."""
    if U < 1 or eta < 0:
        raise ValueError("need U >= 1 and eta >= 0")
    q = 1 << eta
    if U * q > GUARD:
        raise GuardExceeded("U * 2**eta above 2**30")
    total = 0.0
    k = np.arange(U, dtype=np.int64)
    rows = max(1, (1 << 22) // U)
    for d0 in range(0, q, rows):
        d = np.arange(d0, min(q, d0 + rows), dtype=np.int64)
        num = np.sort(np.mod(np.multiply.outer(d, k), q), axis=1)
        # exact in integers: x_i - i/U scaled by U*q
        g = num * U - np.arange(U) * q
        span = g.max(axis=1) - g.min(axis=1)
        total += float(np.sum(np.minimum(q + span, U * q))) / (U * q)
    return total


def mean_dyadic_ratio(U: int, eta: int) -> float:
    """mean_dyadic_discrepancy normalised by ((U + 2**eta)/U) (log+ U)**2."""
    return mean_dyadic_discrepancy(U, eta) / ((U + 2**eta) / U * log_plus(U) ** 2)


def leftshift_average(alphas, q: int, M: int) -> tuple[float, float]:
    alphas = np.asarray(alphas, dtype=float)
    if alphas.size == 0:
        raise ValueError("empty alphas")
    N = alphas.size
    m = np.arange(M)
    orbits = np.sort(np.mod(np.multiply.outer(alphas, m) / q, 1.0), axis=1)
    lhs = float(np.mean(np.minimum(1.0, _sweep(orbits))))
    rhs = q * log_plus(M) * log_plus(N) / M + discrepancy_1d(alphas) ** 0.5 / q
    return lhs, rhs
