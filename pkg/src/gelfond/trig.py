"""Trigonometric primitives: e(x), geometric sums, Vaaler polynomials and
a handful of exact identities / inequalities used as numerical checks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def e_of(x):
    """exp(2 pi i x), reducing x mod 1 first to keep the argument small."""
    frac = np.mod(x, 1.0)
    return np.exp(2j * np.pi * frac)


def dist_to_int(x):
    """||x||, the distance to the nearest integer."""
    frac = np.mod(x, 1.0)
    return np.minimum(frac, 1.0 - frac)


def sawtooth(t):
    """psi(t) = t - floor(t) - 1/2."""
    return np.asarray(t, dtype=float) - np.floor(t) - 0.5


def geometric_sum(H: int, t: float, tol: float = 1e-9) -> complex:
    """sum_{0 <= h < H} e(h t)."""
    if H <= 0:
        return 0j
    if dist_to_int(t) <= tol:
        return complex(np.sum(e_of(np.arange(H) * t)))
    return complex((e_of(H * t) - 1) / (e_of(t) - 1))


# ---------------------------------------------------------------------------
# Vaaler approximation


def vaaler_phi(t):
    """pi t (1-|t|) cot(pi t) + |t| on [-1, 1], extended continuously."""
    t = np.asarray(t, dtype=float)
    a = np.abs(t)
    out = np.empty_like(a)
    small = a < 1e-4
    x = np.pi * a[small]
    # pi t cot(pi t) = 1 - x^2/3 - x^4/45 - ...
    out[small] = (1 - x * x / 3 - x**4 / 45) * (1 - a[small]) + a[small]
    big = ~small & (a < 1)
    ab = a[big]
    out[big] = np.pi * ab * (1 - ab) / np.tan(np.pi * ab) + ab
    out[a >= 1] = 0.0
    return out if out.ndim else float(out)


def vaaler_psi(H: int, t):
    """Return (psi_H(t), kappa_H(t), psi(t))."""
    if H < 1:
        raise ValueError("H must be at least 1")
    t = np.asarray(t, dtype=float)
    h = np.arange(1, H)
    coef = vaaler_phi(h / H) / (np.pi * h)
    # pairing h with -h turns the complex series into a sine series
    ang = 2 * np.pi * np.multiply.outer(np.mod(t, 1.0), h)
    psi_h = -(np.sin(ang) @ coef) if H > 1 else np.zeros_like(t)
    fej = (1 - h / H) / H
    kappa = 0.5 / H + (np.cos(ang) @ fej if H > 1 else 0.0)
    return psi_h, kappa, sawtooth(t)


@dataclass
class VaalerCoefficients:
    H: int
    alpha: float
    beta: float
    main: np.ndarray  # a_h for h = -H+1 .. H-1
    kernel: np.ndarray  # b_h for h = -H+1 .. H-1

    @property
    def freqs(self) -> np.ndarray:
        return np.arange(-self.H + 1, self.H)

    def psi(self, x):
        x = np.asarray(x, dtype=float)
        ph = e_of(np.multiply.outer(x - self.alpha, self.freqs))
        return (ph @ self.main).real

    def kappa(self, x):
        x = np.asarray(x, dtype=float)
        ph = e_of(np.multiply.outer(x, self.freqs))
        return (ph @ self.kernel).real


def detector_main(delta: float, H: int, literal_sign: bool = False) -> np.ndarray:
    """a_h(delta, H) for |h| < H.

    The sign is chosen so that psi_H(x - beta) - psi_H(x - alpha) is
    reproduced term by term; literal_sign=True flips it to the opposite
    variant, which does not satisfy the detector bound.
    """
    h = np.arange(-H + 1, H)
    out = np.zeros(h.shape, dtype=complex)
    nz = h != 0
    hn = h[nz]
    c = vaaler_phi(hn / H) / (2j * np.pi * hn)
    sign = -1.0 if literal_sign else 1.0
    out[nz] = sign * c * (1 - e_of(-delta * hn))
    out[~nz] = delta
    return out


def interval_detector(alpha: float, beta: float, H: int,
                      literal_sign: bool = False) -> VaalerCoefficients:
    if not (0 <= alpha <= beta <= 1):
        raise ValueError("need 0 <= alpha <= beta <= 1")
    if H < 1:
        raise ValueError("H must be at least 1")
    h = np.arange(-H + 1, H)
    kernel = (1 - np.abs(h) / H) / (2 * H) * (e_of(-h * alpha) + e_of(-h * beta))
    main = detector_main(beta - alpha, H, literal_sign)
    return VaalerCoefficients(H, alpha, beta, main, kernel)


def indicator(alpha: float, beta: float, t):
    """Indicator of [alpha, beta) + Z."""
    return (np.mod(np.asarray(t, dtype=float) - alpha, 1.0) < beta - alpha).astype(float)


def vaaler_excess(H: int, t) -> np.ndarray:
    """|psi(t) - psi_H(t)| - kappa_H(t); nonpositive wherever the bound holds."""
    psi_h, kappa, psi = vaaler_psi(H, t)
    return np.abs(psi - psi_h) - kappa


def detector_excess(alpha: float, beta: float, H: int, x, literal_sign: bool = False) -> np.ndarray:
    """|1_[alpha,beta)(x) - detector(x)| - kernel(x); nonpositive wherever the bound holds."""
    co = interval_detector(alpha, beta, H, literal_sign)
    return np.abs(indicator(alpha, beta, x) - co.psi(x)) - co.kappa(x)


# ---------------------------------------------------------------------------
# exact identities and inequalities


def large_sieve_equality(a) -> tuple[float, float]:
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        raise ValueError("empty vector")
    # numpy's forward transform uses e(-hm/M)
    lhs = float(np.sum(np.abs(np.fft.fft(a)) ** 2))
    rhs = float(a.size * np.sum(np.abs(a) ** 2))
    return lhs, rhs


def summation_by_parts_check(a, b) -> tuple[complex, complex]:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError("length mismatch")
    if a.size == 0:
        return 0j, 0j
    direct = complex(np.sum(a * b))
    tails = np.cumsum(a[::-1])[::-1]  # tails[l] = sum_{m >= l} a_m
    rearranged = complex(b[0] * tails[0] + np.sum(np.diff(b) * tails[1:]))
    return direct, rearranged


@dataclass
class RangeExtension:
    lhs: float
    rhs: float
    quad_error: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + self.quad_error


def _trapezoid(f, a, b, n):
    xs = np.linspace(a, b, n + 1)
    ys = f(xs)
    return (b - a) / n * (ys.sum() - 0.5 * (ys[0] + ys[-1]))


def range_extension_check(a, x: int, y: float, quad_points: int = 4096) -> RangeExtension:
    """|sum_{x<=n<y} a_n| against the integral bound over the full range [x, z)."""
    a = np.asarray(a, dtype=complex)
    z = x + a.size
    if not (x <= y <= z):
        raise ValueError("y must lie in [x, z]")
    if quad_points < 1000:
        raise ValueError("need at least 1000 quadrature points")
    n = np.arange(x, z)
    lhs = float(abs(np.sum(a[n < y])))
    cap = float(np.ceil(y) - x)

    def integrand(xi):
        poly = np.abs(e_of(np.multiply.outer(xi, n)) @ a)
        d = dist_to_int(xi)
        with np.errstate(divide="ignore"):
            w = np.where(d > 0, 1.0 / (2 * np.maximum(d, 1e-300)), np.inf)
        return np.minimum(cap, w) * poly

    # split where the clipping switches on, so each piece is smooth
    if cap <= 0:
        return RangeExtension(lhs, 0.0, 0.0)
    k = min(0.5, 1.0 / (2 * cap))
    cuts = sorted({0.0, k, 1.0 - k, 1.0})
    pieces = [(p, q) for p, q in zip(cuts, cuts[1:]) if q > p]
    per = max(2, quad_points // len(pieces))
    fine = sum(_trapezoid(integrand, p, q, per) for p, q in pieces)
    coarse = sum(_trapezoid(integrand, p, q, per // 2) for p, q in pieces)
    # Richardson-style estimate, doubled for safety
    err = 2 * abs(fine - coarse) / 3
    return RangeExtension(lhs, float(fine), float(err))


def holder_partition_check(f, g, partition) -> tuple[float, float]:
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    if f.shape != g.shape:
        raise ValueError("length mismatch")
    seen = np.zeros(f.size, dtype=int)
    for part in partition:
        seen[list(part)] += 1
    if np.any(seen != 1):
        raise ValueError("not a partition of the index set")
    lhs = float(abs(np.sum(f * g)))
    parts = [np.asarray(list(p)) for p in partition if len(p)]
    sup_g = max(float(np.sum(np.abs(g[p]))) for p in parts)
    rhs = sum(float(np.max(np.abs(f[p]))) for p in parts) * sup_g
    return lhs, rhs
