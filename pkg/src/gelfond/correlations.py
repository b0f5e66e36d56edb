"""Exponential and correlation sums attached to t(n**3).

All sums of +-1 values are accumulated as exact integers; only the final
normalisation produces floats.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .digits import tm_cube_signs, windowed_digit_sum
from .discrepancy import GuardExceeded
from .parallel import chunk_ranges, ordered_map
from .trig import e_of

S0_GUARD = 34
CHUNK = 1 << 22


def _sign(k):
    return 1 - 2 * (k & 1)


def _mask_popcount(values: np.ndarray, lo: int, hi: int) -> np.ndarray:
    """Popcount of bits [lo, hi) of uint64 values (hi <= 64)."""
    if hi <= lo:
        return np.zeros(values.shape, dtype=np.int64)
    v = values >> np.uint64(lo)
    if hi - lo < 64:
        v = v & np.uint64((1 << (hi - lo)) - 1)
    return np.bitwise_count(v).astype(np.int64)


# ---------------------------------------------------------------------------
# S_0 and cube Weyl sums


def s0(nu: int, xi: float) -> complex:
    """(1/2**nu) sum_{n < 2**nu} (-1)**s(n**3) e(n xi)."""
    if nu < 0:
        raise ValueError("nu must be nonnegative")
    if nu > S0_GUARD:
        raise GuardExceeded(f"nu > {S0_GUARD}")
    total = 0j
    for a, b in chunk_ranges(0, 1 << nu, CHUNK):
        sg = tm_cube_signs(a, b).astype(float)
        n = np.arange(a, b, dtype=np.float64)
        total += complex(np.sum(sg * e_of(n * xi)))
    return total / (1 << nu)


def _fold_chunk(args):
    a, b, G = args
    sg = tm_cube_signs(a, b).astype(np.int64)
    if b - a >= G:
        return a, sg.reshape(-1, G).sum(axis=0)
    return a, sg


def s0_grid(nu: int, G: int, threads: int = 1) -> np.ndarray:
    """S_0(nu, k/G) for k < G, G a power of two.

    The +-1 sequence is folded mod G in exact integers, then one inverse
    FFT evaluates all grid points.
    """
    if nu > S0_GUARD:
        raise GuardExceeded(f"nu > {S0_GUARD}")
    if G < 1 or G & (G - 1):
        raise ValueError("grid size must be a power of two")
    N = 1 << nu
    folded = np.zeros(G, dtype=np.int64)
    size = max(CHUNK, G) if N >= G else N
    jobs = [(a, b, G) for a, b in chunk_ranges(0, N, size)]
    for a, part in ordered_map(_fold_chunk, jobs, threads):
        if part.size == G:
            folded += part
        else:
            folded[a % G: a % G + part.size] += part
    return np.fft.ifft(folded.astype(float)) * (G / N)


def cube_weyl_sum(lam: int, h: int, M: int) -> complex:
    """sum_{M <= n < 2M} e(h n**3 / 2**lam)."""
    if M > 1 << 26:
        raise GuardExceeded("M > 2**26")
    if M <= 0:
        return 0j
    if lam <= 64:
        n = np.arange(M, 2 * M, dtype=np.uint64)
        hm = np.uint64(h % (1 << lam)) if lam < 64 else np.uint64(h % (1 << 64))
        with np.errstate(over="ignore"):
            v = n * n * n * hm
        if lam < 64:
            v = v & np.uint64((1 << lam) - 1)
        frac = v.astype(np.float64) / float(1 << lam)
        return complex(np.sum(e_of(frac)))
    q = 1 << lam
    return complex(sum(e_of((h * n**3 % q) / q) for n in range(M, 2 * M)))


# ---------------------------------------------------------------------------
# van der Corput type inequalities


@dataclass
class VdcResult:
    lhs: float
    rhs: float
    rhs_imag: float

    @property
    def holds(self) -> bool:
        return self.rhs >= -1e-9 and self.lhs <= self.rhs * (1 + 1e-9) + 1e-9


def _autocorr(x: np.ndarray, d: int) -> complex:
    """sum_k x_k conj(x_{k+d}) over indices where both exist."""
    n = x.size
    if abs(d) >= n:
        return 0j
    if d >= 0:
        return complex(np.sum(x[: n - d] * np.conj(x[d:])))
    return complex(np.sum(x[-d:] * np.conj(x[: n + d])))


def vdc_generalized_check(x, S) -> VdcResult:
    x = np.asarray(x, dtype=complex)
    S = sorted(set(int(s) for s in S))
    if not S:
        raise ValueError("S must be nonempty")
    M = x.size
    lhs = float(abs(np.sum(x)) ** 2)
    acc = 0j
    cache: dict[int, complex] = {}
    for s0_ in S:
        for s1_ in S:
            d = s1_ - s0_
            if d not in cache:
                cache[d] = _autocorr(x, d)
            acc += cache[d]
    rhs = (M + S[-1] - S[0]) / len(S) ** 2 * acc
    return VdcResult(lhs, float(rhs.real), float(rhs.imag))


def vdc_mr_check(z, M: int, R: int) -> VdcResult:
    z = np.asarray(z, dtype=complex)
    if M < 1 or R < 1:
        raise ValueError("need M >= 1 and R >= 1")
    N = z.size
    lhs = float(abs(np.sum(z)) ** 2)
    acc = 0j
    for r in range(-R + 1, R):
        acc += (1 - abs(r) / R) * _autocorr(z, M * r)
    rhs = (N + M * (R - 1)) / R * acc
    return VdcResult(lhs, float(rhs.real), float(rhs.imag))


@dataclass
class IteratedVdc:
    lhs: float
    main: float
    err: float

    @property
    def needed_constant(self) -> float:
        """Smallest C with lhs <= main + C * err."""
        return max(0.0, (self.lhs - self.main) / self.err)


def cube_correlation(g: np.ndarray, shifts) -> complex:
    """(1/|J|) sum_n prod_eps C^{|eps|} g(n + eps . shifts), g extended periodically."""
    g = np.asarray(g, dtype=complex)
    n = np.arange(g.size)
    prod_ = np.ones(g.size, dtype=complex)
    for eps in product((0, 1), repeat=len(shifts)):
        val = g[(n + sum(e * m for e, m in zip(eps, shifts))) % g.size]
        prod_ *= np.conj(val) if sum(eps) & 1 else val
    return complex(prod_.mean())


def vdc_iterated_check(g, Ms, R: int) -> IteratedVdc:
    g = np.asarray(g, dtype=complex)
    Q = len(Ms)
    if Q < 1 or Q > 4:
        raise GuardExceeded("Q must be in 1..4")
    if R < 1:
        raise ValueError("R must be positive")
    if (R - 1) ** Q * g.size * 2**Q > 1 << 30:
        raise GuardExceeded("iterated correlation too large")
    lhs = float(abs(g.mean()) ** (2**Q))
    total = 0.0
    for r in product(range(1, R), repeat=Q):
        total += abs(cube_correlation(g, [ri * mi for ri, mi in zip(r, Ms)]))
    main = total / R**Q
    err = sum(Ms) * R / g.size + 1 / R
    return IteratedVdc(lhs, main, err)


# ---------------------------------------------------------------------------
# fourfold correlation and quadratic phase sums


def fourfold_correlation(mu: int, a: int, b: int, alpha, beta) -> float:
    """(1/2**mu) sum_{n<2**mu} prod_j (-1)**s^{[a,b)}(n alpha_j + beta_j)."""
    if mu > 26:
        raise GuardExceeded("mu > 26")
    if a > b:
        raise ValueError("need a <= b")
    if b == a:
        return 1.0
    N = 1 << mu
    top = max(abs(int(x)) for x in list(alpha) + list(beta)) * N + N
    if min(list(alpha) + list(beta)) >= 0 and top < 1 << 63 and b <= 64:
        n = np.arange(N, dtype=np.uint64)
        par = np.zeros(N, dtype=np.int64)
        for al, be in zip(alpha, beta):
            v = n * np.uint64(al) + np.uint64(be)
            par += _mask_popcount(v, a, b)
        return float(np.mean(1 - 2 * (par & 1)))
    total = 0
    for n in range(N):
        k = sum(windowed_digit_sum((n * al + be) % (1 << b), (a, b)) for al, be in zip(alpha, beta))
        total += _sign(k)
    return total / N


def quadratic_phase_sum(n_ol: int, eps: int, r: int, a: int, h: int, zeta: int) -> complex:
    """(1/2**zeta) sum_{n00 < 2**zeta} e(h (n_ol 2**zeta + n00 + eps r)**2 / 2**a)."""
    if zeta > 24:
        raise GuardExceeded("zeta > 24")
    if a < 0:
        raise ValueError("a must be nonnegative")
    base = (n_ol << zeta) + eps * r
    if a <= 64:
        # wrapping uint64 arithmetic is exact modulo 2**a
        x = np.arange(1 << zeta, dtype=np.uint64) + np.uint64(base % (1 << 64))
        with np.errstate(over="ignore"):
            v = x * x * np.uint64(h % (1 << 64))
        if a < 64:
            v = v & np.uint64((1 << a) - 1)
        return complex(np.mean(e_of(v.astype(np.float64) / float(1 << a))))
    q = 1 << a
    vals = [(h * (base + k) ** 2) % q / q for k in range(1 << zeta)]
    return complex(np.mean(e_of(np.array(vals))))


# ---------------------------------------------------------------------------
# Gowers norms of t restricted to Z/2^rho


def _tm_signs(rho: int) -> np.ndarray:
    n = np.arange(1 << rho, dtype=np.uint64)
    return (1 - 2 * (np.bitwise_count(n) & 1).astype(np.int8)).astype(np.int8)


def gowers_norm(rho: int, Q: int, method: str = "auto") -> float:
    """Normalised 2**Q-th power of the U^Q norm of (-1)**s(n mod 2**rho).

    "fast" (Q = 2 only) sums |f^(h)|**4 over the Fourier transform.
    "direct" sums exact integers: summing the last difference variable
    out first turns each inner sum into a square, so the cost is
    2**(Q rho) instead of 2**((Q+1) rho).
    """
    if Q < 1:
        raise ValueError("Q must be at least 1")
    if method == "auto":
        method = "fast" if Q == 2 else "direct"
    N = 1 << rho
    f = _tm_signs(rho)
    if method == "fast":
        if Q != 2:
            raise ValueError("fast path exists only for Q = 2")
        fhat = np.fft.fft(f.astype(float)) / N
        return float(np.sum(np.abs(fhat) ** 4))
    if method != "direct":
        raise ValueError(f"unknown method {method}")
    if (Q + 1) * rho > 30:
        raise GuardExceeded("2**((Q+1) rho) above 2**30")
    # D[r_1, ..., r_k, n] = prod over eps of f(n + eps . r)
    D = f[None, :]
    for _ in range(Q - 1):
        rows = []
        for r in range(N):
            rows.append(D * np.roll(D, -r, axis=-1))
        D = np.stack(rows, axis=0).reshape(-1, N)
    sums = D.astype(np.int64).sum(axis=-1)
    return float(np.sum(sums * sums)) / float(N) ** (Q + 1)


# ---------------------------------------------------------------------------
# S_8 and its linearisation


@dataclass(frozen=True)
class CorrelationSpec:
    u: int
    nu: int
    rho: int
    tau: int
    zeta: int
    n_lo: int  # < 2**(rho - tau)
    n_ol: int  # < 2**(tau - zeta)
    n_oo: int  # < 2**zeta
    shift0: int
    shift1: int
    m: int
    r: int

    def validate(self):
        if not (self.u >= self.nu >= self.rho >= self.tau >= self.zeta >= 0):
            raise ValueError("need u >= nu >= rho >= tau >= zeta >= 0")
        if not (0 <= self.n_lo < 1 << (self.rho - self.tau)):
            raise ValueError("n_lo out of range")
        if not (0 <= self.n_ol < 1 << (self.tau - self.zeta)):
            raise ValueError("n_ol out of range")
        if not (0 <= self.n_oo < 1 << self.zeta):
            raise ValueError("n_oo out of range")

    def stack_holds(self, lam: int) -> bool:
        z, t, u, rho, nu = self.zeta, self.tau, self.u, self.rho, self.nu
        return 3 * z <= lam <= 3 * t and 2 * t <= u <= 2 * rho and rho <= nu and 2 * nu <= lam

    def chain_holds(self) -> bool:
        z, t, u, rho = self.zeta, self.tau, self.u, self.rho
        return u - rho <= 2 * t - z <= 2 * t <= t + rho <= 2 * rho


def _pairs(spec: CorrelationSpec):
    return [(eps, ts) for eps in (0, 1) for ts in (spec.shift0, spec.shift1)]


def _offset(spec: CorrelationSpec, eps: int, ts: int) -> int:
    return ((spec.n_lo + ts * spec.m) << spec.tau) + (spec.n_ol << spec.zeta) + spec.n_oo + eps * spec.r


def s8_defining(spec: CorrelationSpec) -> float:
    """S_8 from its definition: a real number, being a mean of +-1 products."""
    spec.validate()
    k = spec.nu - spec.rho
    if k > 22:
        raise GuardExceeded("nu - rho > 22")
    n11 = np.arange(1 << k, dtype=object if spec.u > 64 else np.uint64)
    par = np.zeros(1 << k, dtype=np.int64)
    for eps, ts in _pairs(spec):
        A = _offset(spec, eps, ts)
        if spec.u <= 64:
            with np.errstate(over="ignore"):
                x = (n11 << np.uint64(spec.rho)) + np.uint64(A % (1 << 64))
                par += _mask_popcount(x * x * x, 0, spec.u)
        else:
            par += np.array([windowed_digit_sum(((int(n) << spec.rho) + A) ** 3 % (1 << spec.u), (0, spec.u))
                             for n in n11], dtype=np.int64)
    return float(np.mean(1 - 2 * (par & 1)))


@dataclass(frozen=True)
class LinearizedSlopes:
    A: int
    Qtilde: int
    Qprime: int
    beta: int
    c: int
    n_a: int  # n_ol 2**zeta + n_oo + eps r


def linearized_slopes(spec: CorrelationSpec, eps: int, ts: int) -> LinearizedSlopes:
    A = _offset(spec, eps, ts)
    n_a = (spec.n_ol << spec.zeta) + spec.n_oo + eps * spec.r
    qprime = 6 * n_a * (spec.n_lo << spec.tau) + 6 * ts * spec.m * n_a * (1 << spec.tau) + 3 * n_a * n_a
    cube = A**3
    c = windowed_digit_sum(cube % (1 << spec.rho), (0, spec.rho))
    return LinearizedSlopes(A, 3 * A * A, qprime, cube >> spec.rho, c, n_a)


def s8_linearized(spec: CorrelationSpec, literal_window: bool = False) -> float:
    """|S_8| through the slopes Q' and offsets beta.

    The digits of the cube with index below tau coincide for both shifts
    and cancel; in the linear form n11 Q' + beta that block sits at
    indices [rho, rho + tau) of the cube, so the window over the linear
    form must start at 0. literal_window=True starts it at tau instead,
    which is not an identity (kept for comparison).
    """
    spec.validate()
    k = spec.nu - spec.rho
    if k > 22:
        raise GuardExceeded("nu - rho > 22")
    width = spec.u - spec.rho
    lo = spec.tau if literal_window else 0
    mod = 1 << width
    n11 = np.arange(1 << k, dtype=np.uint64)
    par = np.zeros(1 << k, dtype=np.int64)
    for eps, ts in _pairs(spec):
        sl = linearized_slopes(spec, eps, ts)
        if width <= 64:
            with np.errstate(over="ignore"):
                v = n11 * np.uint64(sl.Qprime % mod) + np.uint64(sl.beta % mod)
            par += _mask_popcount(v, lo, width)
        else:
            par += np.array([windowed_digit_sum((int(n) * sl.Qprime + sl.beta) % mod, (lo, width))
                             for n in n11], dtype=np.int64)
    return abs(float(np.mean(1 - 2 * (par & 1))))


def low_digit_blocks(spec: CorrelationSpec) -> list[int]:
    """s^{[0,tau)} of each of the four cubes; equal in pairs across the shifts."""
    out = []
    for eps, ts in _pairs(spec):
        x = ((spec.n_ol << spec.zeta) + spec.n_oo + eps * spec.r + ((spec.n_lo + ts * spec.m) << spec.tau))
        out.append(windowed_digit_sum(x**3 % (1 << spec.tau), (0, spec.tau)))
    return out


@dataclass(frozen=True)
class Phases:
    x: Fraction
    f: Fraction
    K: Fraction
    Kprime: Fraction


def linearized_phases(spec: CorrelationSpec, lam: int) -> Phases:
    """x, f, K and K' = f + n_lo x as exact rationals (n0 = n_ol 2**zeta + n_oo)."""
    if not spec.stack_holds(lam):
        raise ValueError("window stack violated")
    t, z = spec.tau, spec.zeta
    s0_, s1_, m = spec.shift0, spec.shift1, spec.m
    n0 = (spec.n_ol << z) + spec.n_oo
    ds, dq = s0_ - s1_, s0_ * s0_ - s1_ * s1_
    x = Fraction(6 * n0 * ds * m, 1 << (lam - 2 * t))
    f = Fraction(3 * n0 * n0 * ds * m + 3 * n0 * dq * m * m * (1 << t), 1 << (lam - t))
    K = (Fraction(spec.n_lo * 6 * spec.n_ol * ds * m, 1 << (lam - 2 * t - z))
         + Fraction(3 * spec.n_ol**2 * ds * m, 1 << (lam - t - 2 * z))
         + Fraction(3 * spec.n_ol * dq * m * m, 1 << (lam - 2 * t - z)))
    return Phases(x, f, K, f + spec.n_lo * x)


def e3_step_bound(spec: CorrelationSpec, lam: int, S: int, B: int) -> float:
    """Bound on |K'(n0) - K'(n0')| for n0, n0' in one block of 2**zeta.

    Expanding K' shows a constant 12 suffices when |shifts| < S, |m| <= B.
    """
    t, z, rho = spec.tau, spec.zeta, spec.rho
    return 12 * 2.0**z * (S * B * 2.0 ** (rho + t - lam) + (S * B) ** 2 * 2.0 ** (2 * t - lam))


def spec_shapes(lam: int, nu_max: int) -> list[tuple[int, int, int, int, int]]:
    """(u, nu, rho, tau, zeta) with nu <= nu_max obeying the stack and chain."""
    out = []
    for nu in range(nu_max + 1):
        for rho in range(nu + 1):
            for tau in range(rho + 1):
                for zeta in range(tau + 1):
                    for u in range(nu, 2 * rho + 1):
                        sp = CorrelationSpec(u, nu, rho, tau, zeta, 0, 0, 0, 0, 0, 0, 0)
                        if sp.stack_holds(lam) and sp.chain_holds():
                            out.append((u, nu, rho, tau, zeta))
    return out


def enumerate_specs(lam: int, nu_max: int, shifts=(0, 1), ms=(1, 2), rs=(-1, 0, 1)):
    """Every spec on the given shapes, digit blocks and small shift grid."""
    for u, nu, rho, tau, zeta in spec_shapes(lam, nu_max):
        for n_lo, n_ol, n_oo in product(range(1 << (rho - tau)), range(1 << (tau - zeta)), range(1 << zeta)):
            for s0_, s1_, m, r in product(shifts, shifts, ms, rs):
                yield CorrelationSpec(u, nu, rho, tau, zeta, n_lo, n_ol, n_oo, s0_, s1_, m, r)


def random_spec(rng: np.random.Generator, lam_range=(18, 60), max_k: int = 10,
                max_u: int = 64) -> tuple[int, CorrelationSpec]:
    """Rejection-sample (lam, spec) obeying the stack and chain with nu - rho <= max_k."""
    while True:
        lam = int(rng.integers(lam_range[0], lam_range[1] + 1))
        nu = int(rng.integers(lam // 4, lam // 2 + 1))
        rho = int(rng.integers(max(0, nu - max_k), nu + 1))
        tau = int(rng.integers(-(-lam // 3), max(-(-lam // 3), rho) + 1))
        zeta = int(rng.integers(0, lam // 3 + 1))
        u = int(rng.integers(nu, max(nu, min(max_u, 2 * rho)) + 1))
        sp = CorrelationSpec(u, nu, rho, tau, zeta, 0, 0, 0, 0, 0, 0, 0)
        if not (u >= nu >= rho >= tau >= zeta >= 0 and sp.stack_holds(lam) and sp.chain_holds()):
            continue
        return lam, CorrelationSpec(
            u, nu, rho, tau, zeta,
            int(rng.integers(0, 1 << (rho - tau))), int(rng.integers(0, 1 << (tau - zeta))),
            int(rng.integers(0, 1 << zeta)), int(rng.integers(-3, 4)), int(rng.integers(-3, 4)),
            int(rng.integers(1, 5)), int(rng.integers(-3, 4)))


@dataclass
class S8Check:
    checked: int
    failures: int
    max_error: float
    first_failure: CorrelationSpec | None = None


def s8_identity_check(specs, literal_window: bool = False, tol: float = 1e-10) -> S8Check:
    checked = failures = 0
    worst = 0.0
    first = None
    for sp in specs:
        err = abs(abs(s8_defining(sp)) - s8_linearized(sp, literal_window))
        checked += 1
        worst = max(worst, err)
        if err > tol:
            failures += 1
            first = first or sp
    return S8Check(checked, failures, worst, first)
