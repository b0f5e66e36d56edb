"""Parameter schedule, its audit, the log2 error budget and the two
desk-scale experiments (density of t(n**3) = 0 and decay of S_0)."""
from __future__ import annotations

import decimal
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .correlations import S0_GUARD, s0_grid
from .digits import tm_cube_signs
from .discrepancy import GuardExceeded
from .parallel import chunk_ranges, ordered_map

XI_DEFAULT = Fraction(1, 15000)
ZETA_CONST = 139


def _floor(x: Fraction) -> int:
    return math.floor(x)


def log2_floor_pow2(y) -> float:
    """log2 of floor(2**y); -inf when the floor is zero."""
    y = Fraction(y)
    if y >= 60:
        return float(y)
    if y < 0:
        return -math.inf
    return math.log2(_floor_pow2_exact(y))


def _floor_pow2_exact(y: Fraction) -> int:
    # 60-digit decimal candidate; exact integer check only when 2**y is near an integer
    with decimal.localcontext() as ctx:
        ctx.prec = 60
        x = decimal.Decimal(2) ** (decimal.Decimal(y.numerator) / y.denominator)
        v = int(x)
        near = min(x - v, v + 1 - x) < decimal.Decimal(10) ** -40
    if not near:
        return v
    if y.denominator == 1:
        return 1 << y.numerator
    num, den = y.numerator, y.denominator
    for cand in (v + 1, v, v - 1):
        if cand >= 1 and cand**den <= 1 << num:
            return cand
    return 0


def lse2(*terms: float) -> float:
    """log2(sum 2**t)."""
    m = max(terms)
    if m == -math.inf:
        return m
    return m + math.log2(sum(2.0 ** (t - m) for t in terms))


@dataclass
class ParameterSchedule:
    nu: int
    xi: Fraction
    lam: int
    rho: int
    u: int
    tau: int
    zeta: int
    omega: int
    log2V: float
    log2B: float
    log2H: float
    log2R1: float
    log2R: float
    log2S: float
    eta0: int
    eta1: int
    a: int
    b: int
    kappa: int
    delta: int
    delta1: int
    delta2: int
    L: int | None
    c: int
    d: int | None
    Q: int | None
    log2T0: int
    mu: int
    zeta_const: int = ZETA_CONST

    def as_dict(self) -> dict:
        out = asdict(self)
        out["xi"] = f"{self.xi.numerator}/{self.xi.denominator}"
        return out


def build_schedule(nu: int, xi=XI_DEFAULT, zeta_const: int = ZETA_CONST) -> ParameterSchedule:
    if nu < 1:
        raise ValueError("nu must be at least 1")
    xi = Fraction(xi)
    xn = xi * nu
    lam = 3 * _floor((2 + 2 * xi) * nu / 3)
    rho = _floor((1 - 2 * xi) * nu)
    u = _floor((2 - 5 * xi) * nu)
    tau = lam // 3
    zeta = _floor(lam * (Fraction(1, 6) - Fraction(1, zeta_const)))
    omega = _floor(Fraction(3 * lam, zeta_const))
    # H = 2^(lam-u) floor(2^(u-lam) 2^(8 xi nu))
    log2H = (lam - u) + log2_floor_pow2(u - lam + 8 * xn)
    a, b = tau, u - rho
    kappa = _floor(xn / 100)
    delta = _floor(3 * xn / 100)
    if b <= a + 66 * kappa:
        L = 0
    elif kappa >= 1:
        L = -(-(b - a - 66 * kappa) // kappa)
    else:
        L = None  # no finite number of slices reaches the target
    eta0 = _floor(Fraction(4 * lam, zeta_const))
    return ParameterSchedule(
        nu=nu, xi=xi, lam=lam, rho=rho, u=u, tau=tau, zeta=zeta, omega=omega,
        log2V=float(omega), log2B=log2_floor_pow2(180 * xn), log2H=log2H,
        log2R1=log2_floor_pow2(xn / 40), log2R=log2_floor_pow2(17 * xn),
        log2S=log2_floor_pow2(17 * xn), eta0=eta0, eta1=_floor(16 * xn),
        a=a, b=b, kappa=kappa, delta=delta, delta1=32 * kappa, delta2=64 * kappa + delta,
        L=L, c=a + 64 * kappa, d=None if L is None else b - L * kappa,
        Q=None if L is None else 4 * (L + 1), log2T0=5 * eta0 + 7, mu=nu - rho,
        zeta_const=zeta_const,
    )


# ---------------------------------------------------------------------------
# audit


def schedule_checks(s: ParameterSchedule) -> dict[str, bool]:
    lam, rho, u, tau, zeta, nu = s.lam, s.rho, s.u, s.tau, s.zeta, s.nu
    sizes_ok = min(s.log2B, s.log2H, s.log2R1, s.log2S) >= 0
    checks = {
        "lambda divisible by 3": lam % 3 == 0,
        "small values B, H, R1, S at least 1": sizes_ok,
        "2^(lambda-u) divides H": lam >= u and sizes_ok,
        "u >= nu >= rho >= tau >= zeta >= 0": u >= nu >= rho >= tau >= zeta >= 0,
        "zeta <= lambda/3 <= tau <= u/2 <= rho <= nu <= lambda/2":
            3 * zeta <= lam <= 3 * tau and 2 * tau <= u <= 2 * rho and rho <= nu and 2 * nu <= lam,
        "u-rho <= 2tau-zeta <= 2tau <= tau+rho <= 2rho":
            u - rho <= 2 * tau - zeta <= 2 * tau <= tau + rho <= 2 * rho,
        "lambda-2tau-zeta >= 4eta0+4": lam - 2 * tau - zeta >= 4 * s.eta0 + 4,
        "S*B < 2^(rho-tau)": s.log2S + s.log2B < rho - tau,
        "T0*V <= 2^(rho-tau)": s.log2T0 + s.omega <= rho - tau,
        "slice count L finite": s.L is not None,
    }
    if s.L is not None and s.L >= 1:
        b_last = s.b - (s.L - 1) * s.kappa
        checks["b_(L-1) - tau >= 65 kappa"] = b_last - tau >= 65 * s.kappa
    else:
        checks["b_(L-1) - tau >= 65 kappa"] = False
    if s.d is not None:
        checks["kappa <= d-c <= 2 kappa"] = s.kappa <= s.d - s.c <= 2 * s.kappa
        checks["kappa >= 1"] = s.kappa >= 1
    else:
        checks["kappa <= d-c <= 2 kappa"] = False
        checks["kappa >= 1"] = False
    return checks


def _ok(nu: int, xi, zeta_const: int) -> bool:
    return all(schedule_checks(build_schedule(nu, xi, zeta_const)).values())


def find_nu0(xi=XI_DEFAULT, zeta_const: int = ZETA_CONST, hi: int = 10**12) -> int:
    """Least nu such that the audit passes for nu and every later grid point.

    A log-spaced scan locates the last failure; bisection then refines
    between the last failing and first passing grid values.
    """
    grid = sorted({int(round(10 ** (k / 8))) for k in range(0, 8 * 12 + 1)} | {hi})
    grid = [g for g in grid if g <= hi]
    status = [_ok(g, xi, zeta_const) for g in grid]
    last_bad = max((i for i, ok in enumerate(status) if not ok), default=-1)
    if last_bad == len(grid) - 1:
        raise RuntimeError("audit fails at the top of the scan")
    lo, top = (grid[last_bad] if last_bad >= 0 else 0), grid[last_bad + 1]
    while top - lo > 1:
        mid = (lo + top) // 2
        if _ok(mid, xi, zeta_const):
            top = mid
        else:
            lo = mid
    return top


@dataclass
class Audit:
    ok: bool
    violations: list
    nu0: int


def audit_schedule(s: ParameterSchedule, with_nu0: bool = True) -> Audit:
    checks = schedule_checks(s)
    bad = [k for k, v in checks.items() if not v]
    return Audit(not bad, bad, find_nu0(s.xi, s.zeta_const) if with_nu0 else -1)


# ---------------------------------------------------------------------------
# error budget


@dataclass
class BudgetTerm:
    name: str
    log2: float | None
    kind: str  # "closed", "surrogate" or "data"
    note: str = ""

    def rate(self, nu: int) -> float | None:
        """c with log2 value = -c nu."""
        return None if self.log2 is None else -self.log2 / nu


@dataclass
class ErrorBudget:
    nu: int
    terms: list = field(default_factory=list)

    def closed_terms(self):
        return [t for t in self.terms if t.kind == "closed"]

    @property
    def nonnegative(self) -> list[str]:
        return [t.name for t in self.terms if t.log2 is not None and t.log2 >= 0]

    @property
    def all_negative(self) -> bool:
        return not self.nonnegative

    def by_name(self, name: str) -> BudgetTerm:
        return next(t for t in self.terms if t.name == name)


def _e12(s: ParameterSchedule, kp: int) -> float:
    ells = np.arange(s.L)
    b_l = s.b - ells * s.kappa
    lead = np.maximum(0.0, (b_l - s.tau - s.zeta) / 2)
    tail = np.logaddexp2(-s.omega / 4, (s.tau - b_l) / 4)
    worst = float(np.max(lead + tail))
    return math.log2(s.L) + 4 * kp + 4 + 0.5 * math.log2(s.nu) + worst


def error_budget(s: ParameterSchedule) -> ErrorBudget:
    """log2 of every error term; raises if the schedule fails its audit."""
    audit = schedule_checks(s)
    if not all(audit.values()):
        raise ValueError("schedule fails its audit: " + ", ".join(k for k, v in audit.items() if not v))
    nu, lam, rho, tau, zeta = s.nu, s.lam, s.rho, s.tau, s.zeta
    xn = float(s.xi * nu)
    lS, lB, lH, lR, lR1 = s.log2S, s.log2B, s.log2H, s.log2R, s.log2R1
    k0 = lam - s.u
    kp = s.kappa + s.delta
    terms = [
        BudgetTerm("E0", lse2(k0 - lH, lam / 3 - nu, 1.5 * lH + (nu - lam) / 2), "closed",
                   "trigonometric approximation: 2^(lambda-u)/H + 2^(lambda/3-nu) + H^(3/2) 2^((nu-lambda)/2)"),
        BudgetTerm("E1", lS + lB + lH - (nu - tau), "closed", "S B H / 2^(nu-tau)"),
        BudgetTerm("E2", -36 * xn + lS + 2 * lH + (nu - rho), "surrogate",
                   "2^(-36 Xi nu) S H^2 2^(nu-rho); the raw term depends on the chosen m(n01)"),
        BudgetTerm("E3", 2 * lH + zeta + lse2(lS + lB + rho + tau - lam, 2 * (lS + lB) + 2 * tau - lam),
                   "closed", "H^2 2^zeta (S B 2^(rho+tau-lambda) + S^2 B^2 2^(2tau-lambda))"),
    ]
    e4m = lse2(lR - zeta, -lR, lR + 2 * nu - lam)
    terms += [
        BudgetTerm("E4-", e4m, "closed", "R/2^zeta + 1/R + R 2^(2nu)/2^lambda"),
        BudgetTerm("E4", e4m + math.log2(math.log(nu)), "closed", "E4- times log nu"),
        BudgetTerm("E5", 2 * lH + lS + lB + s.log2V - s.eta0, "closed",
                   "H^2 S B V 2^(-eta0), the sup of ||T n01 / 2^(lambda-2tau-zeta)|| over G0"),
        BudgetTerm("E6", lse2(lH - s.eta0, lH - lS), "closed", "H/2^eta0 + H/S"),
        BudgetTerm("E7", 2 * (lS + lB) + 3 * tau - lam + 2 * math.log2(lam) + s.eta1 - (tau - zeta),
                   "closed", "(SB)^2 2^(3tau-lambda) lambda^2 2^eta1 / |J01|"),
    ]
    m_sum = lse2(math.log2(4 * max(s.L, 1)) + 5 * kp + 7, 2 + 3 * (s.c - s.a))
    terms += [
        BudgetTerm("E8", lse2(lR1 - s.mu + m_sum, -lR1), "closed",
                   "(R1/2^mu) sum M + 1/R1 with M < 2^(5(kappa+delta)+7), M_L < 2^(3(c-a))"),
        BudgetTerm("E9", float(-s.delta), "closed",
                   "margin part 2^-delta; the discrepancy part is data-dependent"),
        BudgetTerm("E10", float(s.d - s.c) - lR1, "closed", "2^(d-c)/R1"),
        BudgetTerm("E11", None, "data", "fourfold discrepancy, only bounded on average through E14"),
        BudgetTerm("E12", _e12(s, kp), "closed",
                   "L 2^(4kappa'+4) nu^(1/2) max(1, 2^((b_l-tau-zeta)/2)) (V^(-1/4) + 2^((tau-b_l)/4)), worst l"),
        BudgetTerm("E13", lse2(2 * math.log2(nu) - (nu - rho), -zeta / 4), "closed",
                   "nu^2/2^(nu-rho) + 2^(-zeta/4)"),
        BudgetTerm("E14", 6 * math.log2(nu) + lse2(-xn / 200, 2 * xn / 25 + 2 * math.log2(nu) - (s.log2V - 1)),
                   "surrogate", "nu^6 (2^(-Xi nu/200) + 2^(2 Xi nu/25) nu^2/|P|) with |P| >= V/2"),
    ]
    return ErrorBudget(nu, terms)


# ---------------------------------------------------------------------------
# experiments


def density_checkpoints(log2_N: int, count: int) -> list[int]:
    N = 1 << log2_N
    if count <= 1:
        return [N]
    pts = {int(2 ** (log2_N * i / (count - 1))) for i in range(count)}
    return sorted(pts | {N})


def _density_chunk(args):
    a, b, marks = args
    zero = tm_cube_signs(a, b) > 0
    cs = np.cumsum(zero, dtype=np.int64)
    return int(cs[-1]), [int(cs[m - a - 1]) for m in marks]


def density_experiment(log2_N: int, checkpoints: int = 1, threads: int = 1,
                       chunk: int = 1 << 22) -> dict:
    if log2_N > 32 or log2_N < 0:
        raise GuardExceeded("log2 N must lie in [0, 32]")
    marks = density_checkpoints(log2_N, checkpoints)
    N = 1 << log2_N
    jobs = [(a, b, [m for m in marks if a < m <= b]) for a, b in chunk_ranges(0, N, chunk)]
    rows = []
    before = 0
    for (a, b, ms), (tot, partial) in zip(jobs, ordered_map(_density_chunk, jobs, threads)):
        for m, p in zip(ms, partial):
            cnt = before + p
            rows.append({"N": m, "count": cnt, "deviation": abs(cnt / m - 0.5)})
        before += tot
    out = dict(rows[-1])
    if len(rows) > 1:
        out["checkpoints"] = rows
        pts = [(math.log2(r["N"]), math.log2(r["deviation"])) for r in rows
               if r["N"] >= 16 and r["deviation"] > 0]
        out["slope"] = float(np.polyfit(*zip(*pts), 1)[0]) if len(pts) >= 2 else None
    return out


def default_xi_grid(nu: int) -> int:
    return 1 << (nu + 2) if nu <= 20 else 1 << 22


def s0_sup(nu: int, xi_grid: int | None = None, threads: int = 1) -> dict:
    if nu > S0_GUARD:
        raise GuardExceeded(f"nu > {S0_GUARD}")
    G = xi_grid or default_xi_grid(nu)
    vals = np.abs(s0_grid(nu, G, threads))
    k = int(np.argmax(vals))
    # |d/dxi S_0| <= (1/2^nu) sum 2 pi n = pi (2^nu - 1); grid points are 1/(2G) away at most
    padding = math.pi * ((1 << nu) - 1) / (2 * G)
    return {"nu": nu, "xi_grid": G, "sup": float(vals[k]), "argmax_xi": k / G, "padding": padding}


def fit_slope(xs, ys, seed: int = 0x5EED, reps: int = 2000) -> dict:
    """Least-squares slope with a percentile bootstrap 95% interval."""
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    slope = float(np.polyfit(xs, ys, 1)[0])
    rng = np.random.default_rng(seed)
    boots = []
    for _ in range(reps):
        idx = rng.integers(0, xs.size, xs.size)
        if np.unique(xs[idx]).size < 2:
            continue
        boots.append(np.polyfit(xs[idx], ys[idx], 1)[0])
    lo, hi = np.percentile(boots, [2.5, 97.5])
    return {"slope": slope, "ci_low": float(lo), "ci_high": float(hi)}


def s0_decay_experiment(nu_range, xi_grid: int | None = None, threads: int = 1,
                        seed: int = 0x5EED) -> dict:
    nus = list(nu_range)
    if any(n > 30 for n in nus):
        raise GuardExceeded("nu range limited to 30")
    rows = [s0_sup(n, xi_grid, threads) for n in nus]
    fit_rows = [r for r in rows if r["nu"] >= 1 and r["sup"] > 0]
    out = {"rows": rows}
    if len(fit_rows) >= 3:
        out["fit"] = fit_slope([r["nu"] for r in fit_rows], [math.log2(r["sup"]) for r in fit_rows], seed)
    return out
