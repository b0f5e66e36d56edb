"""Seeded verification corpora shared by the command line and the tests."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .correlations import vdc_generalized_check, vdc_iterated_check, vdc_mr_check
from .digits import carry_profile
from .discrepancy import TorusSequence, koksma_hlawka_check
from .trig import detector_excess, dist_to_int, vaaler_excess

TOL = 1e-9
POINT_CHUNK = 1 << 12
ENDPOINT_GAP = 1e-6


@dataclass
class SuiteResult:
    name: str
    trials: int
    violations: int
    worst: float  # largest excess (lhs - rhs style); <= tolerance when all hold
    extra: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def as_dict(self) -> dict:
        return {"name": self.name, "trials": self.trials, "violations": self.violations,
                "worst": self.worst, "ok": self.ok, **self.extra}


def _unit(rng: np.random.Generator, n: int) -> np.ndarray:
    return np.exp(2j * np.pi * rng.random(n))


def vdc_trials(variant: str, trials: int, seed: int) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst = -np.inf
    bad = 0
    if variant == "iter":
        needed = []
        for _ in range(trials):
            Q = int(rng.integers(1, 4))
            g = _unit(rng, 1 << int(rng.integers(6, 10)))
            Ms = [int(v) for v in rng.integers(1, 5, Q)]
            res = vdc_iterated_check(g, Ms, int(rng.integers(2, 7)))
            needed.append(res.needed_constant)
        # the implied constant is existential: report the fitted one
        return SuiteResult("vdc-iter", trials, 0, float(max(needed)),
                           {"fitted_constant": float(max(needed))})
    for _ in range(trials):
        if variant == "gen":
            M = int(rng.integers(1, 65))
            x = rng.normal(size=M) + 1j * rng.normal(size=M)
            S = [s for s in range(8) if rng.random() < 0.5] or [int(rng.integers(0, 8))]
            res = vdc_generalized_check(x, S)
        elif variant == "mr":
            N = int(rng.integers(1, 129))
            z = rng.normal(size=N) + 1j * rng.normal(size=N)
            res = vdc_mr_check(z, int(rng.integers(1, 9)), int(rng.integers(1, 17)))
        else:
            raise ValueError(f"unknown variant {variant}")
        worst = max(worst, (res.lhs - res.rhs) / max(1.0, res.rhs))
        bad += not res.holds
    return SuiteResult(f"vdc-{variant}", trials, bad, float(worst))


def vaaler_trials(H: int, samples: int, seed: int, intervals: int = 100) -> SuiteResult:
    """Vaaler bound at `samples` points and the interval detector at `samples`
    points spread over `intervals` random intervals, kept 1e-6 away from
    the endpoints where the indicator jumps."""
    rng = np.random.default_rng(seed)
    worst = -np.inf
    bad = 0
    for a in range(0, samples, POINT_CHUNK):
        ex = vaaler_excess(H, rng.random(min(POINT_CHUNK, samples - a)))
        worst = max(worst, float(ex.max()))
        bad += int(np.count_nonzero(ex > TOL))
    det_worst = -np.inf
    points = samples
    per = -(-samples // intervals)
    for _ in range(intervals):
        alpha, beta = np.sort(rng.random(2))
        for a in range(0, per, POINT_CHUNK):
            x = rng.random(min(POINT_CHUNK, per - a))
            x = x[(dist_to_int(x - alpha) > ENDPOINT_GAP) & (dist_to_int(x - beta) > ENDPOINT_GAP)]
            ex = detector_excess(alpha, beta, H, x)
            points += x.size
            det_worst = max(det_worst, float(ex.max()))
            bad += int(np.count_nonzero(ex > TOL))
    return SuiteResult(f"vaaler-H{H}", points, bad, max(worst, det_worst),
                       {"vaaler_worst": worst, "detector_worst": det_worst})


def carry_grid(max_n: int = 64, max_lam: int = 24) -> SuiteResult:
    """count <= bound over A in [1, max_n], B in [A, max_n], r in [0, B-A], lam in [0, max_lam]."""
    cases = bad = 0
    worst = -np.inf
    for A in range(1, max_n + 1):
        for B in range(A, max_n + 1):
            for r in range(B - A + 1):
                prof = carry_profile(A, B, r, max_lam)
                # count <= bound, cleared of denominators 2**lam * 3 A**2
                second = 3 * B * B * r + 3 * B * r * r + r**3 + 3 * A * A
                for lam, count in enumerate(prof):
                    den = (1 << lam) * 3 * A * A
                    num = ((B - A) * B * B + (1 << lam)) * second
                    cases += 1
                    worst = max(worst, count - num / den)
                    bad += count * den > num
    return SuiteResult("carry-grid", cases, bad, worst)


# (f, total variation, exact integral) on [0, 1]
KOKSMA_FAMILY = {
    "identity": (lambda t: t, 1.0, 0.5),
    "hat": (lambda t: 1 - np.abs(2 * t - 1), 2.0, 0.5),
    "step": (lambda t: (t < 1 / 3).astype(float), 1.0, 1 / 3),
    "cosine": (lambda t: np.cos(2 * np.pi * t), 4.0, 0.0),
    "square": (lambda t: t * t, 1.0, 1 / 3),
}


def koksma_trials(trials: int, seed: int) -> SuiteResult:
    rng = np.random.default_rng(seed)
    bad = 0
    worst = -np.inf
    for _ in range(trials):
        seq = TorusSequence(rng.random(int(rng.integers(1, 257))))
        for f, var, integral in KOKSMA_FAMILY.values():
            lhs, rhs = koksma_hlawka_check(f, var, integral, seq)
            worst = max(worst, lhs - rhs)
            bad += lhs > rhs + TOL
    return SuiteResult("koksma-hlawka", trials * len(KOKSMA_FAMILY), bad, float(worst))
