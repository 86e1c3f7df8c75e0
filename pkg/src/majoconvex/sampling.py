"""Seeded sampling plans, verdicts and finite-difference derivatives.

Random stream
-------------
Every sampled check draws from ``numpy.random.Generator(PCG64(seed))``,
stream version ``pcg64-v1``.  Within a check, samples are drawn in a fixed
order and reduced in that order, so the first failing sample (the witness)
is reproducible bit-for-bit for a given seed.
"""

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

STREAM_VERSION = "pcg64-v1"

EPS = np.finfo(float).eps
FIRST_STEP = EPS ** (1.0 / 3.0)
SECOND_STEP = EPS ** 0.25

ALGEBRAIC_TOL = 1e-9
FD_RTOL = 1e-6


@dataclass(frozen=True)
class SamplingPlan:
    """Seed, sample count and a per-coordinate box for sampled checks."""

    seed: int = 0
    sample_count: int = 1000
    box: tuple = ((-1.0, 1.0),)

    def __post_init__(self):
        if self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")
        box = tuple((float(lo), float(hi)) for lo, hi in self.box)
        for lo, hi in box:
            if not lo < hi:
                raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "box", box)
        object.__setattr__(self, "seed", int(self.seed) & 0xFFFFFFFFFFFFFFFF)

    @classmethod
    def cube(cls, n, lo, hi, seed=0, sample_count=1000):
        return cls(seed=seed, sample_count=sample_count, box=((lo, hi),) * n)

    @property
    def dim(self):
        return len(self.box)

    def rng(self, salt=0):
        """Generator for this plan; ``salt`` separates independent sub-streams."""
        return np.random.Generator(np.random.PCG64([self.seed, salt]))

    def points(self, rng=None, count=None):
        rng = self.rng() if rng is None else rng
        count = self.sample_count if count is None else count
        lo = np.array([b[0] for b in self.box])
        hi = np.array([b[1] for b in self.box])
        return lo + (hi - lo) * rng.random((count, self.dim))

    def with_seed(self, seed):
        return SamplingPlan(seed=seed, sample_count=self.sample_count, box=self.box)


VERIFIED = "verified"
REFUTED = "refuted"
INCONCLUSIVE = "inconclusive"


@dataclass
class Verdict:
    """Outcome of a sampled property check.

    ``margin`` is the smallest slack observed (negative means violated).
    A refuted verdict always carries a ``witness`` mapping that lets the
    caller re-evaluate the failing input.
    """

    status: str
    samples_checked: int = 0
    margin: float = float("inf")
    witness: Optional[dict] = None
    reason: str = ""
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in (VERIFIED, REFUTED, INCONCLUSIVE):
            raise ValueError(f"unknown status {self.status!r}")
        if self.status == REFUTED and self.witness is None:
            raise ValueError("a refuted verdict needs a witness")

    @property
    def verified(self):
        return self.status == VERIFIED

    @property
    def refuted(self):
        return self.status == REFUTED

    def to_dict(self):
        return {
            "status": self.status,
            "samples_checked": self.samples_checked,
            "margin": _jsonable(self.margin),
            "witness": _jsonable(self.witness),
            "reason": self.reason,
            "details": _jsonable(self.details),
        }


def _jsonable(obj: Any):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if np.isnan(v):
            return "nan"
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


class MarginTracker:
    """Keeps the worst margin and the first sample that fell below tolerance."""

    def __init__(self, tol=0.0):
        self.tol = tol
        self.count = 0
        self.margin = float("inf")
        self.witness = None
        self.worst = None

    def add(self, margin, info, tol=None):
        tol = self.tol if tol is None else tol
        self.count += 1
        margin = float(margin)
        if margin < self.margin:
            self.margin = margin
            self.worst = info
        if self.witness is None and margin < -tol:
            self.witness = dict(info, margin=margin)

    def verdict(self, **details):
        if self.witness is not None:
            return Verdict(REFUTED, self.count, self.margin, self.witness, details=details)
        return Verdict(VERIFIED, self.count, self.margin, details=details)


def combine(verdicts, **details):
    """Conjunction of verdicts: first refutation wins, then inconclusive."""
    verdicts = list(verdicts)
    total = sum(v.samples_checked for v in verdicts)
    margin = min((v.margin for v in verdicts), default=float("inf"))
    for v in verdicts:
        if v.refuted:
            return Verdict(REFUTED, total, margin, v.witness, v.reason, details)
    for v in verdicts:
        if v.status == INCONCLUSIVE:
            return Verdict(INCONCLUSIVE, total, margin, None, v.reason, details)
    return Verdict(VERIFIED, total, margin, details=details)


def fd_step(x, base=FIRST_STEP):
    return base * np.maximum(1.0, np.abs(x))


def fd_gradient(f, x):
    """Central-difference gradient with step cbrt(eps) * max(1, |x_i|)."""
    x = np.asarray(x, dtype=float)
    h = fd_step(x)
    grad = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h[i]
        grad[i] = (f(x + e) - f(x - e)) / (2.0 * h[i])
    return grad


def fd_hessian(f, x):
    """Central-difference Hessian with step eps**(1/4) * max(1, |x_i|)."""
    x = np.asarray(x, dtype=float)
    n = x.size
    h = fd_step(x, SECOND_STEP)
    f0 = f(x)
    H = np.empty((n, n))
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h[i]
        H[i, i] = (f(x + ei) - 2.0 * f0 + f(x - ei)) / h[i] ** 2
        for j in range(i):
            ej = np.zeros(n)
            ej[j] = h[j]
            v = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4.0 * h[i] * h[j])
            H[i, j] = H[j, i] = v
    return H


def second_directional(f, t_scale=1.0):
    """Central second difference of a scalar function of ``t`` at ``t = 0``."""
    h = SECOND_STEP * max(1.0, t_scale)
    return (f(h) - 2.0 * f(0.0) + f(-h)) / h ** 2


def random_rotation(rng, n):
    """Haar-distributed element of SO(n)."""
    Z = rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


def random_unit(rng, n):
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)
