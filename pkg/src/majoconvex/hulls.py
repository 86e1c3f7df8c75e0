"""The isotropic set E(a) and its rank-one convex hull K(a).

``E(a)`` holds the matrices with positive determinant whose singular values
are a rearrangement of ``a``; ``K(a)`` those ``B`` with ``det B = prod a`` and
``log sigma(B)`` majorized by ``log a``.

With singular values in descending order, membership in ``K(a)`` reads::

    prod_{i<=k} sigma_i(B) <= prod_{i<=k} a_i    k = 1, ..., n-1
    det B = prod a

The textbook statement uses ascending order and bounds the trailing products
``prod_{i>=nu} lambda_i <= prod_{i>=nu} a_i``; the leading products of the
descending sort are the same trailing products, so under the determinant
equality the two systems coincide.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import DomainError, as_positive_vector, as_square
from .majorization import TTransform, apply_chain, t_transform_chain
from .matrix_orders import singular_values, thompson_leq
from .potentials import eval_potential
from .sampling import INCONCLUSIVE, MarginTracker, Verdict, random_rotation, random_unit

HULL_RTOL = 1e-8
MIN_SEGMENT = 1e-6


@dataclass(frozen=True)
class HullSpec:
    a: tuple

    def __post_init__(self):
        a = as_positive_vector(self.a, "a")
        object.__setattr__(self, "a", tuple(float(v) for v in -np.sort(-a)))

    @property
    def n(self):
        return len(self.a)

    @property
    def product(self):
        return float(np.prod(self.a))

    @property
    def vector(self):
        return np.array(self.a)

    def to_dict(self):
        return {"a": list(self.a)}

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict) or "a" not in doc:
            raise DomainError("hull: expected {'a': [...]}")
        return cls(tuple(doc["a"]))


def in_extremal_set(F, spec, tol=HULL_RTOL):
    F = as_square(F)
    if F.shape[0] != spec.n:
        raise DomainError("dimension mismatch")
    det = np.linalg.det(F)
    if det <= 0:
        return False
    s = singular_values(F)
    if np.any(np.abs(s - spec.vector) > tol * spec.vector):
        return False
    return bool(abs(det - spec.product) <= tol * spec.product)


def hull_membership(F, spec, tol=HULL_RTOL):
    """Per-k product margins, determinant margin and both membership verdicts."""
    F = as_square(F)
    if F.shape[0] != spec.n:
        raise DomainError("dimension mismatch")
    det = float(np.linalg.det(F))
    s = singular_values(F)
    lead_s = np.cumprod(s)
    lead_a = np.cumprod(spec.vector)
    # relative slack: positive means inside
    margins = (lead_a[:-1] * (1.0 + tol) - lead_s[:-1]) / lead_a[:-1]
    det_margin = tol - abs(det - spec.product) / spec.product
    products_ok = bool(det > 0 and np.all(margins >= 0) and det_margin >= 0)
    thompson = bool(det > 0 and thompson_leq(F, np.diag(spec.vector), tol=np.log1p(tol)))
    return {
        "in_hull": products_ok,
        "thompson_leq": thompson,
        "product_margins": margins.tolist(),
        "det_margin": det_margin,
        "determinant": det,
    }


def in_hull(F, spec, tol=HULL_RTOL):
    """Membership in ``K(a)`` by the product inequalities, cross-checked with the Thompson order."""
    rec = hull_membership(F, spec, tol)
    if rec["in_hull"] != rec["thompson_leq"]:
        raise RuntimeError(f"product test and Thompson order disagree: {rec}")
    return rec["in_hull"]


def hull_point(spec, steps=(), R=None, Q=None):
    """``R Diag(exp(chain(log a))) Q``."""
    x = apply_chain(np.log(spec.vector), list(steps))
    D = np.diag(np.exp(x))
    R = np.eye(spec.n) if R is None else R
    Q = np.eye(spec.n) if Q is None else Q
    return R @ D @ Q


def averaging_chain(spec):
    """T-transforms taking ``log a`` to its mean: the point with all singular values ``(prod a)**(1/n)``."""
    la = np.log(spec.vector)
    return t_transform_chain(la, np.full(spec.n, la.mean())).steps


def sample_hull(spec, plan, count=None):
    """Seeded points of ``K(a)``: random T-transform chains on ``log a``, random rotations.

    Chain lengths are uniform in ``0..n`` so that ``E(a)`` itself is hit too.
    Every returned matrix is asserted to pass :func:`in_hull`.
    """
    rng = plan.rng(salt=41)
    count = plan.sample_count if count is None else count
    n = spec.n
    out = []
    for _ in range(count):
        steps = []
        for _ in range(int(rng.integers(0, n + 1))):
            i, j = rng.choice(n, size=2, replace=False)
            steps.append(TTransform(int(i), int(j), float(rng.random())))
        F = hull_point(spec, steps, random_rotation(rng, n), random_rotation(rng, n))
        if not in_hull(F, spec):
            raise AssertionError("sampled matrix left K(a)")
        out.append(F)
    return out


def inflate_top(F, factor=1.05):
    """Scale the top singular value of ``F`` by ``factor`` (moves it outside ``K(a)``)."""
    W, s, Zt = np.linalg.svd(as_square(F))
    s = s.copy()
    s[0] *= factor
    return W @ np.diag(s) @ Zt


def _in_hull_fast(F, spec, tol):
    # product inequalities only; the determinant is constant along the lines searched
    s = np.linalg.svd(F, compute_uv=False)
    lead_a = np.cumprod(spec.vector)[:-1]
    return bool(np.all(np.cumprod(s)[:-1] <= lead_a * (1.0 + tol)))


def _extent(A, D, spec, tol, sign, cap=1e3, iters=50):
    """Largest ``t >= 0`` with ``A + sign * t * D`` in ``K(a)``, by doubling then bisection."""
    lo, hi = 0.0, 1e-3
    while _in_hull_fast(A + sign * hi * D, spec, tol):
        lo = hi
        hi *= 2.0
        if hi > cap:
            return cap
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if _in_hull_fast(A + sign * mid * D, spec, tol):
            lo = mid
        else:
            hi = mid
    return lo


def rank_one_segment_closure_check(spec, plan, count=None, interior=9, tol=HULL_RTOL):
    """Along rank-one lines through sampled points of ``K(a)``, the part inside ``K(a)`` is a segment.

    For ``A`` from :func:`sample_hull` and a unit rank-one direction
    ``u v^T`` with ``v . A^{-1} u = 0`` (the determinant is then constant
    along the line), the extent of ``K(a)`` on both sides is found by
    bisection; every interior point of the resulting segment must be in
    ``K(a)``.  Lines meeting ``K(a)`` in a piece shorter than
    ``MIN_SEGMENT * ||A||`` are skipped and counted in ``details['skipped']``;
    with no admissible line at all the verdict is inconclusive.
    """
    count = plan.sample_count if count is None else count
    rng = plan.rng(salt=42)
    pts = sample_hull(spec, plan, count)
    tracker = MarginTracker(0.0)
    skipped = 0
    for A in pts:
        u = random_unit(rng, spec.n)
        w = np.linalg.solve(A, u)
        v = rng.standard_normal(spec.n)
        v -= (v @ w) / (w @ w) * w
        nv = np.linalg.norm(v)
        if nv < 1e-12:
            skipped += 1
            continue
        D = np.outer(u, v / nv)
        t_hi = _extent(A, D, spec, tol, +1.0)
        t_lo = -_extent(A, D, spec, tol, -1.0)
        # shorter segments only reflect the membership tolerance
        if t_hi - t_lo <= MIN_SEGMENT * np.linalg.norm(A, 2):
            skipped += 1
            continue
        for t in np.linspace(t_lo, t_hi, interior + 2)[1:-1]:
            rec = hull_membership(A + t * D, spec, tol)
            slack = min(min(rec["product_margins"], default=np.inf), rec["det_margin"])
            tracker.add(slack, {"A": A, "direction_u": u, "direction_v": v / nv, "t": t,
                                "segment": (t_lo, t_hi)})
    if tracker.count == 0:
        return Verdict(INCONCLUSIVE, 0, float("nan"), None, "no admissible segment", {"skipped": skipped})
    return tracker.verdict(skipped=skipped)


def functional_separation_check(potential, spec, plan, count=None, tol=1e-9):
    """``w(F) <= w(Diag(a))`` on sampled points of ``K(a)``.

    Holds whenever the diagonal ``h`` of ``w`` is Schur convex, since
    ``log sigma(F)`` is majorized by ``log a``.
    """
    ref = eval_potential(potential, np.diag(spec.vector))
    tracker = MarginTracker(tol)
    for F in sample_hull(spec, plan, count):
        v = eval_potential(potential, F)
        tracker.add((ref - v) / (1.0 + abs(ref)), {"F": F, "value": v, "reference": ref})
    return tracker.verdict(potential=potential.label)
