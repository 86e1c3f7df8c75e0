"""Vector majorisation: order relations, T-transform chains, doubly stochastic
matrices, Birkhoff decomposition and sampled Schur-convexity tests.

Indices are 0-based throughout.  All routines work on sorted copies and never
mutate their inputs; ties in sorting are broken stably (original index order).
"""

import itertools
from dataclasses import dataclass

import numpy as np

from ._validation import DomainError, PreconditionError, as_square, as_vector, same_length
from .sampling import (
    FD_RTOL,
    INCONCLUSIVE,
    MarginTracker,
    SamplingPlan,
    Verdict,
    combine,
    fd_gradient,
)

COMPONENTWISE_LEQ = "componentwise_leq"
SUBMAJORIZED = "submajorized"
MAJORIZED = "majorized"

DS_TOL = 1e-10


def sort_desc(x):
    """Return ``(x_sorted, order)`` with ``x_sorted = x[order]`` descending, stable on ties."""
    x = np.asarray(x, dtype=float)
    order = np.argsort(-x, kind="stable")
    return x[order], order


def partial_sum_margins(x, y):
    """``cumsum(y_desc) - cumsum(x_desc)``; nonnegative entries mean ``x`` is submajorized."""
    x = as_vector(x, "x")
    y = as_vector(y, "y")
    same_length(x, y)
    return np.cumsum(sort_desc(y)[0]) - np.cumsum(sort_desc(x)[0])


def majorization_relation(x, y, tol=1e-10):
    """Set of relations ``x <= y`` (componentwise), ``x <_w y`` and ``x < y`` that hold."""
    if tol < 0:
        raise DomainError("tol must be nonnegative")
    x = as_vector(x, "x")
    y = as_vector(y, "y")
    same_length(x, y)
    out = set()
    if np.all(x <= y + tol):
        out.add(COMPONENTWISE_LEQ)
    margins = partial_sum_margins(x, y)
    if np.all(margins >= -tol):
        out.add(SUBMAJORIZED)
        if abs(margins[-1]) <= tol:
            out.add(MAJORIZED)
    return frozenset(out)


def is_majorized(x, y, tol=1e-10):
    """True iff ``x`` is majorized by ``y``."""
    return MAJORIZED in majorization_relation(x, y, tol)


def _require_majorized(x, y, tol):
    margins = partial_sum_margins(x, y)
    scale = max(1.0, float(np.max(np.abs(y))), float(np.max(np.abs(x))))
    bad = np.flatnonzero(margins < -tol * scale)
    if bad.size:
        k = int(bad[0])
        raise PreconditionError(
            f"x is not majorized by y: partial sum k={k + 1} of x exceeds y's by {-margins[k]:.3g}"
        )
    if abs(margins[-1]) > tol * scale:
        raise PreconditionError(f"x is not majorized by y: totals differ by {margins[-1]:.3g}")


@dataclass(frozen=True)
class TTransform:
    """Mixes coordinates ``i`` and ``j`` with weight ``t``."""

    i: int
    j: int
    t: float

    def __post_init__(self):
        if self.i == self.j:
            raise DomainError("a T-transform needs two distinct indices")
        if not 0.0 <= self.t <= 1.0:
            raise DomainError(f"t={self.t} outside [0, 1]")

    def matrix(self, n):
        T = np.eye(n)
        i, j, t = self.i, self.j, self.t
        T[i, i] = T[j, j] = t
        T[i, j] = T[j, i] = 1.0 - t
        return T

    def to_dict(self):
        return {"i": self.i, "j": self.j, "t": self.t}


def apply_t_transform(x, step):
    x = as_vector(x)
    if not (0 <= step.i < x.size and 0 <= step.j < x.size):
        raise DomainError("T-transform index out of range")
    out = x.copy()
    xi, xj, t = x[step.i], x[step.j], step.t
    out[step.i] = t * xi + (1.0 - t) * xj
    out[step.j] = t * xj + (1.0 - t) * xi
    return out


def apply_chain(x, steps):
    for step in steps:
        x = apply_t_transform(x, step)
    return x


@dataclass
class Chain:
    """T-transform chain taking ``y`` to a rearrangement ``z`` of ``x``.

    ``permutation`` satisfies ``x == z[permutation]``.
    """

    steps: list
    permutation: np.ndarray

    def replay(self, y):
        return apply_chain(as_vector(y, "y"), self.steps)[self.permutation]

    def intermediates(self, y):
        v = as_vector(y, "y")
        out = [v]
        for step in self.steps:
            v = apply_t_transform(v, step)
            out.append(v)
        return out


def t_transform_chain(y, x, tol=1e-10):
    """At most ``n - 1`` T-transforms whose successive application to ``y`` gives ``x``.

    Works on the descending sorts.  Each step takes the largest index ``j``
    where the current vector exceeds ``x`` and the first later index ``k``
    where it falls short, and moves ``min(v_j - x_j, x_k - v_k)`` from ``j``
    to ``k``; at least one more coordinate then agrees with ``x``.
    """
    y = as_vector(y, "y")
    x = as_vector(x, "x")
    same_length(x, y)
    _require_majorized(x, y, tol)
    n = y.size
    ys, py = sort_desc(y)
    xs, px = sort_desc(x)
    scale = max(1.0, float(np.max(np.abs(ys))))
    eps = 1e-14 * scale * n

    v = ys.copy()
    steps = []
    for _ in range(n):
        diff = v - xs
        over = np.flatnonzero(diff > eps)
        if over.size == 0:
            break
        j = int(over[-1])
        under = np.flatnonzero(diff[j + 1:] < -eps)
        if under.size == 0:
            break
        k = j + 1 + int(under[0])
        delta = min(v[j] - xs[j], xs[k] - v[k])
        t = 1.0 - delta / (v[j] - v[k])
        t = min(1.0, max(0.0, t))
        step = TTransform(int(py[j]), int(py[k]), float(t))
        steps.append(step)
        vj, vk = v[j], v[k]
        v[j] = t * vj + (1.0 - t) * vk
        v[k] = t * vk + (1.0 - t) * vj
        # pin the matched coordinate to kill rounding drift
        if delta == vj - xs[j]:
            v[j] = xs[j]
        else:
            v[k] = xs[k]
    if len(steps) > n - 1:
        raise AssertionError("chain longer than n - 1")

    perm = np.empty(n, dtype=int)
    perm[px] = py
    return Chain(steps, perm)


def doubly_stochastic_for(y, x, tol=1e-10):
    """Doubly stochastic ``A`` with ``A @ y == x``: the chain's product composed with a permutation."""
    chain = t_transform_chain(y, x, tol)
    n = np.size(y)
    A = np.eye(n)
    for step in chain.steps:
        A = step.matrix(n) @ A
    return A[chain.permutation]


def check_doubly_stochastic(A, tol=DS_TOL):
    """Raise ``DomainError`` unless ``A`` is doubly stochastic within ``tol``."""
    A = as_square(A, "A")
    if np.min(A) < -tol:
        raise DomainError(f"negative entry {np.min(A):.3g}")
    rows = np.max(np.abs(A.sum(axis=1) - 1.0))
    cols = np.max(np.abs(A.sum(axis=0) - 1.0))
    if max(rows, cols) > tol:
        raise DomainError(f"row/column sums deviate from 1 by {max(rows, cols):.3g}")
    return A


class BirkhoffError(RuntimeError):
    """No perfect matching on the positive support; ``residual`` holds what was left."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


def _perfect_matching(mask):
    """Kuhn's augmenting-path matching, rows in order, columns tried ascending."""
    n = mask.shape[0]
    match_col = [-1] * n

    def augment(r, seen):
        for c in range(n):
            if mask[r, c] and not seen[c]:
                seen[c] = True
                if match_col[c] < 0 or augment(match_col[c], seen):
                    match_col[c] = r
                    return True
        return False

    for r in range(n):
        if not augment(r, [False] * n):
            return None
    perm = np.empty(n, dtype=int)
    for c, r in enumerate(match_col):
        perm[r] = c
    return perm


def permutation_matrix(perm):
    n = len(perm)
    P = np.zeros((n, n))
    P[np.arange(n), perm] = 1.0
    return P


def _caratheodory_reduce(weights, perms, limit):
    """Drop terms via affine dependences until at most ``limit`` remain."""
    weights = list(weights)
    perms = list(perms)
    while len(perms) > limit:
        V = np.array([permutation_matrix(p).ravel() for p in perms]).T
        M = np.vstack([V, np.ones(len(perms))])
        _, _, vt = np.linalg.svd(M)
        c = vt[-1]
        if np.max(c) <= 0:
            c = -c
        pos = c > 1e-12
        ratios = np.full(len(perms), np.inf)
        ratios[pos] = np.array(weights)[pos] / c[pos]
        k = int(np.argmin(ratios))
        theta = ratios[k]
        weights = [w - theta * ci for w, ci in zip(weights, c)]
        weights[k] = 0.0
        keep = [i for i, w in enumerate(weights) if w > 0.0]
        weights = [weights[i] for i in keep]
        perms = [perms[i] for i in keep]
    return weights, perms


def birkhoff_decompose(A, tol=1e-8, zero_tol=1e-13):
    """Write a doubly stochastic matrix as a convex combination of permutations.

    Returns a list of ``(weight, perm)`` with ``perm[i]`` the column matched to
    row ``i``.  Matchings are extracted greedily; if that yields more than
    ``(n-1)**2 + 1`` terms, affine dependences among them are used to prune
    down to that bound.
    """
    A = check_doubly_stochastic(A, tol)
    n = A.shape[0]
    R = A.copy()
    terms = []
    while True:
        mass = R.sum() / n
        if mass <= zero_tol:
            break
        perm = _perfect_matching(R > zero_tol)
        if perm is None:
            raise BirkhoffError("no perfect matching on the positive support", R)
        w = float(np.min(R[np.arange(n), perm]))
        R[np.arange(n), perm] -= w
        R[np.abs(R) <= zero_tol] = 0.0
        terms.append((w, perm))
        if len(terms) > n * n:
            raise BirkhoffError("extraction did not terminate", R)

    limit = (n - 1) ** 2 + 1
    weights = [w for w, _ in terms]
    perms = [p for _, p in terms]
    if len(perms) > limit:
        weights, perms = _caratheodory_reduce(weights, perms, limit)
    total = sum(weights)
    return [(w / total, p) for w, p in zip(weights, perms)]


def birkhoff_reconstruct(terms):
    return sum(w * permutation_matrix(p) for w, p in terms)


def in_permutation_hull(x, y, tol=1e-9):
    """Is ``x`` a convex combination of the rearrangements of ``y``?

    Brute force over simplices of ``n`` distinct rearrangements; meant as an
    independent oracle for small ``n`` only.
    """
    x = as_vector(x, "x")
    y = as_vector(y, "y")
    same_length(x, y)
    n = x.size
    if n > 5:
        raise DomainError("vertex enumeration is limited to n <= 5")
    verts = np.unique(np.array(list(itertools.permutations(y))), axis=0)
    rhs = np.append(x, 1.0)
    for combo in itertools.combinations(range(len(verts)), min(n, len(verts))):
        M = np.vstack([verts[list(combo)].T, np.ones(len(combo))])
        lam, *_ = np.linalg.lstsq(M, rhs, rcond=None)
        if np.max(np.abs(M @ lam - rhs)) <= tol and np.min(lam) >= -tol:
            return True
    return False


def convex_battery(rng, lo, hi, count):
    """Seeded list of ``(name, phi)`` convex scalar functions on ``[lo, hi]``."""
    span = max(hi - lo, 1e-12)
    fixed = [
        ("square", lambda u: u * u),
        ("abs", np.abs),
    ]
    out = list(fixed)
    kinds = ("abs_shift", "exp", "hinge", "pwl")
    for idx in range(max(count - len(fixed), 0)):
        kind = kinds[idx % len(kinds)]
        if kind == "abs_shift":
            c = rng.uniform(lo, hi)
            out.append((f"abs_shift(c={c!r})", lambda u, c=c: np.abs(u - c)))
        elif kind == "exp":
            s = rng.uniform(-3.0, 3.0) / span
            out.append((f"exp(s={s!r})", lambda u, s=s: np.exp(s * (u - lo))))
        elif kind == "hinge":
            c = rng.uniform(lo, hi)
            out.append((f"hinge(c={c!r})", lambda u, c=c: np.maximum(0.0, u - c)))
        else:
            k = int(rng.integers(2, 6))
            slopes = rng.normal(size=k)
            icpts = rng.normal(size=k) * span
            out.append(
                (
                    f"pwl(k={k})",
                    lambda u, a=slopes, b=icpts: np.max(np.multiply.outer(u, a) + b, axis=-1),
                )
            )
    return out


def hlp_equivalence_check(x, y, plan=None, rtol=1e-10):
    """Sum of phi(x_i) <= sum of phi(y_i) over a seeded battery of convex phi."""
    x = as_vector(x, "x")
    y = as_vector(y, "y")
    same_length(x, y)
    _require_majorized(x, y, 1e-9)
    plan = plan or SamplingPlan(sample_count=200)
    rng = plan.rng(salt=3)
    lo = float(min(x.min(), y.min()))
    hi = float(max(x.max(), y.max()))
    tracker = MarginTracker()
    for name, phi in convex_battery(rng, lo, hi, plan.sample_count):
        sx = float(np.sum(phi(x)))
        sy = float(np.sum(phi(y)))
        margin = sy - sx
        tracker.add(margin, {"phi": name, "lhs": sx, "rhs": sy}, tol=rtol * (1.0 + abs(sy)))
    return tracker.verdict()


def _check_finite(value, x):
    if not np.isfinite(value):
        raise DomainError(f"function not finite at {np.asarray(x).tolist()}")
    return value


def _symmetry_tracker(f, pts, rng, tol):
    tracker = MarginTracker()
    for x in pts:
        fx = _check_finite(float(f(x)), x)
        perm = rng.permutation(x.size)
        fpx = _check_finite(float(f(x[perm])), x)
        tracker.add(tol * (1.0 + abs(fx)) - abs(fpx - fx), {"check": "symmetry", "x": x, "perm": perm})
    return tracker.verdict()


def schur_convexity_test(f, plan, tol=FD_RTOL):
    """Sampled check of symmetry and ``(x_i - x_j)(f_i - f_j) >= 0`` (central differences).

    Margins are relative: a pair counts as a violation only below
    ``-tol * (1 + |x_i - x_j| (|f_i| + |f_j|))``.
    """
    rng = plan.rng(salt=11)
    pts = plan.points(rng)
    sym = _symmetry_tracker(f, pts, rng, 1e-9)
    cond = MarginTracker()
    n = plan.dim
    for x in pts:
        grad = fd_gradient(lambda z: _check_finite(float(f(z)), z), x)
        worst, info = np.inf, None
        for i in range(n):
            for j in range(i + 1, n):
                val = (x[i] - x[j]) * (grad[i] - grad[j])
                scale = 1.0 + abs(x[i] - x[j]) * (abs(grad[i]) + abs(grad[j]))
                rel = val / scale
                if rel < worst:
                    worst, info = rel, {"check": "schur_condition_b", "x": x, "pair": (i, j), "value": val}
        if info is not None:
            cond.add(worst, info, tol=tol)
    return combine([sym, cond.verdict()])


def schur_condition_c_test(f, plan, tol=1e-9, steps=8):
    """Derivative-free alternative: ``f`` increasing in the spread of any coordinate pair.

    For each sample and pair ``(i, j)`` with ``s = x_i + x_j``, evaluates
    ``f`` along ``x_i = s/2 + r``, ``x_j = s/2 - r`` for increasing ``r >= 0``.
    """
    rng = plan.rng(salt=12)
    pts = plan.points(rng)
    tracker = MarginTracker()
    n = plan.dim
    for x in pts:
        i, j = rng.choice(n, size=2, replace=False)
        s = x[i] + x[j]
        rmax = abs(x[i] - x[j]) / 2.0
        vals = []
        for r in np.linspace(0.0, rmax, steps):
            z = x.copy()
            z[i], z[j] = s / 2.0 + r, s / 2.0 - r
            vals.append(_check_finite(float(f(z)), z))
        vals = np.array(vals)
        diffs = np.diff(vals)
        k = int(np.argmin(diffs)) if diffs.size else 0
        margin = float(diffs[k]) / (1.0 + abs(vals[k])) if diffs.size else 0.0
        tracker.add(margin, {"check": "schur_condition_c", "x": x, "pair": (int(i), int(j))}, tol=tol)
    return tracker.verdict()


def strong_isotonicity_test(f, plan, tol=FD_RTOL):
    """Sampled Ostrowski test: on the descending chamber the gradient is descending and nonnegative.

    Also cross-checks the derivative-free characterisation (increasing and
    Schur convex) on the same plan.
    """
    rng = plan.rng(salt=13)
    pts = -np.sort(-plan.points(rng), axis=1)
    tracker = MarginTracker()
    for x in pts:
        grad = fd_gradient(lambda z: _check_finite(float(f(z)), z), x)
        scale = 1.0 + float(np.max(np.abs(grad)))
        gaps = np.append(grad[:-1] - grad[1:], grad[-1])
        k = int(np.argmin(gaps))
        tracker.add(gaps[k] / scale, {"check": "ostrowski", "x": x, "index": k, "gradient": grad}, tol=tol)
    ostrowski = tracker.verdict()

    incr = MarginTracker()
    for x in plan.points(plan.rng(salt=14)):
        grad = fd_gradient(lambda z: _check_finite(float(f(z)), z), x)
        k = int(np.argmin(grad))
        incr.add(grad[k] / (1.0 + float(np.max(np.abs(grad)))), {"check": "increasing", "x": x, "index": k}, tol=tol)
    return combine([ostrowski, incr.verdict(), schur_convexity_test(f, plan, tol)])


def inconclusive(reason, **details):
    return Verdict(INCONCLUSIVE, 0, float("nan"), None, reason, details)
