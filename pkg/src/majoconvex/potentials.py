"""Objective isotropic potentials ``w(F) = g(sigma(F))`` and rank-one convexity.

A potential is described by :class:`PotentialSpec`.  Everything downstream
works with the symmetric function ``g`` of the singular values, its
"diagonal" ``h = g o exp`` and ``l = g o sqrt``.

Coefficients at a point ``y`` with pairwise distinct entries::

    G_ij    = (y_i g_i - y_j g_j) / (y_i**2 - y_j**2)
    Hbar_ij = (y_j g_i - y_i g_j) / (y_i**2 - y_j**2)
    H       = Hbar + D^2 g

With these, the second derivative of ``w`` at ``Diag(y)`` along ``a b^T`` is
``sum H_ij a_i a_j b_i b_j + sum G_ij a_i**2 b_j**2``.  When two entries
nearly coincide the quotients are replaced by their one-variable limits.
"""

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._validation import DomainError, as_positive_vector, as_square, as_symmetric, as_vector
from .majorization import schur_convexity_test
from .matrix_orders import singular_values
from .sampling import (
    EPS,
    INCONCLUSIVE,
    MarginTracker,
    SamplingPlan,
    Verdict,
    combine,
    fd_gradient,
    fd_hessian,
    random_rotation,
    random_unit,
)

COINCIDENCE_DELTA = 1e-5

KINDS = ("neg_log_det", "log_trace_inv_U", "modified_ogden", "power_sum", "ogden_sum", "custom")
# kinds whose g is only defined for positive determinant
_ORIENTED = {"neg_log_det", "log_trace_inv_U", "modified_ogden"}


# --- catalog g functions, vectorised over the last axis -------------------

def _neg_log_det(y):
    return -np.sum(np.log(y), axis=-1)


def _neg_log_det_grad(y):
    return -1.0 / y


def _neg_log_det_hess(y):
    return np.diag(1.0 / y ** 2)


def _ltiu(y):
    return np.log(np.sum(1.0 / y, axis=-1))


def _ltiu_grad(y):
    s = np.sum(1.0 / y)
    return -1.0 / (y ** 2 * s)


def _ltiu_hess(y):
    s = np.sum(1.0 / y)
    inv2 = 1.0 / y ** 2
    return -np.outer(inv2, inv2) / s ** 2 + np.diag(2.0 / (y ** 3 * s))


def _ogden_order(y, order):
    if order == "smallest":
        return np.argsort(y, axis=-1, kind="stable")
    return np.argsort(-y, axis=-1, kind="stable")


def _mod_ogden(y, alpha, order):
    y = np.asarray(y, dtype=float)
    idx = _ogden_order(y, order)
    logs = np.log(np.take_along_axis(y, idx, axis=-1))
    k = np.arange(1, y.shape[-1] + 1)
    return np.sum(np.exp(-alpha * np.cumsum(logs, axis=-1) / k), axis=-1)


def _mod_ogden_terms(y, alpha, order):
    idx = _ogden_order(y, order)
    n = y.size
    k = np.arange(1, n + 1)
    T = np.exp(-alpha * np.cumsum(np.log(y[idx])) / k)
    rank = np.empty(n, dtype=int)
    rank[idx] = np.arange(n)
    return T, k, rank


def _mod_ogden_grad(y, alpha, order):
    T, k, rank = _mod_ogden_terms(y, alpha, order)
    tail = np.cumsum((T / k)[::-1])[::-1]
    return -alpha * tail[rank] / y


def _mod_ogden_hess(y, alpha, order):
    T, k, rank = _mod_ogden_terms(y, alpha, order)
    tail1 = np.cumsum((T / k)[::-1])[::-1]
    tail2 = np.cumsum((T / k ** 2)[::-1])[::-1]
    top = np.maximum.outer(rank, rank)
    return alpha ** 2 * tail2[top] / np.outer(y, y) + np.diag(alpha * tail1[rank] / y ** 2)


def _ogden_sum(y, terms):
    return sum(c * np.sum(y ** e, axis=-1) for c, e in terms)


def _ogden_sum_grad(y, terms):
    return sum(c * e * y ** (e - 1) for c, e in terms)


def _ogden_sum_hess(y, terms):
    return np.diag(sum(c * e * (e - 1) * y ** (e - 2) for c, e in terms))


@dataclass
class PotentialSpec:
    """An objective isotropic potential given by its symmetric function ``g``.

    ``params`` per kind: ``modified_ogden`` takes ``alpha`` (>= 2) and
    ``order`` (``"smallest"``, the default, multiplies the k smallest
    singular values; ``"largest"`` the k largest); ``power_sum`` takes ``p``;
    ``ogden_sum`` takes ``terms`` as ``[[coefficient, exponent], ...]``;
    ``custom`` takes ``g`` and optionally ``grad``/``hess`` callables.
    """

    kind: str
    params: dict = field(default_factory=dict)
    derivative_mode: str = "analytic"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown potential kind {self.kind!r}")
        if self.derivative_mode not in ("analytic", "finite_difference"):
            raise DomainError(f"unknown derivative_mode {self.derivative_mode!r}")
        p = dict(self.params)
        if self.kind == "modified_ogden":
            p.setdefault("alpha", 2.0)
            p.setdefault("order", "smallest")
            if p["alpha"] < 2:
                raise DomainError("modified_ogden needs alpha >= 2")
            if p["order"] not in ("smallest", "largest"):
                raise DomainError("modified_ogden order must be 'smallest' or 'largest'")
        elif self.kind == "power_sum":
            p.setdefault("p", 2.0)
        elif self.kind == "ogden_sum":
            if not p.get("terms"):
                raise DomainError("ogden_sum needs a non-empty 'terms' list")
            p["terms"] = [(float(c), float(e)) for c, e in p["terms"]]
        elif self.kind == "custom":
            if not callable(p.get("g")):
                raise DomainError("custom potential needs a callable 'g'")
            if self.derivative_mode == "analytic" and not callable(p.get("grad")):
                self.derivative_mode = "finite_difference"
        self.params = p
        if self.kind == "custom":
            self._check_symmetric(p.get("dim", 3))

    def _check_symmetric(self, n, samples=16, tol=1e-9):
        rng = np.random.Generator(np.random.PCG64(20240611))
        for _ in range(samples):
            y = rng.uniform(0.25, 4.0, n)
            v = float(self.g(y))
            pv = float(self.g(y[rng.permutation(n)]))
            if not np.isfinite(v):
                raise DomainError(f"g is not finite at {y.tolist()}")
            if abs(pv - v) > tol * (1.0 + abs(v)):
                raise DomainError("g is not symmetric under coordinate permutations")

    @property
    def oriented(self):
        return self.kind in _ORIENTED or (self.kind == "power_sum" and self.params["p"] <= 0)

    @property
    def label(self):
        if self.kind == "modified_ogden":
            suffix = "" if self.params["order"] == "smallest" else ",largest"
            return f"modified_ogden({self.params['alpha']:g}{suffix})"
        if self.kind == "power_sum":
            return f"power_sum({self.params['p']:g})"
        if self.kind == "ogden_sum":
            return "ogden_sum(" + ",".join(f"{c:g}*y^{e:g}" for c, e in self.params["terms"]) + ")"
        return self.kind

    # g and its derivatives -------------------------------------------------

    def g(self, y):
        """``g`` at ``y``; accepts a stack of points along leading axes."""
        y = np.asarray(y, dtype=float)
        k, p = self.kind, self.params
        if k == "neg_log_det":
            return _neg_log_det(y)
        if k == "log_trace_inv_U":
            return _ltiu(y)
        if k == "modified_ogden":
            return _mod_ogden(y, p["alpha"], p["order"])
        if k == "power_sum":
            return np.sum(y ** p["p"], axis=-1)
        if k == "ogden_sum":
            return _ogden_sum(y, p["terms"])
        if y.ndim == 1:
            return float(p["g"](y))
        return np.apply_along_axis(lambda v: float(p["g"](v)), -1, y)

    def grad(self, y):
        y = np.asarray(y, dtype=float)
        if self.derivative_mode == "finite_difference":
            return fd_gradient(self.g, y)
        k, p = self.kind, self.params
        if k == "neg_log_det":
            return _neg_log_det_grad(y)
        if k == "log_trace_inv_U":
            return _ltiu_grad(y)
        if k == "modified_ogden":
            return _mod_ogden_grad(y, p["alpha"], p["order"])
        if k == "power_sum":
            return p["p"] * y ** (p["p"] - 1)
        if k == "ogden_sum":
            return _ogden_sum_grad(y, p["terms"])
        return np.asarray(p["grad"](y), dtype=float)

    def hess(self, y):
        y = np.asarray(y, dtype=float)
        k, p = self.kind, self.params
        if self.derivative_mode == "finite_difference" or (k == "custom" and not callable(p.get("hess"))):
            return fd_hessian(self.g, y)
        if k == "neg_log_det":
            return _neg_log_det_hess(y)
        if k == "log_trace_inv_U":
            return _ltiu_hess(y)
        if k == "modified_ogden":
            return _mod_ogden_hess(y, p["alpha"], p["order"])
        if k == "power_sum":
            q = p["p"]
            return np.diag(q * (q - 1) * y ** (q - 2))
        if k == "ogden_sum":
            return _ogden_sum_hess(y, p["terms"])
        return np.asarray(p["hess"](y), dtype=float)

    # serialisation ---------------------------------------------------------

    def to_dict(self):
        if self.kind == "custom":
            raise DomainError("custom potentials are not serialisable")
        params = dict(self.params)
        if "terms" in params:
            params["terms"] = [list(t) for t in params["terms"]]
        return {"kind": self.kind, "params": params, "derivative_mode": self.derivative_mode}

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise DomainError("potential: expected a JSON object")
        if "kind" not in doc:
            raise DomainError("potential.kind: missing")
        return cls(doc["kind"], dict(doc.get("params") or {}), doc.get("derivative_mode", "analytic"))


def neg_sum():
    """``g(y) = -sum(y)``: the standard non-rank-one-convex example."""
    return PotentialSpec("ogden_sum", {"terms": [(-1.0, 1.0)]})


def catalog():
    """The named potentials exercised by the acceptance suite."""
    return {
        "neg_log_det": PotentialSpec("neg_log_det"),
        "power_sum(2)": PotentialSpec("power_sum", {"p": 2.0}),
        "log_trace_inv_U": PotentialSpec("log_trace_inv_U"),
        "modified_ogden(2)": PotentialSpec("modified_ogden", {"alpha": 2.0}),
        "modified_ogden(3)": PotentialSpec("modified_ogden", {"alpha": 3.0}),
        "neg_sum": neg_sum(),
    }


# --- evaluation ----------------------------------------------------------

def _check_domain(spec, F):
    det = np.linalg.det(F)
    if spec.oriented and not det > 0:
        raise DomainError(f"{spec.label} needs det F > 0 (got {det:.3g})")


def eval_potential(spec, F):
    """``w(F) = g(sigma(F))``."""
    F = as_square(F)
    _check_domain(spec, F)
    return float(spec.g(singular_values(F)))


def eval_potential_batch(spec, Fs):
    """``w`` on a stack of matrices with shape ``(..., n, n)``."""
    Fs = np.asarray(Fs, dtype=float)
    if spec.oriented and np.any(np.linalg.det(Fs) <= 0):
        raise DomainError(f"{spec.label} needs det F > 0 on every matrix")
    return spec.g(np.linalg.svd(Fs, compute_uv=False))


def eval_h(spec, x):
    """The diagonal ``h(x) = g(exp x)``."""
    return float(spec.g(np.exp(as_vector(x))))


def eval_l(spec, x):
    """``l(x) = g(sqrt x)`` for positive ``x``."""
    return float(spec.g(np.sqrt(as_positive_vector(x, "x"))))


def h_function(spec):
    return lambda x: float(spec.g(np.exp(np.asarray(x, dtype=float))))


# --- coefficient bundle --------------------------------------------------

@dataclass
class CoefficientBundle:
    """Coefficient matrices at ``y``.

    ``Xi`` is evaluated at ``x = y**2`` and ``Gamma`` at ``x = log y`` so that
    both can be compared with ``G`` and ``Hbar`` at ``y``.
    """

    y: np.ndarray
    G: np.ndarray
    Hbar: np.ndarray
    hess_g: np.ndarray
    H: np.ndarray
    Xi: np.ndarray
    Gamma: np.ndarray
    coincident: np.ndarray

    def to_dict(self):
        return {k: getattr(self, k).tolist() for k in ("y", "G", "Hbar", "hess_g", "H", "Xi", "Gamma")}


def _close(yi, yj):
    return abs(yi - yj) <= COINCIDENCE_DELTA * max(abs(yi), abs(yj))


def coefficients(spec, y):
    y = as_positive_vector(y, "y")
    n = y.size
    g1 = spec.grad(y)
    g2 = spec.hess(y)
    if not (np.all(np.isfinite(g1)) and np.all(np.isfinite(g2))):
        raise DomainError(f"derivatives of g not finite at {y.tolist()}")

    G = np.zeros((n, n))
    Hbar = np.zeros((n, n))
    Xi = np.zeros((n, n))
    Gamma = np.zeros((n, n))
    coincident = np.zeros((n, n), dtype=bool)

    # l(x) = g(sqrt x), x = y**2
    l1 = g1 / (2.0 * y)
    l2 = g2 / (4.0 * np.outer(y, y)) - np.diag(g1 / (4.0 * y ** 3))
    # h(x) = g(exp x), x = log y
    h1 = y * g1
    h2 = np.outer(y, y) * g2 + np.diag(y * g1)

    for i in range(n):
        Xi[i, i] = 2.0 * l2[i, i] + l1[i] / y[i] ** 2
        for j in range(i + 1, n):
            yi, yj = y[i], y[j]
            if _close(yi, yj):
                coincident[i, j] = coincident[j, i] = True
                s = 0.5 * (yi + yj)
                gi = 0.5 * (g1[i] + g1[j])
                d2 = 0.5 * (g2[i, i] + g2[j, j]) - g2[i, j]
                G[i, j] = (gi + s * d2) / (2.0 * s)
                Hbar[i, j] = (s * d2 - gi) / (2.0 * s)
                Xi[i, j] = 0.5 * (l2[i, i] + l2[j, j]) - l2[i, j]
                Gamma[i, j] = 0.5 * (h2[i, i] + h2[j, j]) - h2[i, j]
            else:
                den = yi * yi - yj * yj
                G[i, j] = (yi * g1[i] - yj * g1[j]) / den
                Hbar[i, j] = (yj * g1[i] - yi * g1[j]) / den
                Xi[i, j] = (l1[i] - l1[j]) / (yi * yi - yj * yj)
                Gamma[i, j] = (h1[i] - h1[j]) / (np.log(yi) - np.log(yj))
            G[j, i] = G[i, j]
            Hbar[j, i] = Hbar[i, j]
            Xi[j, i] = Xi[i, j]
            Gamma[j, i] = Gamma[i, j]
    hess_g = 0.5 * (g2 + g2.T)
    return CoefficientBundle(y, G, Hbar, hess_g, Hbar + hess_g, Xi, Gamma, coincident)


def log_mean(a, b):
    """Logarithmic mean ``(a - b) / (log a - log b)``, ``a`` when equal."""
    if _close(a, b):
        return 0.5 * (a + b)
    return (a - b) / (np.log(a) - np.log(b))


def bridge_residuals(bundle):
    """Relative residuals of the Gamma/G and Xi/Hbar relations at ``bundle.y``.

    Returns four arrays over ``i < j``: the printed forms
    ``Gamma = G (y_i + y_j)`` and ``Xi * (y_i y_j) = Hbar``, and the forms that
    hold exactly, ``Gamma = G (y_i + y_j) L(y_i, y_j)`` with ``L`` the
    logarithmic mean, and ``2 Xi * (y_i y_j) = Hbar``.
    """
    y = bundle.y
    out = {"gamma_printed": [], "xi_printed": [], "gamma_exact": [], "xi_exact": []}
    n = y.size

    def rel(a, b):
        return abs(a - b) / max(abs(a), abs(b), 1e-300) if (a or b) else 0.0

    for i in range(n):
        for j in range(i + 1, n):
            gsum = bundle.G[i, j] * (y[i] + y[j])
            out["gamma_printed"].append(rel(bundle.Gamma[i, j], gsum))
            out["gamma_exact"].append(rel(bundle.Gamma[i, j], gsum * log_mean(y[i], y[j])))
            xi = bundle.Xi[i, j] * y[i] * y[j]
            out["xi_printed"].append(rel(xi, bundle.Hbar[i, j]))
            out["xi_exact"].append(rel(2.0 * xi, bundle.Hbar[i, j]))
    return {k: np.array(v) for k, v in out.items()}


# --- ellipticity ---------------------------------------------------------

def ellipticity_form(spec, F, a, b):
    """Second derivative of ``t -> w(F + t a b^T)`` at 0 (central differences).

    Two central second differences at steps ``h`` and ``h/2`` are combined by
    Richardson extrapolation; ``h = eps**(1/6) * min(1, sigma_min(F))``.
    """
    F = as_square(F)
    a = as_vector(a, "a")
    b = as_vector(b, "b")
    _check_domain(spec, F)
    D = np.outer(a, b)
    smin = singular_values(F)[-1]
    h = EPS ** (1.0 / 6.0) * min(1.0, smin) / max(1.0, np.linalg.norm(a) * np.linalg.norm(b))
    ts = np.array([-h, -h / 2, 0.0, h / 2, h])
    vals = eval_potential_batch(spec, F[None] + ts[:, None, None] * D[None])
    if not np.all(np.isfinite(vals)):
        raise DomainError("w not finite in the difference stencil")
    d_h = (vals[4] - 2 * vals[2] + vals[0]) / h ** 2
    d_h2 = (vals[3] - 2 * vals[2] + vals[1]) / (h / 2) ** 2
    return float((4.0 * d_h2 - d_h) / 3.0)


def reduced_form(bundle, a, b):
    """``sum H_ij a_i a_j b_i b_j + sum G_ij a_i**2 b_j**2``."""
    ab = a * b
    return float(ab @ bundle.H @ ab + (a * a) @ bundle.G @ (b * b))


def reduced_ellipticity_form(spec, y, a, b):
    bundle = coefficients(spec, y)
    return reduced_form(bundle, as_vector(a, "a"), as_vector(b, "b"))


def main_form(bundle, x):
    """``sum H_ij x_i x_j + G_ij |x_i| |x_j|``."""
    ax = np.abs(x)
    return float(x @ bundle.H @ x + ax @ bundle.G @ ax)


def _bundle_scale(bundle):
    return 1.0 + float(np.max(np.abs(bundle.H))) + float(np.max(np.abs(bundle.G)))


def _sign_patterns(n, rng, limit=16):
    if 2 ** (n - 1) <= limit:
        pats = []
        for m in range(2 ** (n - 1)):
            s = np.ones(n)
            for k in range(n - 1):
                if m >> k & 1:
                    s[k + 1] = -1.0
            pats.append(s)
        return pats
    return [np.where(rng.random(n) < 0.5, -1.0, 1.0) for _ in range(limit)]


def _polish_direction(bundle, x, sweeps=20):
    """Coordinate descent on the unit sphere towards a more negative ``main_form``."""
    x = x / np.linalg.norm(x)
    best = main_form(bundle, x)
    step = 0.25
    for _ in range(sweeps):
        improved = False
        for i in range(x.size):
            for d in (step, -step):
                z = x.copy()
                z[i] += d
                nz = np.linalg.norm(z)
                if nz == 0:
                    continue
                z /= nz
                v = main_form(bundle, z)
                if v < best:
                    x, best, improved = z, v, True
        if not improved:
            step *= 0.5
    return x, best


def rank_one_convexity_test(spec, plan, directions=8, tol_a=1e-9, tol_b=1e-9):
    """Sampled test of: ``G_ij >= 0`` (Schur convexity of ``h``) and
    ``H_ij x_i x_j + G_ij |x_i||x_j| >= 0`` for all ``x``.

    ``plan.box`` is the region of singular values ``y``.  For every sampled
    ``y`` the second condition is tried on ``directions`` nonnegative
    directions under every sign pattern.  Margins are divided by
    ``1 + max|H| + max|G|``.  A refuted verdict's witness holds ``y``, ``x``
    (polished by coordinate descent) and the condition that failed.
    """
    rng = plan.rng(salt=21)
    ys = plan.points(rng)
    if np.any(ys <= 0):
        raise DomainError("rank-one convexity plan must sample positive singular values")
    n = plan.dim
    signs = _sign_patterns(n, rng)
    cond_a = MarginTracker(tol_a)
    cond_b = MarginTracker(tol_b)
    for y in ys:
        bundle = coefficients(spec, y)
        scale = _bundle_scale(bundle)
        off = bundle.G + np.diag(np.full(n, np.inf))
        i, j = np.unravel_index(int(np.argmin(off)), off.shape)
        cond_a.add(off[i, j] / scale, {"condition": "schur_convexity", "y": y, "pair": (int(i), int(j)),
                                       "G_ij": bundle.G[i, j]})
        U = np.abs(rng.standard_normal((directions, n)))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        worst, wx = np.inf, None
        for u in U:
            for s in signs:
                v = main_form(bundle, s * u)
                if v < worst:
                    worst, wx = v, s * u
        cond_b.add(worst / scale, {"condition": "main_inequality", "y": y, "x": wx, "value": worst})
    va, vb = cond_a.verdict(), cond_b.verdict()
    for v in (va, vb):
        if v.refuted and v.witness.get("condition") == "main_inequality":
            bundle = coefficients(spec, v.witness["y"])
            x, val = _polish_direction(bundle, np.asarray(v.witness["x"]))
            v.witness.update(x=x, value=val, margin=val / _bundle_scale(bundle))
    return combine([va, vb], potential=spec.label, schur_margin=va.margin, main_margin=vb.margin)


def ellipticity_sweep(spec, plan, count=None):
    """Minimum of ``ellipticity_form`` over ``F = R Diag(y) Q`` and unit ``a, b``.

    ``y`` is drawn from ``plan.box``; returns ``(min_value, witness)``.
    """
    rng = plan.rng(salt=22)
    count = plan.sample_count if count is None else count
    n = plan.dim
    ys = plan.points(rng, count)
    best, wit = np.inf, None
    for y in ys:
        R = random_rotation(rng, n)
        Q = random_rotation(rng, n)
        a = random_unit(rng, n)
        b = random_unit(rng, n)
        F = R @ np.diag(y) @ Q
        v = ellipticity_form(spec, F, a, b)
        if v < best:
            best, wit = v, {"F": F, "a": a, "b": b, "y": y, "value": v}
    return best, wit


def baker_ericksen_check(spec, y, tol=1e-9):
    """All ``(y_i g_i - y_j g_j) / (y_i**2 - y_j**2) >= -tol``; ``y`` must have distinct entries."""
    y = as_positive_vector(y, "y")
    n = y.size
    g1 = spec.grad(y)
    for i in range(n):
        for j in range(i + 1, n):
            if _close(y[i], y[j]):
                raise DomainError("repeated entries; use coefficients() for the prolongation")
            q = (y[i] * g1[i] - y[j] * g1[j]) / (y[i] ** 2 - y[j] ** 2)
            if q < -tol:
                return False
    return True


def region_inclusion_check(G, H, plan, tol=1e-9):
    """Sampled equivalence of ``H x.x + G |x|.|x| >= 0`` and ``A(G) within A(-H)``.

    ``A(G) = {x : G|x|.|x| <= 1}`` and ``A(-H) = {x : -H x.x <= 1}``.  For each
    direction the inequality and the inclusion are evaluated independently
    (the inclusion on the boundary point of ``A(G)`` along the direction, or
    on the whole ray when ``G|u|.|u| = 0``); a disagreement between the two is
    reported in ``details['disagreements']``.
    """
    G = as_symmetric(G, "G", tol=1e-10)
    H = as_symmetric(H, "H", tol=1e-10)
    if np.any(G < 0):
        raise DomainError("G must have nonnegative entries")
    off = G[~np.eye(G.shape[0], dtype=bool)]
    if np.any(off == 0):
        warnings.warn("G has zero off-diagonal entries; positivity hypothesis relaxed to nonnegativity")
    n = G.shape[0]
    rng = plan.rng(salt=23)
    scale = 1.0 + float(np.max(np.abs(H))) + float(np.max(np.abs(G)))
    tracker = MarginTracker(tol)
    disagreements = 0
    for _ in range(plan.sample_count):
        u = random_unit(rng, n)
        au = np.abs(u)
        gform = float(au @ G @ au)
        hform = float(u @ H @ u)
        ineq = (hform + gform) / scale
        if gform <= 1e-14 * scale:
            # the whole ray lies in A(G)
            incl = hform / scale
        else:
            # boundary point u / sqrt(gform); -H form there must be <= 1
            incl = 1.0 + hform / gform
        ok_a = ineq >= -tol
        ok_b = incl >= -tol
        if ok_a != ok_b:
            disagreements += 1
        tracker.add(min(ineq, incl), {"x": u, "inequality": ineq, "inclusion": incl})
    v = tracker.verdict(disagreements=disagreements)
    if disagreements:
        v.reason = "inequality and inclusion disagree (implementation defect)"
    return v


def _midpoint_convexity(fun, rng, pts_a, pts_b, tol, label):
    tracker = MarginTracker(tol)
    for p, q in zip(pts_a, pts_b):
        fp, fq, fm = fun(p), fun(q), fun(0.5 * (p + q))
        tracker.add((0.5 * (fp + fq) - fm) / (1.0 + abs(fm)), {"check": label, "p": p, "q": q})
    return tracker.verdict()


def symmetric_convex_monotone_check(spec, plan, tol=1e-9):
    """Hypotheses of the Thompson-Freede/Ball convexity theorem, then its conclusion.

    Hypotheses on ``plan.box`` (nonnegative): ``g`` symmetric, midpoint
    convex, nondecreasing in each variable.  If they hold, ``w`` is tested for
    midpoint convexity along seeded segments between matrices whose singular
    values lie in the box.  If they fail the verdict is inconclusive and the
    conclusion is not asserted.
    """
    rng = plan.rng(salt=24)
    n = plan.dim
    g = lambda y: float(spec.g(y))
    P = plan.points(rng)
    Q = plan.points(rng)
    sym = MarginTracker(tol)
    mono = MarginTracker(1e-6)
    for y in P:
        v = g(y)
        sym.add(tol * (1 + abs(v)) - abs(g(y[rng.permutation(n)]) - v), {"check": "symmetry", "y": y})
        grad = spec.grad(y)
        k = int(np.argmin(grad))
        mono.add(grad[k] / (1.0 + float(np.max(np.abs(grad)))), {"check": "nondecreasing", "y": y, "index": k})
    hyp = combine([sym.verdict(), _midpoint_convexity(g, rng, P, Q, tol, "g_midpoint_convex"), mono.verdict()])
    if not hyp.verified:
        return Verdict(INCONCLUSIVE, hyp.samples_checked, hyp.margin, None,
                       "hypotheses fail; conclusion not asserted", {"hypotheses": hyp.to_dict()})
    A, B = [], []
    for y, z in zip(P, Q):
        A.append(random_rotation(rng, n) @ np.diag(y) @ random_rotation(rng, n))
        B.append(random_rotation(rng, n) @ np.diag(z) @ random_rotation(rng, n))
    w = lambda F: float(spec.g(singular_values(F)))
    concl = _midpoint_convexity(w, rng, A, B, tol, "w_midpoint_convex")
    concl.details["hypotheses"] = "verified"
    return concl


def ball_polyconvexity_hypothesis_check(phi, plan, tol=1e-9):
    """Sampled check that ``phi(v1..v7)`` is nondecreasing in ``v1..v6`` and
    invariant under separate permutations of ``(v1, v2, v3)`` and ``(v4, v5, v6)``.

    ``plan.box`` must have 7 (positive) intervals.  A verified verdict reports
    ``details['polyconvex'] = True`` for ``w(F) = phi(sigma, minors-of-sigma, det F)``.
    """
    if plan.dim != 7:
        raise DomainError("phi takes 7 variables (n = 3)")
    rng = plan.rng(salt=25)
    f = lambda v: float(phi(v))
    mono = MarginTracker(1e-6)
    sym = MarginTracker(tol)
    for v in plan.points(rng):
        grad = fd_gradient(f, v)[:6]
        k = int(np.argmin(grad))
        mono.add(grad[k] / (1.0 + float(np.max(np.abs(grad)))), {"check": "nondecreasing", "v": v, "variable": k})
        s = rng.permutation(3)
        t = rng.permutation(3)
        pv = np.concatenate([v[s], v[3 + t], v[6:]])
        fv = f(v)
        sym.add(tol * (1 + abs(fv)) - abs(f(pv) - fv), {"check": "symmetry", "v": v, "perm": (s, t)})
    out = combine([mono.verdict(), sym.verdict()])
    out.details["polyconvex"] = out.verified
    return out


def induced_ball_potential(phi):
    """``w(F) = phi(s1, s2, s3, s1 s2, s1 s3, s2 s3, det F)`` for 3x3 ``F``."""

    def w(F):
        F = as_square(F)
        s = singular_values(F)
        v = [s[0], s[1], s[2], s[0] * s[1], s[0] * s[2], s[1] * s[2], np.linalg.det(F)]
        return float(phi(np.array(v)))

    return w


def isotropy_check(spec, plan, tol=1e-9):
    """``|w(Q F P) - w(F)| <= tol (1 + |w(F)|)`` for sampled rotations."""
    rng = plan.rng(salt=26)
    n = plan.dim
    tracker = MarginTracker()
    for y in plan.points(rng):
        F = random_rotation(rng, n) @ np.diag(y) @ random_rotation(rng, n)
        w = eval_potential(spec, F)
        wq = eval_potential(spec, random_rotation(rng, n) @ F @ random_rotation(rng, n))
        tracker.add(tol * (1 + abs(w)) - abs(wq - w), {"F": F})
    return tracker.verdict()


def h_schur_convexity(spec, plan):
    """Schur convexity of the diagonal ``h`` by the generic sampled test."""
    return schur_convexity_test(h_function(spec), plan)
