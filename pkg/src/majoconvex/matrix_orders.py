"""Spectral data of square matrices and the matrix-level order theorems.

Singular values and eigenvalue moduli are reported in descending order.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from ._validation import DomainError, PreconditionError, as_square, as_symmetric, as_vector, same_length
from .majorization import is_majorized, partial_sum_margins, t_transform_chain
from .sampling import Verdict, VERIFIED, REFUTED

PSD_TOL = 1e-10


@dataclass
class SpectralData:
    singular_values: np.ndarray
    eigenvalue_moduli: np.ndarray
    determinant: float
    R: Optional[np.ndarray] = None
    U: Optional[np.ndarray] = None
    V: Optional[np.ndarray] = None

    @property
    def polar_available(self):
        return self.R is not None

    def to_dict(self):
        def mat(M):
            return None if M is None else M.tolist()

        return {
            "singular_values": self.singular_values.tolist(),
            "eigenvalue_moduli": self.eigenvalue_moduli.tolist(),
            "determinant": float(self.determinant),
            "R": mat(self.R),
            "U": mat(self.U),
            "V": mat(self.V),
        }


def eigenvalue_moduli(F):
    """Descending |lambda(F)| read off the real Schur form (2x2 blocks give conjugate pairs)."""
    F = as_square(F)
    n = F.shape[0]
    T, _ = scipy.linalg.schur(F, output="real")
    mods = []
    i = 0
    while i < n:
        if i + 1 < n and T[i + 1, i] != 0.0:
            block = T[i:i + 2, i:i + 2]
            # complex pair: |lambda|^2 = det of the block
            m = np.sqrt(abs(np.linalg.det(block)))
            mods.extend([m, m])
            i += 2
        else:
            mods.append(abs(T[i, i]))
            i += 1
    return -np.sort(-np.array(mods))


def singular_values(F):
    return np.linalg.svd(as_square(F), compute_uv=False)


def spectral_data(F):
    """Singular values, eigenvalue moduli, determinant and polar factors (when det F > 0).

    Polar factors come from one SVD ``F = W S Z^T``: ``R = W Z^T``,
    ``U = Z S Z^T``, ``V = W S W^T``.
    """
    F = as_square(F)
    W, s, Zt = np.linalg.svd(F)
    det = float(np.linalg.det(F))
    R = U = V = None
    tiny = s[0] * F.shape[0] * np.finfo(float).eps if s[0] > 0 else 0.0
    if det > 0 and s[-1] > tiny:
        R = W @ Zt
        U = Zt.T @ (s[:, None] * Zt)
        V = W @ (s[:, None] * W.T)
        U = 0.5 * (U + U.T)
        V = 0.5 * (V + V.T)
    return SpectralData(s, eigenvalue_moduli(F), det, R, U, V)


def sym_log(S):
    S = as_symmetric(S, "S", tol=1e-10)
    lam, Q = np.linalg.eigh(S)
    if lam[0] <= 0:
        raise DomainError(f"sym_log needs a positive definite matrix (min eigenvalue {lam[0]:.3g})")
    return (Q * np.log(lam)) @ Q.T


def sym_exp(S):
    S = as_symmetric(S, "S", tol=1e-10)
    lam, Q = np.linalg.eigh(S)
    return (Q * np.exp(lam)) @ Q.T


def log_singular_values(X, name="X"):
    X = as_square(X, name)
    if np.linalg.det(X) <= 0:
        raise DomainError(f"{name} must have positive determinant")
    return np.log(singular_values(X))


def thompson_leq(X, Y, tol=1e-9):
    """Thompson order: ``log sigma(X)`` majorized by ``log sigma(Y)``."""
    return is_majorized(log_singular_values(X, "X"), log_singular_values(Y, "Y"), tol)



def weyl_log_majorization_check(F, tol=1e-9):
    """``log |lambda(F)|`` majorized by ``log sigma(F)``; margins are the partial-sum slacks."""
    F = as_square(F)
    mods = eigenvalue_moduli(F)
    if mods[-1] <= 0:
        raise DomainError("F is singular")
    lx = np.log(mods)
    ly = np.log(singular_values(F))
    slack = partial_sum_margins(lx, ly)
    slack = np.append(slack[:-1], -abs(slack[-1]))
    margin = float(np.min(slack))
    if margin >= -tol:
        return Verdict(VERIFIED, 1, margin, details={"partial_sum_margins": slack})
    return Verdict(REFUTED, 1, margin, {"F": F, "log_moduli": lx, "log_sigma": ly, "margin": margin})


def _min_eig(S):
    return float(np.linalg.eigvalsh(0.5 * (S + S.T))[0])


def loewner_monotonicity_check(A, B, tol=1e-9):
    """For ``A <= B`` (Loewner), check ``lambda_desc(A) <= lambda_desc(B)`` componentwise."""
    A = as_symmetric(A, "A")
    B = as_symmetric(B, "B")
    scale = max(1.0, float(np.max(np.abs(A))), float(np.max(np.abs(B))))
    if _min_eig(B - A) < -PSD_TOL * scale:
        raise PreconditionError("B - A is not positive semidefinite")
    la = np.linalg.eigvalsh(A)[::-1]
    lb = np.linalg.eigvalsh(B)[::-1]
    gaps = lb - la
    margin = float(np.min(gaps))
    if margin >= -tol * scale:
        return Verdict(VERIFIED, 1, margin, details={"gaps": gaps})
    return Verdict(REFUTED, 1, margin, {"A": A, "B": B, "margin": margin})


def schur_product_monotonicity_check(A, B, C, tol=1e-9):
    """For ``A >= B`` and ``C >= 0``, check ``(A - B) * C`` (Hadamard) is PSD."""
    A = as_symmetric(A, "A")
    B = as_symmetric(B, "B")
    C = as_symmetric(C, "C")
    scale = max(1.0, float(np.max(np.abs(A - B))))
    if _min_eig(A - B) < -PSD_TOL * scale:
        raise PreconditionError("A - B is not positive semidefinite")
    if _min_eig(C) < -PSD_TOL * max(1.0, float(np.max(np.abs(C)))):
        raise PreconditionError("C is not positive semidefinite")
    margin = _min_eig((A - B) * C)
    if margin >= -tol:
        return Verdict(VERIFIED, 1, margin)
    return Verdict(REFUTED, 1, margin, {"A": A, "B": B, "C": C, "margin": margin})


def diag_spectrum_majorization_check(A, tol=1e-9):
    """Schur: ``diag(A)`` is majorized by the spectrum of symmetric ``A``."""
    A = as_symmetric(A, "A", tol=1e-10)
    d = np.diag(A).copy()
    lam = np.linalg.eigvalsh(A)
    slack = partial_sum_margins(d, lam)
    slack = np.append(slack[:-1], -abs(slack[-1]))
    margin = float(np.min(slack))
    if margin >= -tol * max(1.0, float(np.max(np.abs(lam)))):
        return Verdict(VERIFIED, 1, margin, details={"partial_sum_margins": slack})
    return Verdict(REFUTED, 1, margin, {"A": A, "margin": margin})


def _givens(n, i, j, c, s):
    G = np.eye(n)
    G[i, i] = G[j, j] = c
    G[i, j] = s
    G[j, i] = -s
    return G


def schur_horn_construct(a, b, tol=1e-10):
    """Symmetric matrix with diagonal ``a`` and spectrum ``b`` (requires ``a`` majorized by ``b``).

    Starts from ``Diag(b)`` and applies one Givens rotation per step of the
    T-transform chain from ``b`` to ``a``.  Each pair the chain touches has
    zero coupling at that moment (pairs only ever join distinct rotated
    blocks), so a rotation with ``cos(theta)**2 = t``, ``theta`` in
    ``[0, pi/2]``, moves the diagonal exactly as the T-transform does.
    """
    a = as_vector(a, "a")
    b = as_vector(b, "b")
    same_length(a, b)
    if not is_majorized(a, b, tol * max(1.0, float(np.max(np.abs(b))))):
        raise PreconditionError("a is not majorized by b")
    n = a.size
    chain = t_transform_chain(b, a, tol)
    M = np.diag(b)
    for step in chain.steps:
        theta = np.arccos(np.sqrt(step.t))
        G = _givens(n, step.i, step.j, np.cos(theta), np.sin(theta))
        M = G.T @ M @ G
        M = 0.5 * (M + M.T)
    P = chain.permutation
    return M[np.ix_(P, P)]
