"""Elementary symmetric functionals sigma_k, the Gamma_2 cone, and the
first/second derivative tensors of sigma_2.

sigma_2 of a Hermitian matrix is evaluated through the trace identity

    sigma_2(A) = ((tr A)^2 - tr(A^2)) / 2

which agrees with the elementary symmetric function of the eigenvalues
and with the wedge-product route of the exterior module.  The cone
Gamma_2 is the set where sigma_1 > 0 and sigma_2 > 0 (strict; a margin
of exactly zero counts as outside).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import prod

import numpy as np

from .grid import HermitianField

__all__ = [
    "ConeMargin",
    "sigma_k_eig",
    "sigma2_matrix",
    "sigma1_field",
    "sigma2_field",
    "in_gamma2",
    "gamma2_margins_field",
    "F_first",
    "F_second",
    "contract",
    "hermitian_eigenvalues",
]


@dataclass(frozen=True)
class ConeMargin:
    sigma1: float
    sigma2: float

    @property
    def inside(self) -> bool:
        return self.sigma1 > 0 and self.sigma2 > 0


def sigma_k_eig(lam, k: int) -> float:
    """k-th elementary symmetric function of a real vector."""
    lam = np.asarray(lam, dtype=np.float64)
    n = lam.size
    if not (1 <= k <= n):
        raise ValueError(f"k must be in 1..{n}, got {k}")
    return float(sum(prod(lam[i] for i in idx) for idx in combinations(range(n), k)))


def _require_hermitian(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    scale = max(float(np.max(np.abs(A))), 1.0)
    if np.max(np.abs(A - A.conj().T)) > 1e-12 * scale:
        raise ValueError("matrix is not Hermitian")
    return A


def sigma2_matrix(A) -> float:
    """sigma_2 via the trace identity; input must be Hermitian."""
    A = _require_hermitian(A)
    tr = np.trace(A)
    tr2 = np.trace(A @ A)
    return float(0.5 * (tr * tr - tr2).real)


def hermitian_eigenvalues(A) -> np.ndarray:
    return np.linalg.eigvalsh(_require_hermitian(A))


def in_gamma2(A) -> ConeMargin:
    """Cone membership of a single Hermitian matrix."""
    A = _require_hermitian(A)
    s1 = float(np.trace(A).real)
    return ConeMargin(sigma1=s1, sigma2=sigma2_matrix(A))


def sigma1_field(h: HermitianField) -> np.ndarray:
    return np.einsum("ii...->...", h.matrices).real


def sigma2_field(h: HermitianField) -> np.ndarray:
    """Pointwise sigma_2 over the grid (vectorized trace identity)."""
    tr = np.einsum("ii...->...", h.matrices)
    tr2 = np.einsum("ij...,ji...->...", h.matrices, h.matrices)
    return (0.5 * (tr * tr - tr2)).real


def gamma2_margins_field(h: HermitianField) -> ConeMargin:
    """Min-over-nodes cone margins of a Hermitian field."""
    s1 = float(np.min(sigma1_field(h)))
    s2 = float(np.min(sigma2_field(h)))
    return ConeMargin(sigma1=s1, sigma2=s2)


def F_first(A) -> np.ndarray:
    """Gradient of sigma_2: F_{ij} = d sigma_2 / d A_{ij} = tr(A) d_{ij} - A_{ji}.

    For diagonal A this is diag(sum_{k != i} lambda_k); it is positive
    definite whenever A lies in Gamma_2.
    """
    A = _require_hermitian(A)
    n = A.shape[0]
    return np.trace(A) * np.eye(n) - A.T


def F_second(n: int) -> np.ndarray:
    """Constant Hessian tensor of sigma_2: T[i,j,k,l] = d_ij d_kl - d_il d_jk."""
    d = np.eye(n)
    return np.einsum("ij,kl->ijkl", d, d) - np.einsum("il,jk->ijkl", d, d)


def contract(X, Y) -> complex:
    """Plain entrywise pairing sum_{ij} X_{ij} Y_{ij} (no conjugation).

    This is the pairing under which F_first is the derivative of
    sigma_2; it is real when both arguments are Hermitian.
    """
    return complex(np.sum(np.asarray(X) * np.asarray(Y)))
