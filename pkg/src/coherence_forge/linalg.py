"""Dense Hermitian linear algebra shared by every other module.

Matrices are plain complex ``numpy`` arrays. The ``as_*`` helpers validate
and return a symmetrized copy; nothing here mutates its input.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-9
PSD_TOL = 1e-9
EIG_TOL = 1e-10


class ValidationError(ValueError):
    """Raised when a matrix fails a structural invariant."""


class EigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


class PsdCheck(NamedTuple):
    is_psd: bool
    margin: float

    def __bool__(self) -> bool:
        return self.is_psd


def _scale(a: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(a))) if a.size else 0.0)


def as_hermitian(a, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Validate ``a`` as a square Hermitian matrix and return ``(a + a^H)/2``.

    The tolerance is absolute on matrices of unit scale and grows with the
    largest entry for bigger ones.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ValidationError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries")
    skew = float(np.max(np.abs(a - a.conj().T)))
    if skew > tol * _scale(a):
        raise ValidationError(f"matrix is not Hermitian (max |A - A^H| = {skew:.3e})")
    return 0.5 * (a + a.conj().T)


def as_density_matrix(a, trace_tol: float = TRACE_TOL, psd_tol: float = PSD_TOL) -> np.ndarray:
    """Validate a density matrix: Hermitian, unit trace, positive semidefinite."""
    rho = as_hermitian(a)
    tr = float(np.trace(rho).real)
    if abs(tr - 1.0) > trace_tol:
        raise ValidationError(f"trace is {tr!r}, expected 1")
    lam_min = float(np.linalg.eigvalsh(rho)[0])
    if lam_min < -psd_tol:
        raise ValidationError(f"matrix is not PSD (smallest eigenvalue {lam_min:.3e})")
    return rho


def eig_hermitian(a) -> EigenDecomposition:
    """Full spectral decomposition with eigenvalues in ascending order."""
    a = as_hermitian(a)
    w, v = np.linalg.eigh(a)
    return EigenDecomposition(w, v)


def schatten_norm(a, p) -> float:
    """Schatten norm for ``p`` in {1, 2, inf} (``"inf"`` is accepted too)."""
    a = as_hermitian(a)
    if p == 2:
        return float(np.sqrt(np.sum(np.abs(a) ** 2)))
    if p == 1:
        return float(np.sum(np.abs(np.linalg.eigvalsh(a))))
    if p in (np.inf, "inf", "infinity"):
        return float(np.max(np.abs(np.linalg.eigvalsh(a))))
    raise ValueError(f"unsupported Schatten index p={p!r}; use 1, 2 or inf")


def is_psd(a, tol: float = PSD_TOL) -> PsdCheck:
    """Positive-semidefiniteness test that also reports the smallest eigenvalue."""
    a = as_hermitian(a)
    margin = float(np.linalg.eigvalsh(a)[0])
    return PsdCheck(margin >= -tol, margin)


def purity(rho) -> float:
    rho = as_hermitian(rho)
    # Tr[rho^2] = sum |rho_ij|^2 for Hermitian rho
    return float(np.sum(np.abs(rho) ** 2))


def hermitian_basis(d: int) -> np.ndarray:
    """Orthonormal basis of d x d Hermitian matrices under Re Tr[A B].

    Order: the d diagonal projectors, then for each i < j the symmetric and
    antisymmetric off-diagonal pair. Shape ``(d*d, d, d)``.
    """
    basis = np.zeros((d * d, d, d), dtype=complex)
    k = 0
    for i in range(d):
        basis[k, i, i] = 1.0
        k += 1
    r = 1 / np.sqrt(2)
    for i in range(d):
        for j in range(i + 1, d):
            basis[k, i, j] = basis[k, j, i] = r
            basis[k + 1, i, j] = -1j * r
            basis[k + 1, j, i] = 1j * r
            k += 2
    return basis


def hermitian_coords(a: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Real coordinates of Hermitian ``a`` in an orthonormal Hermitian basis."""
    return np.real(np.einsum("kij,ji->k", basis, a))


def from_coords(x: np.ndarray, basis: np.ndarray) -> np.ndarray:
    return np.einsum("k,kij->ij", np.asarray(x, dtype=float), basis)


def ket_to_dm(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())
