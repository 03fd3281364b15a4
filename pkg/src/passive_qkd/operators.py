"""Dense Hermitian-matrix kernel used by every POVM computation.

Matrices here are at most 8x8, so everything goes through numpy's LAPACK
wrappers. Functions accept plain arrays or :class:`HermitianOperator`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10


class NotPSDError(ValueError):
    """Raised when an operator expected to be PSD has a clearly negative eigenvalue."""


@dataclass(frozen=True)
class HermitianOperator:
    """Dense Hermitian matrix tagged with its photon-number block (0, 1 or '>M')."""

    matrix: np.ndarray
    block: Union[int, str] = 1

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("operator must be square")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise ValueError("operator is not Hermitian within tolerance")
        object.__setattr__(self, "matrix", 0.5 * (m + m.conj().T))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


ArrayOrOp = Union[np.ndarray, HermitianOperator]


def as_matrix(a: ArrayOrOp) -> np.ndarray:
    if isinstance(a, HermitianOperator):
        return a.matrix
    m = np.asarray(a)
    return 0.5 * (m + m.conj().T)


def eigh(a: ArrayOrOp) -> tuple[np.ndarray, np.ndarray]:
    return np.linalg.eigh(as_matrix(a))


def op_norm_inf(a: ArrayOrOp) -> float:
    """Operator norm of a Hermitian matrix: largest absolute eigenvalue."""
    m = as_matrix(a)
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvalsh(m))))


def min_eig(a: ArrayOrOp) -> float:
    return float(np.linalg.eigvalsh(as_matrix(a))[0])


def _check_psd(w: np.ndarray) -> None:
    scale = float(np.max(np.abs(w), initial=0.0))
    if w.size and w[0] < -PSD_TOL * scale:
        raise NotPSDError(f"minimum eigenvalue {w[0]:.3e} is below the PSD tolerance")


def psd_sqrt(a: ArrayOrOp) -> np.ndarray:
    w, v = eigh(a)
    _check_psd(w)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def psd_sqrt_pinv(a: ArrayOrOp, rank_tol: float = 1e-12) -> np.ndarray:
    """(sqrt A)^+ : eigenvalues >= rank_tol * lambda_max map to 1/sqrt(lambda), others to 0."""
    w, v = eigh(a)
    _check_psd(w)
    lam_max = float(np.max(w, initial=0.0))
    keep = w >= rank_tol * lam_max if lam_max > 0 else np.zeros_like(w, dtype=bool)
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / np.sqrt(w[keep])
    return (v * inv) @ v.conj().T


def support_projector(a: ArrayOrOp, rank_tol: float = 1e-12) -> np.ndarray:
    w, v = eigh(a)
    lam_max = float(np.max(w, initial=0.0))
    keep = w >= rank_tol * lam_max if lam_max > 0 else np.zeros_like(w, dtype=bool)
    return v[:, keep] @ v[:, keep].conj().T


def svd_small(m: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin SVD M = U diag(S) V^dagger with S nonincreasing; returns (U, S, V)."""
    m = np.asarray(m)
    if m.shape[0] < m.shape[1]:
        raise ValueError("svd_small expects rows >= cols")
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    return u, s, vh.conj().T
