"""Eigen-decomposition, truncation and square root of the element stiffness."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_RELATIVE_EPS = 1e-9


@dataclass(frozen=True)
class SpectralDecomposition:
    """``K_trunc = V diag(D) V^T`` with ascending, nonnegative ``D``."""

    eigenvectors: np.ndarray
    eigenvalues: np.ndarray
    threshold: float

    @property
    def n_truncated(self) -> int:
        return int(np.count_nonzero(self.eigenvalues == 0.0))

    def matrix(self) -> np.ndarray:
        v, d = self.eigenvectors, self.eigenvalues
        return (v * d) @ v.T


def _fix_signs(v: np.ndarray) -> np.ndarray:
    # First component above noise level made positive, column by column.
    v = v.copy()
    for j in range(v.shape[1]):
        col = v[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size and col[nz[0]] < 0:
            v[:, j] = -col
    return v


def decompose_and_truncate(ke: np.ndarray, eps: float | None = None) -> SpectralDecomposition:
    """Eigen-decompose ``ke`` and zero every eigenvalue with ``|lambda| < eps``.

    Parameters
    ----------
    ke:
        Symmetric square matrix.
    eps:
        Absolute truncation threshold. ``None`` uses
        ``1e-9 * max|lambda|``.
    """
    ke = np.asarray(ke, dtype=float)
    if ke.ndim != 2 or ke.shape[0] != ke.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {ke.shape}")
    scale = max(1.0, np.abs(ke).max())
    if np.abs(ke - ke.T).max() > 1e-12 * scale:
        raise ValueError("element stiffness is not symmetric")
    d, v = np.linalg.eigh(ke)
    if eps is None:
        eps = DEFAULT_RELATIVE_EPS * np.abs(d).max()
    if eps <= 0:
        raise ValueError(f"truncation threshold must be positive, got {eps}")
    d = np.where(np.abs(d) < eps, 0.0, d)
    return SpectralDecomposition(_fix_signs(v), d, float(eps))


def stiffness_root(dec: SpectralDecomposition) -> np.ndarray:
    """Symmetric PSD square root ``V D^{1/2} V^T``."""
    d = dec.eigenvalues
    if np.any(d < 0):
        raise ValueError(
            f"negative eigenvalue {d.min():g} left after truncation; "
            "raise the threshold before taking the root")
    v = dec.eigenvectors
    root = (v * np.sqrt(d)) @ v.T
    return 0.5 * (root + root.T)


def transform_displacement(root: np.ndarray, u_e: np.ndarray) -> np.ndarray:
    """Stiffness-weighted displacement ``w = K^{1/2} u``.

    ``u_e`` may carry extra leading axes (``(..., 8)``).
    """
    u_e = np.asarray(u_e, dtype=float)
    if u_e.shape[-1] != root.shape[0]:
        raise ValueError(f"dimension mismatch: root is {root.shape}, u_e is {u_e.shape}")
    return u_e @ root.T


def modal_displacement(dec: SpectralDecomposition, u_e: np.ndarray) -> np.ndarray:
    """Coordinates of ``u_e`` in the eigenbasis, ``V^T u``."""
    u_e = np.asarray(u_e, dtype=float)
    return u_e @ dec.eigenvectors


def modal_l1(dec: SpectralDecomposition, u_e: np.ndarray) -> np.ndarray:
    """``sum_i sqrt(lambda_i) |(V^T u)_i|``, the l1 norm measured in the modal frame.

    Differs from ``||K^{1/2} u||_1`` because the l1 norm is not rotation
    invariant; kept for analysis next to the nodal-frame objective.
    """
    return np.abs(modal_displacement(dec, u_e) * np.sqrt(dec.eigenvalues)).sum(axis=-1)
