"""Quadratic, l2 and spectral l1 compliance with their sensitivities.

Displacements are passed as an ``(n_dofs,)`` vector or an
``(n_dofs, n_cases)`` array; objectives and sensitivities add up over load
cases. Design sensitivities use the frozen-displacement form
``dc_e = -p x_e^(p-1) comp_e`` for all three kinds, where ``comp_e`` is the
unpenalized element value of the chosen measure.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .fem import GridMesh, MaterialModel
from .spectral import SpectralDecomposition

KINK_TOL = 1e-12


class ObjectiveKind(str, enum.Enum):
    QUADRATIC = "quadratic"
    L2 = "l2"
    L1 = "l1"


class NumericalPSDError(ArithmeticError):
    """An element quadratic form came out clearly negative."""


@dataclass
class ObjectiveEval:
    total: float
    per_element: np.ndarray
    dc: np.ndarray


class DisplacementGradient(NamedTuple):
    gradient: np.ndarray
    differentiable: bool


def _element_states(u: np.ndarray, mesh: GridMesh) -> np.ndarray:
    """``(n_elements, n_cases, 8)`` gathered element displacements."""
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    if u.shape[0] != mesh.n_dofs:
        raise ValueError(f"displacement has {u.shape[0]} rows, mesh has {mesh.n_dofs} DOFs")
    return np.moveaxis(u[mesh.edof()], 2, 1)


def element_energies(u: np.ndarray, ke: np.ndarray, mesh: GridMesh) -> np.ndarray:
    """``u_e^T K_e u_e`` per element and load case, shape ``(n_elements, n_cases)``.

    Round-off negatives are clamped to zero; anything below the relative noise
    floor raises :class:`NumericalPSDError`.
    """
    ue = _element_states(u, mesh)
    q = np.einsum("eci,ij,ecj->ec", ue, ke, ue)
    floor = KINK_TOL * np.maximum(1.0, np.abs(ke).max() * np.einsum("eci,eci->ec", ue, ue))
    if np.any(q < -floor):
        raise NumericalPSDError(f"element quadratic form {q.min():g} is negative")
    return np.maximum(q, 0.0)


def _finish(x: np.ndarray, comp: np.ndarray, material: MaterialModel) -> ObjectiveEval:
    # comp: unpenalized element measure summed over cases
    p = material.penal
    per_element = x ** p * comp
    dc = -p * x ** (p - 1) * comp
    return ObjectiveEval(float(per_element.sum()), per_element, dc)


def _design(design: np.ndarray, mesh: GridMesh) -> np.ndarray:
    x = np.asarray(design, dtype=float).ravel()
    if x.size != mesh.n_elements:
        raise ValueError(f"design has {x.size} entries, mesh has {mesh.n_elements} elements")
    return x


def eval_quadratic(design, u, ke, material: MaterialModel, mesh: GridMesh) -> ObjectiveEval:
    x = _design(design, mesh)
    return _finish(x, element_energies(u, ke, mesh).sum(axis=1), material)


def eval_l2(design, u, ke, material: MaterialModel, mesh: GridMesh) -> ObjectiveEval:
    x = _design(design, mesh)
    return _finish(x, np.sqrt(element_energies(u, ke, mesh)).sum(axis=1), material)


def eval_l1(design, u, root, material: MaterialModel, mesh: GridMesh) -> ObjectiveEval:
    """Sum over elements of ``x_e^p ||K_e^{1/2} u_e||_1`` (nodal frame)."""
    x = _design(design, mesh)
    w = _element_states(u, mesh) @ root.T
    return _finish(x, np.abs(w).sum(axis=(1, 2)), material)


def evaluate(kind: ObjectiveKind | str, design, u, ke, root, material: MaterialModel,
             mesh: GridMesh) -> ObjectiveEval:
    kind = ObjectiveKind(kind)
    if kind is ObjectiveKind.QUADRATIC:
        return eval_quadratic(design, u, ke, material, mesh)
    if kind is ObjectiveKind.L2:
        return eval_l2(design, u, ke, material, mesh)
    return eval_l1(design, u, root, material, mesh)


def element_objective(kind: ObjectiveKind | str, x_e: float, dec: SpectralDecomposition,
                      u_e: np.ndarray, penal: float = 3.0) -> float:
    """Single-element objective built on the truncated stiffness ``dec``."""
    kind = ObjectiveKind(kind)
    u_e = np.asarray(u_e, dtype=float)
    scaled = (u_e @ dec.eigenvectors) * np.sqrt(dec.eigenvalues)
    factor = x_e ** penal
    if kind is ObjectiveKind.QUADRATIC:
        return factor * float(scaled @ scaled)
    if kind is ObjectiveKind.L2:
        return factor * float(np.sqrt(scaled @ scaled))
    w = dec.eigenvectors @ scaled
    return factor * float(np.abs(w).sum())


def displacement_sensitivity(kind: ObjectiveKind | str, x_e: float, dec: SpectralDecomposition,
                             u_e: np.ndarray, penal: float = 3.0) -> DisplacementGradient:
    """Gradient of the element objective with respect to ``u_e``.

    Quadratic: ``2 x^p K u``. l2: ``x^p K u / ||w||_2``. l1:
    ``x^p K^{1/2} sign(w)``. The l2 form at ``w = 0`` and the l1 form with a
    component of ``w`` within ``1e-12`` of zero are flagged as
    nondifferentiable (the l2 case returns a zero vector).
    """
    kind = ObjectiveKind(kind)
    u_e = np.asarray(u_e, dtype=float)
    v, d = dec.eigenvectors, dec.eigenvalues
    factor = x_e ** penal
    modal = u_e @ v
    k_u = v @ (d * modal)
    if kind is ObjectiveKind.QUADRATIC:
        return DisplacementGradient(2.0 * factor * k_u, True)
    sqrt_d = np.sqrt(d)
    w = v @ (sqrt_d * modal)
    if kind is ObjectiveKind.L2:
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return DisplacementGradient(np.zeros_like(u_e), False)
        return DisplacementGradient(factor * k_u / norm, True)
    smooth = bool(np.all(np.abs(w) > KINK_TOL))
    root_sign = v @ (sqrt_d * (np.sign(w) @ v))
    return DisplacementGradient(factor * root_sign, smooth)


def global_quadratic(k, u) -> float:
    """``sum over cases of U^T K U`` from an assembled stiffness."""
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    return float(np.einsum("ic,ic->", u, k @ u))
