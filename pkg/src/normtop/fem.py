"""Regular-grid Q4 plane-stress finite element model.

Mesh conventions
----------------
Nodes are numbered column by column, top to bottom, starting at 1::

    1---4---7
    |   |   |
    2---5---8
    |   |   |
    3---6---9

Node ``n`` owns the 1-based DOFs ``2n-1`` (horizontal) and ``2n`` (vertical).
The vertical DOF follows the row index, i.e. it points down the grid.
Elements are numbered the same way (column-major), so the design vector
reshaped with ``order="F"`` to ``(nely, nelx)`` gives the picture of the
domain with row 0 at the top.

Public functions take and return 1-based DOF indices (matching the benchmark
listings); arrays used internally are 0-based.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class UnderConstrainedError(RuntimeError):
    """Reduced stiffness system is singular (not enough supports)."""


@dataclass(frozen=True)
class GridMesh:
    nelx: int
    nely: int

    def __post_init__(self):
        if int(self.nelx) < 1 or int(self.nely) < 1:
            raise ValueError(f"mesh needs nelx, nely >= 1, got {self.nelx}x{self.nely}")

    @property
    def n_elements(self) -> int:
        return self.nelx * self.nely

    @property
    def n_nodes(self) -> int:
        return (self.nelx + 1) * (self.nely + 1)

    @property
    def n_dofs(self) -> int:
        return 2 * self.n_nodes

    def node(self, col: int, row: int) -> int:
        """1-based node number at grid column ``col`` and row ``row`` (row 0 on top)."""
        if not (0 <= col <= self.nelx and 0 <= row <= self.nely):
            raise IndexError(f"node ({col}, {row}) outside {self.nelx}x{self.nely} grid")
        return col * (self.nely + 1) + row + 1

    def edof(self) -> np.ndarray:
        """0-based ``(n_elements, 8)`` element DOF table.

        Row ``e`` lists the DOFs of element ``e + 1`` in the order
        upper-left, upper-right, lower-right, lower-left node.
        """
        elx, ely = np.meshgrid(np.arange(1, self.nelx + 1), np.arange(1, self.nely + 1))
        elx = elx.ravel(order="F")
        ely = ely.ravel(order="F")
        n1 = (self.nely + 1) * (elx - 1) + ely
        n2 = (self.nely + 1) * elx + ely
        table = np.column_stack([
            2 * n1 - 1, 2 * n1,
            2 * n2 - 1, 2 * n2,
            2 * n2 + 1, 2 * n2 + 2,
            2 * n1 + 1, 2 * n1 + 2,
        ])
        return table - 1

    def element_centers(self) -> np.ndarray:
        """``(n_elements, 2)`` array of (column, row) element centers."""
        cols, rows = np.meshgrid(np.arange(self.nelx), np.arange(self.nely))
        return np.column_stack([cols.ravel(order="F"), rows.ravel(order="F")]) + 0.5


@dataclass(frozen=True)
class MaterialModel:
    youngs_modulus: float = 1.0
    poisson_ratio: float = 0.3
    x_min: float = 1e-3
    penal: float = 3.0

    def __post_init__(self):
        if not 0.0 < self.poisson_ratio < 0.5:
            raise ValueError(f"Poisson ratio must lie in (0, 0.5), got {self.poisson_ratio}")
        if self.x_min <= 0.0 or self.x_min >= 1.0:
            raise ValueError(f"x_min must lie in (0, 1), got {self.x_min}")
        if self.penal < 1.0:
            raise ValueError(f"penal must be >= 1, got {self.penal}")
        if self.youngs_modulus <= 0.0:
            raise ValueError("Young's modulus must be positive")


@dataclass(frozen=True)
class LoadCase:
    """Point loads as ``(dof, value)`` pairs with 1-based DOF indices."""

    entries: tuple[tuple[int, float], ...]

    def __post_init__(self):
        dofs = [d for d, _ in self.entries]
        if len(set(dofs)) != len(dofs):
            raise ValueError(f"duplicate DOF in load case: {dofs}")

    def vector(self, mesh: GridMesh) -> np.ndarray:
        f = np.zeros(mesh.n_dofs)
        for dof, value in self.entries:
            if not 1 <= dof <= mesh.n_dofs:
                raise IndexError(f"load DOF {dof} outside [1, {mesh.n_dofs}]")
            f[dof - 1] = value
        return f


@dataclass(frozen=True)
class Supports:
    """Fixed DOFs, 1-based, kept sorted and unique."""

    fixed_dofs: tuple[int, ...]

    def __post_init__(self):
        if len(self.fixed_dofs) == 0:
            raise ValueError("at least one fixed DOF is required")
        object.__setattr__(self, "fixed_dofs", tuple(sorted(set(int(d) for d in self.fixed_dofs))))

    def free_mask(self, mesh: GridMesh) -> np.ndarray:
        fixed = np.asarray(self.fixed_dofs)
        if fixed.min() < 1 or fixed.max() > mesh.n_dofs:
            raise IndexError(f"fixed DOFs outside [1, {mesh.n_dofs}]")
        mask = np.ones(mesh.n_dofs, dtype=bool)
        mask[fixed - 1] = False
        return mask


def build_element_stiffness(material: MaterialModel = MaterialModel()) -> np.ndarray:
    """Closed-form 8x8 stiffness of a unit square Q4 element, plane stress.

    The matrix is for unit density; ``material.youngs_modulus`` scales it.
    """
    nu = material.poisson_ratio
    if not 0.0 < nu < 0.5:
        raise ValueError(f"Poisson ratio must lie in (0, 0.5), got {nu}")
    k = np.array([
        1 / 2 - nu / 6, 1 / 8 + nu / 8, -1 / 4 - nu / 12, -1 / 8 + 3 * nu / 8,
        -1 / 4 + nu / 12, -1 / 8 - nu / 8, nu / 6, 1 / 8 - 3 * nu / 8,
    ])
    pattern = np.array([
        [0, 1, 2, 3, 4, 5, 6, 7],
        [1, 0, 7, 6, 5, 4, 3, 2],
        [2, 7, 0, 5, 6, 3, 4, 1],
        [3, 6, 5, 0, 7, 2, 1, 4],
        [4, 5, 6, 7, 0, 1, 2, 3],
        [5, 4, 3, 2, 1, 0, 7, 6],
        [6, 3, 4, 1, 2, 7, 0, 5],
        [7, 2, 1, 4, 3, 6, 5, 0],
    ])
    return material.youngs_modulus / (1 - nu ** 2) * k[pattern]


def gauss_element_stiffness(material: MaterialModel = MaterialModel(),
                            coords: np.ndarray | None = None) -> np.ndarray:
    """Q4 plane-stress stiffness by 2x2 Gauss quadrature of B^T C B.

    ``coords`` are the four node positions in element DOF order; the default
    is the unit square in (column, row) coordinates, which reproduces
    :func:`build_element_stiffness`.
    """
    nu = material.poisson_ratio
    if coords is None:
        coords = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    c = material.youngs_modulus / (1 - nu ** 2) * np.array([
        [1.0, nu, 0.0],
        [nu, 1.0, 0.0],
        [0.0, 0.0, (1 - nu) / 2],
    ])
    g = 1 / np.sqrt(3)
    ke = np.zeros((8, 8))
    for xi in (-g, g):
        for eta in (-g, g):
            dn = 0.25 * np.array([
                [-(1 - eta), 1 - eta, 1 + eta, -(1 + eta)],
                [-(1 - xi), -(1 + xi), 1 + xi, 1 - xi],
            ])
            jac = dn @ coords
            dnx = np.linalg.solve(jac, dn)
            b = np.zeros((3, 8))
            b[0, 0::2] = dnx[0]
            b[1, 1::2] = dnx[1]
            b[2, 0::2] = dnx[1]
            b[2, 1::2] = dnx[0]
            ke += b.T @ c @ b * np.linalg.det(jac)
    return ke


def rigid_body_modes() -> np.ndarray:
    """``(3, 8)`` rows: x-translation, y-translation, infinitesimal rotation."""
    coords = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    tx = np.tile([1.0, 0.0], 4)
    ty = np.tile([0.0, 1.0], 4)
    rot = np.column_stack([-coords[:, 1], coords[:, 0]]).ravel()
    return np.vstack([tx, ty, rot])


def _check_design(design: np.ndarray, material: MaterialModel, mesh: GridMesh) -> np.ndarray:
    x = np.asarray(design, dtype=float).ravel()
    if x.size != mesh.n_elements:
        raise ValueError(f"design has {x.size} entries, mesh has {mesh.n_elements} elements")
    if x.min() < material.x_min - 1e-12 or x.max() > 1.0 + 1e-12:
        raise ValueError(f"densities must lie in [{material.x_min}, 1], "
                         f"got [{x.min():g}, {x.max():g}]")
    return x


def assemble_global(design: np.ndarray, material: MaterialModel, ke: np.ndarray,
                    mesh: GridMesh) -> sp.csc_matrix:
    """Global stiffness ``K(x) = sum_e x_e^p K_e`` as a sparse CSC matrix."""
    x = _check_design(design, material, mesh)
    edof = mesh.edof()
    rows = np.repeat(edof, 8, axis=1).ravel()
    cols = np.tile(edof, (1, 8)).ravel()
    vals = (ke.ravel()[None, :] * (x ** material.penal)[:, None]).ravel()
    k = sp.coo_matrix((vals, (rows, cols)), shape=(mesh.n_dofs, mesh.n_dofs)).tocsc()
    # Mirror to remove summation-order asymmetry.
    return ((k + k.T) * 0.5).tocsc()


def solve_displacements(k: sp.spmatrix, loads: LoadCase | np.ndarray, supports: Supports,
                        mesh: GridMesh) -> np.ndarray:
    """Solve ``K U = F`` on the free DOFs; fixed DOFs are exactly zero.

    ``loads`` may be a :class:`LoadCase` or an explicit force vector (or an
    ``(n_dofs, n_cases)`` array, solved with a single factorization).
    """
    if isinstance(loads, LoadCase):
        f = loads.vector(mesh)
    else:
        f = np.asarray(loads, dtype=float)
    free = supports.free_mask(mesh)
    u = np.zeros_like(f)
    kff = sp.csc_matrix(k)[free][:, free]
    ff = f[free]
    if not np.any(ff):
        return u
    try:
        lu = spla.splu(kff, permc_spec="MMD_AT_PLUS_A")
    except RuntimeError as exc:
        raise UnderConstrainedError(
            f"reduced stiffness is singular; supports {len(supports.fixed_dofs)} DOFs "
            "do not remove all rigid-body motion") from exc
    pivots = np.abs(lu.U.diagonal())
    if pivots.min() <= 1e-13 * pivots.max():
        raise UnderConstrainedError(
            "reduced stiffness is numerically singular; the problem is under-constrained")
    uf = lu.solve(ff)
    if not np.all(np.isfinite(uf)):
        raise UnderConstrainedError("non-finite displacements; the problem is under-constrained")
    u[free] = uf
    return u


def element_displacements(u: np.ndarray, e: int, mesh: GridMesh) -> np.ndarray:
    """Gather the 8 DOF values of 1-based element ``e``."""
    if not 1 <= e <= mesh.n_elements:
        raise IndexError(f"element {e} outside [1, {mesh.n_elements}]")
    return np.asarray(u)[mesh.edof()[e - 1]]


def gather_all(u: np.ndarray, mesh: GridMesh, edof: np.ndarray | None = None) -> np.ndarray:
    """Vectorized gather: ``(n_elements, 8)`` or ``(n_elements, 8, n_cases)``."""
    if edof is None:
        edof = mesh.edof()
    return np.asarray(u)[edof]
