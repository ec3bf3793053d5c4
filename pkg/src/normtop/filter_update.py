"""Cone-weighted sensitivity filter and optimality-criteria update."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .fem import GridMesh


class BisectionError(RuntimeError):
    """The volume multiplier could not be bracketed or resolved."""


@dataclass(frozen=True)
class FilterSpec:
    rmin: float = 1.5

    def __post_init__(self):
        if not self.rmin > 0:
            raise ValueError(f"filter radius must be positive, got {self.rmin}")


@dataclass(frozen=True)
class OcParams:
    move: float = 0.2
    eta: float = 0.5
    lambda_lower: float = 1e-10
    lambda_upper: float = 1e10
    volume_tol: float = 1e-4
    max_halvings: int = 200

    def __post_init__(self):
        if not 0.0 < self.move < 1.0:
            raise ValueError(f"move limit must lie in (0, 1), got {self.move}")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"damping exponent must lie in (0, 1], got {self.eta}")
        if not 0.0 < self.lambda_lower < self.lambda_upper:
            raise ValueError("need 0 < lambda_lower < lambda_upper")


@lru_cache(maxsize=16)
def filter_matrix(nelx: int, nely: int, rmin: float) -> tuple[sp.csr_matrix, np.ndarray]:
    """Weights ``H_ef = max(0, rmin - dist(e, f))`` and their row sums."""
    if not rmin > 0:
        raise ValueError(f"filter radius must be positive, got {rmin}")
    reach = int(np.ceil(rmin)) - 1
    rows, cols, vals = [], [], []
    ci, cj = np.meshgrid(np.arange(nelx), np.arange(nely), indexing="ij")
    ci = ci.ravel()
    cj = cj.ravel()
    own = ci * nely + cj
    for di in range(-reach, reach + 1):
        for dj in range(-reach, reach + 1):
            weight = rmin - np.hypot(di, dj)
            if weight <= 0:
                continue
            ni, nj = ci + di, cj + dj
            ok = (ni >= 0) & (ni < nelx) & (nj >= 0) & (nj < nely)
            rows.append(own[ok])
            cols.append((ni * nely + nj)[ok])
            vals.append(np.full(ok.sum(), weight))
    n = nelx * nely
    h = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n, n))
    return h, np.asarray(h.sum(axis=1)).ravel()


def filter_sensitivities(design: np.ndarray, dc: np.ndarray, spec: FilterSpec,
                         mesh: GridMesh) -> np.ndarray:
    """Density-weighted neighbourhood average of ``dc``.

    ``out_e = sum_f H_ef x_f dc_f / (x_e sum_f H_ef)``.
    """
    h, hs = filter_matrix(mesh.nelx, mesh.nely, float(spec.rmin))
    x = np.asarray(design, dtype=float).ravel()
    dc = np.asarray(dc, dtype=float).ravel()
    return (h @ (x * dc)) / (x * hs)


def oc_update(design: np.ndarray, dc: np.ndarray, volfrac: float, params: OcParams = OcParams(),
              x_min: float = 1e-3) -> np.ndarray:
    """Heuristic fixed-point update with the volume multiplier found by bisection.

    Elements with a nonnegative ``dc`` get a zero growth factor and are
    pushed to their lower bound.
    """
    if not 0.0 < volfrac < 1.0:
        raise ValueError(f"volume fraction must lie in (0, 1), got {volfrac}")
    x = np.asarray(design, dtype=float).ravel()
    drive = np.maximum(-np.asarray(dc, dtype=float).ravel(), 0.0)
    lower = np.maximum(x_min, x - params.move)
    upper = np.minimum(1.0, x + params.move)

    def trial(lam: float) -> np.ndarray:
        return np.clip(x * (drive / lam) ** params.eta, lower, upper)

    lo, hi = params.lambda_lower, params.lambda_upper
    # mean(trial(lam)) is non-increasing in lam; widen until the target is bracketed.
    for _ in range(params.max_halvings):
        if trial(lo).mean() >= volfrac:
            break
        lo *= 0.5
    for _ in range(params.max_halvings):
        if trial(hi).mean() <= volfrac:
            break
        hi *= 2.0

    halvings = 0
    while (hi - lo) > 1e-12 * (hi + lo):
        if halvings >= params.max_halvings:
            break
        mid = np.sqrt(lo * hi) if hi / lo > 4.0 else 0.5 * (lo + hi)
        if trial(mid).mean() > volfrac:
            lo = mid
        else:
            hi = mid
        halvings += 1
    x_new = trial(0.5 * (lo + hi))
    if abs(x_new.mean() - volfrac) > params.volume_tol:
        raise BisectionError(
            f"volume {x_new.mean():.6f} misses target {volfrac} after {halvings} halvings "
            f"(lambda in [{lo:.3e}, {hi:.3e}], bounds allow "
            f"[{lower.mean():.6f}, {upper.mean():.6f}])")
    return x_new


def change_metric(x_new: np.ndarray, x_old: np.ndarray) -> float:
    """``max|x_new - x_old| / max(x_old)``."""
    x_new = np.asarray(x_new, dtype=float)
    x_old = np.asarray(x_old, dtype=float)
    if x_new.shape != x_old.shape:
        raise ValueError("designs differ in length")
    return float(np.abs(x_new - x_old).max() / x_old.max())
