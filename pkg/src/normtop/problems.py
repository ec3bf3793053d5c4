"""Benchmark presets: bridge, cantilevers, half and full MBB beam."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from .fem import GridMesh, LoadCase, MaterialModel, Supports
from .filter_update import FilterSpec


@dataclass(frozen=True)
class ProblemDefinition:
    name: str
    mesh: GridMesh
    load_cases: tuple[LoadCase, ...]
    supports: Supports
    material: MaterialModel = field(default_factory=MaterialModel)
    volfrac: float = 0.5
    filter: FilterSpec = field(default_factory=FilterSpec)

    def __post_init__(self):
        if not 0.0 < self.volfrac < 1.0:
            raise ValueError(f"volume fraction must lie in (0, 1), got {self.volfrac}")
        if not self.load_cases or not all(any(v != 0 for _, v in lc.entries)
                                          for lc in self.load_cases):
            raise ValueError("every load case needs a nonzero force")
        self.supports.free_mask(self.mesh)
        for lc in self.load_cases:
            lc.vector(self.mesh)


def _require_even(nelx: int, name: str):
    if nelx % 2:
        raise ValueError(f"{name} needs an even nelx, got {nelx}")


def make_bridge(nelx: int = 80, nely: int = 40) -> ProblemDefinition:
    """Point load under mid-span, both bottom corners pinned."""
    _require_even(nelx, "bridge")
    ndof = 2 * (nelx + 1) * (nely + 1)
    load = LoadCase(((2 * (nelx // 2 + 1) * (nely + 1), -1.0),))
    fixed = [2 * (nely + 1) - 1, 2 * (nely + 1), ndof - 1, ndof]
    return ProblemDefinition("bridge", GridMesh(nelx, nely), (load,), Supports(tuple(fixed)))


def make_cantilever_one(nelx: int = 60, nely: int = 40) -> ProblemDefinition:
    """Left edge clamped, downward load at the bottom-right corner."""
    ndof = 2 * (nelx + 1) * (nely + 1)
    load = LoadCase(((ndof, -1.0),))
    fixed = tuple(range(1, 2 * (nely + 1) + 1))
    return ProblemDefinition("cantilever1", GridMesh(nelx, nely), (load,), Supports(fixed))


def make_cantilever_two(nelx: int = 60, nely: int = 40) -> ProblemDefinition:
    """Left edge clamped; two separate load cases at the right corners.

    Case 1 pushes the bottom-right corner with -1, case 2 the top-right
    corner with +1 (opposite directions along the vertical DOF).
    """
    ndof = 2 * (nelx + 1) * (nely + 1)
    cases = (
        LoadCase(((ndof, -1.0),)),
        LoadCase(((2 * nelx * (nely + 1) + 2, 1.0),)),
    )
    fixed = tuple(range(1, 2 * (nely + 1) + 1))
    return ProblemDefinition("cantilever2", GridMesh(nelx, nely), cases, Supports(fixed))


def make_half_mbb(nelx: int = 60, nely: int = 20) -> ProblemDefinition:
    """Symmetry half of the MBB beam: u_x = 0 on the left edge, roller at bottom right."""
    ndof = 2 * (nelx + 1) * (nely + 1)
    load = LoadCase(((2, -1.0),))
    fixed = tuple(range(1, 2 * (nely + 1) + 1, 2)) + (ndof,)
    return ProblemDefinition("mbb-half", GridMesh(nelx, nely), (load,), Supports(fixed))


def make_full_mbb(nelx: int = 120, nely: int = 20) -> ProblemDefinition:
    """Full MBB beam: load at top centre, roller bottom left, pin bottom right."""
    _require_even(nelx, "full MBB")
    ndof = 2 * (nelx + 1) * (nely + 1)
    top_middle = (nelx // 2) * (nely + 1) + 1
    load = LoadCase(((2 * top_middle, -1.0),))
    fixed = (2 * (nely + 1), ndof - 1, ndof)
    return ProblemDefinition("mbb-full", GridMesh(nelx, nely), (load,), Supports(fixed))


PRESETS = {
    "bridge": make_bridge,
    "cantilever1": make_cantilever_one,
    "cantilever2": make_cantilever_two,
    "mbb-half": make_half_mbb,
    "mbb-full": make_full_mbb,
}


def make_problem(name: str, nelx: int | None = None, nely: int | None = None,
                 material: MaterialModel | None = None, volfrac: float | None = None,
                 rmin: float | None = None) -> ProblemDefinition:
    """Build a preset by name, optionally overriding size and parameters."""
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; choose from {sorted(PRESETS)}") from None
    sizes = {k: v for k, v in (("nelx", nelx), ("nely", nely)) if v is not None}
    problem = factory(**sizes)
    changes = {}
    if material is not None:
        changes["material"] = material
    if volfrac is not None:
        changes["volfrac"] = volfrac
    if rmin is not None:
        changes["filter"] = FilterSpec(rmin)
    return replace(problem, **changes) if changes else problem
