"""Compliance topology optimization with quadratic, l2 and spectral l1 objectives."""
from .fem import (GridMesh, LoadCase, MaterialModel, Supports, UnderConstrainedError,
                  assemble_global, build_element_stiffness, element_displacements,
                  gauss_element_stiffness, rigid_body_modes, solve_displacements)
from .filter_update import (BisectionError, FilterSpec, OcParams, change_metric,
                            filter_sensitivities, oc_update)
from .objectives import (DisplacementGradient, ObjectiveEval, ObjectiveKind,
                         displacement_sensitivity, element_objective, eval_l1, eval_l2,
                         eval_quadratic, evaluate)
from .problems import (PRESETS, ProblemDefinition, make_bridge, make_cantilever_one,
                       make_cantilever_two, make_full_mbb, make_half_mbb, make_problem)
from .runner import (IterationRecord, RunConfig, RunResult, RunStatus, compare, export_density,
                     export_log, run, sparsity_metrics)
from .spectral import (SpectralDecomposition, decompose_and_truncate, modal_displacement,
                       modal_l1, stiffness_root, transform_displacement)

__version__ = "0.1.0"
