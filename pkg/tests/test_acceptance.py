"""Exit criteria for the package, one test per criterion.

Run with ``pytest tests/test_acceptance.py``; the terminal summary lists one
PASS/FAIL line per criterion.
"""
import time

import numpy as np
import pytest

from normtop.fem import (MaterialModel, assemble_global, build_element_stiffness,
                         gauss_element_stiffness, rigid_body_modes, solve_displacements)
from normtop.objectives import displacement_sensitivity, eval_quadratic
from normtop.problems import PRESETS, make_problem
from normtop.runner import RunConfig, RunStatus, run, sparsity_metrics
from normtop.spectral import decompose_and_truncate, stiffness_root, transform_displacement

MAT = MaterialModel()


def test_criterion_1_element_stiffness(criterion):
    with criterion("1", "closed-form K_e vs Gauss oracle, rigid modes, 3 truncated eigenvalues"):
        start = time.perf_counter()
        ke = build_element_stiffness(MAT)
        assert np.abs(ke - gauss_element_stiffness(MAT)).max() <= 1e-10
        lam = np.linalg.eigvalsh(ke)
        assert np.count_nonzero(np.abs(lam) < 1e-9 * np.abs(lam).max()) == 3
        for mode in rigid_body_modes():
            assert np.abs(ke @ mode).max() <= 1e-10
        assert time.perf_counter() - start < 1.0


def test_criterion_2_matrix_root(criterion):
    with criterion("2", "root squared = truncated K_e; ||w||^2 = u^T K u over 1000 states"):
        start = time.perf_counter()
        ke = build_element_stiffness(MAT)
        dec = decompose_and_truncate(ke)
        root = stiffness_root(dec)
        trunc = dec.matrix()
        assert np.linalg.norm(root @ root - trunc) <= 1e-8 * np.linalg.norm(trunc)
        rng = np.random.default_rng(2024)
        u = rng.normal(size=(1000, 8)) * rng.lognormal(0, 2, size=(1000, 1))
        w = transform_displacement(root, u)
        lhs = np.einsum("ni,ni->n", w, w)
        rhs = np.einsum("ni,ij,nj->n", u, trunc, u)
        assert np.all(np.abs(lhs - rhs) <= 1e-8 * rhs)
        assert time.perf_counter() - start < 5.0


def test_criterion_3_norm_equivalence(criterion):
    with criterion("3", "||w||_2 <= ||w||_1 <= sqrt(8) ||w||_2 on 10^4 vectors + equality cases"):
        start = time.perf_counter()
        rng = np.random.default_rng(7)
        w = rng.normal(size=(10_000, 8)) * rng.lognormal(0, 3, size=(10_000, 1))
        l1 = np.abs(w).sum(axis=1)
        l2 = np.linalg.norm(w, axis=1)
        assert np.all(l2 <= l1 * (1 + 1e-14))
        assert np.all(l1 <= np.sqrt(8) * l2 * (1 + 1e-14))
        for i in range(8):
            one_hot = np.zeros(8)
            one_hot[i] = rng.normal()
            assert np.abs(one_hot).sum() == pytest.approx(np.linalg.norm(one_hot), rel=1e-15)
        flat = 1.7 * rng.choice([-1.0, 1.0], size=8)
        assert np.abs(flat).sum() == pytest.approx(np.sqrt(8) * np.linalg.norm(flat), rel=1e-14)
        assert time.perf_counter() - start < 1.0


def _central_difference(f, u, step):
    g = np.empty_like(u)
    for i in range(u.size):
        e = np.zeros_like(u)
        e[i] = step
        g[i] = (f(u + e) - f(u - e)) / (2 * step)
    return g


def test_criterion_4_displacement_gradients(criterion):
    with criterion("4", "dC(e)/dU_e vs central differences on 100 states per objective"):
        start = time.perf_counter()
        ke = build_element_stiffness(MAT)
        dec = decompose_and_truncate(ke)
        root = stiffness_root(dec)
        objectives = {
            "quadratic": lambda x, u: x ** 3 * (u @ ke @ u),
            "l2": lambda x, u: x ** 3 * np.sqrt(u @ ke @ u),
            "l1": lambda x, u: x ** 3 * np.abs(root @ u).sum(),
        }
        tolerances = {"quadratic": 1e-6, "l2": 1e-6, "l1": 1e-5}
        rng = np.random.default_rng(99)
        worst = {}
        for kind, f in objectives.items():
            checked, errors = 0, []
            while checked < 100:
                u = rng.normal(size=8) * rng.lognormal(0, 1)
                x = rng.uniform(MAT.x_min, 1.0)
                w = root @ u
                if kind == "l1" and np.abs(w).min() < 1e-3 * np.linalg.norm(w):
                    continue  # too close to a sign kink for the difference stencil
                fd = _central_difference(lambda v: f(x, v), u, 1e-6 * np.linalg.norm(u))
                g = displacement_sensitivity(kind, x, dec, u)
                assert g.differentiable
                errors.append(np.linalg.norm(g.gradient - fd) / np.linalg.norm(fd))
                checked += 1
            worst[kind] = max(errors)
            assert worst[kind] <= tolerances[kind], (kind, worst[kind])
        assert time.perf_counter() - start < 10.0


def test_criterion_5_global_identity(criterion):
    with criterion("5", "sqrt(U^T K U) assembled = sqrt(element sum) on 10x10 random mesh"):
        start = time.perf_counter()
        problem = make_problem("cantilever1", 10, 10)
        mesh = problem.mesh
        ke = build_element_stiffness(MAT)
        x = np.random.default_rng(5).uniform(MAT.x_min, 1.0, mesh.n_elements)
        k = assemble_global(x, MAT, ke, mesh)
        u = solve_displacements(k, problem.load_cases[0], problem.supports, mesh)
        global_root = np.sqrt(u @ (k @ u))
        element_root = np.sqrt(eval_quadratic(x, u, ke, MAT, mesh).total)
        assert global_root == pytest.approx(element_root, rel=1e-8)
        assert time.perf_counter() - start < 1.0


@pytest.fixture(scope="module")
def quadratic_runs():
    """All presets, quadratic objective, default sizes; per-iterate bound checks recorded."""
    runs = {}
    start = time.perf_counter()
    for name in PRESETS:
        violations = []

        def check(record, x_new, x_old, violations=violations):
            if abs(x_new.mean() - 0.5) > 1e-3:
                violations.append(f"it {record.loop}: volume {x_new.mean():.6f}")
            if x_new.min() < MAT.x_min or x_new.max() > 1.0:
                violations.append(f"it {record.loop}: box [{x_new.min()}, {x_new.max()}]")
            if np.abs(x_new - x_old).max() > 0.2 + 1e-12:
                violations.append(f"it {record.loop}: move {np.abs(x_new - x_old).max()}")

        runs[name] = (run(RunConfig(problem=name, objective="quadratic", timing=False),
                          callback=check), violations)
    return runs, time.perf_counter() - start


def test_criterion_6_volume_and_bounds(criterion, quadratic_runs):
    with criterion("6", "every OC iterate: |mean(x) - 0.5| <= 1e-3, box and move limits"):
        runs, _ = quadratic_runs
        for name, (result, violations) in runs.items():
            assert result.history, name
            assert not violations, (name, violations[:3])


def test_criterion_7_desk_runs(criterion, quadratic_runs):
    with criterion("7", "five presets converge (<= 300 its), objective decreases, < 2 min") as notes:
        runs, elapsed = quadratic_runs
        notes.append(f"suite {elapsed:.1f} s, iterations "
                     + ", ".join(f"{n}={len(r.history)}" for n, (r, _) in runs.items()))
        for name, (result, _) in runs.items():
            assert result.status is RunStatus.CONVERGED, (name, result.status)
            assert len(result.history) <= 300
            assert result.history[-1].change <= 0.01
            assert result.history[-1].objective < result.history[0].objective, name
        assert elapsed < 120.0, elapsed


def test_criterion_8_cross_objective(criterion):
    with criterion("8", "mbb-half 60x20: l1 no grayer than quadratic (soft margins)") as notes:
        quad = run(RunConfig(problem="mbb-half", objective="quadratic", timing=False))
        l1 = run(RunConfig(problem="mbb-half", objective="l1", timing=False))
        mq, m1 = sparsity_metrics(quad.design), sparsity_metrics(l1.design)
        notes.append("gray q/l1 {:.3f}/{:.3f}, discreteness q/l1 {:.3f}/{:.3f}".format(
            mq["gray_fraction"], m1["gray_fraction"], mq["discreteness"], m1["discreteness"]))
        assert 1 - m1["gray_fraction"] >= (1 - mq["gray_fraction"]) - 0.05
        assert m1["discreteness"] <= mq["discreteness"] + 0.1


def test_criterion_9_determinism(criterion, tmp_path):
    with criterion("9", "repeated runs give byte-identical log.csv and density.txt"):
        outputs = []
        for i in range(2):
            out = tmp_path / f"run{i}"
            run(RunConfig(problem="mbb-half", objective="l1", out=out, timing=False))
            outputs.append(out)
        for name in ("log.csv", "density.txt", "density.pgm"):
            assert (outputs[0] / name).read_bytes() == (outputs[1] / name).read_bytes(), name
        # with wall-clock timing on, everything but the ms column still matches
        timed = [run(RunConfig(problem="mbb-half", objective="l2")) for _ in range(2)]
        strip = [[(r.loop, r.objective, r.volume, r.change) for r in t.history] for t in timed]
        assert strip[0] == strip[1]
        assert np.array_equal(timed[0].design, timed[1].design)
