"""
Displacement sensitivities against finite differences
=====================================================

The three element objectives react differently to the displacement: the
quadratic gradient grows linearly, the l2 gradient is normalised and the l1
gradient only sees the sign pattern of w = K^(1/2) u.
"""
import numpy as np

from normtop import (MaterialModel, build_element_stiffness, decompose_and_truncate,
                     displacement_sensitivity, element_objective)

dec = decompose_and_truncate(build_element_stiffness(MaterialModel()))
rng = np.random.default_rng(3)
u = rng.normal(size=8)
x = 0.6

# %%
for kind in ("quadratic", "l2", "l1"):
    g = displacement_sensitivity(kind, x, dec, u).gradient
    h = 1e-6 * np.linalg.norm(u)
    fd = np.array([(element_objective(kind, x, dec, u + h * e)
                    - element_objective(kind, x, dec, u - h * e)) / (2 * h) for e in np.eye(8)])
    print(f"{kind:9s} relative FD error {np.linalg.norm(g - fd) / np.linalg.norm(fd):.1e}")

# %%
# Scaling u by 3 scales the quadratic gradient by 3 and leaves l1 unchanged
for kind in ("quadratic", "l2", "l1"):
    g1 = displacement_sensitivity(kind, x, dec, u).gradient
    g3 = displacement_sensitivity(kind, x, dec, 3 * u).gradient
    print(f"{kind:9s} |g(3u)| / |g(u)| = {np.linalg.norm(g3) / np.linalg.norm(g1):.3f}")
