"""
Element stiffness, its spectrum and square root
===============================================

The unit-density Q4 element has eight eigenvalues; three of them belong to
rigid-body motion and are truncated before the square root is taken.
"""
import numpy as np

from normtop import (MaterialModel, build_element_stiffness, decompose_and_truncate,
                     modal_l1, rigid_body_modes, stiffness_root, transform_displacement)

np.set_printoptions(precision=4, suppress=True)

# %%
# The closed-form element matrix for E = 1, nu = 0.3
ke = build_element_stiffness(MaterialModel())
print(ke)

# %%
# Eigenvalues before and after truncation
print("raw       ", np.linalg.eigvalsh(ke))
dec = decompose_and_truncate(ke)
print("truncated ", dec.eigenvalues, "->", dec.n_truncated, "modes zeroed")

# %%
# The root squares back to the truncated matrix and kills rigid motion
root = stiffness_root(dec)
print("|R R - K| =", np.linalg.norm(root @ root - dec.matrix()))
for name, mode in zip(["x-shift", "y-shift", "rotation"], rigid_body_modes()):
    print(f"{name:9s} |R u| = {np.linalg.norm(root @ mode):.2e}")

# %%
# Stiffness-weighted displacement of a random element state
rng = np.random.default_rng(0)
u = rng.normal(size=8)
w = transform_displacement(root, u)
l1, l2 = np.abs(w).sum(), np.linalg.norm(w)
print(f"||w||_2 = {l2:.4f}  sqrt(u'Ku) = {np.sqrt(u @ ke @ u):.4f}")
print(f"{l2:.4f} <= ||w||_1 = {l1:.4f} <= sqrt(8)||w||_2 = {np.sqrt(8) * l2:.4f}")

# %%
# The l1 norm depends on the frame: nodal (used as objective) vs modal
print(f"nodal l1 {l1:.4f}   modal l1 {modal_l1(dec, u):.4f}")
