"""
Half MBB beam with three compliance objectives
==============================================

Same mesh, loads and volume fraction; only the objective changes. Density
images are written as PGM files into ``out_mbb/`` and the sparsity metrics
are printed for each run.
"""
from pathlib import Path

from normtop import RunConfig, compare

out = Path("out_mbb")

# %%
# ``compare`` runs quadratic, l2 and l1 back to back
rows = compare(RunConfig(problem="mbb-half", out=out, timing=False))

# %%
for row in rows:
    print(f"{row['objective']:9s} {row['status']:14s} its={row['iterations']:3d} "
          f"compliance={row['compliance']:8.2f} gray={row['gray_fraction']:.3f} "
          f"discreteness={row['discreteness']:.3f}")
print("images:", *sorted(str(p) for p in out.glob("*/density.pgm")))

# %%
# Optional quick look if matplotlib is around
try:
    import matplotlib.pyplot as plt
    import numpy as np
except ImportError:
    pass
else:
    fig, axes = plt.subplots(3, 1, figsize=(6, 6))
    for ax, row in zip(axes, rows):
        ax.imshow(-np.loadtxt(out / row["objective"] / "density.txt"), cmap="gray")
        ax.set_title(row["objective"])
        ax.axis("off")
    fig.tight_layout()
    fig.savefig(out / "mbb_objectives.png", dpi=120)
