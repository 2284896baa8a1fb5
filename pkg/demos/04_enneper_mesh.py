"""Integrate the surface of w = z and export it as an OBJ mesh."""
# %%
import sys

import numpy as np

from minsurf4 import numerics as num
from minsurf4 import surface as surf
from minsurf4.expr import HoloFn

out = sys.argv[1] if len(sys.argv) > 1 else "enneper.obj"
w = HoloFn.parse("z")
grid = num.GridSpec.square(-1, 1, -1, 1, 101)

# %% staircase trapezoid integration from the basepoint 0
patch = surf.integrate_patch(w, grid, 0)
i, j = grid.index_of(1)
print("point at z = 1:", patch.points[i, j], "(hand antiderivative: -1/3, 0, -1/2)")

# %% checks: both staircase orders agree, the chart is conformal, coordinates harmonic
print("path independence:", surf.path_independence_check(w, grid, 0))
print("conformality     :", surf.conformality_residual(patch))
print("harmonicity      :", surf.harmonicity_residual(patch))

# %% a critical point of w on the staircase stops the integration
try:
    surf.integrate_patch(HoloFn.parse("z^2"), grid, 0)
except surf.SingularPathError as exc:
    print("z^2:", exc)

# %% export: (n-1)^2 * 2 triangles
n = surf.write_mesh(patch, out)
with open(out) as fh:
    faces = sum(line.startswith("f ") for line in fh)
print(f"wrote {out}: {n} bytes, {int(patch.mask.sum())} vertices, {faces} triangles")
print("bounding box:", np.nanmin(patch.points, axis=(0, 1)), np.nanmax(patch.points, axis=(0, 1)))
