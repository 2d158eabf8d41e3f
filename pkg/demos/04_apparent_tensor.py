#!/usr/bin/env python
# Apparent stiffness of one window under kinematic (KUBC) and static (SUBC)
# uniform boundary conditions.  The two bracket the effective behavior.
import numpy as np

from sfrc import experiments as ex
from sfrc import fem, homogenize, microgen

# a two-strip laminate: KUBC stiffens the strip direction (near Voigt), SUBC
# softens the stacking direction (near Reuss)
grid = ex.laminate_window(100, 50)
ts = homogenize.apparent_tensors(grid)
for kind, t in ts.items():
    print(kind, np.array2string(t.matrix, precision=3, suppress_small=True))

# a window of aligned clipped fibers at the nominal fraction
m = microgen.generate_microstructure(ex.fixed_window_generation(250, seed=3))
print(f"window fraction {m.achieved_volume_fraction:.4f}, {len(m.fibers)} fibers")
ts = homogenize.apparent_tensors(m.grid)
for kind, t in ts.items():
    d = t.as_dict()
    print(f"{kind}: C11={d['C11']:.2f} C22={d['C22']:.2f} C66={d['C66']:.2f} "
          f"C12={d['C12']:.3f} C21={d['C21']:.3f}  Hill residual {max(t.hill_residuals):.1e}")
print("SUBC <= KUBC on the diagonal:", homogenize.bounds_check(ts[fem.KUBC], ts[fem.SUBC]).ok)

# the displacement field of a single load case
mesh = fem.build_mesh(250, 10)
mat = fem.assign_materials(mesh, m.grid)
sol = fem.solve(mesh, mat, fem.apply_load_case(mesh, fem.LoadCaseSpec(fem.SUBC, 1)))
sol.to_csv("subc_case1_displacement.csv")
print("mean strain under uniform traction:", sol.mean_strain)
