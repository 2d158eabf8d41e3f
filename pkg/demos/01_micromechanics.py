#!/usr/bin/env python
# Aligned short-fiber constants from two micromechanics models, and what
# happens to the plane-stress stiffness when the fibers are rotated.
import numpy as np

from sfrc import materials as mm

aspect = 260.0 / 10.9  # mean fiber length over mean diameter
phi = mm.mass_to_volume_fraction(0.30, mm.GLASS.density, mm.PBT.density)
print(f"30 wt% glass in PBT is a volume fraction of {phi:.4f}")

for name, model in mm.MODELS.items():
    c = model(mm.PBT, mm.GLASS, aspect, phi)
    print(f"{name:12s} E1={c.e1:6.2f} E2={c.e2:5.2f} G12={c.g12:5.2f} "
          f"G23={c.g23:5.2f} nu12={c.nu12:.3f} GPa")

# reduced stiffness for the two 2D states
c = mm.tandon_weng_constants(mm.PBT, mm.GLASS, aspect, phi)
for state in mm.STATES:
    print(state, np.array2string(mm.state_matrix(c, state).entries, precision=3))

# the longitudinal modulus falls off quickly once fibers leave the load axis
base = mm.plane_stress_matrix(c)
for theta in (0, 15, 30, 45, 60, 90):
    rot = mm.rotate_matrix(base, -theta)
    e = mm.extract_constants_plane_stress(rot)
    print(f"theta={theta:3d} deg  C11={rot['11']:6.2f}  C16={rot['16']:+5.2f}  E1={e.e1:6.2f}")

# the Eshelby tensor connects the models to the inclusion shape
for a in (0.5, 1.0, 5.0, aspect):
    S = mm.eshelby_spheroid(a, mm.PBT.poisson_ratio)
    print(f"aspect {a:6.2f}: S1111={float(S['S1111']):.4f} S2222={float(S['S2222']):.4f}")
