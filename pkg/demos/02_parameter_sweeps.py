#!/usr/bin/env python
# Propagate the fiber-geometry distributions through the analytical models:
# vary one parameter at a time and look at the shape of the output spread.
import numpy as np

from sfrc import sweeps

rng = np.random.default_rng(2024)

for vary in ("length", "diameter", "orientation"):
    res = sweeps.run_sweep(sweeps.SweepSpec(vary=vary, n_samples=50_000), rng)
    s = res.summary(outputs=("e1", "C11"))["outputs"]["C11"]
    fit = s["fit"]
    print(f"{vary:12s} C11 mean {s['mean']:6.2f} std {s['std']:5.2f} GPa, "
          f"better fit: {fit['preferred'] if fit else 'n/a'}")

# orientation spreads C11 between its transverse and longitudinal values;
# the histogram has one mode near each end
res = sweeps.run_sweep(sweeps.SweepSpec(vary="orientation", n_samples=50_000), rng)
print("C11 modes (GPa):", np.round(sweeps.histogram_modes(res.coefficient("11")), 2))

# the volume fraction has no distribution; sweep it on a grid
curve = sweeps.volume_fraction_curve(grid=np.linspace(0.10, 0.30, 5))
for phi, e1, e2 in zip(curve.values, curve.constants["e1"], curve.constants["e2"]):
    print(f"phi={phi:.2f}  E1={e1:6.2f}  E2={e2:5.2f}")

res.to_csv("orientation_sweep.csv")
print("wrote orientation_sweep.csv")
