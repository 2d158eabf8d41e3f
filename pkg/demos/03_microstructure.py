#!/usr/bin/env python
# Random sequential adsorption of rectangular fibers on a 1 um raster, then
# cut windows out of the result and check their local fiber fraction.
import numpy as np

from sfrc import microgen

cfg = microgen.GenerationConfig(width=1000, height=1000, target_fraction=0.1822, seed=7)
m = microgen.generate_microstructure(cfg)
theta = np.array([f.orientation for f in m.fibers])
print(f"{len(m.fibers)} fibers, fraction {m.achieved_volume_fraction:.4f}")
print(f"orientation mean {theta.mean():+.1f} deg, std {theta.std():.1f} deg")
print(f"mean length {np.mean([f.length for f in m.fibers]):.1f} um")

# the local fraction scatters more in small windows
rng = np.random.default_rng(0)
for size in (100, 250, 500):
    fr = []
    for _ in range(200):
        c = rng.uniform(size / 2, 1000 - size / 2, 2)
        fr.append(microgen.extract_window(m, c, size).mean())
    print(f"window {size:3d} um: local fraction {np.mean(fr):.3f} +- {np.std(fr):.3f}")

# a coarse look at the raster
small = m.grid[::25, ::12]
print("\n".join("".join("#" if v else "." for v in row) for row in small[::-1]))

microgen.save(m, "demo.sfrc")
assert microgen.load("demo.sfrc") == m
print("saved and reloaded demo.sfrc")
