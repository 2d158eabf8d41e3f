"""Experiment recipes: the numerical studies as reusable ensemble configurations.

Fixed-fraction windows are generated on a domain of exactly the window size
with fibers clipped at the boundary, stopping at the fiber count nearest the
target fraction.  Studies with a varying local fraction cut the window from
the center of a large domain instead.
"""
from dataclasses import dataclass

import numpy as np

from . import corranalysis as ca
from . import fem, homogenize, microgen
from .errors import DomainError
from .materials import GLASS, PBT, PLANE_STRESS, volume_to_mass_fraction

MEAN_LENGTH = 260.0
MEAN_DIAMETER = 10.9
WINDOW_SIZES = (250, 500, 750)
LARGE_DOMAIN = 2500

SCENARIOS = ("fixed", "length", "diameter", "orientation", "fraction", "all")


def fixed_window_generation(window, length=MEAN_LENGTH, diameter=MEAN_DIAMETER,
                            orientation=0.0, target_fraction=0.1822, **kw):
    """A window-sized domain with clipped fibers; ``None`` properties are sampled."""
    return microgen.GenerationConfig(
        width=int(window), height=int(window), target_fraction=target_fraction,
        length=length, diameter=diameter, orientation=orientation, clip=True,
        stop_rule="nearest", **kw)


def large_domain_generation(domain=LARGE_DOMAIN, sampled=True, target_fraction=0.1822, **kw):
    fixed = {} if sampled else {"length": MEAN_LENGTH, "diameter": MEAN_DIAMETER,
                                "orientation": 0.0}
    return microgen.GenerationConfig(width=int(domain), height=int(domain),
                                     target_fraction=target_fraction, **fixed, **kw)


def scenario_generation(name, window, domain=LARGE_DOMAIN, target_fraction=0.1822, **kw):
    """Generation settings of one influence scenario.

    ``fixed`` holds every property at its mean, ``length``/``diameter``/
    ``orientation`` sample that property only, ``fraction`` keeps mean fibers
    but lets the local fraction vary by cutting from a large domain, and
    ``all`` samples everything on the large domain.
    """
    if name not in SCENARIOS:
        raise DomainError(f"unknown scenario {name!r}; choose from {SCENARIOS}")
    if name in ("fraction", "all"):
        if window > domain:
            raise DomainError("window larger than the domain")
        return large_domain_generation(domain, sampled=(name == "all"),
                                       target_fraction=target_fraction, **kw)
    sampled = {"fixed": {}, "length": {"length": None}, "diameter": {"diameter": None},
               "orientation": {"orientation": None}}[name]
    return fixed_window_generation(window, target_fraction=target_fraction, **sampled, **kw)


def window_ensemble(generation, window, realizations, master_seed, h=10.0,
                    state=PLANE_STRESS, bc_kinds=fem.BC_KINDS, phases=(PBT, GLASS)):
    """Center-window ensemble configuration."""
    return ca.EnsembleConfig(
        generation=generation, window=int(window), placements="center",
        bc_kinds=tuple(bc_kinds), state=state, solver=homogenize.SolverConfig(h=h),
        realizations=realizations, master_seed=master_seed, phases=phases)


def aligned_ensemble(window, realizations, master_seed, h=10.0, **kw):
    """Aligned mean fibers at the nominal fraction in a window-sized domain."""
    return window_ensemble(fixed_window_generation(window), window, realizations, master_seed,
                           h=h, **kw)


def moving_window_ensemble(window, realizations, master_seed, domain=LARGE_DOMAIN,
                           state=PLANE_STRESS, h=10.0, bc_kinds=fem.BC_KINDS, **gen):
    return ca.EnsembleConfig(
        generation=large_domain_generation(domain, **gen), window=int(window),
        placements="moving", bc_kinds=tuple(bc_kinds), state=state,
        solver=homogenize.SolverConfig(h=h), realizations=realizations,
        master_seed=master_seed)


@dataclass(frozen=True)
class CoefficientSummary:
    bc_kind: str
    mean: np.ndarray  # (3, 3)
    std: np.ndarray
    n: int
    fraction: float  # mean fiber area fraction

    def get(self, label, stat="mean"):
        i, j = "126".index(label[0]), "126".index(label[1])
        return float(getattr(self, stat)[i, j])


def summarize(table, placement=None):
    """Mean and (population) std of the coefficients per BC kind."""
    out = {}
    for k, kind in enumerate(table.bc_kinds):
        v = table.values[:, :, k] if placement is None else table.values[:, [placement], k]
        v = v.reshape(-1, 3, 3)
        frac = table.fraction if placement is None else table.fraction[:, placement]
        out[kind] = CoefficientSummary(kind, v.mean(axis=0), v.std(axis=0), v.shape[0],
                                       float(np.mean(frac)))
    return out


def mass_fraction(phi, phases=(PBT, GLASS)):
    return volume_to_mass_fraction(phi, phases[1].density, phases[0].density)


def laminate_window(size, fiber_width, vertical=True):
    """Two-strip raster: fiber strip of ``fiber_width`` cells at the high-x (or high-y) side."""
    grid = np.zeros((size, size), dtype=bool)
    if vertical:
        grid[:, size - fiber_width:] = True
    else:
        grid[size - fiber_width:, :] = True
    return grid
