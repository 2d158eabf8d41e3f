"""Analytical parameter sweeps.

One geometric parameter at a time is drawn from its distribution (or taken
from a deterministic grid) while the others stay at their mean values; the
engineering constants and the reduced stiffness follow from the chosen
micromechanics model.  Orientation sweeps rotate the aligned matrix and read
the constants back from the rotated matrix.
"""
from dataclasses import dataclass, field
import csv
import json
from typing import Optional

import numpy as np
from scipy import signal, stats

from . import materials as mm
from . import stochastic
from .errors import DomainError

VARIABLES = ("length", "diameter", "orientation", "volume_fraction")
CONSTANT_NAMES = ("e1", "e2", "g12", "g23", "nu12")
SUMMARY_QUANTILES = (0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99)


@dataclass(frozen=True)
class SweepSpec:
    """One-parameter sweep.

    ``values`` replaces sampling by a deterministic grid; the volume fraction
    has no distribution and can only be swept on a grid.
    """

    model: str = "tandon_weng"
    vary: str = "length"
    n_samples: int = 100_000
    values: Optional[tuple] = None
    length: float = 260.0
    diameter: float = 10.9
    orientation: float = 0.0
    fraction: float = 0.1822
    state: str = mm.PLANE_STRESS
    matrix: mm.IsotropicMaterial = mm.PBT
    fiber: mm.IsotropicMaterial = mm.GLASS
    length_params: stochastic.WeibullParams = stochastic.FIBER_LENGTH
    diameter_params: stochastic.NormalParams = stochastic.FIBER_DIAMETER
    orientation_params: stochastic.EllipticOrientationParams = stochastic.FIBER_ORIENTATION

    def __post_init__(self):
        if self.model not in mm.MODELS:
            raise DomainError(f"model must be one of {tuple(mm.MODELS)}")
        if self.vary not in VARIABLES:
            raise DomainError(f"varied parameter must be one of {VARIABLES}")
        if self.state not in mm.STATES:
            raise DomainError(f"unknown state {self.state!r}")
        if self.values is None:
            if self.vary == "volume_fraction":
                raise DomainError("the volume fraction is swept on a grid; pass values")
            if self.n_samples < 1:
                raise DomainError("n_samples must be positive")
        elif len(self.values) == 0:
            raise DomainError("values must not be empty")


@dataclass
class SweepResult:
    spec: SweepSpec
    values: np.ndarray  # (n,) the varied parameter
    constants: dict  # name -> (n,) array
    coefficients: np.ndarray  # (n, 3, 3) GPa
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return self.values.size

    def coefficient(self, label):
        i, j = "126".index(label[0]), "126".index(label[1])
        return self.coefficients[:, i, j]

    def columns(self):
        cols = {self.spec.vary: self.values}
        cols.update(self.constants)
        for lab in ("11", "12", "16", "21", "22", "26", "61", "62", "66"):
            cols["C" + lab] = self.coefficient(lab)
        return cols

    def summary(self, outputs=("e1", "e2", "g12", "nu12", "C11", "C12", "C22", "C66")):
        """Moments, quantiles and distribution fits of selected outputs."""
        cols = self.columns()
        out = {"spec": _spec_dict(self.spec), "n": len(self), "outputs": {}}
        for name in outputs:
            z = np.asarray(cols[name], dtype=float)
            z = z[np.isfinite(z)]
            entry = {
                "mean": float(z.mean()),
                "std": float(z.std()),
                "quantiles": dict(zip(map(str, SUMMARY_QUANTILES),
                                      np.quantile(z, SUMMARY_QUANTILES).tolist())),
            }
            if z.size >= 50 and z.std() > 1e-12 * max(abs(z.mean()), 1e-300):
                fit = stochastic.fit_distribution(z)
                entry["fit"] = {
                    "preferred": fit.preferred,
                    "normal": {"mean": fit.normal.mean, "std": fit.normal.std,
                               "loglik": fit.normal_loglik},
                    "weibull": None if fit.weibull is None else {
                        "scale": fit.weibull.scale, "shape": fit.weibull.shape,
                        "loglik": fit.weibull_loglik},
                }
            else:
                entry["fit"] = None
            out["outputs"][name] = entry
        return out

    def to_csv(self, path):
        cols = self.columns()
        names = list(cols)
        unit = {"length": "_um", "diameter": "_um", "orientation": "_deg", "volume_fraction": ""}
        header = [names[0] + unit[self.spec.vary]]
        header += [n + ("" if n == "nu12" else "_GPa") for n in names[1:]]
        data = np.column_stack([np.asarray(cols[n], dtype=float) for n in names])
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows([[repr(float(v)) for v in row] for row in data])

    def to_json(self, path, **kw):
        with open(path, "w") as fh:
            json.dump(self.summary(**kw), fh, indent=2, sort_keys=True)


def _spec_dict(spec):
    return {
        "model": spec.model, "vary": spec.vary, "n_samples": len(spec.values) if spec.values
        else spec.n_samples, "length_um": spec.length, "diameter_um": spec.diameter,
        "orientation_deg": spec.orientation, "fraction": spec.fraction, "state": spec.state,
    }


def _draw(spec, rng):
    if spec.values is not None:
        return np.asarray(spec.values, dtype=float)
    n = spec.n_samples
    if spec.vary == "length":
        return stochastic.sample_fiber_length(rng, n, spec.length_params)
    if spec.vary == "diameter":
        return stochastic.sample_fiber_diameter(rng, n, spec.diameter_params)
    return stochastic.sample_fiber_orientation(rng, n, spec.orientation_params)


def _aligned(spec, length, diameter, fraction):
    model = mm.MODELS[spec.model]
    c = model(spec.matrix, spec.fiber, np.asarray(length) / np.asarray(diameter), fraction)
    return c, mm.state_matrix(c, spec.state)


def run_sweep(spec, rng=None):
    rng = np.random.default_rng(0) if rng is None else rng
    x = _draw(spec, rng)
    n = x.size
    length = np.full(n, spec.length)
    diameter = np.full(n, spec.diameter)
    fraction = np.full(n, spec.fraction)
    theta = np.full(n, spec.orientation)
    if spec.vary == "length":
        length = x
    elif spec.vary == "diameter":
        diameter = x
    elif spec.vary == "volume_fraction":
        fraction = x
    else:
        theta = x

    if spec.vary == "orientation":
        base, base_m = _aligned(spec, spec.length, spec.diameter, spec.fraction)
        # a fiber at +theta in the global frame
        rotated = mm.rotate_matrix(base_m, -theta)
        if spec.state == mm.PLANE_STRESS:
            ext = mm.extract_constants_plane_stress(rotated)
        else:
            ext = mm.extract_constants_plane_strain(rotated, base.nu23)
        consts = {"e1": ext.e1, "e2": ext.e2, "g12": ext.g12,
                  "g23": np.full(n, np.nan), "nu12": ext.nu12}
        coeffs = rotated.entries
    else:
        if np.all(theta == 0):
            c, m = _aligned(spec, length, diameter, fraction)
        else:
            c, m0 = _aligned(spec, length, diameter, fraction)
            m = mm.rotate_matrix(m0, -theta)
        consts = {k: getattr(c, k) for k in CONSTANT_NAMES}
        coeffs = m.entries
    consts = {k: np.broadcast_to(np.asarray(v, dtype=float), (n,)).copy() for k, v in consts.items()}
    coeffs = np.broadcast_to(coeffs, (n, 3, 3)).copy()
    return SweepResult(spec, x, consts, coeffs)


def volume_fraction_curve(model="tandon_weng", grid=None, state=mm.PLANE_STRESS, **fixed):
    """Deterministic constants and coefficients over a fraction grid (default 0.10..0.30)."""
    grid = np.linspace(0.10, 0.30, 21) if grid is None else np.asarray(grid, dtype=float)
    if np.any((grid <= 0) | (grid >= 1)):
        raise DomainError("volume fractions must lie in (0, 1)")
    spec = SweepSpec(model=model, vary="volume_fraction", values=tuple(grid.tolist()),
                     state=state, **fixed)
    return run_sweep(spec)


def histogram_modes(values, n_grid=512):
    """Locations of the local maxima of a Gaussian KDE (Scott bandwidth)."""
    z = np.asarray(values, dtype=float)
    kde = stats.gaussian_kde(z, bw_method="scott")
    xs = np.linspace(z.min(), z.max(), n_grid)
    dens = kde(xs)
    peaks, _ = signal.find_peaks(dens)
    # a maximum sitting on the data bound counts as a mode too
    if dens[0] > dens[1]:
        peaks = np.r_[0, peaks]
    if dens[-1] > dens[-2]:
        peaks = np.r_[peaks, n_grid - 1]
    return xs[peaks]
