"""Apparent 2D stiffness of a window from three load cases.

For each stress component n the row ``(C_n1, C_n2, C_n6)`` solves

    [<e1>  <e2>  <gamma12>]_LC  . (C_n1, C_n2, C_n6)^T = <sigma_n>_LC

over the three load cases LC of one boundary-condition kind, using the
measured volume averages.  All nine entries are recovered independently, so
C12 and C21 (etc.) may differ.
"""
from dataclasses import dataclass, field
import logging

import numpy as np

from . import fem
from .errors import DomainError, SingularMatrixError
from .materials import PBT, GLASS, PLANE_STRESS, ElasticityMatrix2D

log = logging.getLogger(__name__)

COEFFICIENT_LABELS = ("11", "12", "16", "21", "22", "26", "61", "62", "66")


@dataclass(frozen=True)
class SolverConfig:
    h: float = 10.0
    u0_strain: float = 1e-3  # u0 / d
    t0: float = 1e-3  # GPa (1 MPa)
    direct_limit: int = fem.DIRECT_DOF_LIMIT


@dataclass(frozen=True, eq=False)
class ApparentTensor:
    matrix: np.ndarray  # (3, 3), rows sigma_n, columns (e1, e2, gamma12)
    bc_kind: str
    window: float
    state: str
    hill_residuals: tuple = ()
    fiber_fraction: float = float("nan")

    def coefficient(self, label):
        i, j = ("126".index(label[0]), "126".index(label[1]))
        return float(self.matrix[i, j])

    def as_dict(self):
        return {f"C{k}": self.coefficient(k) for k in COEFFICIENT_LABELS}

    def as_matrix2d(self):
        return ElasticityMatrix2D(self.matrix, self.state)


def recover_tensor(solutions):
    """Solve the 3x3 systems for all three stress components."""
    if len(solutions) != 3:
        raise DomainError("exactly three load cases are required")
    eps = np.array([s.mean_strain for s in solutions])  # rows: load cases
    sig = np.array([s.mean_stress for s in solutions])
    scale = np.abs(eps).max()
    if scale == 0 or np.linalg.cond(eps / scale) > 1e12:
        raise SingularMatrixError("load-case strains are linearly dependent")
    return np.linalg.solve(eps, sig).T


def apparent_tensor_from_materials(mesh, materials, bc_kind, config=SolverConfig()):
    kind = fem.LoadCaseSpec(bc_kind, 1).bc_kind
    mag = config.u0_strain * mesh.size if kind == fem.KUBC else config.t0
    bcs = [fem.apply_load_case(mesh, fem.LoadCaseSpec(kind, c, mag)) for c in (1, 2, 3)]
    sols = fem.solve_cases(mesh, materials, bcs, config.direct_limit)
    C = recover_tensor(sols)
    frac = materials.fiber_fraction(mesh) if np.all(materials.phase >= 0) else float("nan")
    return ApparentTensor(C, kind, mesh.size, materials.state,
                          tuple(s.hill_residual for s in sols), frac)


def apparent_tensor(grid, bc_kind, state=PLANE_STRESS, config=SolverConfig(),
                    phases=(PBT, GLASS)):
    """Apparent tensor of a square raster window for one boundary-condition kind."""
    grid = np.asarray(grid)
    if grid.ndim != 2 or grid.shape[0] != grid.shape[1]:
        raise DomainError("window must be a square raster")
    mesh = fem.build_mesh(grid.shape[0], config.h)
    materials = fem.assign_materials(mesh, grid, phases, state)
    return apparent_tensor_from_materials(mesh, materials, bc_kind, config)


def apparent_tensors(grid, bc_kinds=fem.BC_KINDS, state=PLANE_STRESS, config=SolverConfig(),
                     phases=(PBT, GLASS)):
    """Apparent tensors for several BC kinds, sharing mesh and material assignment."""
    grid = np.asarray(grid)
    mesh = fem.build_mesh(grid.shape[0], config.h)
    materials = fem.assign_materials(mesh, grid, phases, state)
    return {k: apparent_tensor_from_materials(mesh, materials, k, config) for k in bc_kinds}


@dataclass(frozen=True)
class BoundsReport:
    kubc_diagonal: tuple
    subc_diagonal: tuple
    violations: tuple = field(default_factory=tuple)  # labels where SUBC > KUBC

    @property
    def ok(self):
        return not self.violations


def _diagonal(t):
    m = t.matrix if isinstance(t, ApparentTensor) else np.asarray(t)
    return tuple(float(m[i, i]) for i in range(3))


def bounds_check(kubc, subc, rtol=1e-8, warn=True):
    """Compare diagonal coefficients; SUBC should not exceed KUBC.

    Accepts ApparentTensor objects or plain (ensemble-mean) 3x3 arrays.
    Violations are logged as warnings, never raised.
    """
    if isinstance(kubc, ApparentTensor) and isinstance(subc, ApparentTensor):
        if kubc.state != subc.state or kubc.window != subc.window:
            raise DomainError("bounds check needs tensors of the same window and state")
    dk, ds = _diagonal(kubc), _diagonal(subc)
    labels = ("11", "22", "66")
    bad = tuple(l for l, k, s in zip(labels, dk, ds) if s > k * (1.0 + rtol))
    if bad and warn:
        log.warning("SUBC exceeds KUBC for C%s", ", C".join(bad))
    return BoundsReport(dk, ds, bad)


def symmetry_report(t):
    """Signed and C11-relative differences of the paired off-diagonal entries."""
    if isinstance(t, ApparentTensor):
        m = t.matrix
    elif isinstance(t, ElasticityMatrix2D):
        m = t.entries
    else:
        m = np.asarray(t)
    diffs = {
        "C12-C21": float(m[0, 1] - m[1, 0]),
        "C16-C61": float(m[0, 2] - m[2, 0]),
        "C26-C62": float(m[1, 2] - m[2, 1]),
    }
    rel = {k + "/C11": v / float(m[0, 0]) for k, v in diffs.items()}
    return {**diffs, **rel}
