"""Linear-elastic 2D finite elements on a structured square mesh.

Elements are 9-node biquadratic Lagrange quads integrated with a 3x3 Gauss
rule; every integration point carries its own constitutive matrix, taken from
the raster cell that contains it.  Coordinates have their origin in the
lower-left corner of the window, x to the right and y up.  Strain vectors are
Voigt ``(e11, e22, gamma12)`` with engineering shear.

Units: um for lengths and displacements, GPa for moduli and stresses.
"""
from dataclasses import dataclass
import csv
import math

import numpy as np
import scipy.sparse as sp
from scipy.sparse import linalg as spla

from .errors import DomainError, SingularMatrixError, SolverError
from .materials import PBT, GLASS, PLANE_STRESS, isotropic_stiffness

KUBC = "kubc"  # pure displacement (kinematic uniform) boundary conditions
SUBC = "subc"  # pure traction (static uniform) boundary conditions
BC_KINDS = (KUBC, SUBC)
_BC_ALIASES = {"pure_displacement": KUBC, "pure_traction": SUBC}

_GP = np.array([-math.sqrt(0.6), 0.0, math.sqrt(0.6)])
_GW = np.array([5.0, 8.0, 5.0]) / 9.0
_NODE_XI = np.array([-1.0, 0.0, 1.0])

DIRECT_DOF_LIMIT = 100_000
RESIDUAL_TOL = 1e-10


def _shape_1d(xi):
    return (np.array([0.5 * xi * (xi - 1.0), 1.0 - xi * xi, 0.5 * xi * (xi + 1.0)]),
            np.array([xi - 0.5, -2.0 * xi, xi + 0.5]))


def _reference_b(h):
    """Strain-displacement matrices (9, 3, 18) at the Gauss points of an h x h element."""
    B = np.zeros((9, 3, 18))
    for gb, eta in enumerate(_GP):
        Nb, dNb = _shape_1d(eta)
        for ga, xi in enumerate(_GP):
            Na, dNa = _shape_1d(xi)
            g = 3 * gb + ga
            for b in range(3):
                for a in range(3):
                    k = 3 * b + a
                    dx = dNa[a] * Nb[b] * 2.0 / h
                    dy = Na[a] * dNb[b] * 2.0 / h
                    B[g, 0, 2 * k] = dx
                    B[g, 1, 2 * k + 1] = dy
                    B[g, 2, 2 * k] = dy
                    B[g, 2, 2 * k + 1] = dx
    return B


@dataclass(frozen=True, eq=False)
class Mesh:
    size: float  # window edge, um
    h: float  # element edge, um
    n: int  # elements per side

    @property
    def nodes_per_side(self):
        return 2 * self.n + 1

    @property
    def n_nodes(self):
        return self.nodes_per_side**2

    @property
    def n_elements(self):
        return self.n * self.n

    @property
    def n_dof(self):
        return 2 * self.n_nodes

    @property
    def nodes(self):
        m = self.nodes_per_side
        j, i = np.divmod(np.arange(m * m), m)
        return np.column_stack([i, j]) * (self.h / 2.0)

    @property
    def elements(self):
        m = self.nodes_per_side
        ey, ex = np.divmod(np.arange(self.n_elements), self.n)
        b, a = np.divmod(np.arange(9), 3)
        return (2 * ey[:, None] + b[None, :]) * m + (2 * ex[:, None] + a[None, :])

    @property
    def element_dofs(self):
        el = self.elements
        return np.stack([2 * el, 2 * el + 1], axis=-1).reshape(len(el), 18)

    @property
    def gauss_points(self):
        """Physical coordinates (E, 9, 2) of the integration points."""
        ey, ex = np.divmod(np.arange(self.n_elements), self.n)
        gb, ga = np.divmod(np.arange(9), 3)
        x = (ex[:, None] + 0.5 * (_GP[ga][None, :] + 1.0)) * self.h
        y = (ey[:, None] + 0.5 * (_GP[gb][None, :] + 1.0)) * self.h
        return np.stack([x, y], axis=-1)

    @property
    def gauss_weights(self):
        """Quadrature weights (9,) including the Jacobian of an element."""
        gb, ga = np.divmod(np.arange(9), 3)
        return _GW[ga] * _GW[gb] * (self.h / 2.0) ** 2

    def edge_nodes(self, edge):
        m = self.nodes_per_side
        idx = np.arange(m)
        return {
            "left": idx * m,
            "right": idx * m + (m - 1),
            "bottom": idx,
            "top": (m - 1) * m + idx,
        }[edge]

    @property
    def boundary_nodes(self):
        return np.unique(np.concatenate([self.edge_nodes(e) for e in ("left", "right", "bottom", "top")]))


def build_mesh(window, h):
    n = int(round(window / h))
    if n < 1 or abs(n * h - window) > 1e-9 * max(window, 1.0):
        raise DomainError(f"window {window} is not divisible by element size {h}")
    return Mesh(float(window), float(h), n)


@dataclass(frozen=True, eq=False)
class IntegrationPointMaterial:
    phase: np.ndarray  # (E, 9) int, 0 = matrix, 1 = fiber (or -1 when not raster based)
    stiffness: np.ndarray  # (E, 9, 3, 3)
    state: str = PLANE_STRESS

    def fiber_fraction(self, mesh):
        w = mesh.gauss_weights
        return float(np.sum((self.phase == 1) * w[None, :]) / mesh.size**2)


def assign_materials(mesh, grid, phases=(PBT, GLASS), state=PLANE_STRESS):
    """Give every integration point the phase of the raster cell containing it."""
    grid = np.asarray(grid)
    size = int(round(mesh.size))
    if grid.shape != (size, size):
        raise DomainError(f"grid shape {grid.shape} does not match mesh size {size}")
    pts = mesh.gauss_points
    ix = np.clip(np.floor(pts[..., 0]).astype(int), 0, size - 1)
    iy = np.clip(np.floor(pts[..., 1]).astype(int), 0, size - 1)
    phase = grid[iy, ix].astype(np.int8)
    table = np.stack([p.stiffness(state) for p in phases])
    return IntegrationPointMaterial(phase, table[phase], state)


def uniform_material(mesh, stiffness, state=PLANE_STRESS):
    """Same (possibly anisotropic) matrix at every integration point."""
    D = np.broadcast_to(np.asarray(stiffness, dtype=float), (mesh.n_elements, 9, 3, 3))
    return IntegrationPointMaterial(np.full((mesh.n_elements, 9), -1, np.int8), D, state)


@dataclass(frozen=True)
class LoadCaseSpec:
    bc_kind: str
    case: int
    magnitude: float = None  # u0 in um (KUBC) or t0 in GPa (SUBC); None -> default

    def __post_init__(self):
        kind = _BC_ALIASES.get(self.bc_kind, self.bc_kind)
        if kind not in BC_KINDS:
            raise DomainError(f"unknown boundary condition kind {self.bc_kind!r}")
        object.__setattr__(self, "bc_kind", kind)
        if self.case not in (1, 2, 3):
            raise DomainError("load case must be 1, 2 or 3")


def default_magnitude(bc_kind, size):
    # 0.1 % macroscopic strain, or 1 MPa
    return 1e-3 * size if bc_kind == KUBC else 1e-3


@dataclass(frozen=True, eq=False)
class BoundaryConditions:
    fixed_dofs: np.ndarray
    fixed_values: np.ndarray
    forces: np.ndarray
    spec: LoadCaseSpec


def _edge_load(mesh, edge, traction, f):
    """Consistent nodal forces of a uniform traction on one edge."""
    nodes = mesh.edge_nodes(edge)
    w = np.zeros(len(nodes))
    h = mesh.h
    for e in range(mesh.n):
        w[2 * e : 2 * e + 3] += np.array([1.0, 4.0, 1.0]) * h / 6.0
    f[2 * nodes] += w * traction[0]
    f[2 * nodes + 1] += w * traction[1]


# Edge tractions of the pure-traction cases as multiples of t0/2.
_TRACTIONS = {
    1: {"left": (1, 0), "right": (-1, 0)},
    2: {"top": (0, 1), "bottom": (0, -1)},
    3: {"top": (1, 0), "bottom": (-1, 0), "left": (0, -1), "right": (0, 1)},
}


def macro_strain(spec, size):
    """Applied Voigt strain of a pure-displacement case."""
    u0 = spec.magnitude if spec.magnitude is not None else default_magnitude(KUBC, size)
    eps = np.zeros(3)
    eps[spec.case - 1] = u0 / size
    return eps


def macro_stress(spec):
    """Applied Voigt stress of a pure-traction case."""
    t0 = spec.magnitude if spec.magnitude is not None else default_magnitude(SUBC, 0.0)
    sig = np.zeros(3)
    sig[spec.case - 1] = {1: -0.5, 2: 0.5, 3: 0.5}[spec.case] * t0
    return sig


def apply_load_case(mesh, spec):
    d = mesh.size
    f = np.zeros(mesh.n_dof)
    if spec.bc_kind == KUBC:
        u0 = spec.magnitude if spec.magnitude is not None else default_magnitude(KUBC, d)
        nodes = mesh.boundary_nodes
        xy = mesh.nodes[nodes]
        u = np.zeros((len(nodes), 2))
        if spec.case == 1:
            u[:, 0] = u0 * xy[:, 0] / d
        elif spec.case == 2:
            u[:, 1] = u0 * xy[:, 1] / d
        else:
            u[:, 1] = u0 * xy[:, 0] / d
        dofs = np.stack([2 * nodes, 2 * nodes + 1], axis=1).ravel()
        return BoundaryConditions(dofs, u.ravel(), f, spec)

    t0 = spec.magnitude if spec.magnitude is not None else default_magnitude(SUBC, d)
    for edge, (a, b) in _TRACTIONS[spec.case].items():
        _edge_load(mesh, edge, (0.5 * t0 * a, 0.5 * t0 * b), f)
    # rigid-body modes: pin (0, 0) fully and (d, 0) vertically
    corner = mesh.nodes_per_side - 1
    dofs = np.array([0, 1, 2 * corner + 1])
    return BoundaryConditions(dofs, np.zeros(3), f, spec)


@dataclass(frozen=True, eq=False)
class FieldSolution:
    displacement: np.ndarray  # (N, 2)
    strain: np.ndarray  # (E, 9, 3)
    stress: np.ndarray  # (E, 9, 3)
    mean_strain: np.ndarray
    mean_stress: np.ndarray
    mean_energy: float  # <sigma : eps>
    residual: float
    mesh: Mesh = None

    @property
    def hill_residual(self):
        macro = float(self.mean_stress @ self.mean_strain)
        return abs(self.mean_energy - macro) / abs(macro)

    def to_csv(self, path):
        """Nodal displacement table (x, y, u1, u2) in um."""
        xy = self.mesh.nodes
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x_um", "y_um", "u1_um", "u2_um"])
            for (x, y), (u1, u2) in zip(xy, self.displacement):
                w.writerow([repr(float(x)), repr(float(y)), repr(float(u1)), repr(float(u2))])


def assemble_stiffness(mesh, materials):
    B = _reference_b(mesh.h)
    w = mesh.gauss_weights
    DB = np.einsum("egij,gjk->egik", materials.stiffness, B)
    Ke = np.einsum("gia,egib->eab", B * w[:, None, None], DB)
    edofs = mesh.element_dofs
    rows = np.repeat(edofs, 18, axis=1).ravel()
    cols = np.tile(edofs, (1, 18)).ravel()
    K = sp.coo_matrix((Ke.ravel(), (rows, cols)), shape=(mesh.n_dof, mesh.n_dof)).tocsr()
    return K


class _Factor:
    def __init__(self, A, direct_limit):
        self.A = A
        self.direct = A.shape[0] <= direct_limit
        if self.direct:
            try:
                self.lu = spla.splu(A.tocsc(), permc_spec="MMD_AT_PLUS_A",
                                    diag_pivot_thresh=0.0, options={"SymmetricMode": True})
            except RuntimeError as exc:  # SuperLU reports exact singularity this way
                raise SingularMatrixError(f"stiffness matrix is singular: {exc}") from exc
        else:
            d = A.diagonal()
            if np.any(d <= 0):
                raise SingularMatrixError("non-positive diagonal in stiffness matrix")
            self.precond = spla.LinearOperator(A.shape, matvec=lambda x: x / d)

    def solve(self, b):
        if self.direct:
            x = self.lu.solve(b)
        else:
            x, info = spla.cg(self.A, b, rtol=1e-13, atol=0.0, M=self.precond,
                              maxiter=20 * self.A.shape[0])
            if info != 0:
                raise SolverError(f"conjugate gradients did not converge (info={info})")
        nb = np.linalg.norm(b)
        res = np.linalg.norm(self.A @ x - b) / nb if nb > 0 else 0.0
        if self.direct and res > RESIDUAL_TOL:
            x = x + self.lu.solve(b - self.A @ x)  # one step of refinement
            res = np.linalg.norm(self.A @ x - b) / nb
        if not np.isfinite(res) or res > RESIDUAL_TOL:
            raise SolverError(f"relative residual {res:.3e} exceeds {RESIDUAL_TOL}")
        return x, res


def solve_cases(mesh, materials, bcs, direct_limit=DIRECT_DOF_LIMIT):
    """Solve several load cases, sharing the factorization where the constraints agree."""
    K = assemble_stiffness(mesh, materials)
    B = _reference_b(mesh.h)
    w = mesh.gauss_weights
    V = mesh.size**2
    edofs = mesh.element_dofs
    factors = {}
    out = []
    for bc in bcs:
        key = bc.fixed_dofs.tobytes()
        free = np.setdiff1d(np.arange(mesh.n_dof), bc.fixed_dofs)
        if key not in factors:
            factors[key] = _Factor(K[free][:, free], direct_limit)
        u = np.zeros(mesh.n_dof)
        u[bc.fixed_dofs] = bc.fixed_values
        rhs = bc.forces[free] - K[free][:, bc.fixed_dofs] @ bc.fixed_values
        u[free], res = factors[key].solve(rhs)
        ue = u[edofs]
        strain = np.einsum("gij,ej->egi", B, ue)
        stress = np.einsum("egij,egj->egi", materials.stiffness, strain)
        mean_strain = np.einsum("g,egi->i", w, strain) / V
        mean_stress = np.einsum("g,egi->i", w, stress) / V
        energy = float(np.einsum("g,egi,egi->", w, stress, strain) / V)
        out.append(FieldSolution(u.reshape(-1, 2), strain, stress, mean_strain, mean_stress,
                                 energy, float(res), mesh))
    return out


def solve(mesh, materials, bc, direct_limit=DIRECT_DOF_LIMIT):
    return solve_cases(mesh, materials, [bc], direct_limit)[0]
