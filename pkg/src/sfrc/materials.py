"""Analytical micromechanics of aligned short-fiber composites.

Engineering constants come from the Tandon-Weng (Mori-Tanaka/Eshelby) model
in the decoupled Poisson form of Tucker & Liang, or from the Halpin-Tsai
equations.  Reduced 2D stiffness matrices use Voigt order (11, 22, 12) with
engineering shear strain.  Moduli are in GPa, lengths in micrometres and
angles in degrees.

All model functions broadcast over numpy arrays so that Monte-Carlo sweeps can
evaluate many geometries at once.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, SingularMatrixError

PLANE_STRESS = "plane_stress"
PLANE_STRAIN = "plane_strain"
STATES = (PLANE_STRESS, PLANE_STRAIN)


@dataclass(frozen=True)
class IsotropicMaterial:
    young_modulus: float  # GPa
    poisson_ratio: float
    density: float  # kg/m^3
    name: str = ""

    def __post_init__(self):
        if not self.young_modulus > 0:
            raise DomainError("young_modulus must be positive")
        if not 0 <= self.poisson_ratio < 0.5:
            raise DomainError("poisson_ratio must lie in [0, 0.5)")
        if not self.density > 0:
            raise DomainError("density must be positive")

    @property
    def shear_modulus(self):
        return self.young_modulus / (2.0 * (1.0 + self.poisson_ratio))

    @property
    def lame_lambda(self):
        nu = self.poisson_ratio
        return self.young_modulus * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))

    def stiffness(self, state=PLANE_STRESS):
        """Isotropic 3x3 stiffness for the given 2D state."""
        E, nu = self.young_modulus, self.poisson_ratio
        return isotropic_stiffness(E, nu, state)


GLASS = IsotropicMaterial(70.0, 0.22, 2500.0, "glass")
PBT = IsotropicMaterial(2.6, 0.41, 1300.0, "PBT")


def isotropic_stiffness(E, nu, state=PLANE_STRESS):
    if state == PLANE_STRESS:
        f = E / (1.0 - nu * nu)
        return f * np.array([[1.0, nu, 0.0], [nu, 1.0, 0.0], [0.0, 0.0, (1.0 - nu) / 2.0]])
    if state == PLANE_STRAIN:
        f = E / ((1.0 + nu) * (1.0 - 2.0 * nu))
        return f * np.array(
            [[1.0 - nu, nu, 0.0], [nu, 1.0 - nu, 0.0], [0.0, 0.0, (1.0 - 2.0 * nu) / 2.0]]
        )
    raise DomainError(f"unknown state {state!r}")


@dataclass(frozen=True)
class EngineeringConstants:
    """Constants of a transversely isotropic ply with fiber axis 1.

    ``g23`` is the independent out-of-plane constant; ``nu23`` follows from
    ``e2 = 2 g23 (1 + nu23)``.  It may be ``None`` for constants recovered from
    a plane-stress matrix, which carries no thickness information.
    """

    e1: object
    e2: object
    g12: object
    nu12: object
    g23: Optional[object] = None

    @property
    def nu21(self):
        return self.nu12 * self.e2 / self.e1

    @property
    def nu23(self):
        if self.g23 is None:
            raise DomainError("nu23 needs g23, which these constants do not carry")
        return self.e2 / (2.0 * self.g23) - 1.0

    def as_dict(self):
        d = {"E1": self.e1, "E2": self.e2, "G12": self.g12, "nu12": self.nu12}
        if self.g23 is not None:
            d["G23"] = self.g23
        return d


@dataclass(frozen=True)
class ElasticityMatrix2D:
    """3x3 (or batched ...x3x3) Voigt stiffness with its 2D state tag."""

    entries: np.ndarray
    state: str = PLANE_STRESS

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.shape[-2:] != (3, 3):
            raise DomainError("entries must have trailing shape (3, 3)")
        object.__setattr__(self, "entries", a)
        if self.state not in STATES:
            raise DomainError(f"unknown state {self.state!r}")

    def __getitem__(self, key):
        """Voigt-label access, e.g. ``m["16"]`` -> C16."""
        i, j = _VOIGT_INDEX[key[0]], _VOIGT_INDEX[key[1]]
        return self.entries[..., i, j]


_VOIGT_INDEX = {"1": 0, "2": 1, "6": 2}


def mass_to_volume_fraction(phi_m, rho_f, rho_m):
    phi_m = np.asarray(phi_m, dtype=float)
    if np.any((phi_m < 0) | (phi_m > 1)):
        raise DomainError("mass fraction must lie in [0, 1]")
    if rho_f <= 0 or rho_m <= 0:
        raise DomainError("densities must be positive")
    phi = phi_m * rho_m / (rho_f * (1.0 - phi_m) + rho_m * phi_m)
    return phi if phi.ndim else float(phi)


def volume_to_mass_fraction(phi, rho_f, rho_m):
    phi = np.asarray(phi, dtype=float)
    if np.any((phi < 0) | (phi > 1)):
        raise DomainError("volume fraction must lie in [0, 1]")
    if rho_f <= 0 or rho_m <= 0:
        raise DomainError("densities must be positive")
    phi_m = rho_f * phi / (rho_f * phi + rho_m * (1.0 - phi))
    return phi_m if phi_m.ndim else float(phi_m)


def _check_geometry(aspect_ratio, phi):
    aspect_ratio = np.asarray(aspect_ratio, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if np.any(aspect_ratio <= 0):
        raise DomainError("aspect ratio must be positive")
    if np.any((phi < 0) | (phi >= 1)):
        raise DomainError("fiber volume fraction must lie in [0, 1)")
    return aspect_ratio, phi


_SPHERE_BAND = 1e-2


def _eshelby_closed_form(a, nu):
    a2 = a * a
    q = a2 - 1.0
    with np.errstate(invalid="ignore"):
        prolate = a / np.abs(q) ** 1.5 * (a * np.sqrt(np.abs(q)) - np.arccosh(np.maximum(a, 1.0)))
        oblate = a / np.abs(q) ** 1.5 * (np.arccos(np.minimum(a, 1.0)) - a * np.sqrt(np.abs(q)))
    g = np.where(a > 1.0, prolate, oblate)
    k = 1.0 - 2.0 * nu
    inv = 1.0 / (1.0 - nu)
    return {
        "S1111": 0.5 * inv * (k + (3.0 * a2 - 1.0) / q - (k + 3.0 * a2 / q) * g),
        "S2222": 3.0 / 8.0 * inv * a2 / q + 0.25 * inv * (k - 9.0 / (4.0 * q)) * g,
        "S2233": 0.25 * inv * (a2 / (2.0 * q) - (k + 3.0 / (4.0 * q)) * g),
        "S2211": -0.5 * inv * a2 / q + 0.25 * inv * (3.0 * a2 / q - k) * g,
        "S1122": -0.5 * inv * (k + 1.0 / q) + 0.5 * inv * (k + 3.0 / (2.0 * q)) * g,
        "S2323": 0.25 * inv * (a2 / (2.0 * q) + (k - 3.0 / (4.0 * q)) * g),
        "S1212": 0.25 * inv * (k - (a2 + 1.0) / q - 0.5 * (k - 3.0 * (a2 + 1.0) / q) * g),
    }


def _eshelby_sphere(nu):
    d = 15.0 * (1.0 - nu)
    s11, s12, s44 = (7.0 - 5.0 * nu) / d, (5.0 * nu - 1.0) / d, (4.0 - 5.0 * nu) / d
    return {"S1111": s11, "S2222": s11, "S2233": s12, "S2211": s12, "S1122": s12,
            "S2323": s44, "S1212": s44}


def eshelby_spheroid(aspect_ratio, nu):
    """Eshelby tensor components of a spheroid with its symmetry axis along 1.

    ``aspect_ratio`` > 1 is prolate, < 1 oblate.  Returns a dict with the
    independent components S1111, S2222, S2233, S2211, S1122, S2323 and S1212
    (S3333 = S2222 etc. by symmetry).  Close to the sphere the closed form
    loses precision, so it is interpolated linearly towards the sphere values.
    """
    a = np.asarray(aspect_ratio, dtype=float)
    if np.any(a <= 0):
        raise DomainError("aspect ratio must be positive")
    near = np.abs(a - 1.0) < _SPHERE_BAND
    if not near.any():
        return _eshelby_closed_form(a, nu)
    safe = np.where(near, 1.0 + _SPHERE_BAND, a)
    edge = np.where(a >= 1.0, 1.0 + _SPHERE_BAND, 1.0 - _SPHERE_BAND)
    far, at_edge = _eshelby_closed_form(safe, nu), _eshelby_closed_form(edge, nu)
    sphere = _eshelby_sphere(nu)
    w = np.abs(a - 1.0) / _SPHERE_BAND
    return {k: np.where(near, sphere[k] + w * (at_edge[k] - sphere[k]), far[k]) for k in far}


def tandon_weng_constants(matrix, fiber, aspect_ratio, phi):
    """Aligned-fiber constants from the Tandon-Weng model.

    Poisson's ratio uses the explicit (non-iterative) expression of Tucker &
    Liang.  ``aspect_ratio`` is fiber length over diameter.
    """
    a, c = _check_geometry(aspect_ratio, phi)
    E0, nu0 = matrix.young_modulus, matrix.poisson_ratio
    l0, m0 = matrix.lame_lambda, matrix.shear_modulus
    l1, m1 = fiber.lame_lambda, fiber.shear_modulus
    if l1 == l0 or m1 == m0:
        raise DomainError("Tandon-Weng needs phases with distinct Lame constants")
    S = eshelby_spheroid(a, nu0)

    D1 = 1.0 + 2.0 * (m1 - m0) / (l1 - l0)
    D2 = (l0 + 2.0 * m0) / (l1 - l0)
    D3 = l0 / (l1 - l0)

    B1 = c * D1 + D2 + (1 - c) * (D1 * S["S1111"] + 2.0 * S["S2211"])
    B2 = c + D3 + (1 - c) * (D1 * S["S1122"] + S["S2222"] + S["S2233"])
    B3 = c + D3 + (1 - c) * (S["S1111"] + (1.0 + D1) * S["S2211"])
    B4 = c * D1 + D2 + (1 - c) * (S["S1122"] + D1 * S["S2222"] + S["S2233"])
    B5 = c + D3 + (1 - c) * (S["S1122"] + S["S2222"] + D1 * S["S2233"])

    A1 = D1 * (B4 + B5) - 2.0 * B2
    A2 = (1.0 + D1) * B2 - (B4 + B5)
    A3 = B1 - D1 * B3
    A4 = (1.0 + D1) * B1 - 2.0 * B3
    A5 = (1.0 - D1) / (B4 - B5)
    A = 2.0 * B2 * B3 - B1 * (B4 + B5)

    e1 = E0 / (1.0 + c * (A1 + 2.0 * nu0 * A2) / A)
    e2 = E0 / (1.0 + c * (-2.0 * nu0 * A3 + (1.0 - nu0) * A4 + (1.0 + nu0) * A5 * A) / (2.0 * A))
    g12 = m0 * (1.0 + c / (m0 / (m1 - m0) + 2.0 * (1 - c) * S["S1212"]))
    g23 = m0 * (1.0 + c / (m0 / (m1 - m0) + 2.0 * (1 - c) * S["S2323"]))
    nu12 = (nu0 * A - c * (A3 - nu0 * A4)) / (A + c * (A1 + 2.0 * nu0 * A2))
    return EngineeringConstants(e1=_scalar(e1), e2=_scalar(e2), g12=_scalar(g12),
                                nu12=_scalar(nu12), g23=_scalar(g23))


def _halpin_tsai(p_matrix, p_fiber, zeta, phi):
    ratio = p_fiber / p_matrix
    eta = (ratio - 1.0) / (ratio + zeta)
    return p_matrix * (1.0 + zeta * eta * phi) / (1.0 - eta * phi)


def halpin_tsai_constants(matrix, fiber, aspect_ratio, phi):
    """Aligned-fiber constants from the Halpin-Tsai equations.

    Only E1 depends on the aspect ratio (zeta = 2 l/d).  E2 uses zeta = 2,
    G12 zeta = 1, G23 the matrix-dominated zeta = K/(K + 2G) with K the
    matrix plane-strain bulk modulus; nu12 is the rule of mixtures.
    """
    a, c = _check_geometry(aspect_ratio, phi)
    Em, Ef = matrix.young_modulus, fiber.young_modulus
    Gm, Gf = matrix.shear_modulus, fiber.shear_modulus
    k_over_g = (matrix.lame_lambda + Gm) / Gm
    e1 = _halpin_tsai(Em, Ef, 2.0 * a, c)
    e2 = _halpin_tsai(Em, Ef, 2.0, c) * np.ones_like(a)
    g12 = _halpin_tsai(Gm, Gf, 1.0, c) * np.ones_like(a)
    g23 = _halpin_tsai(Gm, Gf, k_over_g / (k_over_g + 2.0), c) * np.ones_like(a)
    nu12 = (fiber.poisson_ratio * c + matrix.poisson_ratio * (1.0 - c)) * np.ones_like(a)
    return EngineeringConstants(e1=_scalar(e1), e2=_scalar(e2), g12=_scalar(g12),
                                nu12=_scalar(nu12), g23=_scalar(g23))


MODELS = {"tandon_weng": tandon_weng_constants, "halpin_tsai": halpin_tsai_constants}


def _scalar(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def _assemble(c11, c12, c22, c66):
    c11 = np.asarray(c11, dtype=float)
    out = np.zeros(c11.shape + (3, 3))
    out[..., 0, 0] = c11
    out[..., 0, 1] = out[..., 1, 0] = c12
    out[..., 1, 1] = c22
    out[..., 2, 2] = c66
    return out


def plane_stress_matrix(c):
    nu12, nu21 = np.asarray(c.nu12), np.asarray(c.nu21)
    den = 1.0 - nu12 * nu21
    if np.any(den <= 0):
        raise SingularMatrixError("nu12 * nu21 >= 1")
    return ElasticityMatrix2D(
        _assemble(c.e1 / den, nu21 * c.e1 / den, c.e2 / den, c.g12), PLANE_STRESS
    )


def plane_strain_matrix(c):
    nu12, nu21, nu23 = np.asarray(c.nu12), np.asarray(c.nu21), np.asarray(c.nu23)
    den = 1.0 - nu23 - 2.0 * nu12 * nu21
    if np.any(den <= 0) or np.any(1.0 + nu23 <= 0):
        raise SingularMatrixError("1 - nu23 - 2 nu12 nu21 must be positive")
    return ElasticityMatrix2D(
        _assemble(
            (1.0 - nu23**2) * c.e1 / ((1.0 + nu23) * den),
            nu21 * c.e1 / den,
            (1.0 - nu12 * nu21) * c.e2 / ((1.0 + nu23) * den),
            c.g12,
        ),
        PLANE_STRAIN,
    )


def state_matrix(c, state):
    if state == PLANE_STRESS:
        return plane_stress_matrix(c)
    if state == PLANE_STRAIN:
        return plane_strain_matrix(c)
    raise DomainError(f"unknown state {state!r}")


def transformation_matrix(theta):
    """Voigt stress transformation T(theta) (broadcasts over theta in degrees)."""
    t = np.deg2rad(np.asarray(theta, dtype=float))
    c, s = np.cos(t), np.sin(t)
    T = np.empty(t.shape + (3, 3))
    T[..., 0, 0] = c * c
    T[..., 0, 1] = s * s
    T[..., 0, 2] = 2 * c * s
    T[..., 1, 0] = s * s
    T[..., 1, 1] = c * c
    T[..., 1, 2] = -2 * c * s
    T[..., 2, 0] = -c * s
    T[..., 2, 1] = c * s
    T[..., 2, 2] = c * c - s * s
    return T


def rotate_matrix(c, theta):
    """Return ``T C T^T`` for the angle ``theta`` in degrees.

    With this T a ply whose fiber axis lies at ``-theta`` in the global frame
    is mapped onto global axes; rotating by ``theta`` then ``-theta`` is the
    identity.
    """
    T = transformation_matrix(theta)
    C = c.entries
    return ElasticityMatrix2D(T @ C @ np.swapaxes(T, -1, -2), c.state)


def _normal_compliance(c):
    C = c.entries
    c11, c22 = C[..., 0, 0], C[..., 1, 1]
    c12 = 0.5 * (C[..., 0, 1] + C[..., 1, 0])
    det = c11 * c22 - c12 * c12
    if np.any(det <= 0) or np.any(c11 <= 0):
        raise SingularMatrixError("normal block of the stiffness is not positive definite")
    return c22 / det, -c12 / det, c11 / det, C[..., 2, 2]


def extract_constants_plane_stress(c):
    """Invert the plane-stress relations for E1, E2, nu12 and G12.

    Shear coupling terms C16/C26 are ignored and C12/C21 are averaged, i.e.
    the orthotropic projection of the matrix is used.
    """
    if c.state != PLANE_STRESS:
        raise DomainError(
            "plane-strain matrices need a fixed nu23; use extract_constants_plane_strain"
        )
    s11, s12, s22, c66 = _normal_compliance(c)
    e1 = 1.0 / s11
    return EngineeringConstants(e1=_scalar(e1), e2=_scalar(1.0 / s22), g12=_scalar(c66),
                                nu12=_scalar(-s12 * e1))


def extract_constants_plane_strain(c, nu23):
    """Invert the plane-strain relations with the thickness Poisson ratio held fixed.

    The reduced compliance satisfies S11 = (1 - nu12 nu21)/E1,
    S12 = -nu12 (1 + nu23)/E1 and S22 = (1 - nu23^2)/E2.
    """
    if c.state != PLANE_STRAIN:
        raise DomainError("expected a plane-strain matrix")
    s11, s12, s22, c66 = _normal_compliance(c)
    e2 = (1.0 - nu23**2) / s22
    q = -s12 / (1.0 + nu23)  # nu12 / E1
    e1 = 1.0 / (s11 + q * q * e2)
    return EngineeringConstants(e1=_scalar(e1), e2=_scalar(e2), g12=_scalar(c66),
                                nu12=_scalar(q * e1), g23=_scalar(e2 / (2.0 * (1.0 + nu23))))
