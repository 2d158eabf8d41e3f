"""Stochastic homogenization of short fiber-reinforced composites.

Submodules:

- ``materials``: phase data, micromechanics models, 2D stiffness matrices
- ``stochastic``: fiber-property distributions, samplers and estimators
- ``microgen``: random sequential fiber placement on a 1 um raster
- ``fem``: biquadratic plane finite elements under KUBC/SUBC
- ``homogenize``: apparent stiffness recovery and bound/symmetry checks
- ``corranalysis``: moving-window ensembles and correlation curves
- ``sweeps``: analytical one-parameter sweeps
- ``experiments``: ensemble recipes of the numerical studies
- ``acceptance``: reference checks used by ``sfrc verify`` and the tests
"""
from .errors import (ConfigError, DomainError, JammingError, SingularMatrixError, SolverError,
                     UndefinedCorrelationError)
from .materials import (GLASS, PBT, PLANE_STRAIN, PLANE_STRESS, ElasticityMatrix2D,
                        EngineeringConstants, IsotropicMaterial)

__all__ = [
    "ConfigError", "DomainError", "JammingError", "SingularMatrixError", "SolverError",
    "UndefinedCorrelationError", "GLASS", "PBT", "PLANE_STRAIN", "PLANE_STRESS",
    "ElasticityMatrix2D", "EngineeringConstants", "IsotropicMaterial",
]
