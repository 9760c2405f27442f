"""Enthalpy-method solvers for solidification against a growing injection
boundary, with non-intrusive polynomial-chaos uncertainty propagation.

The state variable everywhere is the dimensionless volumetric enthalpy; see
:mod:`icefront.model` for the scaling conventions and
:mod:`icefront.solver1d` / :mod:`icefront.solver2d` for the schemes.
"""

from .errors import (
    BlowUpError,
    CampaignError,
    ConfigError,
    IcefrontError,
    ModelError,
    SingularSystemError,
    SolverError,
    StabilityError,
)
from .expressions import Expression, as_expression
from .model import (
    DimlessConfig,
    PhysicalParams,
    enthalpy_from_temperature,
    nondimensionalize,
    redimensionalize,
    temperature_from_enthalpy,
)
from .solver1d import Grid1D
from .solver2d import Grid2D
from .uq import NormalInput, RandomInputSpec, UniformInput

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "IcefrontError",
    "ConfigError",
    "ModelError",
    "SolverError",
    "SingularSystemError",
    "BlowUpError",
    "StabilityError",
    "CampaignError",
    "Expression",
    "as_expression",
    "PhysicalParams",
    "DimlessConfig",
    "nondimensionalize",
    "redimensionalize",
    "temperature_from_enthalpy",
    "enthalpy_from_temperature",
    "Grid1D",
    "Grid2D",
    "UniformInput",
    "NormalInput",
    "RandomInputSpec",
]
