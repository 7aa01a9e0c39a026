"""Finite-window horofunctions, gradient rays and symbolic coding on Cayley graphs."""

__version__ = "0.1.0"

from .errors import (ConfigError, ContainmentError, HoroshiftError, IntegrationError,
                     InvariantBreach, LipschitzError, PreconditionError, ResourceCapError,
                     StabilizationError)
from .group_model import Factor, GroupSpec, RayWalk, free_abelian, free_group, load_group, load_ray
from .cayley_ball import Ball, build_ball
from .rays_fields import ScalarField, busemann, check_distance_like, check_lipschitz
from .symbolic import DerivativeField, derivative, integrate, shift_act

__all__ = [
    "ConfigError", "ContainmentError", "HoroshiftError", "IntegrationError", "InvariantBreach",
    "LipschitzError", "PreconditionError", "ResourceCapError", "StabilizationError",
    "Factor", "GroupSpec", "RayWalk", "free_abelian", "free_group", "load_group", "load_ray",
    "Ball", "build_ball", "ScalarField", "busemann", "check_distance_like", "check_lipschitz",
    "DerivativeField", "derivative", "integrate", "shift_act",
]
