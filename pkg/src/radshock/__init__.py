"""Radiative shock profiles for hyperbolic-elliptic radiating-gas models."""

from radshock.errors import (AdmissibilityError, ConfigError, FluxSyntaxError,
                             NotConstructedError, NumericalError, RadShockError)
from radshock.flux import FluxModel, builtin, parse_flux
from radshock.profile import RadiativeProfile, assemble_profile
from radshock.shock import ShockTriple, build_chord, check_admissibility, shock_speed

__all__ = [
    "AdmissibilityError", "ConfigError", "FluxSyntaxError", "NotConstructedError",
    "NumericalError", "RadShockError", "FluxModel", "builtin", "parse_flux",
    "RadiativeProfile", "assemble_profile", "ShockTriple", "build_chord",
    "check_admissibility", "shock_speed",
]
