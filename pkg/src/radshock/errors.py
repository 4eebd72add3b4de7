"""Exception hierarchy shared by all modules.

The CLI maps each family to an exit code: configuration problems to 2,
admissibility failures to 3, numerical failures to 4.
"""


class RadShockError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(RadShockError, ValueError):
    pass


class FluxSyntaxError(ConfigError):
    """Malformed flux expression; ``offset`` is the 0-based character position."""

    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class AdmissibilityError(RadShockError, ValueError):
    """Input data violate an admissibility or threshold precondition."""


class NotConstructedError(AdmissibilityError):
    """The construction is not available at this parameter value.

    Raised when a sufficient smallness condition fails; this does not assert
    that no profile exists.
    """


class NumericalError(RadShockError, RuntimeError):
    """An integrator, root finder or Newton iteration did not deliver."""
