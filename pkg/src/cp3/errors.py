"""Exception hierarchy.

Computation errors derive from :class:`ComputationError`; configuration
problems derive from :class:`ConfigError`. The CLI maps the two families to
different exit codes.
"""


class Cp3Error(Exception):
    """Base class for all package errors."""


class ComputationError(Cp3Error, ValueError):
    pass


class CoincidentAtoms(ComputationError):
    pass


class CollinearAtoms(ComputationError):
    pass


class NonPositiveScale(ComputationError):
    pass


class ZeroRadius(ComputationError):
    pass


class AsymmetricInput(ComputationError):
    pass


class NearResonance(ComputationError):
    pass


class OnResonanceMode(ComputationError):
    pass


class NoConvergence(ComputationError):
    pass


class PoleAtBoundary(ComputationError):
    pass


class DomainError(ComputationError):
    pass


class StepTooLarge(ComputationError):
    pass


class InsufficientBox(ComputationError):
    pass


class UnsupportedCheck(ComputationError):
    """Raised when an oracle is asked for a quantity it cannot sum soundly."""


class ConfigError(Cp3Error, ValueError):
    pass


class SchemaError(ConfigError):
    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


class ValidationError(ConfigError):
    pass
