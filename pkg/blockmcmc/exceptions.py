"""Errors raised by the engine.

``exit_code`` is what the management commands return for each error family:
1 usage, 2 model error, 3 runtime failure.
"""


class AutoblockError(Exception):
    exit_code = 3


# Model description and evaluation

class ModelError(AutoblockError):
    exit_code = 2


class InvalidModel(ModelError):
    pass


class CycleError(ModelError):
    pass


class UnknownReference(ModelError):
    pass


class ArityMismatch(ModelError):
    pass


class InvalidParameter(ModelError):
    """A distribution parameter is outside its domain (misconfigured model)."""


class LengthMismatch(ModelError):
    pass


# Usage

class PlanError(AutoblockError):
    exit_code = 1


class ConfigError(AutoblockError):
    exit_code = 1


# Sampling and diagnostics

class SamplingError(AutoblockError):
    exit_code = 3


class TooFewSamples(SamplingError):
    pass


class DegenerateChain(SamplingError):
    """Every parameter of a chain is stuck; no correlation structure to cluster."""
