"""
Exception hierarchy for fairbandits.

Every error raised on purpose by the package derives from FairBanditsError so
that the CLI layer can translate failures into exit codes in one place
(see fairbandits.utils.decorators).
"""


class FairBanditsError(Exception):
    """Base class for all package errors."""


class ConfigError(FairBanditsError):
    """Experiment configuration is invalid or names something unregistered."""


class InstanceError(FairBanditsError, ValueError):
    """Arm index, context type or payoff specification is invalid."""


class TraceError(FairBanditsError, ValueError):
    """A round record breaks the trace contract."""


class AlgorithmError(FairBanditsError, ValueError):
    """An algorithm was driven outside its preconditions."""


class LearnerError(FairBanditsError, ValueError):
    """A KWIK learner received input it cannot handle."""


class ReductionError(FairBanditsError, ValueError):
    """A reduction was run past its horizon or given an unusable bound."""
