"""Exception hierarchy.

Every error raised by the library derives from :class:`HypotestError`.
Two intermediate classes let the CLI map failures to exit codes:
:class:`ValidationError` (bad input data, exit 3) and :class:`GateError`
(a precondition or parameter gate, exit 4).
"""


class HypotestError(ValueError):
    """Base class for all library errors."""


class ValidationError(HypotestError):
    """Input data does not describe a valid object."""


class GateError(HypotestError):
    """A parameter lies outside the range where an operation is defined."""


class NegativeMass(ValidationError):
    pass


class MassSumOutOfTolerance(ValidationError):
    pass


class DuplicateLabel(ValidationError):
    pass


class LabelMismatch(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class EnumerationTooLarge(GateError):
    pass


class TranscriptSpaceTooLarge(GateError):
    pass


class SupportTooLarge(GateError):
    pass


class LambdaOutOfRange(GateError):
    pass


class DeltaOutOfRange(GateError):
    pass


class PreconditionViolated(GateError):
    pass


class DegenerateError(GateError):
    pass


class IdenticalDistributions(GateError):
    pass


class RegimeViolation(GateError):
    pass


class DLessThanTwo(GateError):
    pass


class EmptyExpectation(GateError):
    pass


class SupportExceedsB(GateError):
    pass


class MissingTvLikeParams(GateError):
    pass


class ZeroDivergence(GateError):
    pass


class RhoTooLarge(GateError):
    pass
