"""
Exception hierarchy for zplab
Every error carries the exit code the command-line front end reports for it
"""


class ZplabError(Exception):
    """Base class for all zplab errors"""
    exit_code = 3

    def to_dict(self):
        return {'success': False, 'error': str(self), 'error_type': type(self).__name__}


# =============================================================================
# INPUT ERRORS (exit 2)
# =============================================================================

class InputError(ZplabError):
    exit_code = 2


class ExpressionSyntaxError(InputError):
    """Malformed F expression; position is a 0-based character offset"""

    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class ConstantExpression(InputError):
    pass


class PoleAt1(InputError):
    pass


class PoleAtNonPositiveInteger(InputError):
    pass


class PoleHit(InputError):
    pass


class RangeExceeded(InputError):
    pass


class InvalidRectangle(InputError):
    pass


class ConditionViolated(InputError):
    pass


class ConfigError(InputError):
    pass


# =============================================================================
# NUMERICAL ERRORS (exit 3)
# =============================================================================

class NumericalError(ZplabError):
    exit_code = 3


class PrecisionUnreachable(NumericalError):
    pass


class NonFiniteValue(NumericalError):
    pass


class LeadingIndexNotFound(NumericalError):
    pass


class TruncationUnstable(NumericalError):
    pass


class NotCertifiable(NumericalError):
    pass


class ScanInconclusive(NumericalError):
    pass


class BoundaryZeroSuspected(NumericalError):
    """A zero of F sits on (or within clearance of) a contour piece"""

    def __init__(self, message, piece=None, point=None):
        super().__init__(message)
        self.piece = piece
        self.point = point


class QuadratureUnstable(NumericalError):
    pass


class NewtonDiverged(NumericalError):
    pass


class TooFewZeros(NumericalError):
    pass
