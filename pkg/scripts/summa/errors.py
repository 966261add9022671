"""
Error Hierarchy for the Summa Engine

Every failure surfaced by the engine derives from SummaError and carries the
process exit code the CLI reports for it:

- 2: validation errors (malformed specs, mismatched variables, bad flags)
- 3: mathematical preconditions (resonance, degenerate c(0), singular direction)
- 4: numerical failures (truncation overflow, quadrature, continuation)
"""

from typing import Optional


class SummaError(Exception):
    """Base exception for all engine failures"""
    exit_code = 1


class SpecValidationError(SummaError):
    """Custom exception for malformed specs, arguments and series operands"""
    exit_code = 2


class MathPreconditionError(SummaError):
    """Custom exception for violated mathematical hypotheses"""
    exit_code = 3


class ResonanceError(MathPreconditionError):
    """Raised when b(0) is a positive integer at a computed order"""

    def __init__(self, message: str, order: Optional[int] = None):
        super().__init__(message)
        self.order = order


class DegenerateCoefficientError(MathPreconditionError):
    """Raised when the leading coefficient c(0) vanishes"""
    pass


class ConditionError(MathPreconditionError):
    """Raised when condition (F) or (F') needed by a transform fails"""
    pass


class SingularDirectionError(MathPreconditionError):
    """Raised when a summation direction or sector meets a singular direction"""
    pass


class NumericalError(SummaError):
    """Custom exception for numerical failures"""
    exit_code = 4


class TruncationOverflowError(NumericalError):
    """Raised when a recursion needs more orders than the budget allows"""

    def __init__(self, message: str, required_order: Optional[int] = None):
        super().__init__(message)
        self.required_order = required_order


class QuadratureError(NumericalError):
    """Raised when a Laplace or Volterra quadrature cannot be trusted"""
    pass


class ContinuationError(NumericalError):
    """Raised when Padé continuation breaks down"""
    pass


class BorelPlaneError(NumericalError):
    """Raised when a Borel-plane object cannot be assembled at the given truncation"""
    pass
