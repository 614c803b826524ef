"""
Exceptions raised by the hybridris package.
"""

from typing import Optional


class HybridRisError(Exception):
    """Base class for every error raised by the package"""


class ConfigurationError(HybridRisError, ValueError):
    """Invalid experiment, sounding or scene configuration"""


class DimensionError(HybridRisError, ValueError):
    """Matrix shapes that do not conform"""


class StructureError(HybridRisError, ValueError):
    """A matrix lacks a structure the operation relies on (Hermitian, real leading element ...)"""


class OrderError(HybridRisError, ValueError):
    """Model order not supported by the certificate size"""


class IllConditionedError(HybridRisError, ArithmeticError):
    """Least squares regressor too close to rank deficient"""


class DegenerateError(HybridRisError, ArithmeticError):
    """Input carries no usable signal (all zero gains, zero channel ...)"""


class CertificateError(HybridRisError, ArithmeticError):
    """Toeplitz certificate is not positive semidefinite within tolerance"""


class ConvergenceError(HybridRisError, RuntimeError):
    """
    The ADMM solver hit its iteration cap.

    Parameters :
        message : str
            description of the failure
        primal_res : float
            last primal residual
        dual_res : float
            last dual residual
        iterations : int
            number of iterations run
    """

    def __init__(self, message: str, primal_res: float, dual_res: float, iterations: int) -> None:
        super().__init__(message)
        self.primal_res = primal_res
        self.dual_res = dual_res
        self.iterations = iterations


class EstimationError(HybridRisError, RuntimeError):
    """
    Wraps a failure inside the two stage pipeline with the stage it happened in.

    Parameters :
        stage : str
            stage tag, "stage1" or "stage2"
        cause : Exception
            the original exception
    """

    def __init__(self, stage: str, cause: Exception) -> None:
        super().__init__(f"{stage}: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


class PlotParseError(HybridRisError, ValueError):
    """Malformed results CSV handed to the plot script emitter"""

    def __init__(self, message: str, line: Optional[int] = None) -> None:
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line
