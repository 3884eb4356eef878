"""Exception types raised by the solvers and kernels."""

from __future__ import annotations


class ParadinError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(ParadinError, ValueError):
    pass


class ModelDomainError(ParadinError, ValueError):
    """Exact solution evaluated outside its domain of definition."""


class SingularPivot(ParadinError, ArithmeticError):
    """No-pivot LU met a pivot below the configured floor."""

    def __init__(self, row: int, value: float, level: int | None = None):
        self.row = row
        self.value = value
        self.level = level
        where = f" at level {level}" if level is not None else ""
        super().__init__(f"pivot {value:.3e} at row {row}{where} is below the pivot floor")


class ZeroDiagonal(ParadinError, ArithmeticError):
    def __init__(self, row: int, value: float, level: int | None = None):
        self.row = row
        self.value = value
        self.level = level
        where = f" at level {level}" if level is not None else ""
        super().__init__(f"diagonal entry {value:.3e} at row {row}{where} cannot be used for scaling")


class NewtonDiverged(ParadinError, RuntimeError):
    def __init__(self, message: str, level: int | None = None, norms=()):
        self.level = level
        self.norms = list(norms)
        super().__init__(message)


class ConditioningBreakdown(ParadinError, RuntimeError):
    """A decoupled level system could not be solved reliably.

    ``max_nt_bound`` carries the estimated largest admissible number of
    time steps for the run's grid and viscosity.
    """

    def __init__(self, message: str, level: int | None, max_nt_bound: int):
        self.level = level
        self.max_nt_bound = max_nt_bound
        super().__init__(f"{message} (estimated admissible N_t <= {max_nt_bound})")


class NonMonotoneKnots(ParadinError, ValueError):
    pass


class QueryOutOfRange(ParadinError, ValueError):
    pass


class TooManyWorkers(ParadinError, ValueError):
    pass


class WorkerFailure(ParadinError, RuntimeError):
    def __init__(self, worker: int, cause: BaseException):
        self.worker = worker
        self.cause = cause
        super().__init__(f"worker {worker} failed: {cause!r}")
