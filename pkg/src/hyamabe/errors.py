"""Exception hierarchy for hyamabe."""

from __future__ import annotations


class HYamabeError(Exception):
    """Base class for all errors raised by the package."""


class IntegrationError(HYamabeError):
    """The ODE integration stopped abnormally.

    The partial trajectory computed so far is kept in ``trajectory``.
    """

    def __init__(self, message: str, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class StepBudgetExhausted(IntegrationError):
    pass


class TolerancesNotMet(IntegrationError):
    pass


class EnergyIncrease(IntegrationError):
    pass


class Indeterminate(HYamabeError):
    """Horizon reached without decisive evidence for N, P or a ground state."""


class SeedFailure(HYamabeError):
    pass


class UnknownQ0(HYamabeError):
    """No stored value of Q_{n,m}(0) for the requested dimensions."""

    def __init__(self, message: str, q1: float | None = None):
        super().__init__(message)
        self.q1 = q1


class CertificationStall(StepBudgetExhausted):
    """The certification sequence stopped decreasing or ran out of steps."""


class ArithmeticMismatch(HYamabeError):
    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index
