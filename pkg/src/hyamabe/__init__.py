"""H^n-Yamabe constants of H^n x S^m by shooting for radial ground states."""

from .certify import CertificationTrace, Step, certify, check_trace, markdown_report
from .dimension import (DerivedConstants, Dimensions, Regime, derive, lambda_of_r, regime,
                        sphere_volume, sphere_yamabe)
from .errors import (ArithmeticMismatch, CertificationStall, EnergyIncrease, HYamabeError,
                     Indeterminate, IntegrationError, SeedFailure, StepBudgetExhausted,
                     TolerancesNotMet, UnknownQ0)
from .ode import IntegrationControls, OdeParams, Trajectory, energy, integrate
from .shooting import Family, classify, find_ground_state
from .yamabe import QResult, SolverSettings, boundary_constants, compute_q

__all__ = [
    "ArithmeticMismatch", "CertificationStall", "CertificationTrace", "DerivedConstants",
    "Dimensions", "EnergyIncrease", "Family", "HYamabeError", "Indeterminate",
    "IntegrationControls", "IntegrationError", "OdeParams", "QResult", "Regime", "SeedFailure",
    "SolverSettings", "Step", "StepBudgetExhausted", "TolerancesNotMet", "Trajectory",
    "UnknownQ0", "boundary_constants", "certify", "check_trace", "classify", "compute_q",
    "derive", "energy", "find_ground_state", "integrate", "lambda_of_r", "markdown_report",
    "regime", "sphere_volume", "sphere_yamabe",
]
