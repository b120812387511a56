"""
crm - conditional risk minimization for dependent processes

Kernel estimates of the conditional risk of the next sample given the last d
samples, learners minimizing them, the finite-sample concentration bound and
a hidden Markov simulator with exact oracles.
"""

from .core.base import (
    ArgumentError,
    ConfigError,
    CRMError,
    DegenerateDesignError,
    InconsistentObservationError,
    NoEffectiveSamplesError,
    NotMixingError,
    NumericError,
    UnsupportedDimensionError,
    VacuousRegimeError,
)
from .modules.estimator import Hypothesis, SampleSequence
from .modules.kernels import KernelSpec, StratifiedSetSpec
from .modules.processes import HiddenMarkovSpec

__version__ = "0.1.0"
