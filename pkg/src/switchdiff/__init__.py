"""Simulation and numerical verification of one-dimensional diffusions with
two-state Markov regime switching: skeleton sampling, exact and
Euler-Maruyama path integration, closed-form cycle-time transforms with
Chernoff optimization, and a reproducible parallel Monte Carlo harness.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .bounds import (ChernoffResult, DecayFit, chernoff_skeleton,
                     decay_rate_fit, log_mgf_deficit, log_mgf_excess,
                     mgf_deficit, mgf_excess, stopped_moment_bound)
from .errors import (ConfigError, DegenerateInputError, DomainError,
                     DriftEvaluationError, ModelValidationError,
                     NonConstantDriftError, NonPositiveStepError,
                     SwitchDiffError, UnknownStatisticError, Violation)
from .model import (Bounded, Constant, ModelConstants, ModelSpec, Regime,
                    ValidatedModel, analytic_constants, collect_violations,
                    stopped_moment_decay, transience_condition, validate)
from .montecarlo import (CallableStatistic, ConstantStatistic,
                         CycleAverageTime, CycleDeficitIndicator,
                         CycleExcessIndicator, CycleTimeDeficitExp,
                         CycleTimeExcessExp, LowVelocityIndicator,
                         StoppedExponential, TerminalVelocity,
                         chernoff_frequency_check, estimate, sample_statistic,
                         verify_mgf, verify_spatial_tail,
                         verify_stopped_moment, verify_velocity,
                         wilson_interval)
from .paths import (Trajectory, simulate_em, simulate_em_coupled,
                    simulate_exact_constant, statistic_at, trajectory_to_csv)
from .reporting import BoundReport, McEstimate
from .rng import PhiloxStream
from .skeleton import (Skeleton, cycle_statistic, lln_check,
                       sample_holding_time, sample_skeleton, skeleton_to_csv)
