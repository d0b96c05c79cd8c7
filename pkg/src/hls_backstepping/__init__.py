"""Backstepping boundary control and observer design for a higher-order linear Schroedinger equation.

The plant is ``i u_t + i b u_xxx + a u_xx + i d u_x = 0`` on ``(0, L)`` with
``u(0) = 0`` and two controls at ``x = L``.  The package solves the
backstepping kernel as a bivariate polynomial, evaluates closed-form decay
rates, and simulates controller and observer experiments with
Crank-Nicolson finite differences.
"""

from .control import (
    ControlRun,
    GainSet,
    SimulationResult,
    apply_transform,
    evaluate_controllers,
    invert_transform,
    reconstruct_plant,
    run_control,
    simulate_plant_closed_loop,
    simulate_plant_uncontrolled,
    simulate_target,
)
from .diagnostics import fit_decay_rate
from .errors import (
    CompatibilityWarning,
    DomainError,
    NonConvergence,
    ParameterError,
    RateWarning,
    RegimeError,
    SingularSystem,
)
from .fd import CNStepper, Grid1D, TimeGrid, build_A, build_upsilon, l2_norm
from .kernel import (
    REFERENCE_PARAMS,
    DecayRates,
    KernelParams,
    KernelSolution,
    ObserverKernel,
    decay_rates,
    kernel_p_from_k,
    lambda_rate,
    solve_kernel,
    tune_r,
)
from .observer import CoupledRun, ObserverGains, observer_h3_monitor, run_coupled, simulate_error, simulate_target_observer
from .poly import BivariatePoly
from .spectral import (
    critical_length,
    discriminant,
    eigenvalue_on_axis,
    hkl,
    is_critical,
    root_landmarks,
    stationary_state,
)

__version__ = "0.1.0"
