"""Numerical laboratory for finite-horizon k-selection against a clairvoyant benchmark."""

from .distributions import (
    DistributionModel,
    SeededStream,
    bounded_power,
    exponential,
    frechet,
    from_config,
    pareto,
    uniform,
)
from .numerics import (
    Bracket,
    BracketingError,
    ConvergenceError,
    QuadratureResult,
    digamma,
    gamma_ratio,
    integrate_adaptive,
    log_gamma,
    solve_increasing_root,
)
from .values import (
    ProphetValue,
    ValueTable,
    ce_table,
    ce_values,
    dp_table,
    dp_values,
    fixed_threshold_value,
    prophet_asymptotic,
    prophet_value,
)
from .asymptotics import (
    AsymptoticReport,
    ExpansionDiagnostics,
    RegretConstantEstimate,
    SweepRow,
    acr_dp,
    apx_ce,
    build_report,
    ce_coefficients,
    competition_complexity,
    dp_coefficients,
    expansion_diagnostics,
    large_k_approx,
    ratio_grid,
    regret_constant_estimate,
    s_sequence,
    v_sequence,
    w_closed_form,
    w_sequence,
    worst_case_sweep,
)
from .simulation import PolicySpec, SimEstimate, run_policy, run_prophet

__version__ = "0.1.0"
