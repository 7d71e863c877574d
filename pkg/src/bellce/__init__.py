"""Concentratable Entanglement of multiqubit states: exact values, Bell-basis and
c-SWAP estimation, shot budgets and effective-gate noise studies."""
from .errors import ContractViolation, NumericalDegeneracyError, NumericalError, ResourceError
from .measures import (
    Ensemble,
    ce_lower_bound,
    ce_purity_expression,
    exact_ce,
    exact_ntangle,
    full_ce,
    gap_identity,
    generalized_concurrence,
)
from .noise import (
    ComparisonRow,
    Method,
    NoiseModel,
    comparison_sweep,
    default_noise_model,
    noisy_bell_pipeline,
    noisy_cswap_pipeline,
)
from .sampler import (
    CSwapRecord,
    MeasurementRecord,
    bell_distribution,
    bell_sample,
    bell_sample_ensemble,
    cswap_distribution,
    estimate_ce,
    estimate_ce_lower_bound,
    estimate_ntangle,
    estimate_subsystem_purity,
    parse_record,
    format_record,
)
from .states import Family, NamedStateFamily, analytic_ce, make_state
from .statevec import BellLabel, EffectiveGate, PureState, apply_gate, subsystem_purity
from .stats import clopper_pearson, expected_ci_width, hoeffding_shots, plan_budget

__version__ = "0.1.0"
