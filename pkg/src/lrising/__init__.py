"""Exact equilibration dynamics of long-range quantum Ising models."""

from .analysis import (
    EquilibrationReport,
    curve_collapse_metric,
    equilibration_time,
    recurrence_scan,
    scaling_exponent,
)
from .bounds import (
    BoundResult,
    gaussian_lower_bound,
    gaussian_upper_bound,
    minimal_system_size,
    second_moment,
    verify_minimal_size,
)
from .evolution import (
    InitialStateSpec,
    Mode,
    ObservableSpec,
    TimeSeries,
    amplitude_factor,
    expectation_series,
    log_amplitude,
    time_grid,
)
from .model import (
    CouplingLaw,
    DisplacementMultiset,
    LatticeSpec,
    ModelParams,
    Regime,
    coupling_strength,
    displacement_multiset,
    normalization,
    normalization_asymptotic,
    regime_classify,
)
from .oracle import flip_energy_gap, oracle_expectation, oracle_series

__version__ = "0.1.0"
