"""Thermodynamic length and optimal driving of slowly cycled quadratic engines."""

from .curves import ControlCurve, constant_curve
from .cycle import CycleLedger, convergence_study, run_cycle
from .errors import *  # noqa: F401,F403
from .gaussian import QuadraticModel, ThermalGaussianState, thermal_covariance, thermal_state
from .lindblad import LindbladModel, open_metrics, thermal_damping
from .metrics import adiabatic_work, combined_metric, metric_g, metric_m, metric_pair
from .models import (
    PRESETS,
    classical_ho,
    classical_protocol,
    coupled_oscillators,
    damped_ho_lindblad,
    get_preset,
    harmonic_protocol,
    scaling_oscillator,
    single_oscillator,
)
from .optimizer import (
    CycleGeometry,
    Schedule,
    objective_value,
    optimal_schedule,
    pareto_sweep,
    thermodynamic_length,
)

__version__ = "0.1.0"

__all__ = [
    "ControlCurve", "constant_curve", "CycleLedger", "convergence_study", "run_cycle",
    "QuadraticModel", "ThermalGaussianState", "thermal_covariance", "thermal_state",
    "LindbladModel", "open_metrics", "thermal_damping",
    "adiabatic_work", "combined_metric", "metric_g", "metric_m", "metric_pair",
    "PRESETS", "classical_ho", "classical_protocol", "coupled_oscillators", "damped_ho_lindblad",
    "get_preset", "harmonic_protocol", "scaling_oscillator", "single_oscillator",
    "CycleGeometry", "Schedule", "objective_value", "optimal_schedule", "pareto_sweep",
    "thermodynamic_length",
]
