"""Spectral solver for a periodic two-fluid interface in a porous medium.

The interface between two immiscible fluids of equal viscosity, driven
by gravity through a homogeneous porous medium, moves with a normal
velocity given by contour integrals of the interface slope.  This
package evaluates those integrals pseudo-spectrally, decomposes the
velocity operator into singular, transport and bounded pieces, steps the
interface in time, and reconstructs the bulk velocity and pressure
fields it induces.
"""

__version__ = "0.1.0"

from .spectral import (Grid, NonFiniteSamplesError, SpectralField,
                       dealiased_product, derivative, half_laplacian,
                       hilbert_transform, integral_mean, resample_half_shift,
                       sobolev_norm, upsample)
from .kernels import QuadratureRule, cancellation_residual, pv_integral
from .operators import (OperatorWorkspace, PhysicalParams, decomposed_rhs,
                        direct_rhs, drift_diffusion_multiplier,
                        frozen_coefficients, full_operator)
from .evolution import (MonitorSeries, SchemeConfig, SimulationState,
                        blow_up_status, cfl_limit, run, step,
                        tail_slope_report)
from .flow import (BoundaryTraces, FlowField, boundary_traces, bulk_velocity,
                   kinematic_residual, match_pressure_constants, pressure,
                   vorticity)
from .analysis import (DecayFit, PartitionOfUnity, build_partition,
                       fit_decay_rate, linearized_rate, linearized_spectrum,
                       localization_defect, mode_amplitude)

__all__ = [
    "__version__",
    "Grid", "SpectralField", "NonFiniteSamplesError", "dealiased_product",
    "derivative",
    "half_laplacian", "hilbert_transform", "integral_mean",
    "resample_half_shift", "sobolev_norm", "upsample",
    "QuadratureRule", "cancellation_residual", "pv_integral",
    "OperatorWorkspace", "PhysicalParams", "decomposed_rhs", "direct_rhs",
    "drift_diffusion_multiplier", "frozen_coefficients", "full_operator",
    "MonitorSeries", "SchemeConfig", "SimulationState", "blow_up_status",
    "cfl_limit", "run", "step", "tail_slope_report",
    "BoundaryTraces", "FlowField", "boundary_traces", "bulk_velocity",
    "kinematic_residual", "match_pressure_constants", "pressure",
    "vorticity",
    "DecayFit", "PartitionOfUnity", "build_partition", "fit_decay_rate",
    "linearized_rate", "linearized_spectrum", "localization_defect",
    "mode_amplitude",
]
