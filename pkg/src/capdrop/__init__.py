"""Sessile droplet reference quantities and small-volume capillarity
minimizers in planar containers."""

from .container import BoundaryChart, Container, blow_up, chart_at, split_perimeter, unblow
from .energy import EnergyBreakdown, StabilityReport, asymmetry, deficit, gauss_energy, half_space_energy
from .harness import FitReport, SweepRecord, fit_gamma_expansion, largest_passing_mass, scaling_check, stability_probe, sweep
from .minimizer import MinimizeConfig, MinimizeResult, PinchOffError, almost_minimality_probe, minimize, minimize_from
from .geometry import PolyDroplet, hausdorff_distance, polygon_area, symmetric_difference_area
from .sessile import (
    CapGeometry,
    CapScalars,
    IdealDroplet,
    anisotropic_energy,
    cap_base_area,
    cap_lateral_area,
    cap_scalars,
    cap_volume,
    ideal_cap_arc,
    ideal_droplet_boundary,
    phi_aux,
    psi,
    psi_prime,
    support_function,
)

__version__ = "0.1.0"
SCHEMA_VERSION = "1"
