"""Causal-trajectory laboratory for Klein-Gordon fields.

Exact mode-sum fields and their polar decomposition (:mod:`kgbohm.wavefield`),
guidance-law trajectories with singularity handling (:mod:`kgbohm.trajectory`),
and averaged-velocity analyses (:mod:`kgbohm.analysis`).
"""

from .analysis import (
    AverageReport,
    DensityAverageReport,
    FarFieldReport,
    averaged_speed_prediction,
    ensemble_densities,
    far_field_scan,
    far_field_velocity_limit,
    long_time_density_average,
    time_average_velocity,
    time_averaged_densities,
    window_densities,
)
from .errors import (
    DomainError,
    EmptyWindow,
    ESingularity,
    KGBohmError,
    MassShellError,
    NodeProximity,
    ParseError,
    UnresolvedPacket,
    ValidationError,
)
from .trajectory import (
    EtaState,
    GuidanceState,
    IntegratorOptions,
    Trajectory,
    beat_phase,
    classify_causal,
    eta_reduced_rhs,
    guidance_state,
    guidance_velocity,
    integrate,
    mean_two_mode_velocity,
    reduced_trajectory,
)
from .wavefield import (
    PRESET,
    FieldSample,
    Mode,
    PacketSpec,
    TwoModeParams,
    WaveField,
    continuity_residual,
    discretize_packet,
    evaluate_field,
    klein_gordon_residual,
    polar_decompose,
)

__version__ = "0.1.0"
