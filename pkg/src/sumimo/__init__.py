"""Turbo-coded single-user massive MIMO link simulator and closed-form analyzer."""

from .analysis import (
    AnalysisPoint,
    InfeasibleSNR,
    PlanResult,
    analysis_point,
    db,
    f_index,
    f_minimizer,
    plan_antenna_range,
    sinr_av_b,
    sinr_ub,
    sinr_ub_precoded,
    sinr_ub_raw,
    spectral_efficiency,
)
from .channel import PRECODED, RAW, CombinedObservation, LinkConfig
from .harness import BerRecord, ExperimentConfig, derive_frame_length, run_ber_sweep, run_moment_validation
from .turbo import TurboConfig

__version__ = "0.1.0"
