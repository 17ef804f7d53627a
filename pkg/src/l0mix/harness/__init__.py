from .config import COMBINER_KINDS, CombinerSpec, ExperimentConfig, SweepSpec
from .presets import PRESET_NAMES, SCALES, preset, preset_variants
from .runner import (
    MsdTrace,
    RunRecord,
    SteadyState,
    kappa_sweep,
    run_ensemble,
    run_single,
    steady_state_msd,
)

__all__ = [
    "COMBINER_KINDS",
    "CombinerSpec",
    "ExperimentConfig",
    "MsdTrace",
    "PRESET_NAMES",
    "RunRecord",
    "SCALES",
    "SteadyState",
    "SweepSpec",
    "kappa_sweep",
    "preset",
    "preset_variants",
    "run_ensemble",
    "run_single",
    "steady_state_msd",
]
