from .batch_racing import BatchRacingAgent, run_batch_racing
from .cascade_bai import (
    AlgState,
    CascadeBAIAgent,
    RunConfig,
    RunResult,
    StopReason,
    cascade_bai_step,
    recommend,
    run_cascade_bai,
)
from .confidence import RadiusTable, confidence_radius

__all__ = [
    "AlgState",
    "BatchRacingAgent",
    "CascadeBAIAgent",
    "RadiusTable",
    "RunConfig",
    "RunResult",
    "StopReason",
    "cascade_bai_step",
    "confidence_radius",
    "recommend",
    "run_batch_racing",
    "run_cascade_bai",
]
