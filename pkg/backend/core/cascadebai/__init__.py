"""Top-K best-arm identification under cascading click feedback."""

from .agents import BatchRacingAgent, CascadeBAIAgent, RunConfig, RunResult, run_batch_racing, run_cascade_bai
from .models.bounds import lower_bound, upper_bound_terms
from .models.instance import Instance, gaps, make_instance, validate

__version__ = "0.1.0"

__all__ = [
    "BatchRacingAgent",
    "CascadeBAIAgent",
    "Instance",
    "RunConfig",
    "RunResult",
    "gaps",
    "lower_bound",
    "make_instance",
    "run_batch_racing",
    "run_cascade_bai",
    "upper_bound_terms",
    "validate",
]
