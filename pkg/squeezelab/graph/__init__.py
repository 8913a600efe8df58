"""Graph module: the LangGraph estimation workflow."""

from .state import EstimationState, create_initial_state
from .workflow import EstimationWorkflowRunner, build_estimation_workflow, run_estimation

__all__ = [
    "EstimationState", "create_initial_state",
    "EstimationWorkflowRunner", "build_estimation_workflow", "run_estimation",
]
