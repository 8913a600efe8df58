"""
Estimation Workflow - LangGraph state machine from raw records to an NRF.
"""

from typing import Optional
from loguru import logger
from langgraph.graph import StateGraph, END

from squeezelab.exceptions import SqueezeLabError
from squeezelab.graph.state import EstimationState, create_initial_state
from squeezelab.graph.nodes import (
    load_node,
    balance_node,
    calibrate_node,
    estimate_node,
    report_node,
    should_continue
)
from squeezelab.models.detection import PulseRecordSet
from squeezelab.models.run_config import RunConfig

STAGES = ("load", "balance", "calibrate", "estimate", "report")


def build_estimation_workflow():
    """
    Build the LangGraph workflow for NRF estimation.

    Flow:
        load -> balance -> calibrate -> estimate -> report
        (any failed stage ends the graph)

    Returns:
        Compiled StateGraph
    """
    logger.info("Building estimation workflow graph")

    workflow = StateGraph(EstimationState)

    workflow.add_node("load", load_node)
    workflow.add_node("balance", balance_node)
    workflow.add_node("calibrate", calibrate_node)
    workflow.add_node("estimate", estimate_node)
    workflow.add_node("report", report_node)

    workflow.set_entry_point("load")

    for stage, next_stage in zip(STAGES, STAGES[1:]):
        workflow.add_conditional_edges(
            stage,
            should_continue,
            {
                "continue": next_stage,
                "end": END
            }
        )

    workflow.add_edge("report", END)

    compiled = workflow.compile()

    logger.info("Workflow graph compiled successfully")
    return compiled


class EstimationWorkflowRunner:
    """
    Runner class for executing estimation workflows.
    """

    def __init__(self):
        """Initialize workflow runner."""
        self._workflow = None

    @property
    def workflow(self):
        """Lazy load workflow."""
        if self._workflow is None:
            self._workflow = build_estimation_workflow()
        return self._workflow

    def run(
        self,
        config: RunConfig,
        records_path: Optional[str] = None,
        records: Optional[PulseRecordSet] = None,
        seed: Optional[int] = None,
        threads: Optional[int] = None,
        output_dir: Optional[str] = None
    ) -> EstimationState:
        """
        Run the workflow to completion.

        Raises:
            SqueezeLabError: the typed error of the stage that failed
        """
        logger.info(f"Starting estimation workflow for: {records_path or 'in-memory records'}")
        initial_state = create_initial_state(
            config=config,
            records_path=records_path,
            records=records,
            seed=seed,
            threads=threads,
            output_dir=output_dir
        )
        final_state = self.workflow.invoke(initial_state)

        error = final_state.get("error")
        if isinstance(error, SqueezeLabError):
            raise error
        if final_state.get("error_message"):
            raise SqueezeLabError(final_state["error_message"])
        return final_state


def run_estimation(
    config: RunConfig,
    records_path: Optional[str] = None,
    records: Optional[PulseRecordSet] = None,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
    output_dir: Optional[str] = None
) -> dict:
    """
    Convenience function to estimate the NRF of one run.

    Returns:
        Result dict with the estimate, calibration and key=value report
    """
    runner = EstimationWorkflowRunner()
    result = runner.run(
        config,
        records_path=records_path,
        records=records,
        seed=seed,
        threads=threads,
        output_dir=output_dir
    )
    return {
        "estimate": result.get("estimate"),
        "calibration": result.get("calibration"),
        "report": result.get("report", {}),
        "report_path": result.get("report_path"),
    }
