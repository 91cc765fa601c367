from .records import LogRecord, StdoutLogger
from .scenarios import SCENARIOS, RunConfig, run_scenario
from .svg import svg_convergence_plot

__all__ = ["LogRecord", "RunConfig", "SCENARIOS", "StdoutLogger", "run_scenario", "svg_convergence_plot"]
