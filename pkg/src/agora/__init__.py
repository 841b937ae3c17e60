"""Market decision stack: simulator, constraint guardian, explicit-state
verifier, counterfactual engine, agent architectures, and benchmarks."""

from .guardian import ConstraintSet, Repair, Verdict, min_safe_price, repair_action, validate_action
from .simulator import Action, MarketState, SimConfig, Simulator, StepOutcome

__all__ = [
    "Action",
    "ConstraintSet",
    "MarketState",
    "Repair",
    "SimConfig",
    "Simulator",
    "StepOutcome",
    "Verdict",
    "min_safe_price",
    "repair_action",
    "validate_action",
]

__version__ = "0.1.0"
