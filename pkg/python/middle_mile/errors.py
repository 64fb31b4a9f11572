"""
Planner exceptions.

Infeasible plans are results, not errors. These exceptions cover bad
inputs, unreadable artifacts and solver faults only.
"""


class PlannerError(Exception):
    """Base class for every error the planner raises on purpose"""


class InvalidArgumentError(PlannerError, ValueError):
    """An argument is outside its documented domain"""


class ScenarioParseError(PlannerError):
    """Scenario bytes are not a JSON document"""


class ScenarioValidationError(PlannerError):
    """Scenario document parsed but breaks an invariant"""


class EmptySelectionError(PlannerError, ValueError):
    """A statistic was requested over zero records"""


class ConfigError(PlannerError):
    """Run configuration file is missing, malformed or invalid"""


class InvalidModelError(PlannerError, ValueError):
    """LP model has mismatched dimensions or non-finite entries"""


class SolverInternalError(PlannerError, RuntimeError):
    """The solver returned a status that the model makes impossible"""
