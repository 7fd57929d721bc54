"""Exception hierarchy shared across the engine.

Every error raised by library code derives from CareCostError so callers
(CLI, HTTP service) can map failures to exit codes / status codes by class.
"""

from __future__ import annotations


class CareCostError(Exception):
    """Base class for all engine errors."""

    code = "error"


class EmptyInput(CareCostError):
    """An operation received an empty prediction set or empty data."""

    code = "empty_input"


class DegenerateLabels(CareCostError):
    """Labels contain only one class where both are required."""

    code = "degenerate_labels"


class InvalidConfig(CareCostError):
    """A parameter (grid, bin count, metric name, ...) is out of contract."""

    code = "invalid_config"


class InvalidData(CareCostError):
    """Input data is malformed (non-finite values, bad label, ...)."""

    code = "invalid_data"


class RangeError(CareCostError):
    """A numeric value falls outside its permitted range."""

    code = "range_error"


class DuplicateId(CareCostError):
    """A patient identifier occurs more than once."""

    code = "duplicate_id"


class IncompleteMatrix(CareCostError):
    """A cost matrix document is missing one or more of its 16 cells."""

    code = "incomplete_matrix"


class InvalidSpec(CareCostError):
    """A cohort variable specification violates its invariants."""

    code = "invalid_spec"


class MissingFeature(CareCostError):
    """A profile lacks a feature the model requires."""

    code = "missing_feature"


class DependencyUnmet(CareCostError):
    """An agent was invoked before its prerequisite response existed."""

    code = "dependency_unmet"

    def __init__(self, missing_agent: str):
        super().__init__(f"missing prerequisite response from agent {missing_agent}")
        self.missing_agent = missing_agent


class AgentCallFailed(CareCostError):
    """A model endpoint call failed for one agent."""

    code = "agent_call_failed"

    def __init__(self, agent: str, cause: str):
        super().__init__(f"agent {agent} call failed: {cause}")
        self.agent = agent
        self.cause = cause


class TemplateMissing(CareCostError):
    """A prompt template set does not cover a required block or query kind."""

    code = "template_missing"


class NotFound(CareCostError):
    """A stored entity does not exist."""

    code = "not_found"


class CorruptEntity(CareCostError):
    """A stored entity exists but fails its content-hash check."""

    code = "corrupt_entity"
