from typing import List, Optional


class ValidationError(Exception):
    """Raised when input validation fails."""
    pass


class ResourceNotFoundError(Exception):
    """Raised when a requested resource is not found."""
    pass


class PlanValidationError(ValidationError):
    """Raised when a deployment plan violates one or more bounds."""

    def __init__(self, violations: List["PlanViolation"]):  # noqa: F821
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))

    @property
    def codes(self) -> List[str]:
        return [v.code for v in self.violations]


class BallotNotHigherError(ValidationError):
    """Raised when an election is requested with a ballot that does not preempt the current one."""
    pass


class HistoryFormatError(ValidationError):
    """Raised when a history is not well formed."""
    pass


class CheckerCapacityError(Exception):
    """Raised when a history exceeds the exhaustive search bound."""

    def __init__(self, num_ops: int, max_ops: int):
        self.num_ops = num_ops
        self.max_ops = max_ops
        super().__init__(f"History has {num_ops} operations, exceeding the bound of {max_ops}")


class SafetyViolationError(Exception):
    """Raised when a role observes broken agreement (e.g. two values for one slot)."""

    def __init__(self, message: str, slot: Optional[int] = None, node: Optional[str] = None):
        self.slot = slot
        self.node = node
        super().__init__(message)


class ProtocolError(Exception):
    """Raised when a role receives a message that the protocol never produces."""
    pass


class FrameError(Exception):
    """Raised when a socket frame cannot be decoded."""
    pass


class AblationStepError(ValidationError):
    """Raised when an ablation step produces an invalid deployment plan."""

    def __init__(self, step_index: int, label: str, cause: Exception):
        self.step_index = step_index
        self.label = label
        super().__init__(f"ablation step {step_index} ({label}) is invalid: {cause}")
