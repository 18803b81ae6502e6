"""Exception hierarchy shared across the package."""


class AssuranceError(Exception):
    """Base class for every error raised by intent_assure."""


class DomainError(AssuranceError, ValueError):
    """A numeric input lies outside the domain an operation accepts."""


class ConfigurationError(AssuranceError, ValueError):
    """Bands, registries or scenario settings are missing or inconsistent."""


class PairingError(AssuranceError, KeyError):
    """Operational and target KPI sets do not line up by name."""

    def __init__(self, missing_target, missing_operational):
        self.missing_target = tuple(missing_target)
        self.missing_operational = tuple(missing_operational)
        super().__init__(
            f"unmatched KPI names: no target for {list(self.missing_target)}, "
            f"no operational value for {list(self.missing_operational)}"
        )

    def __str__(self):
        return self.args[0]


class SingularityError(AssuranceError, ZeroDivisionError):
    """Scaling by a zero target edge with a non-zero delta."""


class SequencingError(AssuranceError):
    """Probe or event timestamps went backwards."""


class ParseError(AssuranceError, ValueError):
    """Policy text does not match the tuple grammar."""

    def __init__(self, message, text="", position=0):
        self.text = text
        self.position = position
        super().__init__(f"{message} at position {position}")


class TreeError(AssuranceError, ValueError):
    """A policy tree breaks label uniqueness or backward-only references."""


class FormalizationError(AssuranceError, ValueError):
    def __init__(self, message, raw=""):
        self.raw = raw
        super().__init__(message)


class UnknownIntentType(AssuranceError, LookupError):
    """No registered intent type matches; planning halts."""


class GenerationError(AssuranceError):
    """The planner could not produce a well-formed policy."""


class PlanningAborted(AssuranceError):
    """A required policy failed and the planner gave up on the tree."""


class EscalationError(AssuranceError):
    """No corrective action is sufficient for the observed drift."""


class IllegalTransition(AssuranceError):
    """The assurance loop attempted a phase change outside the legal set."""


class ScenarioError(AssuranceError, ValueError):
    """Scenario document failed validation; ``path`` names the offending field."""

    def __init__(self, message, path=""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
