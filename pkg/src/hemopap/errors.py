class HemopapError(Exception):
    """Base class for library errors."""


class SpecError(HemopapError, ValueError):
    """A model instance or range block violates its standing assumptions."""


class DomainError(HemopapError, ValueError):
    """A state or argument lies outside the domain of the model (e.g. ``u < 0``)."""


class ConditionNotSatisfied(HemopapError):
    """A sufficient condition does not hold, so the corresponding result does not apply."""


class PositivityViolation(HemopapError):
    """The integrator produced a state below the negative-undershoot tolerance."""

    def __init__(self, t: float, x: float):
        super().__init__(f"positivity violation: x({t:.6g}) = {x:.6g} < -1e-9")
        self.t = t
        self.x = x


class IntegrationError(HemopapError):
    """Non-finite state or other integrator failure."""


class NonConvergence(HemopapError):
    """Picard iteration did not reach tolerance within the iteration budget."""
