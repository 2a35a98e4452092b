"""Exception types shared across the package."""


class SwarmError(Exception):
    """Base class for errors raised by this package."""


class ScenarioError(SwarmError):
    """Bad input: scenario schema, team geometry, or parameter domain violations."""


class SafetyWindowError(ScenarioError):
    """The admissible scale-factor window is empty (alpha_min > alpha_max)."""


class NumericalError(SwarmError):
    """A numerical procedure failed to converge or produced unusable output."""
