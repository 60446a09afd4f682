"""Exception types shared across the package."""


class OvalGameError(Exception):
    """Base class for library errors."""


class InvalidConfig(OvalGameError, ValueError):
    """Parameters or positions violate a precondition (alpha <= 1, l < 0, ...)."""


class TerminalState(OvalGameError, ValueError):
    """The joint state lies in the terminal set (some pursuer within capture radius)."""


class UnsupportedDimension(OvalGameError, ValueError):
    pass


class NotOnBoundary(OvalGameError, ValueError):
    pass


class ModeMismatch(OvalGameError, ValueError):
    """A target-defense operation was requested for a non-shape cost."""


class NoMultiplierFound(OvalGameError, RuntimeError):
    """Nonnegative least squares could not certify KKT stationarity."""


class ScenarioError(OvalGameError, ValueError):
    """Scenario file failed validation; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}")
