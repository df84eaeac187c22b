"""Exception types raised by the simulator."""


class ThermalError(Exception):
    pass


class ValidationError(ThermalError, ValueError):
    pass


class GeometryError(ThermalError, ValueError):
    """A placement does not fit; ``dimension`` names the offending axis."""

    def __init__(self, message, dimension=None):
        super().__init__(message)
        self.dimension = dimension


class RefinementError(ThermalError, ValueError):
    def __init__(self, message, suggested_cell=None):
        super().__init__(message)
        self.suggested_cell = suggested_cell


class AssemblyError(ThermalError):
    pass


class SolverError(ThermalError):
    def __init__(self, message, residual_history=()):
        super().__init__(message)
        self.residual_history = list(residual_history)


class ConfigError(ThermalError, ValueError):
    """Bad config text. ``key`` names the offending key for semantic errors."""

    def __init__(self, message, key=None, line=None, column=None):
        super().__init__(message)
        self.key = key
        self.line = line
        self.column = column
