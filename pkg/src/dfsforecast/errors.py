"""Exception types shared across the package."""


class ContractViolation(ValueError):
    """An operation was called outside its preconditions."""


class CoverageHoleError(ArithmeticError):
    """No active rule fires at the given input."""

    def __init__(self, x):
        self.x = tuple(float(v) for v in x)
        super().__init__(f"no active rule fires at x={self.x}")


class TrustRegionError(ArithmeticError):
    """The disturbance polynomial denominator vanishes at (x, h)."""

    def __init__(self, x, h):
        self.x = tuple(float(v) for v in x)
        self.h = float(h)
        super().__init__(f"disturbance h={self.h} out of trust region at x={self.x}")


class DeadRuleError(ValueError):
    """Some rules never fire on the training inputs."""

    def __init__(self, indices):
        self.indices = [tuple(j) for j in indices]
        super().__init__(f"{len(self.indices)} rule(s) never fire on the data: {self.indices}")


class NumericalFailure(ArithmeticError):
    """Non-finite state encountered during integration or forecasting."""

    def __init__(self, message, *, step=None, time=None):
        self.step = step
        self.time = time
        super().__init__(message)
