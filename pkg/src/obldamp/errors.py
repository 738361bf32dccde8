"""Exception types shared across the package."""


class InputError(ValueError):
    """Invalid arguments or configuration."""


class NonFiniteFitnessError(RuntimeError):
    def __init__(self, position, value):
        self.position = position
        self.value = value
        super().__init__(f"objective returned {value!r} at position {list(position)!r}")


class ParseError(ValueError):
    def __init__(self, message, line=None, path=None):
        self.message = message
        self.line = line
        self.path = path
        super().__init__(message)

    def __str__(self):
        parts = [p for p in (self.path, None if self.line is None else f"line {self.line}") if p]
        return ": ".join(parts + [self.message])


class SimulationError(RuntimeError):
    """Time-history integration failed (divergence or non-convergence)."""

    def __init__(self, message, step=None):
        self.step = step
        where = f"step {step}: " if step is not None else ""
        super().__init__(f"{where}{message}")


class DegenerateRecordError(ValueError):
    """A normalizing response quantity is zero, so ratios are undefined."""
