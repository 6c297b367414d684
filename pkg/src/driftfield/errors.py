"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 1, NumericalError -> 2,
TheoryCheckError -> 3.
"""


class ConfigError(ValueError):
    """Invalid configuration or rejected input."""


class NumericalError(RuntimeError):
    """Numerical failure at runtime (blow-up, NaN, degenerate kernel rows)."""


class DegenerateRowError(NumericalError):
    """A normalization row (or column) has no finite mass left."""

    def __init__(self, axis: str, index: int, context: str = ""):
        self.axis = axis
        self.index = index
        msg = f"degenerate {axis} {index}: no finite kernel mass"
        if context:
            msg += f" ({context})"
        super().__init__(msg)


class TheoryCheckError(RuntimeError):
    """A numerical theory verification failed."""
