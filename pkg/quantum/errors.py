"""Error vocabulary shared by every package."""


class ValidationError(ValueError):
    """Input violates a stated condition; the message names the condition."""


class ConfigError(ValidationError):
    """Experiment config problem; message is prefixed with the offending field path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class NumericalError(RuntimeError):
    """Eigensolver failure, unexpected imaginary residue or overflow."""


class GridLeakError(NumericalError):
    """Pointer mass leaves the oracle grid."""

    def __init__(self, leaked: float, hint: str):
        self.leaked = leaked
        self.hint = hint
        super().__init__(f"pointer mass {leaked:.3e} outside the grid; {hint}")


class UnsupportedCaseError(NotImplementedError):
    """The requested quantity is not defined for these inputs."""
