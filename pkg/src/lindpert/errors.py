"""Exception hierarchy; the CLI maps each class to an exit code."""


class LindpertError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ValidationError(LindpertError, ValueError):
    """Malformed input: shapes, Hermiticity, unknown fields, bad parameters."""

    exit_code = 2


class NumericalDegeneracyError(LindpertError, ArithmeticError):
    """A numerical check failed (ill-conditioned kernel, obstruction drift,
    higher-order degeneracy in the perturbation engine)."""

    exit_code = 3

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class NotInRangeError(NumericalDegeneracyError):
    """Right-hand side of a constrained inverse has a kernel component."""


class UnsupportedStructureError(LindpertError):
    """Input is valid but outside what an algorithm supports
    (degenerate Hamiltonian for the projection scan, non-unique reduced
    kernel for the series engine, ...)."""

    exit_code = 4

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
