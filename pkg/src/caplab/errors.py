"""Exception types shared across the package."""

from __future__ import annotations


class CaplabError(Exception):
    """Base class for all caplab errors."""


class ExpressionSyntaxError(CaplabError):
    """Malformed expression text.

    position is a 0-based character offset; expected describes the token
    class the parser was looking for.
    """

    def __init__(self, position: int, expected: str):
        self.position = position
        self.expected = expected
        super().__init__(f"expected {expected} at position {position}")


class UnknownIdentifier(CaplabError):
    """An identifier other than r, pi, e, or a known function name."""

    def __init__(self, name: str, position: int):
        self.name = name
        self.position = position
        super().__init__(f"unknown identifier {name!r} at position {position}")


class DomainError(CaplabError):
    """A sub-expression is undefined (or overflows) at the given radius."""

    def __init__(self, r: float, detail: str, overflow: bool = False):
        self.r = r
        self.detail = detail
        self.overflow = overflow
        super().__init__(f"{detail} at r={r!r}")


class QuadratureFailure(CaplabError):
    """Adaptive integration exhausted its subdivision budget."""

    def __init__(self, value: float, error_estimate: float, detail: str = ""):
        self.value = value
        self.error_estimate = error_estimate
        msg = f"quadrature did not converge (best value {value!r}, estimate {error_estimate!r})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class NonConvergence(CaplabError):
    """Iterative solver failed to reach its tolerance."""

    def __init__(self, residual: float, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(f"no convergence after {iterations} iterations (residual {residual!r})")


class BalanceViolation(CaplabError):
    """The balance function dips below zero where a theorem requires it."""

    def __init__(self, r: float, value: float):
        self.r = r
        self.value = value
        super().__init__(f"balance function is {value!r} < 0 at r={r!r}")


class PreconditionError(CaplabError):
    """A hypothesis of a comparison statement fails at some radius."""


class HypothesisViolation(CaplabError):
    """h(r) exceeds the model mean curvature where the test requires h <= w'/w."""

    def __init__(self, r: float, h_value: float, eta_value: float):
        self.r = r
        self.h_value = h_value
        self.eta_value = eta_value
        super().__init__(f"h(r)={h_value!r} > eta_w(r)={eta_value!r} at r={r!r}")


class InvalidWarping(CaplabError):
    """A custom warping function violates a fatal model-space axiom."""


class ConfigError(CaplabError):
    """Invalid job configuration; pointer locates the offending field."""

    def __init__(self, pointer: str, message: str):
        self.pointer = pointer
        self.message = message
        super().__init__(f"{pointer}: {message}")


class VerificationError(CaplabError):
    """An internal cross-check that should never fail did fail."""
