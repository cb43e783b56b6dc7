"""Rotationally symmetric model spaces and their geometric primitives.

A model space is a warped product over a radial interval with fiber the
unit (m-1)-sphere.  The warping function w determines everything we need:

    eta(r)              = w'(r) / w(r)      mean curvature of distance spheres
    radial curvature    = -w''(r) / w(r)    sectional curvature in radial planes
    sphere area         = omega_{m-1} * w(r)^(m-1)

Space forms of constant curvature b are built in with closed-form w, w',
and eta; any other warping is supplied as a parsed radial expression and
differentiated symbolically.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Union

from . import expressions as ex
from .errors import DomainError, InvalidWarping
from .expressions import RadialExpr

__all__ = [
    "SpaceForm",
    "ExpressionWarping",
    "WarpingFunction",
    "ModelSpace",
    "unit_sphere_area",
    "match_power",
    "match_space_form",
]


def unit_sphere_area(m: int) -> float:
    """Surface area of the unit (m-1)-sphere in R^m: 2 pi^(m/2) / Gamma(m/2)."""
    if m < 1:
        raise ValueError("dimension must be at least 1")
    return 2.0 * math.pi ** (m / 2.0) / math.gamma(m / 2.0)


@dataclass(frozen=True)
class SpaceForm:
    """Warping of the simply connected space form of constant curvature b.

    w(r) = sin(sqrt(b) r)/sqrt(b) for b > 0, r for b = 0, and
    sinh(sqrt(-b) r)/sqrt(-b) for b < 0.
    """

    b: float

    @property
    def sup_radius(self) -> float:
        """Upper end of the radial interval on which w stays positive."""
        if self.b > 0.0:
            return math.pi / math.sqrt(self.b)
        return math.inf

    def _check(self, r: float) -> None:
        if r <= 0.0:
            raise DomainError(r, "radius must be positive")
        if r >= self.sup_radius:
            raise DomainError(r, f"radius beyond warping zero at {self.sup_radius!r}")

    def value(self, r: float) -> float:
        self._check(r)
        b = self.b
        if b == 0.0:
            return r
        if b < 0.0:
            s = math.sqrt(-b)
            try:
                return math.sinh(s * r) / s
            except OverflowError:
                raise DomainError(r, "warping overflows double precision", overflow=True) from None
        s = math.sqrt(b)
        return math.sin(s * r) / s

    def derivative(self, r: float) -> float:
        self._check(r)
        b = self.b
        if b == 0.0:
            return 1.0
        if b < 0.0:
            try:
                return math.cosh(math.sqrt(-b) * r)
            except OverflowError:
                raise DomainError(r, "warping derivative overflows", overflow=True) from None
        return math.cos(math.sqrt(b) * r)

    def second_derivative(self, r: float) -> float:
        # w'' = -b w for every space form
        return -self.b * self.value(r)

    def eta(self, r: float) -> float:
        self._check(r)
        b = self.b
        if b == 0.0:
            return 1.0 / r
        if b < 0.0:
            s = math.sqrt(-b)
            return s / math.tanh(s * r)
        s = math.sqrt(b)
        return s / math.tan(s * r)

    def log_value(self, r: float) -> float:
        """log w(r), stable for arbitrarily large r when b <= 0."""
        self._check(r)
        b = self.b
        if b == 0.0:
            return math.log(r)
        if b < 0.0:
            s = math.sqrt(-b)
            x = s * r
            # log(sinh x) = x - log 2 + log1p(-exp(-2x))
            return x - math.log(2.0) + math.log1p(-math.exp(-2.0 * x)) - math.log(s)
        return math.log(self.value(r))


@dataclass(frozen=True)
class ExpressionWarping:
    """Warping given by a parsed radial expression."""

    expr: RadialExpr

    @cached_property
    def _d1(self) -> RadialExpr:
        return self.expr.derivative()

    @cached_property
    def _d2(self) -> RadialExpr:
        return self._d1.derivative()

    @property
    def sup_radius(self) -> float:
        return math.inf

    def value(self, r: float) -> float:
        if r <= 0.0:
            raise DomainError(r, "radius must be positive")
        return ex.evaluate(self.expr, r)

    def derivative(self, r: float) -> float:
        return ex.evaluate(self._d1, r)

    def second_derivative(self, r: float) -> float:
        return ex.evaluate(self._d2, r)

    def eta(self, r: float) -> float:
        w = self.value(r)
        if w == 0.0:
            raise DomainError(r, "warping function vanishes")
        return self.derivative(r) / w

    def log_value(self, r: float) -> float:
        w = self.value(r)
        if w <= 0.0:
            raise DomainError(r, f"warping function non-positive ({w!r})")
        return math.log(w)


WarpingFunction = Union[SpaceForm, ExpressionWarping]


def validate_custom_warping(
    warping: ExpressionWarping, r_max: float = 10.0, samples: int = 1024
) -> None:
    """Check the model-space axioms w(0)=0, w'(0)=1, w>0 numerically.

    Positivity failure on the sampled grid is fatal (InvalidWarping); the
    two axioms at the origin cannot be checked exactly for an arbitrary
    expression, so violations there only emit warnings.
    """
    expr = warping.expr
    try:
        w0 = ex.evaluate(expr, 0.0)
    except DomainError:
        w0 = None
    if w0 is not None and abs(w0) > 1e-9:
        warnings.warn(f"warping w(0) = {w0!r} is not 0", stacklevel=2)
    try:
        d0 = ex.evaluate(expr.derivative(), 1e-8)
    except DomainError:
        d0 = None
    if d0 is not None and abs(d0 - 1.0) > 1e-6:
        warnings.warn(f"warping w'(0) = {d0!r} is not 1", stacklevel=2)
    lo = 1e-6
    for i in range(samples):
        r = lo + (r_max - lo) * i / (samples - 1)
        try:
            v = ex.evaluate(expr, r)
        except DomainError as exc:
            raise InvalidWarping(f"warping not evaluable at r={r!r}: {exc}") from exc
        if v <= 0.0:
            raise InvalidWarping(f"warping is {v!r} <= 0 at r={r!r}")


@dataclass(frozen=True)
class ModelSpace:
    """An m-dimensional model space with the given warping function."""

    m: int
    warping: WarpingFunction

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("model dimension must be at least 2")

    def warping_value(self, r: float) -> float:
        return self.warping.value(r)

    def log_warping(self, r: float) -> float:
        return self.warping.log_value(r)

    def eta(self, r: float) -> float:
        """Mean curvature w'(r)/w(r) of the distance sphere of radius r."""
        return self.warping.eta(r)

    def radial_curvature(self, r: float) -> float:
        """Sectional curvature -w''(r)/w(r) of radial two-planes."""
        w = self.warping.value(r)
        if w == 0.0:
            raise DomainError(r, "warping function vanishes")
        return -self.warping.second_derivative(r) / w

    def sphere_area(self, r: float) -> float:
        """Area of the distance sphere: omega_{m-1} w(r)^(m-1)."""
        return unit_sphere_area(self.m) * self.warping.value(r) ** (self.m - 1)


# --------------------------------------------------------------------------
# Structural recognizers used for exact tail shortcuts


def match_power(expr: RadialExpr) -> Optional[tuple[float, float]]:
    """Match expr == c * r^alpha structurally; returns (c, alpha) or None."""

    def walk(node) -> Optional[tuple[float, float]]:
        if isinstance(node, ex.Const):
            return (node.value, 0.0)
        if isinstance(node, ex.Var):
            return (1.0, 1.0)
        if isinstance(node, ex.Unary):
            if node.op == "neg":
                m = walk(node.arg)
                return None if m is None else (-m[0], m[1])
            if node.op == "sqrt":
                m = walk(node.arg)
                if m is None or m[0] < 0.0:
                    return None
                return (math.sqrt(m[0]), m[1] / 2.0)
            return None
        if isinstance(node, ex.Binary):
            if node.op == "*":
                a, b = walk(node.left), walk(node.right)
                if a is None or b is None:
                    return None
                return (a[0] * b[0], a[1] + b[1])
            if node.op == "/":
                a, b = walk(node.left), walk(node.right)
                if a is None or b is None or b[0] == 0.0:
                    return None
                return (a[0] / b[0], a[1] - b[1])
            if node.op == "^":
                a = walk(node.left)
                if a is None or not isinstance(node.right, ex.Const):
                    return None
                k = node.right.value
                if a[0] <= 0.0:
                    return None
                return (a[0] ** k, a[1] * k)
        return None

    return walk(expr.root)


def match_space_form(expr: RadialExpr) -> Optional[float]:
    """Curvature b when expr is structurally a space-form warping, else None.

    Recognized shapes: r, sin(k*r)/k, sinh(k*r)/k (and the same with the
    1/k factor written as a product).
    """

    def linear_arg(node) -> Optional[float]:
        # matches k*r / r*k / r, returning k
        if isinstance(node, ex.Var):
            return 1.0
        if isinstance(node, ex.Binary) and node.op == "*":
            if isinstance(node.left, ex.Const) and isinstance(node.right, ex.Var):
                return node.left.value
            if isinstance(node.left, ex.Var) and isinstance(node.right, ex.Const):
                return node.right.value
        return None

    root = expr.root
    pw = match_power(expr)
    if pw is not None:
        return 0.0 if pw == (1.0, 1.0) else None

    def scaled(fn_node, scale: float) -> Optional[float]:
        if not isinstance(fn_node, ex.Unary) or fn_node.op not in ("sin", "sinh"):
            return None
        k = linear_arg(fn_node.arg)
        if k is None or k <= 0.0 or abs(scale * k - 1.0) > 1e-12:
            return None
        return -k * k if fn_node.op == "sinh" else k * k

    if isinstance(root, ex.Unary):
        return scaled(root, 1.0)
    if isinstance(root, ex.Binary):
        if root.op == "/" and isinstance(root.right, ex.Const) and root.right.value != 0.0:
            return scaled(root.left, 1.0 / root.right.value)
        if root.op == "*":
            if isinstance(root.left, ex.Const):
                return scaled(root.right, root.left.value)
            if isinstance(root.right, ex.Const):
                return scaled(root.left, root.right.value)
    return None
