"""Comparison constellations and the scalar fields derived from them.

A constellation bundles the submanifold dimension m, ambient dimension n,
exponent p >= 2, an m-dimensional model space, the radial bound functions
g (tangency, 0 < g <= 1), h (mean convexity) and lambda (second fundamental
form), and an inner radius rho.  From these we derive:

    balance        M(r) = (m+p-2) eta_w(r) - m h(r) - (p-2) lambda(r)
    drift          V(r) = M(r) / ((p-1) g(r)^2) - m eta_w(r)
    weight         Lambda(r) = w(r) exp(-int_l^r M(t) / ((p-1) g(t)^2) dt)

The lower limit l of the weight integral only changes Lambda by a constant
factor, which cancels in every downstream quantity; it defaults to rho.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from . import expressions as ex
from .errors import DomainError
from .expressions import RadialExpr
from .models import ModelSpace
from .quadrature import CumulativeIntegral

__all__ = [
    "Bounds",
    "Constellation",
    "Annulus",
    "BalanceReport",
    "check_balanced",
    "LambdaWeight",
    "lambda_weight",
    "TAIL_HORIZON_DOUBLINGS",
]

TAIL_HORIZON_DOUBLINGS = 20  # balance grids and tail sampling stop at rho * 2^this


@dataclass(frozen=True)
class Bounds:
    """Radial bound functions g, h, lambda of a constellation."""

    g: RadialExpr
    h: RadialExpr
    lam: RadialExpr

    @staticmethod
    def intrinsic() -> "Bounds":
        """The trivial bounds g = 1, h = 0, lambda = 0."""
        return Bounds(ex.constant(1.0), ex.constant(0.0), ex.constant(0.0))

    @property
    def trivial(self) -> bool:
        return (
            ex.constant_value(self.g) == 1.0
            and ex.constant_value(self.h) == 0.0
            and ex.constant_value(self.lam) == 0.0
        )

    def validate_g(self, rho: float, r_max: float, samples: int = 1024) -> None:
        """Check 0 < g <= 1 on a sampled grid; raises ValueError on failure."""
        for r in _sample_grid(rho, r_max, samples):
            v = ex.evaluate(self.g, r)
            if not 0.0 < v <= 1.0 + 1e-12:
                raise ValueError(f"tangency bound g({r!r}) = {v!r} outside (0, 1]")


@dataclass(frozen=True)
class Annulus:
    """Radial annulus rho < r < R; R may be math.inf."""

    rho: float
    R: float

    def __post_init__(self):
        if not self.rho > 0.0:
            raise ValueError("annulus needs rho > 0")
        if not self.R > self.rho:
            raise ValueError("annulus needs R > rho")

    @property
    def finite(self) -> bool:
        return math.isfinite(self.R)


@dataclass(frozen=True)
class Constellation:
    m: int
    n: int
    p: float
    model: ModelSpace
    bounds: Bounds
    rho: float

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("submanifold dimension m must be at least 2")
        if self.n < self.m:
            raise ValueError("ambient dimension n must be at least m")
        if self.p < 2.0:
            raise ValueError("exponent p must be at least 2 for comparison verdicts")
        if self.rho <= 0.0:
            raise ValueError("inner radius rho must be positive")
        if self.model.m != self.m:
            raise ValueError("model dimension must equal m")

    @property
    def is_intrinsic(self) -> bool:
        return self.bounds.trivial and self.m == self.n

    def balance(self, r: float) -> float:
        """M(r) = (m+p-2) eta_w(r) - m h(r) - (p-2) lambda(r)."""
        return (
            (self.m + self.p - 2.0) * self.model.eta(r)
            - self.m * ex.evaluate(self.bounds.h, r)
            - (self.p - 2.0) * ex.evaluate(self.bounds.lam, r)
        )

    def drift_integrand(self, r: float) -> float:
        """M(r) / ((p-1) g(r)^2), the integrand of the weight exponent."""
        g = ex.evaluate(self.bounds.g, r)
        if g == 0.0:
            raise DomainError(r, "tangency bound g vanishes")
        return self.balance(r) / ((self.p - 1.0) * g * g)

    def drift_coefficient(self, r: float) -> float:
        """Radial drift V(r) = M(r)/((p-1) g^2(r)) - m eta_w(r)."""
        return self.drift_integrand(r) - self.m * self.model.eta(r)


def _sample_grid(lo: float, hi: float, n: int) -> list[float]:
    """n points on [lo, hi]: uniform up to 10, geometric beyond."""
    if n < 2:
        raise ValueError("grid needs at least 2 points")
    knee = 10.0
    if hi <= knee or lo >= knee:
        if hi / lo > 100.0 and lo > 0.0:
            ratio = (hi / lo) ** (1.0 / (n - 1))
            return [lo * ratio**i for i in range(n)]
        return [lo + (hi - lo) * i / (n - 1) for i in range(n)]
    n_lo = max(2, int(n * 0.5))
    n_hi = max(2, n - n_lo)
    uniform = [lo + (knee - lo) * i / (n_lo - 1) for i in range(n_lo)]
    ratio = (hi / knee) ** (1.0 / n_hi)
    geometric = [knee * ratio ** (i + 1) for i in range(n_hi)]
    return uniform + geometric


@dataclass(frozen=True)
class BalanceReport:
    ok: bool
    violation_at: Optional[float] = None
    value: Optional[float] = None
    min_value: float = math.inf
    min_at: float = math.nan


def check_balanced(
    c: Constellation, a: Annulus, grid_size: int = 4096
) -> BalanceReport:
    """Sample M on [rho, min(R, tail horizon)] and report the first violation.

    ok means M(r) >= -1e-12 at every sampled radius.  The grid is uniform up
    to r = 10 and geometric beyond, so slow approach to a negative limit at
    large radii is still caught.
    """
    horizon = min(a.R, c.rho * 2.0**TAIL_HORIZON_DOUBLINGS, c.model.warping.sup_radius * (1 - 1e-9))
    if not horizon > a.rho:
        raise ValueError("working interval above rho is empty for this warping")
    grid = _sample_grid(a.rho, horizon, grid_size)
    min_value = math.inf
    min_at = math.nan
    for r in grid:
        v = c.balance(r)
        if v < min_value:
            min_value = v
            min_at = r
        if v < -1e-12:
            return BalanceReport(False, violation_at=r, value=v, min_value=min_value, min_at=min_at)
    return BalanceReport(True, min_value=min_value, min_at=min_at)


class LambdaWeight:
    """The weight Lambda(r) with a cached cumulative drift integral.

    Callable as Lambda(r); log_value(r) stays finite where the warping value
    would overflow, which is what the tail classifier feeds on.
    """

    def __init__(self, c: Constellation, lower_limit: Optional[float] = None,
                 rel_tol: float = 1e-12):
        self.constellation = c
        self.lower_limit = c.rho if lower_limit is None else lower_limit
        if self.lower_limit <= 0.0:
            raise ValueError("lower integration limit must be positive")
        self._cum = CumulativeIntegral(c.drift_integrand, self.lower_limit, rel_tol)

    def drift_integral(self, r: float) -> float:
        """int_l^r M(t) / ((p-1) g(t)^2) dt (cached, adaptive)."""
        return self._cum.value_at(r)

    def log_value(self, r: float) -> float:
        return self.constellation.model.log_warping(r) - self.drift_integral(r)

    def __call__(self, r: float) -> float:
        cum = self.drift_integral(r)
        # exp(-cum) beyond +-670 flirts with overflow or subnormal garbage;
        # the log route keeps full precision there
        if abs(cum) <= 670.0:
            try:
                w = self.constellation.model.warping_value(r)
                out = w * math.exp(-cum)
                if math.isfinite(out):
                    return out
            except DomainError as exc:
                if not exc.overflow:
                    raise
        lv = self.constellation.model.log_warping(r) - cum
        if lv > 709.0:
            raise DomainError(r, "weight overflows double precision", overflow=True)
        if lv < -745.0:
            return 0.0
        return math.exp(lv)


def lambda_weight(c: Constellation, r: float, lower_limit: Optional[float] = None) -> float:
    """Lambda(r) = w(r) exp(-int_l^r M/((p-1) g^2)); one-shot convenience.

    Repeated evaluations should construct a LambdaWeight once and reuse its
    cache.  Quadrature runs at relative tolerance 1e-12 and raises
    QuadratureFailure if that cannot be met.
    """
    return LambdaWeight(c, lower_limit)(r)
