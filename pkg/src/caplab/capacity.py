"""Annulus potentials, capacities, and the brute-force checks behind them.

The drifted potential on an annulus rho < r < R is the ratio of weight
integrals

    psi(r) = int_rho^r Lambda / int_rho^R Lambda,

its flux through the inner sphere gives the drifted 2-capacity

    Cap_L = Vol(S_rho) * Lambda(rho) / int_rho^R Lambda,

and (Cap_L / Vol(S_rho))^(p-1) times the boundary flux of ||grad r||^(p-1)
is the lower bound this package exists to compute.  The exact radial model
p-capacity omega_{m-1} * (int_rho^R w^((1-m)/(p-1)))^(1-p) is not taken on
faith: discrete_energy_oracle minimizes the p-energy on a grid and the two
must agree, and ode_residual checks psi against the radial drift equation
by finite differences.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import expressions as ex
from .constellation import Annulus, BalanceReport, Constellation, LambdaWeight, check_balanced
from .errors import BalanceViolation, DomainError, NonConvergence, PreconditionError
from .expressions import RadialExpr
from .models import (
    ExpressionWarping,
    ModelSpace,
    SpaceForm,
    WarpingFunction,
    match_power,
    match_space_form,
    unit_sphere_area,
)
from .quadrature import TailVerdict, classify_tail, integrate, power_tail

__all__ = [
    "CapacityEstimate",
    "PotentialTable",
    "dirichlet_potential",
    "potential_table",
    "drifted_capacity",
    "drifted_capacity_limit",
    "lambda_tail",
    "exact_model_pcapacity",
    "discrete_energy_oracle",
    "pcap_lower_bound",
    "intrinsic_boundary_flux",
    "ode_residual",
    "residual_from_table",
    "ComparisonReport",
    "verify_comparison_inequality",
]


@dataclass(frozen=True)
class CapacityEstimate:
    value: float
    error_estimate: float
    method: str

    def __post_init__(self):
        if self.value < 0.0:
            raise ValueError("capacity cannot be negative")


@dataclass(frozen=True)
class PotentialTable:
    """Monotone table of the annulus potential: 0 at rho, 1 at R."""

    grid: tuple
    values: tuple

    def __post_init__(self):
        vals = self.values
        if vals[0] != 0.0 or vals[-1] != 1.0:
            raise ValueError("potential must run from 0 to 1")
        if any(b < a for a, b in zip(vals, vals[1:])):
            raise ValueError("potential must be non-decreasing")


def dirichlet_potential(
    c: Constellation,
    a: Annulus,
    r: float,
    lower_limit: Optional[float] = None,
    rel_tol: float = 1e-10,
) -> float:
    """psi(r) on the finite annulus: weight integral up to r over the total."""
    if not a.finite:
        raise ValueError("dirichlet potential needs a finite annulus")
    if not a.rho <= r <= a.R:
        raise ValueError(f"radius {r!r} outside [{a.rho!r}, {a.R!r}]")
    if r == a.rho:
        return 0.0
    if r == a.R:
        return 1.0
    lw = LambdaWeight(c, lower_limit)
    num = integrate(lw, a.rho, r, rel_tol)
    den = integrate(lw, a.rho, a.R, rel_tol)
    return num.value / den.value


def potential_table(
    c: Constellation,
    a: Annulus,
    grid: Sequence[float],
    lower_limit: Optional[float] = None,
) -> PotentialTable:
    """psi sampled on an increasing grid spanning [rho, R].

    The weight is integrated cumulatively panel by panel, so the table is
    exactly monotone and smooth enough in the grid index for second
    differences to see only discretization error.
    """
    if grid[0] != a.rho or grid[-1] != a.R:
        raise ValueError("grid must span [rho, R]")
    lw = LambdaWeight(c, lower_limit)
    acc = [0.0]
    for lo, hi in zip(grid, grid[1:]):
        if hi <= lo:
            raise ValueError("grid must be strictly increasing")
        inc = integrate(lw, lo, hi, rel_tol=1e-13)
        acc.append(acc[-1] + inc.value)
    total = acc[-1]
    values = tuple(v / total for v in acc[:-1]) + (1.0,)
    return PotentialTable(tuple(grid), values)


def drifted_capacity(
    c: Constellation,
    a: Annulus,
    lower_limit: Optional[float] = None,
    rel_tol: float = 1e-10,
) -> CapacityEstimate:
    """Drifted 2-capacity of the model annulus: area * Lambda(rho) / int Lambda."""
    if not a.finite:
        raise ValueError("use drifted_capacity_limit for an infinite annulus")
    lw = LambdaWeight(c, lower_limit)
    den = integrate(lw, a.rho, a.R, rel_tol)
    area = c.model.sphere_area(a.rho)
    value = area * lw(a.rho) / den.value
    rel_err = den.abs_error_estimate / abs(den.value) if den.value else math.inf
    return CapacityEstimate(value, value * rel_err, "drifted-potential")


def lambda_tail(
    c: Constellation,
    lower_limit: Optional[float] = None,
    doublings: int = 20,
    rel_tol: float = 1e-10,
) -> tuple[TailVerdict, LambdaWeight]:
    """Verdict on int_rho^inf Lambda together with the weight used.

    When the bounds are trivial and the warping is recognized as a space
    form or a pure power of r, the weight is a known closed-form family and
    the verdict is computed exactly instead of by tail sampling.
    """
    eval_c = c
    b: Optional[float] = None
    power: Optional[tuple[float, float]] = None
    if c.bounds.trivial:
        w = c.model.warping
        if isinstance(w, SpaceForm):
            b = w.b
        else:
            b = match_space_form(w.expr)
            if b is None:
                pw = match_power(w.expr)
                if pw is not None and pw[0] > 0.0 and pw[1] > 0.0:
                    power = pw
        if b is not None and not isinstance(w, SpaceForm):
            # evaluate through the closed form; identical values, no overflow
            eval_c = dataclasses.replace(c, model=ModelSpace(c.m, SpaceForm(b)))
    lw = LambdaWeight(eval_c, lower_limit)

    if b == 0.0:
        power = (1.0, 1.0)
        b = None
    if power is not None:
        c_w, alpha = power
        e0 = (c.m + c.p - 2.0) / (c.p - 1.0)
        exponent = -alpha * (c.m - 1.0) / (c.p - 1.0)
        w_at_lower = c_w * lw.lower_limit**alpha
        scale = c_w ** (1.0 - e0) * w_at_lower**e0
        return power_tail(scale, exponent, c.rho), lw
    if b is not None and b < 0.0:
        rate = (c.m - 1.0) * math.sqrt(-b) / (c.p - 1.0)
        horizon = c.rho + 60.0 / rate
        res = integrate(lw, c.rho, horizon, rel_tol)
        leftover = lw(horizon) / rate
        return (
            TailVerdict.convergent(
                res.value + leftover,
                res.abs_error_estimate + leftover,
                "exponentially decaying weight",
            ),
            lw,
        )
    verdict = classify_tail(lw, c.rho, log_f=lw.log_value, doublings=doublings)
    return verdict, lw


def drifted_capacity_limit(
    c: Constellation,
    rho: Optional[float] = None,
    lower_limit: Optional[float] = None,
    doublings: int = 20,
) -> CapacityEstimate:
    """Limit of the drifted capacity as R grows; zero when the tail diverges."""
    start = c.rho if rho is None else rho
    if start != c.rho:
        c = dataclasses.replace(c, rho=start)
    tail, lw = lambda_tail(c, lower_limit, doublings)
    area = c.model.sphere_area(start)
    if tail.is_convergent:
        value = area * lw(start) / tail.value
        rel_err = tail.error / tail.value if tail.value else math.inf
        return CapacityEstimate(value, value * rel_err, "drifted-potential-limit")
    if tail.is_divergent:
        return CapacityEstimate(0.0, 0.0, "divergent-tail")
    return CapacityEstimate(0.0, math.inf, "unknown-tail")


def _warping_power_integral(
    warping: WarpingFunction, exponent: float, rho: float, rel_tol: float
) -> TailVerdict:
    """Verdict on int_rho^inf w(t)^exponent dt for a negative exponent."""
    b: Optional[float] = None
    power: Optional[tuple[float, float]] = None
    if isinstance(warping, SpaceForm):
        b = warping.b
    else:
        b = match_space_form(warping.expr)
        if b is None:
            power = match_power(warping.expr)
            if power is not None and (power[0] <= 0.0 or power[1] <= 0.0):
                power = None
    if b == 0.0:
        power = (1.0, 1.0)
        b = None
    if power is not None:
        c_w, alpha = power
        return power_tail(c_w**exponent, alpha * exponent, rho)
    if b is not None and b < 0.0:
        sf = SpaceForm(b)
        rate = -exponent * math.sqrt(-b)
        horizon = rho + 60.0 / rate
        res = integrate(lambda t: math.exp(exponent * sf.log_value(t)), rho, horizon, rel_tol)
        leftover = math.exp(exponent * sf.log_value(horizon)) / rate
        return TailVerdict.convergent(
            res.value + leftover, res.abs_error_estimate + leftover, "exponential decay"
        )

    def f(t: float) -> float:
        return math.exp(exponent * warping.log_value(t))

    return classify_tail(f, rho, log_f=lambda t: exponent * warping.log_value(t))


def exact_model_pcapacity(
    m: int,
    warping: WarpingFunction,
    p: float,
    a: Annulus,
    rel_tol: float = 1e-10,
) -> CapacityEstimate:
    """Closed-form model p-capacity omega_{m-1} (int_rho^R w^((1-m)/(p-1)))^(1-p).

    Valid for every 1 < p < infinity.  For R = inf the integral is classified
    first; a divergent tail means zero capacity (the p-parabolic case) and an
    unknown tail is reported as such rather than guessed.
    """
    if not p > 1.0:
        raise ValueError("exponent p must exceed 1")
    if m < 2:
        raise ValueError("dimension m must be at least 2")
    exponent = (1.0 - m) / (p - 1.0)
    omega = unit_sphere_area(m)

    def integrand(t: float) -> float:
        lv = exponent * warping.log_value(t)
        if lv > 709.0:
            raise DomainError(t, "capacity integrand overflows", overflow=True)
        return math.exp(lv)

    if a.finite:
        res = integrate(integrand, a.rho, a.R, rel_tol)
        value = omega * res.value ** (1.0 - p)
        rel_err = res.abs_error_estimate / res.value if res.value else math.inf
        return CapacityEstimate(value, value * (p - 1.0) * rel_err, "exact-model")
    tail = _warping_power_integral(warping, exponent, a.rho, rel_tol)
    if tail.is_convergent:
        value = omega * tail.value ** (1.0 - p)
        rel_err = tail.error / tail.value if tail.value else math.inf
        return CapacityEstimate(value, value * (p - 1.0) * rel_err, "exact-model")
    if tail.is_divergent:
        return CapacityEstimate(0.0, 0.0, "divergent-tail")
    return CapacityEstimate(0.0, math.inf, "unknown-tail")


def _oracle_grid(a: Annulus, n: int) -> np.ndarray:
    # geometric spacing resolves the boundary layer at rho on wide annuli
    if a.R / a.rho > 10.0:
        return np.geomspace(a.rho, a.R, n)
    return np.linspace(a.rho, a.R, n)


def discrete_energy_oracle(
    m: int,
    warping: WarpingFunction,
    p: float,
    a: Annulus,
    n_points: int = 2000,
) -> CapacityEstimate:
    """Brute-force p-capacity: minimize the discrete p-energy on a grid.

    E(u) = omega_{m-1} sum_i |(u_{i+1}-u_i)/dr_i|^p w(mid_i)^(m-1) dr_i with
    u(rho) = 1 and u(R) = 0, minimized by damped Newton (Armijo backtracking,
    factor 0.5).  The problem is strictly convex for p >= 2; flat stretches
    make Hessian entries degenerate for p > 2, which the damping absorbs.
    """
    if m < 2:
        raise ValueError("dimension m must be at least 2")
    if n_points < 16:
        raise ValueError("oracle needs at least 16 grid points")
    if not a.finite:
        raise ValueError("oracle needs a finite annulus")
    if not p > 1.0:
        raise ValueError("exponent p must exceed 1")
    r = _oracle_grid(a, n_points)
    dr = np.diff(r)
    mid = 0.5 * (r[:-1] + r[1:])
    wmid = np.array([warping.value(t) for t in mid])
    coef = unit_sphere_area(m) * wmid ** (m - 1) * dr ** (1.0 - p)

    def energy(u: np.ndarray) -> float:
        return float(np.sum(coef * np.abs(np.diff(u)) ** p))

    u = np.linspace(1.0, 0.0, n_points)
    scale = None
    for _ in range(500):
        d = np.diff(u)
        absd = np.abs(d)
        s = coef * absd ** (p - 2.0) * d
        grad = p * (s[:-1] - s[1:])
        gnorm = float(np.max(np.abs(grad)))
        if scale is None:
            # natural gradient magnitude; the sup-norm test lives above the
            # rounding floor of the cancellations in grad
            scale = max(1.0, p * float(np.max(np.abs(s))))
        if gnorm <= 1e-12 * scale:
            return CapacityEstimate(energy(u), gnorm, "discrete-energy")
        h = p * (p - 1.0) * coef * absd ** (p - 2.0)
        diag = h[:-1] + h[1:]
        lower = -h[1:-1]
        step = _solve_tridiagonal(lower, diag.copy(), lower, -grad)
        slope = float(grad @ step)
        e0 = energy(u)
        if -slope <= 1e-15 * (1.0 + abs(e0)):
            # predicted decrease below rounding: numerically at the minimum
            return CapacityEstimate(e0, gnorm, "discrete-energy")
        t = 1.0
        while True:
            trial = u.copy()
            trial[1:-1] += t * step
            if energy(trial) <= e0 + 1e-4 * t * slope:
                break
            t *= 0.5
            if t <= 1e-18:
                raise NonConvergence(gnorm, 500)
        u = trial
    d = np.diff(u)
    s = coef * np.abs(d) ** (p - 2.0) * d
    raise NonConvergence(float(np.max(np.abs(p * (s[:-1] - s[1:])))), 500)


def _solve_tridiagonal(
    lower: np.ndarray, diag: np.ndarray, upper: np.ndarray, rhs: np.ndarray
) -> np.ndarray:
    """Thomas algorithm; diag is modified in place."""
    n = diag.size
    reg = 1e-14 * float(np.max(diag)) if n else 0.0
    diag = np.maximum(diag, reg)
    b = rhs.astype(float).copy()
    for i in range(1, n):
        wfac = lower[i - 1] / diag[i - 1]
        diag[i] -= wfac * upper[i - 1]
        b[i] -= wfac * b[i - 1]
    x = np.empty(n)
    x[-1] = b[-1] / diag[-1]
    for i in range(n - 2, -1, -1):
        x[i] = (b[i] - upper[i] * x[i + 1]) / diag[i]
    return x


def intrinsic_boundary_flux(c: Constellation, rho: Optional[float] = None) -> float:
    """Boundary flux of ||grad r||^(p-1) in the intrinsic case: the sphere area."""
    return c.model.sphere_area(c.rho if rho is None else rho)


def pcap_lower_bound(
    c: Constellation,
    a: Annulus,
    boundary_flux: float,
    lower_limit: Optional[float] = None,
    rel_tol: float = 1e-10,
) -> CapacityEstimate:
    """(Cap_L / Vol(S_rho))^(p-1) * flux, the p-capacity comparison bound.

    The balance condition is a hypothesis of the comparison, so the bound is
    refused (BalanceViolation) when M dips below zero on the annulus.
    boundary_flux is the caller's value of the integral of ||grad r||^(p-1)
    over the inner boundary; intrinsic_boundary_flux supplies it in the
    intrinsic case.
    """
    if boundary_flux <= 0.0:
        raise ValueError("boundary flux must be positive")
    report = check_balanced(c, a)
    if not report.ok:
        raise BalanceViolation(report.violation_at, report.value)
    cap = drifted_capacity(c, a, lower_limit, rel_tol)
    vol = c.model.sphere_area(a.rho)
    value = (cap.value / vol) ** (c.p - 1.0) * boundary_flux
    rel_err = cap.error_estimate / cap.value if cap.value else math.inf
    return CapacityEstimate(value, value * (c.p - 1.0) * rel_err, "capacity-comparison")


# --------------------------------------------------------------------------
# Finite-difference residual of the radial drift equation


def residual_from_table(
    grid: Sequence[float], psi: Sequence[float], coeff: Sequence[float]
) -> float:
    """sup |psi'' + coeff * psi'| over interior nodes, by central differences.

    grid must be uniform; coeff holds the drift coefficient
    M/((p-1) g^2) - eta_w at each node.  Decays like dr^2 for the true
    potential, and is exactly 0 for a constant table.
    """
    n = len(grid)
    if n < 3:
        raise ValueError("need at least 3 grid points")
    dr = grid[1] - grid[0]
    worst = 0.0
    for i in range(1, n - 1):
        second = (psi[i + 1] - 2.0 * psi[i] + psi[i - 1]) / (dr * dr)
        first = (psi[i + 1] - psi[i - 1]) / (2.0 * dr)
        worst = max(worst, abs(second + coeff[i] * first))
    return worst


def ode_residual(c: Constellation, a: Annulus, n_points: int = 1024) -> float:
    """Finite-difference residual of the drift equation for the potential.

    Builds psi on a uniform grid and checks L psi = psi'' +
    psi' (M/((p-1) g^2) - eta_w) = 0 by central differences; the returned
    sup-norm shrinks at second order as the grid is refined.
    """
    if n_points < 64:
        raise ValueError("residual check needs at least 64 grid points")
    if not a.finite:
        raise ValueError("residual check needs a finite annulus")
    grid = [a.rho + (a.R - a.rho) * i / (n_points - 1) for i in range(n_points)]
    grid[-1] = a.R
    table = potential_table(c, a, grid)
    coeff = [c.drift_integrand(r) - c.model.eta(r) for r in grid]
    return residual_from_table(table.grid, table.values, coeff)


# --------------------------------------------------------------------------
# Pointwise check of the p-Laplacian vs drifted-Laplacian comparison


@dataclass(frozen=True)
class ComparisonReport:
    holds: bool
    violation_at: Optional[float] = None
    lhs: Optional[float] = None
    rhs: Optional[float] = None


def verify_comparison_inequality(
    c: Constellation, f: RadialExpr, grid: Sequence[float]
) -> ComparisonReport:
    """Check Delta_p f >= (p-1) F^(p-2) g^2 L f pointwise for radial f.

    Only available for intrinsic constellations, where the p-Laplacian of a
    radial function has the closed form
    |f'|^(p-2) ((p-1) f'' + (m-1) eta_w f').  f must be non-decreasing and
    satisfy f'' - f' eta_w <= 0 on the grid; violations raise
    PreconditionError.
    """
    if not c.bounds.trivial:
        raise ValueError("comparison check requires intrinsic bounds")
    fp_expr = f.derivative()
    fpp_expr = fp_expr.derivative()
    p = c.p
    for r in grid:
        fp = ex.evaluate(fp_expr, r)
        fpp = ex.evaluate(fpp_expr, r)
        eta = c.model.eta(r)
        tol = 1e-9 * (1.0 + abs(fpp) + abs(fp * eta))
        if fp < -tol:
            raise PreconditionError(f"f' = {fp!r} < 0 at r = {r!r}")
        if fpp - fp * eta > tol:
            raise PreconditionError(
                f"f'' - f' eta_w = {fpp - fp * eta!r} > 0 at r = {r!r}"
            )
        fp = max(fp, 0.0)
        base = 1.0 if p == 2.0 else fp ** (p - 2.0)
        lhs = base * ((p - 1.0) * fpp + (c.m - 1.0) * eta * fp)
        lf = fpp + fp * (c.drift_integrand(r) - eta)
        rhs = (p - 1.0) * base * lf
        if lhs < rhs - 1e-9 * (1.0 + abs(lhs)):
            return ComparisonReport(False, violation_at=r, lhs=lhs, rhs=rhs)
    return ComparisonReport(True)
