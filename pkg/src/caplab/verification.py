"""Self-verification suite behind `caplab verify`.

Each check returns a CheckResult; run_all executes all of them in order.
The checks pit the closed-form operations against independent witnesses:
the discrete energy minimizer, finite-difference residuals of the drift
equation, exact power-law tail analysis, and invariances that hold by
construction (normalization choice, monotonicity, determinism).
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass

from . import expressions as ex
from .capacity import (
    dirichlet_potential,
    discrete_energy_oracle,
    drifted_capacity,
    exact_model_pcapacity,
    intrinsic_boundary_flux,
    ode_residual,
    pcap_lower_bound,
    potential_table,
)
from .classify import classify
from .config import JobConfig, Numerics
from .constellation import Annulus, Bounds, Constellation
from .models import ExpressionWarping, ModelSpace, SpaceForm
from .report import sweep_csv, table_csv

__all__ = ["CheckResult", "run_all", "ALL_CHECKS"]


@dataclass(frozen=True)
class CheckResult:
    cid: str
    description: str
    passed: bool
    detail: str


def _intrinsic(m: int, p: float, warping, rho: float = 1.0) -> Constellation:
    return Constellation(m=m, n=m, p=p, model=ModelSpace(m, warping),
                         bounds=Bounds.intrinsic(), rho=rho)


def _extrinsic(m: int, p: float, b: float, h0: float, lam0: float,
               rho: float = 1.0, g: float = 1.0) -> Constellation:
    return Constellation(
        m=m, n=m + 1, p=p, model=ModelSpace(m, SpaceForm(b)),
        bounds=Bounds(ex.constant(g), ex.constant(h0), ex.constant(lam0)), rho=rho,
    )


_W_R = ExpressionWarping(ex.parse("r"))
_W_SINH = ExpressionWarping(ex.parse("sinh(r)"))

ORACLE_TUPLES = tuple(
    (m, p, w)
    for m in (2, 3, 4)
    for p in (2.0, 2.5, 3.0)
    for w in (_W_R, _W_SINH)
)


def check_newtonian_annulus(seed: int = 0) -> CheckResult:
    """Flat 3-space annulus (1, 2): drifted capacity must be 8 pi."""
    start = time.perf_counter()
    est = drifted_capacity(_intrinsic(3, 2.0, _W_R), Annulus(1.0, 2.0))
    elapsed = time.perf_counter() - start
    target = 8.0 * math.pi
    rel = abs(est.value - target) / target
    passed = rel <= 1e-8 and elapsed < 1.0
    return CheckResult(
        "newtonian-annulus",
        "flat annulus capacity equals 8*pi to 1e-8",
        passed,
        f"value={est.value:.12g} rel_err={rel:.3g} runtime={elapsed:.3f}s",
    )


def check_oracle_equivalence(seed: int = 0) -> CheckResult:
    """Closed-form p-capacity vs discrete energy minimum on 18 tuples."""
    start = time.perf_counter()
    worst = 0.0
    bad = []
    a = Annulus(1.0, 2.0)
    for m, p, w in ORACLE_TUPLES:
        exact = exact_model_pcapacity(m, w, p, a)
        oracle = discrete_energy_oracle(m, w, p, a, 2000)
        rel = abs(oracle.value - exact.value) / exact.value
        worst = max(worst, rel)
        if rel > 0.01:
            bad.append((m, p))
    elapsed = time.perf_counter() - start
    passed = not bad and elapsed < 30.0
    return CheckResult(
        "oracle-equivalence",
        "energy minimizer matches closed-form capacity within 1% (18 tuples)",
        passed,
        f"worst_rel={worst:.3g} runtime={elapsed:.2f}s failures={bad}",
    )


def check_ode_residual(seed: int = 0) -> CheckResult:
    """Drift-equation residual of psi drops ~4x when the grid doubles."""
    cases = [
        ("euclidean", _intrinsic(3, 3.0, _W_R)),
        ("hyperbolic", _intrinsic(3, 2.0, _W_SINH)),
    ]
    a = Annulus(1.0, 3.0)
    details = []
    passed = True
    for name, c in cases:
        r1 = ode_residual(c, a, 1024)
        r2 = ode_residual(c, a, 2048)
        ratio = r1 / r2 if r2 > 0.0 else math.inf
        details.append(f"{name}: {r1:.3g}->{r2:.3g} ratio={ratio:.2f}")
        if ratio < 3.5:
            passed = False
    return CheckResult(
        "ode-residual-order",
        "potential satisfies the radial drift equation at second order",
        passed,
        "; ".join(details),
    )


def check_power_law_threshold(seed: int = 0) -> CheckResult:
    """Intrinsic w=r is parabolic exactly when p >= m; no unknowns allowed."""
    wrong = []
    unknowns = 0
    for m in range(2, 7):
        for k in range(9):  # p = 2, 2.5, ..., 6
            p = 2.0 + 0.5 * k
            v = classify(_intrinsic(m, p, _W_R), "intrinsic")
            if v.is_inconclusive:
                unknowns += 1
            expect_parabolic = p >= m
            if v.is_parabolic != expect_parabolic or v.is_hyperbolic == expect_parabolic:
                wrong.append((m, p, v.kind))
    passed = not wrong and unknowns == 0
    return CheckResult(
        "power-law-threshold",
        "flat intrinsic verdicts flip from hyperbolic to parabolic at p = m",
        passed,
        f"misclassified={wrong} unknowns={unknowns}",
    )


def _random_tuples(seed: int):
    rng = random.Random(seed)
    satisfying = []
    violating = []
    for _ in range(20):
        m = rng.randint(2, 5)
        b = -rng.uniform(0.25, 4.0)
        p_t = rng.uniform(2.25, 4.0)
        target = (m - 1) * math.sqrt(-b)
        frac = rng.uniform(0.1, 0.85)
        split = rng.uniform(0.2, 0.8)
        h0 = frac * split * target / m
        lam0 = frac * (1.0 - split) * target / (p_t - 2.0)
        satisfying.append((m, b, h0, lam0, p_t))
    for _ in range(20):
        m = rng.randint(2, 5)
        b = -rng.uniform(0.25, 4.0)
        p_t = rng.uniform(2.25, 4.0)
        overshoot = rng.uniform(1.15, 2.0)
        total = overshoot * (m + p_t - 2.0) * math.sqrt(-b)
        split = rng.uniform(0.2, 0.8)
        h0 = split * total / m
        lam0 = (1.0 - split) * total / (p_t - 2.0)
        violating.append((m, b, h0, lam0, p_t))
    return satisfying, violating


def check_constant_bounds_end_to_end(seed: int = 0) -> CheckResult:
    """Constant-bound inequality implies hyperbolic verdicts; gross violations
    fail the balance check and stay inconclusive."""
    satisfying, violating = _random_tuples(seed)
    # fixed thin-margin instance: the convexity term nearly saturates the
    # inequality, so any error in its coefficient flips the verdict
    satisfying.append((3, -1.0, 0.1, 1.65, 3.0))
    failures = []
    for m, b, h0, lam0, p_t in satisfying:
        for p in (2.0, p_t):
            v = classify(_extrinsic(m, p, b, h0, lam0), "extrinsic")
            if not v.is_hyperbolic:
                failures.append(("sat", m, b, p, v.kind))
    for m, b, h0, lam0, p_t in violating:
        v = classify(_extrinsic(m, p_t, b, h0, lam0), "extrinsic")
        if not v.is_inconclusive or v.is_parabolic:
            failures.append(("viol", m, b, p_t, v.kind))
        elif v.balance is None or v.balance.ok:
            failures.append(("viol-balance", m, b, p_t, v.kind))
    return CheckResult(
        "constant-bounds-end-to-end",
        "40 random constant-bound constellations classify as the margin predicts",
        not failures,
        f"failures={failures[:4]}{'...' if len(failures) > 4 else ''}",
    )


def check_lower_bound_consistency(seed: int = 0) -> CheckResult:
    """Comparison bound never exceeds the exact capacity; ties at p = 2."""
    a = Annulus(1.0, 2.0)
    failures = []
    worst_gap = 0.0
    for m, p, w in ORACLE_TUPLES:
        c = _intrinsic(m, p, w)
        exact = exact_model_pcapacity(m, w, p, a)
        bound = pcap_lower_bound(c, a, intrinsic_boundary_flux(c))
        if bound.value > exact.value * (1.0 + 1e-9):
            failures.append(("above", m, p))
        if p == 2.0:
            gap = abs(bound.value - exact.value) / exact.value
            worst_gap = max(worst_gap, gap)
            if gap > 1e-8:
                failures.append(("p2-gap", m, p, gap))
    return CheckResult(
        "lower-bound-consistency",
        "comparison bound stays below the exact capacity, tight at p = 2",
        not failures,
        f"worst_p2_gap={worst_gap:.3g} failures={failures}",
    )


def check_normalization_invariance(seed: int = 0) -> CheckResult:
    """The weight's lower integration limit must not leak into results."""
    cases = [
        ("intrinsic", _intrinsic(3, 2.0, _W_R)),
        ("extrinsic", _extrinsic(3, 3.0, -1.0, 0.1, 0.2)),
    ]
    a = Annulus(1.0, 2.0)
    worst = 0.0
    verdict_stable = True
    for name, c in cases:
        base_psi = dirichlet_potential(c, a, 1.5, lower_limit=c.rho)
        base_cap = drifted_capacity(c, a, lower_limit=c.rho)
        mode = "intrinsic" if name == "intrinsic" else "extrinsic"
        base_kind = classify(c, mode, lower_limit=c.rho).kind
        for limit in (c.rho, 1.0, 2.0):
            psi = dirichlet_potential(c, a, 1.5, lower_limit=limit)
            capv = drifted_capacity(c, a, lower_limit=limit)
            worst = max(
                worst,
                abs(psi - base_psi) / max(abs(base_psi), 1e-300),
                abs(capv.value - base_cap.value) / base_cap.value,
            )
            if classify(c, mode, lower_limit=limit).kind != base_kind:
                verdict_stable = False
    passed = worst <= 1e-9 and verdict_stable
    return CheckResult(
        "normalization-invariance",
        "potential, capacity and verdicts ignore the weight normalization",
        passed,
        f"worst_rel={worst:.3g} verdicts_stable={verdict_stable}",
    )


def check_monotonicity(seed: int = 0) -> CheckResult:
    """psi is monotone in r; psi and Cap_L strictly decrease in R."""
    constellations = [
        _intrinsic(3, 2.0, _W_R),
        _intrinsic(2, 2.0, _W_R),
        _intrinsic(3, 3.0, _W_SINH),
        _intrinsic(4, 2.5, ModelSpace(4, SpaceForm(-1.0)).warping),
        _extrinsic(3, 3.0, -1.0, 0.1, 0.2),
        _extrinsic(2, 2.5, -4.0, 0.3, 0.5, g=0.9),
    ]
    failures = []
    r_grid = [2.0 + 0.5 * i for i in range(10)]
    for idx, c in enumerate(constellations):
        table = potential_table(c, Annulus(1.0, 2.0), [1.0 + i / 128.0 for i in range(129)])
        if any(b < a for a, b in zip(table.values, table.values[1:])):
            failures.append((idx, "psi-not-monotone"))
        prev_psi = math.inf
        prev_cap = math.inf
        for R in r_grid:
            psi = dirichlet_potential(c, Annulus(1.0, R), 1.5)
            capv = drifted_capacity(c, Annulus(1.0, R)).value
            if not psi < prev_psi:
                failures.append((idx, "psi-not-decreasing-in-R", R))
            if not capv < prev_cap:
                failures.append((idx, "cap-not-decreasing-in-R", R))
            prev_psi, prev_cap = psi, capv
    return CheckResult(
        "monotonicity",
        "psi monotone in r; psi and Cap_L strictly decreasing in R (6 cases)",
        not failures,
        f"failures={failures[:4]}{'...' if len(failures) > 4 else ''}",
    )


def check_determinism(seed: int = 0) -> CheckResult:
    """Sweep and table CSV bytes are identical across repeated runs."""
    sweep_job = JobConfig(
        task="sweep", rho=1.0,
        sweep={"m": [2.0, 3.0], "p": [2.0, 3.0], "b": [-1.0],
               "h0": [0.1], "lambda0": [0.0, 0.2]},
        numerics=Numerics(),
    )
    first = sweep_csv(sweep_job)
    second = sweep_csv(sweep_job)
    table_job = JobConfig(
        task="table", mode="intrinsic", m=3, n=3, p=2.0, rho=1.0, R=2.0,
        warping=_W_R, numerics=Numerics(),
    )
    t_first = table_csv(table_job, 17)
    t_second = table_csv(table_job, 17)
    passed = first == second and t_first == t_second
    return CheckResult(
        "determinism",
        "repeated sweep and table runs emit byte-identical CSV",
        passed,
        f"sweep_bytes={len(first)} table_bytes={len(t_first)} identical={passed}",
    )


ALL_CHECKS = (
    check_newtonian_annulus,
    check_oracle_equivalence,
    check_ode_residual,
    check_power_law_threshold,
    check_constant_bounds_end_to_end,
    check_lower_bound_consistency,
    check_normalization_invariance,
    check_monotonicity,
    check_determinism,
)


def run_all(seed: int = 0) -> list[CheckResult]:
    """Run the full suite in order; never raises, failures are results."""
    results = []
    for check in ALL_CHECKS:
        try:
            results.append(check(seed=seed))
        except Exception as exc:  # a crash is a failure, not an abort
            results.append(CheckResult(
                check.__name__, check.__doc__.splitlines()[0] if check.__doc__ else "",
                False, f"raised {type(exc).__name__}: {exc}",
            ))
    return results
