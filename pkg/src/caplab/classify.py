"""Hyperbolicity and parabolicity verdicts.

The extrinsic test is one-sided: when the balance function stays
non-negative and the weight has a finite tail integral, the submanifold is
p-hyperbolic; anything else is inconclusive, never parabolic.  The purely
intrinsic test is a genuine equivalence: p-hyperbolic exactly when
int^inf w^(-(m-1)/(p-1)) converges, so a divergent tail does yield a
parabolic verdict there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from . import expressions as ex
from .capacity import drifted_capacity_limit, lambda_tail
from .constellation import (
    Annulus,
    BalanceReport,
    Bounds,
    Constellation,
    LambdaWeight,
    TAIL_HORIZON_DOUBLINGS,
    check_balanced,
)
from .errors import ConfigError, HypothesisViolation, VerificationError
from .expressions import RadialExpr
from .models import (
    ExpressionWarping,
    ModelSpace,
    SpaceForm,
    WarpingFunction,
    match_space_form,
)
from .quadrature import CumulativeIntegral, TailVerdict, classify_tail

__all__ = [
    "Verdict",
    "classify",
    "HadamardCheck",
    "hadamard_check",
    "mp3_2hyperbolic_check",
    "ObstructionReport",
    "immersion_obstruction",
]

P_HYPERBOLIC = "PHyperbolic"
P_PARABOLIC = "PParabolic"
INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Verdict:
    kind: str  # P_HYPERBOLIC | P_PARABOLIC | INCONCLUSIVE
    rule: str = ""
    reason: str = ""
    balance: Optional[BalanceReport] = None
    tail: Optional[TailVerdict] = None
    cap_limit: Optional[object] = None  # CapacityEstimate

    @property
    def is_hyperbolic(self) -> bool:
        return self.kind == P_HYPERBOLIC

    @property
    def is_parabolic(self) -> bool:
        return self.kind == P_PARABOLIC

    @property
    def is_inconclusive(self) -> bool:
        return self.kind == INCONCLUSIVE


def classify(
    c: Constellation,
    mode: str = "extrinsic",
    lower_limit: Optional[float] = None,
    doublings: int = TAIL_HORIZON_DOUBLINGS,
) -> Verdict:
    """Issue a hyperbolicity verdict for the constellation.

    mode "extrinsic": PHyperbolic when the balance check passes and the
    weight tail converges; Inconclusive otherwise, naming the failing
    condition.  mode "intrinsic" (requires trivial bounds and m = n):
    PHyperbolic or PParabolic according to the tail of w^(-(m-1)/(p-1)),
    computed exactly for space forms and pure powers of r; Inconclusive only
    when the numeric tail classifier cannot decide.

    lower_limit moves the weight normalization; verdicts do not depend on it.
    """
    if mode not in ("intrinsic", "extrinsic"):
        raise ConfigError("/mode", f"unknown mode {mode!r}")
    if mode == "intrinsic":
        if not c.is_intrinsic:
            raise ConfigError(
                "/mode", "intrinsic mode requires g = 1, h = 0, lambda = 0 and m = n"
            )
        tail, lw = lambda_tail(c, lower_limit, doublings)
        cap = drifted_capacity_limit(c, lower_limit=lower_limit, doublings=doublings)
        if tail.is_convergent:
            return Verdict(
                P_HYPERBOLIC, rule="intrinsic-warping-tail", tail=tail, cap_limit=cap
            )
        if tail.is_divergent:
            return Verdict(
                P_PARABOLIC,
                rule="intrinsic-warping-tail",
                reason=tail.reason,
                tail=tail,
                cap_limit=cap,
            )
        return Verdict(
            INCONCLUSIVE,
            rule="intrinsic-warping-tail",
            reason=f"weight tail undecided: {tail.reason}",
            tail=tail,
            cap_limit=cap,
        )

    balance = check_balanced(c, Annulus(c.rho, math.inf))
    if not balance.ok:
        return Verdict(
            INCONCLUSIVE,
            rule="balanced-weight-tail",
            reason=(
                f"balance condition fails: M({balance.violation_at:.6g}) = "
                f"{balance.value:.6g} < 0"
            ),
            balance=balance,
        )
    tail, lw = lambda_tail(c, lower_limit, doublings)
    cap = drifted_capacity_limit(c, lower_limit=lower_limit, doublings=doublings)
    if tail.is_convergent:
        return Verdict(
            P_HYPERBOLIC,
            rule="balanced-weight-tail",
            balance=balance,
            tail=tail,
            cap_limit=cap,
        )
    return Verdict(
        INCONCLUSIVE,
        rule="balanced-weight-tail",
        reason=f"weight tail is {tail.kind}: {tail.reason}",
        balance=balance,
        tail=tail,
        cap_limit=cap,
    )


@dataclass(frozen=True)
class HadamardCheck:
    """Outcome of the constant-bound test over a negatively curved model."""

    satisfied: bool
    margin: float
    p_range: Optional[tuple[float, float]]
    verdicts: dict = field(default_factory=dict)


def hadamard_check(
    m: int,
    b: float,
    h0: float,
    lambda0: float,
    p_tilde: float,
    rho: float = 1.0,
) -> HadamardCheck:
    """Test m h0 + (p~ - 2) lambda0 < (m-1) sqrt(-b) and verify end to end.

    On success the full pipeline is exercised: constellations with constant
    bounds over the curvature-b space form are classified at p = 2, the
    midpoint, and p~, and every verdict must come back PHyperbolic.  A
    disagreement would mean the numeric tail classifier contradicts the
    closed-form criterion, which raises VerificationError.
    """
    if b >= 0.0:
        raise ValueError("model curvature b must be negative")
    if p_tilde < 2.0:
        raise ValueError("p~ must be at least 2")
    margin = (m - 1.0) * math.sqrt(-b) - (m * h0 + (p_tilde - 2.0) * lambda0)
    if margin <= 0.0:
        return HadamardCheck(False, margin, None)
    bounds = Bounds(ex.constant(1.0), ex.constant(h0), ex.constant(lambda0))
    verdicts = {}
    for p in (2.0, 0.5 * (2.0 + p_tilde), p_tilde):
        c = Constellation(
            m=m, n=m + 1, p=p, model=ModelSpace(m, SpaceForm(b)), bounds=bounds, rho=rho
        )
        v = classify(c, "extrinsic")
        verdicts[p] = v
        if not v.is_hyperbolic:
            raise VerificationError(
                f"classifier returned {v.kind} at p={p} despite margin {margin:.6g}: "
                f"{v.reason}"
            )
    return HadamardCheck(True, margin, (2.0, p_tilde), verdicts)


def mp3_2hyperbolic_check(
    m: int,
    warping: WarpingFunction,
    h: RadialExpr,
    rho: float,
    doublings: int = TAIL_HORIZON_DOUBLINGS,
) -> TailVerdict:
    """2-hyperbolicity test from convexity alone: tail of G^m / w^(m-1).

    G(r) = exp(int_rho^r h) accumulates the convexity bound; the hypothesis
    h <= w'/w is sampled first and HypothesisViolation names the first
    radius where it fails.
    """
    if isinstance(warping, ExpressionWarping):
        b = match_space_form(warping.expr)
        if b is not None:
            # closed form evaluates stably far beyond expression overflow
            warping = SpaceForm(b)
    model = ModelSpace(m, warping)
    horizon = min(rho * 2.0**doublings, warping.sup_radius * (1.0 - 1e-9))
    samples = 512
    for i in range(samples):
        r = rho * (horizon / rho) ** (i / (samples - 1.0))
        hv = ex.evaluate(h, r)
        eta = model.eta(r)
        if hv > eta + 1e-12 * (1.0 + abs(eta)):
            raise HypothesisViolation(r, hv, eta)
    cum = CumulativeIntegral(lambda t: ex.evaluate(h, t), rho, rel_tol=1e-12)

    def log_f(t: float) -> float:
        return m * cum.value_at(t) - (m - 1.0) * warping.log_value(t)

    def f(t: float) -> float:
        lv = log_f(t)
        return math.exp(lv) if lv <= 709.0 else math.inf

    return classify_tail(f, rho, log_f=log_f, doublings=doublings)


@dataclass(frozen=True)
class ObstructionReport:
    obstruction: bool
    volume_tail: TailVerdict
    curvature_margin: float
    reason: str


def immersion_obstruction(
    m: int,
    boundary_volume: RadialExpr,
    p: float,
    lambda0: float,
    b: float,
    rho: float = 1.0,
) -> ObstructionReport:
    """Obstruction to minimal immersions with bounded second fundamental form.

    Reports an obstruction exactly when the volume-growth tail
    int^inf Vol(S_r)^(-1/(p-1)) diverges (forcing p-parabolicity) while
    (p-2) lambda0 < (m-1) sqrt(-b) (forcing p-hyperbolicity of any such
    immersed image).  An unknown tail yields no obstruction claim.
    """
    if p < 2.0:
        raise ValueError("exponent p must be at least 2")
    if lambda0 <= 0.0:
        raise ValueError("lambda0 must be positive")
    if b >= 0.0:
        raise ValueError("curvature b must be negative")
    exponent = -1.0 / (p - 1.0)
    log_vol = ex.log_of(boundary_volume)

    if log_vol is not None:
        def log_f(t: float) -> float:
            return exponent * ex.evaluate(log_vol, t)
    else:
        def log_f(t: float) -> float:
            return exponent * math.log(ex.evaluate(boundary_volume, t))

    def f(t: float) -> float:
        lv = log_f(t)
        return math.exp(lv) if lv <= 709.0 else math.inf

    tail = classify_tail(f, rho, log_f=log_f)
    margin = (m - 1.0) * math.sqrt(-b) - (p - 2.0) * lambda0
    if tail.is_divergent and margin > 0.0:
        return ObstructionReport(
            True, tail, margin,
            "volume growth forces p-parabolicity while the curvature bound "
            "forces p-hyperbolicity",
        )
    if tail.is_unknown:
        return ObstructionReport(
            False, tail, margin, f"volume-growth tail undecided: {tail.reason}"
        )
    if not tail.is_divergent:
        return ObstructionReport(
            False, tail, margin, "volume-growth integral converges; no parabolicity forced"
        )
    return ObstructionReport(
        False, tail, margin, f"curvature margin {margin:.6g} is not positive"
    )
