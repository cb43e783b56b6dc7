import math

import pytest

from caplab.constellation import (
    Annulus,
    Bounds,
    Constellation,
    LambdaWeight,
    check_balanced,
    lambda_weight,
)
from caplab.expressions import constant, parse
from caplab.models import ExpressionWarping, ModelSpace, SpaceForm

SINH1 = 1.1752011936438014
COTH1 = 1.3130352854993312


def intrinsic(m, p, warping, rho=1.0):
    return Constellation(m=m, n=m, p=p, model=ModelSpace(m, warping),
                         bounds=Bounds.intrinsic(), rho=rho)


def with_bounds(m, p, warping, h, lam, g=1.0, n=None, rho=1.0):
    return Constellation(
        m=m, n=n if n is not None else m + 1, p=p, model=ModelSpace(m, warping),
        bounds=Bounds(constant(g), constant(h), constant(lam)), rho=rho,
    )


W_R = ExpressionWarping(parse("r"))


def test_bounds_trivial():
    assert Bounds.intrinsic().trivial
    assert not Bounds(constant(1.0), constant(0.1), constant(0.0)).trivial
    assert not Bounds(parse("0.9"), constant(0.0), constant(0.0)).trivial


def test_bounds_g_validation():
    with pytest.raises(ValueError):
        Bounds(parse("1.5"), constant(0.0), constant(0.0)).validate_g(1.0, 10.0)
    with pytest.raises(ValueError):
        Bounds(parse("r - 2"), constant(0.0), constant(0.0)).validate_g(1.0, 10.0)
    Bounds(parse("1/(1 + r^2)"), constant(0.0), constant(0.0)).validate_g(1.0, 10.0)


def test_annulus_validation():
    a = Annulus(1.0, 2.0)
    assert a.finite
    assert not Annulus(1.0, math.inf).finite
    with pytest.raises(ValueError):
        Annulus(0.0, 2.0)
    with pytest.raises(ValueError):
        Annulus(2.0, 2.0)


def test_constellation_validation():
    with pytest.raises(ValueError):
        intrinsic(3, 1.5, W_R)  # p below 2
    with pytest.raises(ValueError):
        with_bounds(3, 2.0, W_R, 0.0, 0.0, n=2)  # n < m
    with pytest.raises(ValueError):
        Constellation(m=3, n=3, p=2.0, model=ModelSpace(2, W_R),
                      bounds=Bounds.intrinsic(), rho=1.0)  # model dim mismatch
    with pytest.raises(ValueError):
        intrinsic(3, 2.0, W_R, rho=0.0)


def test_balance_intrinsic_flat():
    c = intrinsic(3, 2.0, W_R)
    assert c.balance(1.0) == pytest.approx(3.0, rel=1e-15)


def test_balance_h_equals_eta_cancels_at_p2():
    # at p = 2 the lambda term drops out and M = m (eta - h)
    c = Constellation(
        m=3, n=4, p=2.0, model=ModelSpace(3, SpaceForm(-1.0)),
        bounds=Bounds(constant(1.0), parse("coth(r)"), parse("7")), rho=1.0,
    )
    for r in (0.7, 1.3, 2.9):
        assert c.balance(r) == pytest.approx(0.0, abs=1e-12)


def test_balance_arithmetic():
    c = with_bounds(3, 3.0, SpaceForm(-1.0), 0.1, 0.2)
    assert c.balance(1.0) == pytest.approx(4.0 * COTH1 - 0.5, rel=1e-12)


def test_balance_linear_in_h_and_lambda():
    base = with_bounds(3, 3.0, SpaceForm(-1.0), 0.0, 0.0)
    for h0, lam0 in [(0.3, 0.0), (0.0, 0.4), (0.2, 0.5)]:
        c = with_bounds(3, 3.0, SpaceForm(-1.0), h0, lam0)
        for r in (0.8, 1.5, 3.0):
            want = base.balance(r) - 3.0 * h0 - (3.0 - 2.0) * lam0
            assert c.balance(r) == pytest.approx(want, rel=1e-12)


def test_check_balanced_flat_intrinsic():
    assert check_balanced(intrinsic(3, 2.0, W_R), Annulus(1.0, 10.0)).ok


def test_check_balanced_violation_location():
    # M = 3 (1/r - 1) < 0 for every r > 1, so the first interior grid point fails
    c = with_bounds(3, 2.0, W_R, 1.0, 0.0, n=3)
    report = check_balanced(c, Annulus(1.0, 10.0))
    assert not report.ok
    assert report.violation_at > 1.0
    assert report.violation_at < 1.01
    assert report.value < 0.0


def test_check_balanced_constant_bound_instance():
    c = with_bounds(3, 3.0, SpaceForm(-1.0), 0.1, 0.2)
    assert check_balanced(c, Annulus(1.0, math.inf)).ok


def test_drift_vanishes_intrinsic_p2():
    c = intrinsic(3, 2.0, W_R)
    for r in (0.5, 1.0, 1.7, 4.0):
        assert c.drift_coefficient(r) == pytest.approx(0.0, abs=1e-14)


def test_drift_intrinsic_general_p():
    c = intrinsic(3, 3.0, W_R)
    assert c.drift_coefficient(2.0) == pytest.approx(-0.5, rel=1e-13)


def test_drift_direct_substitution():
    c = with_bounds(3, 2.0, W_R, 1.0, 0.0, n=3)
    assert c.drift_coefficient(1.0) == pytest.approx(-3.0, rel=1e-13)


def test_lambda_weight_flat_closed_form():
    # intrinsic m=3, p=2, w=r: Lambda(r) = r^-2 with lower limit 1
    c = intrinsic(3, 2.0, W_R)
    assert lambda_weight(c, 2.0, 1.0) == pytest.approx(0.25, rel=1e-10)


def test_lambda_weight_at_lower_limit_is_warping():
    c = with_bounds(3, 3.0, SpaceForm(-1.0), 0.1, 0.2)
    assert lambda_weight(c, 1.0, 1.0) == pytest.approx(SINH1, rel=1e-15)
    assert lambda_weight(c, 2.5, 2.5) == pytest.approx(SpaceForm(-1.0).value(2.5), rel=1e-15)


def test_lambda_weight_sinh_closed_form():
    # intrinsic m=2, p=3: Lambda(2) = sinh(2)^(-1/2) sinh(1)^(3/2)
    c = intrinsic(2, 3.0, ExpressionWarping(parse("sinh(r)")))
    assert lambda_weight(c, 2.0, 1.0) == pytest.approx(0.66896425956524702, rel=1e-10)


def test_lambda_weight_lower_limit_covariance():
    c = with_bounds(3, 3.0, SpaceForm(-1.0), 0.1, 0.2)
    lw1 = LambdaWeight(c, 1.0)
    lw2 = LambdaWeight(c, 2.0)
    ratios = [lw1(r) / lw2(r) for r in (1.0, 1.5, 2.0, 3.0, 5.0)]
    for q in ratios[1:]:
        assert q == pytest.approx(ratios[0], rel=1e-8)


def test_lambda_weight_intrinsic_power_form():
    # Lambda_rho(r) w(rho)^(-(m+p-2)/(p-1)) = w(r)^(-(m-1)/(p-1))
    m, p = 3, 3.0
    c = intrinsic(m, p, ExpressionWarping(parse("sinh(r)")))
    lw = LambdaWeight(c, 1.0)
    e0 = (m + p - 2.0) / (p - 1.0)
    for r in (1.0, 1.4, 2.0, 2.7):
        want = math.sinh(r) ** (-(m - 1.0) / (p - 1.0))
        got = lw(r) * math.sinh(1.0) ** -e0
        assert got == pytest.approx(want, rel=1e-8)
