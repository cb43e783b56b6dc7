import math

import pytest

from caplab.errors import DomainError, InvalidWarping
from caplab.expressions import parse
from caplab.models import (
    ExpressionWarping,
    ModelSpace,
    SpaceForm,
    match_power,
    match_space_form,
    unit_sphere_area,
    validate_custom_warping,
)

SINH1 = 1.1752011936438014
COTH1 = 1.3130352854993312


def test_unit_sphere_area():
    assert unit_sphere_area(2) == pytest.approx(2.0 * math.pi, rel=1e-14)
    assert unit_sphere_area(3) == pytest.approx(4.0 * math.pi, rel=1e-14)
    assert unit_sphere_area(4) == pytest.approx(2.0 * math.pi**2, rel=1e-14)
    with pytest.raises(ValueError):
        unit_sphere_area(0)


def test_space_form_values():
    assert SpaceForm(0.0).value(2.0) == 2.0
    assert SpaceForm(-1.0).value(1.0) == pytest.approx(SINH1, rel=1e-15)
    assert SpaceForm(1.0).value(math.pi / 2.0) == pytest.approx(1.0, rel=1e-15)
    assert SpaceForm(-4.0).value(1.0) == pytest.approx(math.sinh(2.0) / 2.0, rel=1e-15)


def test_space_form_eta():
    assert SpaceForm(0.0).eta(2.0) == 0.5
    assert SpaceForm(-1.0).eta(1.0) == pytest.approx(COTH1, rel=1e-15)
    assert SpaceForm(1.0).eta(math.pi / 2.0) == pytest.approx(0.0, abs=1e-12)


def test_space_form_domain():
    with pytest.raises(DomainError):
        SpaceForm(1.0).value(3.2)  # beyond pi/sqrt(b)
    with pytest.raises(DomainError):
        SpaceForm(-1.0).value(0.0)
    with pytest.raises(DomainError) as err:
        SpaceForm(-1.0).value(2000.0)
    assert err.value.overflow


def test_radial_curvature_constant_for_space_forms():
    for b in (-1.0, 0.0, 0.25, 1.0):
        ms = ModelSpace(3, SpaceForm(b))
        upper = 2.9 if b <= 0.25 else 3.0  # stay inside (0, pi/sqrt(b))
        for i in range(64):
            r = 0.05 + (upper - 0.05) * i / 63.0
            assert abs(ms.radial_curvature(r) - b) <= 1e-9


def test_radial_curvature_expression_space_forms():
    cases = [("sinh(r)", -1.0), ("r", 0.0), ("sin(0.5*r)/0.5", 0.25)]
    for text, b in cases:
        ms = ModelSpace(2, ExpressionWarping(parse(text)))
        for i in range(32):
            r = 0.1 + 2.7 * i / 31.0
            assert abs(ms.radial_curvature(r) - b) <= 1e-9, text


def test_radial_curvature_custom():
    ms = ModelSpace(2, ExpressionWarping(parse("r")))
    assert ms.radial_curvature(1.0) == 0.0
    ms = ModelSpace(2, ExpressionWarping(parse("r + r^3")))
    assert ms.radial_curvature(1.0) == pytest.approx(-3.0, rel=1e-12)


def test_eta_matches_log_derivative():
    h = 1e-6
    for warping in (SpaceForm(-1.0), SpaceForm(0.25), ExpressionWarping(parse("r + r^3"))):
        ms = ModelSpace(3, warping)
        for i in range(32):
            r = 0.5 + 2.0 * i / 31.0
            fd = (math.log(ms.warping_value(r + h)) - math.log(ms.warping_value(r - h))) / (2.0 * h)
            assert abs(ms.eta(r) - fd) <= 1e-7


def test_sphere_area_values():
    assert ModelSpace(3, ExpressionWarping(parse("r"))).sphere_area(1.0) == pytest.approx(
        4.0 * math.pi, rel=1e-14
    )
    assert ModelSpace(2, ExpressionWarping(parse("r"))).sphere_area(2.0) == pytest.approx(
        4.0 * math.pi, rel=1e-14
    )
    # unit warping value gives the bare unit-sphere area in any dimension
    for m in (2, 3, 4, 7):
        ms = ModelSpace(m, ExpressionWarping(parse("r")))
        assert ms.sphere_area(1.0) == pytest.approx(unit_sphere_area(m), rel=1e-14)


def test_sphere_area_increasing_where_w_increasing():
    ms = ModelSpace(3, SpaceForm(-1.0))
    areas = [ms.sphere_area(0.1 + 0.1 * i) for i in range(40)]
    assert all(b > a for a, b in zip(areas, areas[1:]))


def test_model_dimension_validation():
    with pytest.raises(ValueError):
        ModelSpace(1, SpaceForm(0.0))


def test_custom_warping_axiom_warnings():
    validate_custom_warping(ExpressionWarping(parse("sinh(r)")))  # clean
    with pytest.warns(UserWarning):
        validate_custom_warping(ExpressionWarping(parse("r + 1")))  # w(0) != 0
    with pytest.warns(UserWarning):
        validate_custom_warping(ExpressionWarping(parse("2*r")))  # w'(0) != 1
    with pytest.warns(UserWarning):  # w(0) warning fires before the fatal check
        with pytest.raises(InvalidWarping):
            validate_custom_warping(ExpressionWarping(parse("r - 5")))  # w <= 0 is fatal


def test_log_value_stable_for_large_radii():
    sf = SpaceForm(-1.0)
    assert sf.log_value(1000.0) == pytest.approx(1000.0 - math.log(2.0), rel=1e-12)
    with pytest.raises(DomainError):
        ExpressionWarping(parse("sinh(r)")).log_value(1000.0)


def test_match_space_form():
    assert match_space_form(parse("r")) == 0.0
    assert match_space_form(parse("sinh(r)")) == -1.0
    assert match_space_form(parse("sin(r)")) == 1.0
    assert match_space_form(parse("sinh(2*r)/2")) == -4.0
    assert match_space_form(parse("sin(0.5*r)/0.5")) == 0.25
    assert match_space_form(parse("2*sinh(r)")) is None
    assert match_space_form(parse("r^2")) is None


def test_match_power():
    assert match_power(parse("r")) == (1.0, 1.0)
    assert match_power(parse("r^2")) == (1.0, 2.0)
    assert match_power(parse("2*r^3")) == (2.0, 3.0)
    assert match_power(parse("1/r^2")) == (1.0, -2.0)
    assert match_power(parse("sqrt(r)")) == (1.0, 0.5)
    assert match_power(parse("sinh(r)")) is None
