import math

import pytest

from caplab.capacity import (
    CapacityEstimate,
    PotentialTable,
    dirichlet_potential,
    discrete_energy_oracle,
    drifted_capacity,
    drifted_capacity_limit,
    exact_model_pcapacity,
    intrinsic_boundary_flux,
    ode_residual,
    pcap_lower_bound,
    potential_table,
    residual_from_table,
    verify_comparison_inequality,
)
from caplab.constellation import Annulus, Bounds, Constellation
from caplab.errors import BalanceViolation, PreconditionError
from caplab.expressions import constant, parse
from caplab.models import ExpressionWarping, ModelSpace, SpaceForm

W_R = ExpressionWarping(parse("r"))
W_SINH = ExpressionWarping(parse("sinh(r)"))
A12 = Annulus(1.0, 2.0)

# reference values computed at 40-digit precision from the antiderivatives
CAP_SINH_ANNULUS = 45.576472051551502  # 4 pi / (coth 1 - coth 2)
CAP_SINH_LIMIT = 40.143623407547188  # 4 pi / (coth 1 - 1)
CAP_P3_FLAT = 26.155254000547565  # 4 pi / (ln 2)^2


def intrinsic(m, p, warping, rho=1.0):
    return Constellation(m=m, n=m, p=p, model=ModelSpace(m, warping),
                         bounds=Bounds.intrinsic(), rho=rho)


def test_potential_boundary_values():
    c = intrinsic(3, 2.0, W_R)
    assert dirichlet_potential(c, A12, 1.0) == 0.0
    assert dirichlet_potential(c, A12, 2.0) == 1.0


def test_potential_flat_closed_form():
    c = intrinsic(3, 2.0, W_R)
    # psi(r) = (1 - 1/r) / (1 - 1/2)
    assert dirichlet_potential(c, A12, 1.5) == pytest.approx(2.0 / 3.0, rel=1e-10)


def test_potential_log_case():
    c = intrinsic(2, 2.0, W_R)
    val = dirichlet_potential(c, Annulus(1.0, math.e), math.sqrt(math.e))
    assert val == pytest.approx(0.5, rel=1e-10)


def test_potential_requires_finite_annulus():
    c = intrinsic(3, 2.0, W_R)
    with pytest.raises(ValueError):
        dirichlet_potential(c, Annulus(1.0, math.inf), 1.5)
    with pytest.raises(ValueError):
        dirichlet_potential(c, A12, 3.0)


def test_potential_table_monotone_exact_endpoints():
    c = intrinsic(3, 2.5, W_SINH)
    grid = [1.0 + i / 64.0 for i in range(65)]
    table = potential_table(c, A12, grid)
    assert table.values[0] == 0.0 and table.values[-1] == 1.0
    assert all(b >= a for a, b in zip(table.values, table.values[1:]))


def test_potential_table_type_invariants():
    with pytest.raises(ValueError):
        PotentialTable((1.0, 2.0), (0.1, 1.0))
    with pytest.raises(ValueError):
        PotentialTable((1.0, 1.5, 2.0), (0.0, 0.7, 0.5))


def test_drifted_capacity_newtonian():
    est = drifted_capacity(intrinsic(3, 2.0, W_R), A12)
    assert est.value == pytest.approx(8.0 * math.pi, rel=1e-10)


def test_drifted_capacity_hyperbolic():
    est = drifted_capacity(intrinsic(3, 2.0, W_SINH), A12)
    assert est.value == pytest.approx(CAP_SINH_ANNULUS, rel=1e-9)


def test_drifted_capacity_blows_up_for_thin_annulus():
    est = drifted_capacity(intrinsic(3, 2.0, W_R), Annulus(1.0, 1.0 + 1e-6))
    assert est.value > 1e6


def test_drifted_capacity_limit_flat():
    est = drifted_capacity_limit(intrinsic(3, 2.0, W_R))
    assert est.value == pytest.approx(4.0 * math.pi, rel=1e-10)


def test_drifted_capacity_limit_parabolic_plane():
    est = drifted_capacity_limit(intrinsic(2, 2.0, W_R))
    assert est.value == 0.0
    assert est.method == "divergent-tail"


def test_drifted_capacity_limit_hyperbolic():
    est = drifted_capacity_limit(intrinsic(3, 2.0, W_SINH))
    assert est.value == pytest.approx(CAP_SINH_LIMIT, rel=1e-9)


def test_exact_model_pcapacity_matches_drifted_at_p2():
    for m, w in [(3, W_R), (3, W_SINH), (2, W_R), (4, W_SINH)]:
        exact = exact_model_pcapacity(m, w, 2.0, A12)
        drift = drifted_capacity(intrinsic(m, 2.0, w), A12)
        assert exact.value == pytest.approx(drift.value, rel=1e-9), (m,)


def test_exact_model_pcapacity_p3_flat():
    est = exact_model_pcapacity(3, W_R, 3.0, A12)
    assert est.value == pytest.approx(CAP_P3_FLAT, rel=1e-10)


def test_exact_model_pcapacity_infinite_annulus():
    est = exact_model_pcapacity(2, W_R, 2.0, Annulus(1.0, math.inf))
    assert est.value == 0.0 and est.method == "divergent-tail"
    est = exact_model_pcapacity(3, W_R, 2.0, Annulus(1.0, math.inf))
    assert est.value == pytest.approx(4.0 * math.pi, rel=1e-10)


def test_exact_model_pcapacity_allows_p_below_2():
    est = exact_model_pcapacity(3, W_R, 1.5, A12)
    # omega * (int_1^2 t^-4)^(1-p) with exponent (1-m)/(p-1) = -4
    integral = (1.0 - 2.0**-3) / 3.0
    assert est.value == pytest.approx(4.0 * math.pi * integral**-0.5, rel=1e-10)
    with pytest.raises(ValueError):
        exact_model_pcapacity(3, W_R, 1.0, A12)


def test_energy_oracle_agrees_with_newtonian():
    est = discrete_energy_oracle(3, W_R, 2.0, A12, 2000)
    assert est.value == pytest.approx(8.0 * math.pi, rel=3e-3)


def test_energy_oracle_agrees_with_drifted_at_p2():
    for m, w in [(2, W_R), (3, W_SINH)]:
        oracle = discrete_energy_oracle(m, w, 2.0, A12, 2000)
        drift = drifted_capacity(intrinsic(m, 2.0, w), A12)
        assert oracle.value == pytest.approx(drift.value, rel=0.01)


def test_energy_oracle_geometric_grid_for_wide_annuli():
    wide = Annulus(0.1, 20.0)
    oracle = discrete_energy_oracle(3, W_R, 2.0, wide, 4000)
    exact = exact_model_pcapacity(3, W_R, 2.0, wide)
    assert oracle.value == pytest.approx(exact.value, rel=0.01)


def test_energy_oracle_preconditions():
    with pytest.raises(ValueError):
        discrete_energy_oracle(1, W_R, 2.0, A12, 2000)
    with pytest.raises(ValueError):
        discrete_energy_oracle(3, W_R, 2.0, A12, 8)
    with pytest.raises(ValueError):
        discrete_energy_oracle(3, W_R, 2.0, Annulus(1.0, math.inf), 100)


def test_lower_bound_tight_at_p2():
    c = intrinsic(3, 2.0, W_R)
    bound = pcap_lower_bound(c, A12, intrinsic_boundary_flux(c))
    assert bound.value == pytest.approx(8.0 * math.pi, rel=1e-10)


def test_lower_bound_below_exact_at_p3():
    c = intrinsic(3, 3.0, W_R)
    bound = pcap_lower_bound(c, A12, 4.0 * math.pi)
    exact = exact_model_pcapacity(3, W_R, 3.0, A12)
    assert bound.value <= exact.value * (1.0 + 1e-9)
    assert bound.value == pytest.approx(exact.value, rel=1e-9)


def test_lower_bound_requires_balance():
    c = Constellation(
        m=3, n=3, p=2.0, model=ModelSpace(3, W_R),
        bounds=Bounds(constant(1.0), constant(1.0), constant(0.0)), rho=1.0,
    )
    with pytest.raises(BalanceViolation):
        pcap_lower_bound(c, A12, 4.0 * math.pi)


def test_lower_bound_flux_validation():
    c = intrinsic(3, 2.0, W_R)
    with pytest.raises(ValueError):
        pcap_lower_bound(c, A12, 0.0)


def test_capacity_estimate_rejects_negative():
    with pytest.raises(ValueError):
        CapacityEstimate(-1.0, 0.0, "bogus")


def test_ode_residual_small_for_flat_harmonic():
    res = ode_residual(intrinsic(3, 2.0, W_R), A12, 4096)
    assert res <= 1e-6


def test_ode_residual_second_order():
    c = intrinsic(3, 3.0, W_R)
    a = Annulus(1.0, 3.0)
    r1 = ode_residual(c, a, 512)
    r2 = ode_residual(c, a, 1024)
    assert 3.0 <= r1 / r2 <= 5.0


def test_residual_of_constant_table_is_zero():
    assert residual_from_table([1.0, 1.5, 2.0], [0.3, 0.3, 0.3], [1.0, 1.0, 1.0]) == 0.0


def test_comparison_inequality_identity_function():
    c = intrinsic(3, 2.0, W_R)
    grid = [1.0 + 0.1 * i for i in range(11)]
    report = verify_comparison_inequality(c, parse("r"), grid)
    assert report.holds


def test_comparison_inequality_boundary_admissible_square():
    c = intrinsic(3, 2.0, W_R)
    grid = [1.0 + 0.1 * i for i in range(11)]
    assert verify_comparison_inequality(c, parse("r^2"), grid).holds


def test_comparison_inequality_on_potential():
    # the annulus potential itself: the chain of estimates is tight intrinsically
    c = intrinsic(3, 2.0, W_R)
    grid = [1.05 + 0.09 * i for i in range(10)]
    assert verify_comparison_inequality(c, parse("2 - 2/r"), grid).holds
    c3 = intrinsic(3, 3.0, W_R)
    assert verify_comparison_inequality(c3, parse("log(r)"), grid).holds


def test_comparison_inequality_rejects_bad_hypotheses():
    c = intrinsic(3, 2.0, W_R)
    grid = [1.2, 1.5, 1.8]
    with pytest.raises(PreconditionError):
        verify_comparison_inequality(c, parse("exp(r)"), grid)  # f'' - f' eta > 0
    with pytest.raises(PreconditionError):
        verify_comparison_inequality(c, parse("-r"), grid)  # decreasing
    extrinsic = Constellation(
        m=3, n=4, p=2.0, model=ModelSpace(3, W_R),
        bounds=Bounds(constant(1.0), constant(0.1), constant(0.0)), rho=1.0,
    )
    with pytest.raises(ValueError):
        verify_comparison_inequality(extrinsic, parse("r"), grid)


def test_psi_and_capacity_decreasing_in_outer_radius():
    c = intrinsic(3, 2.0, W_SINH)
    psis = []
    caps = []
    for R in (2.0, 3.0, 4.0):
        psis.append(dirichlet_potential(c, Annulus(1.0, R), 1.5))
        caps.append(drifted_capacity(c, Annulus(1.0, R)).value)
    assert psis[0] > psis[1] > psis[2]
    assert caps[0] > caps[1] > caps[2]
