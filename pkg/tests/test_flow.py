import math

import numpy as np
import pytest

from coaglab.density import catalog_density, normalize_to_class
from coaglab.errors import CharacteristicCrossingError, NonAdmissibleTransformError
from coaglab.flow import (
    FlowState, characteristic_foot, duhamel_residual_const, evolve, evolve_add,
    evolve_const, evolve_mult, forward_characteristic, semigroup,
)
from coaglab.metrics import weighted_sup
from coaglab.transforms import (
    BERNSTEIN, LAPLACE, TransformCurve, closed_form, default_etas, difference,
    kernel_transform,
)

ETAS = default_etas()
SUB = np.geomspace(1e-3, 1e3, 50)


def g_add(eta):
    """``sqrt(1 + 2η) - 1`` without cancellation."""
    return 2 * eta / (np.sqrt(1 + 2 * eta) + 1)


def plain(curve):
    """Values only, so evaluation goes through interpolation."""
    return TransformCurve(curve.etas, curve.values, curve.kind)


@pytest.fixture(scope="module")
def const_pair():
    g1 = normalize_to_class(catalog_density("exp"), "const")
    g2 = normalize_to_class(catalog_density("gamma(2,2)"), "const")
    return kernel_transform(g1, "const", ETAS), kernel_transform(g2, "const", ETAS)


@pytest.fixture(scope="module")
def add_pair():
    g1 = catalog_density("G_add")
    g2 = normalize_to_class(catalog_density("gamma(2,2)"), "add")
    return kernel_transform(g1, "add", ETAS), kernel_transform(g2, "add", ETAS)


# -- fixed points and identities ------------------------------------------

@pytest.mark.parametrize("tau", [0.5, 2.0, 5.0, 10.0])
def test_constant_profile_is_stationary(tau):
    u0 = closed_form("const_profile_laplace", ETAS)
    u = evolve_const(u0, tau)
    np.testing.assert_allclose(u.values, 1 / (1 + ETAS), rtol=1e-10)


@pytest.mark.parametrize("tau", [0.5, 2.0, 5.0])
def test_additive_profile_is_stationary(tau):
    u0 = closed_form("G_add_bernstein", ETAS)
    exact = g_add(ETAS)
    np.testing.assert_allclose(evolve_add(u0, tau).values, exact, rtol=1e-10)
    # from interpolated samples of the profile; targets stay inside the table
    np.testing.assert_allclose(evolve_add(plain(u0), tau, SUB).values, g_add(SUB), rtol=1e-6)


def test_multiplicative_profile_is_stationary():
    u0 = closed_form("G_add_bernstein", ETAS)
    np.testing.assert_allclose(evolve_mult(u0, 3.0).values, g_add(ETAS), rtol=1e-10)


@pytest.mark.parametrize("kernel", ["const", "add", "mult"])
def test_zero_time_is_identity(kernel, const_pair, add_pair):
    u0 = const_pair[1] if kernel == "const" else add_pair[1]
    u = evolve(kernel, u0, 0.0)
    np.testing.assert_allclose(u.values, u0.values, rtol=1e-14)


def test_negative_time_rejected(const_pair, add_pair):
    with pytest.raises(ValueError):
        evolve_const(const_pair[0], -1.0)
    with pytest.raises(ValueError):
        evolve_add(add_pair[0], -1.0)


def test_const_semigroup(const_pair):
    u0 = const_pair[1]
    once = evolve_const(u0, 2.5)
    twice = evolve_const(evolve_const(u0, 1.0), 1.5)
    np.testing.assert_allclose(twice.values, once.values, rtol=1e-8)
    # from re-interpolated intermediate values (cubic interpolation error);
    # targets stay inside the table
    twice_plain = evolve_const(plain(evolve_const(u0, 1.0)), 1.5, SUB)
    np.testing.assert_allclose(twice_plain.values, once.at(SUB).values, rtol=1e-6)


def test_add_semigroup(add_pair):
    u0 = add_pair[1]
    once = evolve_add(u0, 2.5)
    twice = evolve_add(evolve_add(u0, 1.0), 1.5)
    np.testing.assert_allclose(twice.values, once.values, rtol=1e-8)
    twice_plain = evolve_add(plain(evolve_add(u0, 1.0)), 1.5, SUB)
    np.testing.assert_allclose(twice_plain.values, once.at(SUB).values, rtol=1e-6)


def test_mult_delegates_to_add_bitwise():
    g = normalize_to_class(catalog_density("gamma(1,3)"), "mult")
    u0 = kernel_transform(g, "mult", ETAS)
    a = evolve_add(u0, 2.0)
    m = evolve_mult(u0, 2.0)
    assert np.array_equal(a.values, m.values)
    assert np.array_equal(a.remainder, m.remainder)


def test_launch_method_agrees_with_foot(add_pair):
    u0 = add_pair[1]
    foot = evolve_add(u0, 2.0)
    launch = evolve_add(u0, 2.0, method="launch")
    np.testing.assert_allclose(launch.values, foot.values, rtol=1e-8)


# -- closed forms against the ODE fallback ---------------------------------

@pytest.mark.parametrize("tau", [0.5, 1.0, 2.0])
def test_const_closed_form_matches_ode(const_pair, tau):
    u0 = const_pair[1]
    closed = evolve_const(u0, tau, SUB)
    ode = evolve_const(u0, tau, SUB, method="ode")
    np.testing.assert_allclose(ode.values, closed.values, rtol=1e-8)


@pytest.mark.parametrize("tau", [0.5, 1.0, 2.0])
def test_add_closed_form_matches_ode(add_pair, tau):
    u0 = add_pair[1]
    closed = evolve_add(u0, tau, SUB)
    ode = evolve_add(u0, tau, SUB, method="ode")
    np.testing.assert_allclose(ode.values, closed.values, rtol=1e-6)


def test_unknown_method_rejected(const_pair, add_pair):
    with pytest.raises(ValueError):
        evolve_const(const_pair[0], 1.0, method="magic")
    with pytest.raises(ValueError):
        evolve_add(add_pair[0], 1.0, method="magic")


# -- structural bounds ------------------------------------------------------

@pytest.mark.parametrize("tau", [0.25, 1.0, 3.0, 5.0])
def test_bernstein_bounds_on_evolved_curves(add_pair, tau):
    for u0 in add_pair:
        u = evolve_add(u0, tau)
        assert np.all(u.values <= u.etas * (1 + 1e-12))
        assert np.all(u.slopes <= 1 + 1e-12)
        assert np.all(u.slopes >= 0)


@pytest.mark.parametrize("tau", [0.5, 2.0, 5.0])
def test_backward_foot_bound(add_pair, tau):
    for u0 in add_pair:
        foot = characteristic_foot(ETAS, tau, u0)
        assert np.all(foot <= ETAS * math.exp(-tau / 2) * (1 + 1e-12))
        assert np.all(foot > 0)


def test_foot_at_zero_time(add_pair):
    np.testing.assert_array_equal(characteristic_foot(SUB, 0.0, add_pair[0]), SUB)


def test_foot_round_trip_on_stationary_flow():
    u0 = closed_form("G_add_bernstein", ETAS)
    eta, tau = 4.0, 2.0
    foot = characteristic_foot(np.array([eta]), tau, u0)[0]
    u_foot = math.sqrt(1 + 2 * foot) - 1
    forward = foot * math.exp(tau) + u_foot * (math.exp(tau / 2) - math.exp(tau))
    assert forward == pytest.approx(eta, rel=1e-8)


@pytest.mark.parametrize("tau", [0.5, 2.0, 4.0])
def test_forward_map_expands(add_pair, tau):
    eta0 = np.geomspace(1e-5, 1e4, 2000)
    for u0 in add_pair:
        img, _ = forward_characteristic(eta0, tau, u0)
        d = np.diff(img) / np.diff(eta0)
        assert np.all(d >= math.exp(tau / 2) * (1 - 1e-6))


# -- conserved quantities ---------------------------------------------------

@pytest.mark.parametrize("tau", [0.0, 1.0, 2.5, 5.0])
def test_const_moments_pinned(const_pair, tau):
    for u0 in const_pair:
        u = evolve_const(u0, tau)
        eta = u.etas[:5]
        # U = 1 - M_1 η + O(η²) with M_0 = M_1 = 1
        assert np.all(np.abs(u.values[:5] - 1) <= 1e-4)
        assert np.all(np.abs((1 - u.values[:5]) / eta - 1) <= 1e-4)


@pytest.mark.parametrize("tau", [0.0, 1.0, 2.5, 5.0])
def test_add_moments_pinned(add_pair, tau):
    for u0 in add_pair:
        u = evolve_add(u0, tau)
        eta = u.etas[:5]
        # U = M_1 η - M_2 η²/2 + O(η³)
        assert np.all(np.abs(u.values[:5] / eta - 1) <= 1e-4)
        assert np.all(np.abs((u.values[:5] - eta) / eta ** 2 + 0.5) <= 1e-4)
        assert np.all(np.abs(u.slopes[:5] - 1) <= 1e-4)


# -- semigroup T_τ and the Duhamel certificate ------------------------------

@pytest.mark.parametrize("kappa", [1.25, 1.5, 2.0])
@pytest.mark.parametrize("tau", [0.3, 1.0, 2.0])
def test_semigroup_norm_identity(const_pair, kappa, tau):
    v = difference(*const_pair)
    # T_τ v on the grid shifted by e^τ samples v at the original nodes
    shifted = v.etas * math.exp(tau)
    tv = semigroup(lambda x: np.interp(x, v.etas, v.values), tau)(shifted)
    moved = TransformCurve(shifted, tv, LAPLACE, True)
    lhs = weighted_sup(moved, kappa, 2.0, refine=False)
    rhs = math.exp(-(1 + kappa) * tau) * weighted_sup(v, kappa, 2.0, refine=False)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_duhamel_identical_inputs_vanish(const_pair):
    r = duhamel_residual_const((const_pair[0], const_pair[0]), 1.0, SUB)
    assert np.max(np.abs(r.values)) == 0.0


def test_duhamel_certificate(const_pair):
    r = duhamel_residual_const(const_pair, 1.0, nodes=200)
    assert np.max(np.abs(r.values)) <= 1e-4


def test_duhamel_small_time(const_pair):
    r = duhamel_residual_const(const_pair, 1e-3, SUB, nodes=20)
    assert np.max(np.abs(r.values)) <= 1e-10


# -- admissibility ----------------------------------------------------------

def test_laplace_values_must_lie_in_unit_interval():
    bad = TransformCurve(SUB, 1.5 / (1 + SUB), LAPLACE)
    with pytest.raises(NonAdmissibleTransformError):
        evolve_const(bad, 1.0)


def test_unnormalized_input_rejected():
    g = normalize_to_class(catalog_density("gamma(2,2)"), "const").scaled(2.0)
    u = kernel_transform(g, "const", SUB)
    with pytest.raises(NonAdmissibleTransformError):
        evolve_const(u, 1.0)


def test_wrong_transform_kind_rejected(const_pair, add_pair):
    with pytest.raises(NonAdmissibleTransformError):
        evolve_add(const_pair[0], 1.0)
    with pytest.raises(NonAdmissibleTransformError):
        evolve_const(add_pair[0], 1.0)


def test_corrupted_input_crosses_characteristics():
    # slope 3 at the origin violates U' ≤ 1
    bad = TransformCurve(ETAS, 3 * g_add(ETAS), BERNSTEIN)
    with pytest.raises(CharacteristicCrossingError):
        evolve_add(bad, 2.0, SUB)


# -- state object -----------------------------------------------------------

def test_flow_state(add_pair):
    s0 = FlowState.start("add", add_pair[1])
    assert s0.tau == 0.0
    s2 = s0.at(1.0).at(2.0)
    assert s2.tau == 2.0
    np.testing.assert_array_equal(s2.curve.values, evolve_add(add_pair[1], 2.0).values)
    assert s2.initial_curve is add_pair[1]
