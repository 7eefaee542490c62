import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dissipator.profile import (
    ProfileError,
    ShearProfile,
    eval_psi,
    eval_u,
    make_profile,
    make_weierstrass_log,
    make_weierstrass_power,
    profile_from_dict,
    profile_from_json,
    third_difference,
    third_difference_closed_form,
    validate_ratio,
)

profiles = st.builds(
    lambda coeffs, mean: ShearProfile(tuple(coeffs), mean=mean),
    st.lists(st.floats(-2, 2, allow_nan=False), min_size=1, max_size=6),
    st.floats(-3, 3, allow_nan=False),
)
ys = st.floats(-10, 10, allow_nan=False)


def test_power_coefficients():
    p = make_weierstrass_power(0.5, 3)
    np.testing.assert_allclose(p.coeffs, [3**-0.5, 3**-1.0, 3**-1.5], rtol=1e-15)
    assert p.coeffs[0] / p.coeffs[1] == pytest.approx(3**0.5)
    assert validate_ratio(make_weierstrass_power(0.99, 8))


def test_log_coefficients():
    p = make_weierstrass_log(1.5, 3)
    np.testing.assert_allclose(p.coeffs, [1.0, 2**-1.5, 3**-1.5], rtol=1e-15)
    q = make_weierstrass_log(1.5, 2)
    assert q.coeffs[0] / q.coeffs[1] == pytest.approx(2**1.5)
    assert validate_ratio(make_weierstrass_log(1.01, 50))


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2, 1.5])
def test_power_domain(alpha):
    with pytest.raises(ProfileError):
        make_weierstrass_power(alpha, 3)


@pytest.mark.parametrize("alpha", [1.0, 2.0, 0.5])
def test_log_domain(alpha):
    with pytest.raises(ProfileError):
        make_weierstrass_log(alpha, 3)


def test_terms_must_be_positive():
    with pytest.raises(ProfileError):
        make_weierstrass_power(0.5, 0)


def test_eval_u_examples():
    assert eval_u(make_weierstrass_power(0.5, 3), 0.0) == 0.0
    assert eval_u(make_weierstrass_power(0.5, 1), math.pi / 6) == pytest.approx(3**-0.5, rel=1e-15)


def test_eval_psi_example():
    assert eval_psi(make_weierstrass_power(0.5, 1), math.pi / 6) == pytest.approx(0.0, abs=1e-16)


def test_psi_derivative_central_difference():
    p = make_weierstrass_power(0.5, 5)
    h = 1e-6
    for y in np.linspace(-3, 3, 13):
        fd = (eval_psi(p, y + h) - eval_psi(p, y)) / h
        assert fd == pytest.approx(eval_u(p, y + h / 2), abs=1e-9)


def test_validate_ratio_examples():
    assert validate_ratio(make_weierstrass_power(0.5, 6))
    assert not validate_ratio(ShearProfile((1.0, 0.1)))
    assert not validate_ratio(ShearProfile((1.0, 2.0)))


def test_third_difference_affine():
    p = ShearProfile((), mean=2.5)
    assert third_difference(p, 0.3, 1.1) == pytest.approx(0.0, abs=1e-12)


def test_third_difference_single_term():
    p = make_weierstrass_power(0.5, 1)
    h = math.pi / 3
    # first mode has frequency 3: (a_1/3) sin(3 (y + 3h/2)) (2 sin(3h/2))**3
    expected = (3**-0.5 / 3) * math.sin(3 * math.pi / 2) * (2 * math.sin(math.pi / 2)) ** 3
    assert third_difference(p, h, 0.0) == pytest.approx(expected, abs=1e-12)
    assert third_difference_closed_form(p, h, 0.0) == pytest.approx(expected, abs=1e-12)


def test_third_difference_rejects_nonpositive_step():
    with pytest.raises(ProfileError):
        third_difference(make_weierstrass_power(0.5, 2), 0.0, 0.0)


def test_serialization_round_trip():
    p = make_profile("log", 1.3, 4, mean=0.25)
    assert profile_from_json(p.to_json()) == p
    q = profile_from_dict({"mode": "explicit", "coeffs": [1.0, 0.5]})
    assert q.coeffs == (1.0, 0.5)
    with pytest.raises(ProfileError):
        profile_from_dict({"mode": "power", "alpha": 0.5, "terms": 2, "color": 1})
    with pytest.raises(ProfileError):
        make_profile("explicit")


def test_base_is_fixed():
    with pytest.raises(ProfileError):
        ShearProfile((1.0,), base=2)


@given(profiles, ys)
def test_psi_prime_is_u(p, y):
    h = 1e-6
    fd = (eval_psi(p, y + h) - eval_psi(p, y - h)) / (2 * h)
    scale = 1.0 + abs(eval_u(p, y)) + float(np.sum(np.abs(p.amplitudes)))
    assert abs(fd - eval_u(p, y)) <= 1e-6 * scale


@given(profiles, ys)
def test_periodicity(p, y):
    assert eval_u(p, y + 2 * math.pi) == pytest.approx(eval_u(p, y), abs=1e-12 * (1 + abs(y)) * 10)
    q = ShearProfile(p.coeffs)
    assert eval_psi(q, y + 2 * math.pi) == pytest.approx(eval_psi(q, y), abs=1e-12 * (1 + abs(y)) * 10)


@given(profiles, st.floats(0.01, 2.0), ys, st.floats(-5, 5), st.floats(-5, 5))
def test_third_difference_affine_invariance(p, h, y, c0, c1):
    q = ShearProfile(p.coeffs, mean=p.mean + c1)
    base = third_difference(p, h, y)
    shifted = third_difference(q, h, y)
    assert shifted == pytest.approx(base, abs=1e-12 * (1 + abs(c1) * (abs(y) + 3 * h)) * 10)


@given(profiles, st.floats(0.01, 2.0), ys)
def test_third_difference_closed_form(p, h, y):
    direct = third_difference(p, h, y)
    closed = third_difference_closed_form(p, h, y)
    scale = float(np.sum(np.abs(p.psi_amplitudes))) * 8 + abs(p.mean) * (abs(y) + 3 * h)
    assert abs(direct - closed) <= 1e-10 * max(abs(closed), scale)
