"""Tests for the local polynomial sums, slash and Hecke actions."""

import logging
import math
from fractions import Fraction

import pytest

from conftest import HECKE_25, F
from lvanish.errors import PoleError, ValidationError
from lvanish.gamma0 import S, T
from lvanish.localpoly import (
    HeckeSpec,
    LocalPolyParams,
    UnivariatePoly,
    c_infinity_approx,
    c_k_delta,
    full_local_poly_value,
    hecke_apply,
    hecke_constant_factor,
    max_leaf_denominator,
    nonconst_sum,
    slash,
    weighted_poly,
    zagier_sum,
    zagier_zero_poly,
)
from lvanish.qforms import GL2Matrix

PARAMS_9_172 = LocalPolyParams(2, 9, 172, 13)

WEIGHTED_9_172 = [
    ("0", [-3024, 0, 336]),
    ("1/2", [-12096, 12096, -2688]),
    ("1/3", [-12096, 8064, -1008]),
    ("1/5", [-75600, 30240, -2688]),
    ("1/7", [-148176, 42336, -2688]),
    ("1/9", [-27216, 6048, 0]),
]

ZAGIER_9_2236 = [
    ("0", "696"),
    ("1/2", "680"),
    ("1/3", "2056/3"),
    ("1/5", "17272/25"),
    ("1/7", "34040/49"),
    ("1/9", "696"),
]


def _periodic(y: Fraction) -> Fraction:
    frac = y - math.floor(y)
    return frac * frac - Fraction(3, 7) * frac + 2


@pytest.mark.parametrize("x0,coefficients", WEIGHTED_9_172)
def test_weighted_polynomials_level_9(x0, coefficients):
    poly = weighted_poly(PARAMS_9_172, F(x0))
    assert poly == UnivariatePoly.from_descending(coefficients)
    assert poly(F(x0)) == nonconst_sum(PARAMS_9_172, F(x0)) == 336


@pytest.mark.parametrize("x,expected", ZAGIER_9_2236)
def test_zagier_sums_level_9(x, expected):
    assert zagier_sum(9, 2236, F(x)) == F(expected)


def test_zagier_zero_polynomial():
    assert zagier_zero_poly(9, 2236) == (-6264, 696)


def test_empty_set_sums_to_zero():
    # 5 is not a square mod 36, so no form with 9 | a has discriminant 5
    params = LocalPolyParams(2, 9, 5, 1)
    assert nonconst_sum(params, Fraction(1, 2)) == 0
    assert weighted_poly(params, 0) == UnivariatePoly()


def test_nonconst_sum_is_periodic_and_even(rng):
    params = LocalPolyParams(2, 25, 44, 21)
    for _ in range(15):
        x = Fraction(rng.randint(-20, 20), rng.randint(1, 9))
        value = nonconst_sum(params, x)
        # weighted_poly enumerates at x itself, without reducing mod 1
        assert weighted_poly(params, x + 1)(x + 1) == value
        assert nonconst_sum(params, -x) == value


def test_inversion_identity(rng):
    checked = 0
    while checked < 50:
        N = rng.choice([1, 4, 9, 25])
        delta = rng.randint(5, 5000)
        if delta % 4 not in (0, 1) or math.isqrt(delta) ** 2 == delta:
            continue
        u = rng.choice([-3, -2, -1, 1, 2, 3])
        x = Fraction(u, rng.randint(1, 12))
        A, C = zagier_zero_poly(N, delta)
        lhs = N * x * x * zagier_sum(N, delta, 1 / (N * x)) - zagier_sum(N, delta, x)
        assert lhs == -(A * x * x + C), (N, delta, x)
        checked += 1


@pytest.mark.parametrize("delta", [5, 8, 12, 13])
def test_level_one_zagier_sum_is_constant(delta, rng):
    base = zagier_sum(1, delta, 0)
    assert base > 0
    for _ in range(20):
        x = Fraction(rng.randint(-30, 30), rng.randint(1, 8))
        assert zagier_sum(1, delta, x) == base


def test_slash_by_identity_and_translation():
    f = UnivariatePoly.from_descending([1, -2, 5])
    for x in (Fraction(0), Fraction(2, 3), Fraction(-7, 4)):
        assert slash(f, 3, GL2Matrix.identity(), x) == f(x)
        assert slash(f, 3, T, x) == f(x + 1)


def test_slash_is_a_right_action(rng):
    f = UnivariatePoly.from_descending([3, 1, -4, 2, 7])
    letters = [S, T, T ** -1, GL2Matrix(4, -1, 9, -2)]
    checked = 0
    while checked < 100:
        g1 = rng.choice(letters) @ rng.choice(letters)
        g2 = rng.choice(letters) @ rng.choice(letters)
        x = Fraction(rng.randint(-12, 12), rng.randint(1, 6))
        try:
            lhs = slash(lambda y: slash(f, 3, g1, y), 3, g2, x)
        except PoleError:
            continue
        assert lhs == slash(f, 3, g1 @ g2, x)
        checked += 1


def test_slash_pole():
    with pytest.raises(PoleError):
        slash(lambda y: y, 2, S, 0)


def test_hecke_on_constants():
    one = lambda y: Fraction(1)  # noqa: E731
    spec = HeckeSpec.of([(7, 6)])
    assert hecke_apply(one, 2, spec, Fraction(1, 3)) == 1 + Fraction(7, 343)
    assert hecke_constant_factor(2, spec) == 1 + Fraction(7, 343)
    assert hecke_apply(one, 2, HECKE_25, Fraction(2, 7)) == hecke_constant_factor(2, HECKE_25)
    assert hecke_apply(one, 2, HeckeSpec(), Fraction(5)) == 1


def test_hecke_factors_commute_on_periodic_functions(rng):
    swapped = HeckeSpec(tuple(reversed(HECKE_25.factors)))
    for _ in range(20):
        x = Fraction(rng.randint(-10, 10), rng.randint(1, 9))
        assert hecke_apply(_periodic, 2, HECKE_25, x) == hecke_apply(_periodic, 2, swapped, x)


def test_hecke_is_linear(rng):
    g = lambda y: (y - math.floor(y)) ** 3  # noqa: E731
    for _ in range(10):
        x = Fraction(rng.randint(-10, 10), rng.randint(1, 9))
        combined = hecke_apply(lambda y: 2 * _periodic(y) - 3 * g(y), 2, HECKE_25, x)
        assert combined == 2 * hecke_apply(_periodic, 2, HECKE_25, x) - 3 * hecke_apply(g, 2, HECKE_25, x)


def test_max_leaf_denominator():
    assert max_leaf_denominator(HECKE_25, Fraction(1, 4)) == 56
    assert max_leaf_denominator(HeckeSpec(), Fraction(2, 7)) == 7


def test_hecke_spec_validation(caplog):
    with pytest.raises(ValidationError):
        HeckeSpec.of([(7, 6), (7, 1)]).validate(25)
    with pytest.raises(ValidationError):
        HeckeSpec.of([(4, 1)]).validate(25)
    with pytest.raises(ValidationError):
        HeckeSpec.of([(5, 1)]).validate(25)
    with caplog.at_level(logging.WARNING, logger="lvanish.localpoly"):
        HECKE_25.validate(25, 21)
    assert "divides D0=21" in caplog.text
    assert HeckeSpec.of([{"p": 7, "shift": 6}]) == HeckeSpec(((7, 6),))


@pytest.mark.parametrize(
    "delta,k,expected",
    [(1, 2, Fraction(1, 2)), (4, 2, Fraction(1, 16)), (1, 3, Fraction(-1, 8))],
)
def test_c_k_delta_exact_values(delta, k, expected):
    assert c_k_delta(k, delta).exact(delta) == expected


def test_c_k_delta_non_square():
    c = c_k_delta(2, 2236)
    assert c.exact(2236) is None
    assert c.value == pytest.approx(0.5 * 2236 ** -1.5)
    with pytest.raises(ValidationError):
        c_k_delta(2, 0)


def test_c_infinity_vanishes_without_forms():
    estimate = c_infinity_approx(LocalPolyParams(2, 9, 5, 1), 900)
    assert estimate.estimate == 0.0
    assert all(value == 0 for value in estimate.partial_sums.values())


def test_c_infinity_partial_sums():
    estimate = c_infinity_approx(PARAMS_9_172, 360)
    assert {9, 18, 36, 72, 144, 288, 360} <= set(estimate.partial_sums)
    assert estimate.trunc_A == 360
    assert estimate.tail_indicator >= 0
    value = full_local_poly_value(PARAMS_9_172, Fraction(1, 2), estimate.estimate)
    assert value == pytest.approx(estimate.estimate + 336 * c_k_delta(2, 2236).value)
    with pytest.raises(ValidationError):
        c_infinity_approx(PARAMS_9_172, 5)


def test_params_valid_case():
    assert PARAMS_9_172.problems() == []
    assert PARAMS_9_172.delta == 2236
    assert PARAMS_9_172.validate() is PARAMS_9_172


def test_params_report_every_problem():
    reasons = LocalPolyParams(1, 9, 21, -3).problems()
    text = " ".join(reasons)
    assert "k=1" in text
    assert "gcd(D=21" in text
    assert "gcd(D0=-3" in text
    assert len(reasons) >= 3


@pytest.mark.parametrize(
    "params,fragment",
    [
        (LocalPolyParams(2, 9, 5, 13), "Kronecker mismatch at p=3"),
        (LocalPolyParams(2, 9, 172, -4), "sign"),
        (LocalPolyParams(2, 9, 20, 13), "D=20 is not a fundamental"),
        (LocalPolyParams(2, 1, 5, 5), "square"),
    ],
)
def test_params_rejections(params, fragment):
    with pytest.raises(ValidationError, match=fragment):
        params.validate()


def test_non_strict_params_allow_shifted_discriminants():
    params = LocalPolyParams(2, 9, 172 * 25, 13)
    assert any("fundamental" in r for r in params.problems())
    assert not any("fundamental" in r for r in params.problems(strict=False))
