"""Tests for the Gamma_0(N) coset table, word decomposition and cusps."""

import math
from fractions import Fraction

import pytest

from conftest import GENERATORS_9, GENERATORS_25
from lvanish.errors import ValidationError
from lvanish.gamma0 import (
    MINUS_I,
    S,
    build_context,
    cusp_point,
    decompose,
    evaluation_points,
    gamma0_index,
    is_equivalent_to_zero,
    p1_orbits,
    subgroup_index,
    word_product,
)
from lvanish.qforms import GL2Matrix


@pytest.mark.parametrize("N", range(1, 61))
def test_index_matches_projective_line(N):
    assert gamma0_index(N) == len(p1_orbits(N)[0])
    ctx = build_context(N)
    assert ctx.index == gamma0_index(N)
    assert ctx.is_connected()


@pytest.mark.slow
def test_index_matches_projective_line_up_to_200():
    for N in range(61, 201):
        assert gamma0_index(N) == len(p1_orbits(N)[0]), N


@pytest.mark.parametrize("N,index", [(1, 1), (4, 6), (9, 12), (25, 30)])
def test_known_indices(N, index):
    assert build_context(N).index == index


@pytest.mark.parametrize("N,count", [(9, 4), (25, 7)])
def test_schreier_generator_count(N, count):
    assert len(build_context(N).word_basis) == count


def test_coset_representatives_land_in_their_cosets():
    ctx = build_context(25)
    for v, rep in enumerate(ctx.coset_reps):
        assert ctx.coset_of(rep) == v


def test_schreier_basis_lies_in_gamma0():
    for N in (2, 9, 25, 36):
        for g in build_context(N).word_basis:
            assert g.in_gamma0(N)


@pytest.mark.parametrize("N,generators", [(9, GENERATORS_9), (25, GENERATORS_25)])
def test_listed_generators_decompose(N, generators):
    ctx = build_context(N)
    for g in generators:
        word = decompose(ctx, g)
        assert word_product(ctx, word).is_projectively_equal(g)


def test_identity_decomposes_to_empty_word():
    ctx = build_context(9)
    assert decompose(ctx, GL2Matrix.identity()) == []
    assert decompose(ctx, MINUS_I) == []


def test_random_products_round_trip(rng):
    for N in (4, 9, 25):
        ctx = build_context(N)
        for _ in range(30):
            gamma = GL2Matrix.identity()
            for _ in range(rng.randint(1, 6)):
                gamma = gamma @ (rng.choice(ctx.word_basis) ** rng.choice([-2, -1, 1, 2]))
            word = decompose(ctx, gamma)
            assert word_product(ctx, word).is_projectively_equal(gamma)


def test_decompose_rejects_non_members():
    with pytest.raises(ValidationError):
        decompose(build_context(9), S)


def test_listed_generators_are_accepted():
    ctx = build_context(9, GENERATORS_9)
    assert ctx.generators == GENERATORS_9
    assert ctx.word_basis == build_context(9).word_basis
    assert subgroup_index(GENERATORS_25) == 30


def test_non_member_generator_is_rejected():
    with pytest.raises(ValidationError):
        build_context(9, GENERATORS_9 + [GL2Matrix(1, 0, 1, 1)])


def test_generators_of_a_proper_subgroup_are_rejected():
    # Gamma_0(18) sits inside Gamma_0(9) with index 3
    basis_18 = build_context(18).word_basis
    assert subgroup_index(basis_18) == 36
    with pytest.raises(ValidationError):
        build_context(9, basis_18)


def test_level_must_be_positive():
    with pytest.raises(ValidationError):
        build_context(0)


def test_cusp_witnesses():
    witness = is_equivalent_to_zero(9, 1)
    assert witness.matrix == GL2Matrix(1, 1, 0, 1)
    assert is_equivalent_to_zero(9, Fraction(1, 3)) is None

    witness = is_equivalent_to_zero(25, Fraction(16, 19))
    assert witness.target == Fraction(16, 19)
    assert witness.matrix.in_gamma0(25)
    assert witness.matrix.act(0) == Fraction(16, 19)


def test_cusp_witnesses_on_random_points(rng):
    for _ in range(100):
        N = rng.choice([4, 9, 25])
        x = Fraction(rng.randint(-50, 50), rng.randint(1, 40))
        witness = is_equivalent_to_zero(N, x)
        if witness is None:
            assert math.gcd(x.denominator, N) != 1
            continue
        assert witness.matrix.in_gamma0(N)
        assert witness.matrix.act(0) == x


def test_cusp_point():
    assert cusp_point(9, 1, 1) == Fraction(1, 9)
    assert cusp_point(25, 2, 3) == Fraction(2, 75)
    with pytest.raises(ValidationError):
        cusp_point(9, 3, 1)


def test_first_round_points_level_9(generators_9):
    ctx = build_context(9, generators_9)
    first = [p.point for p in evaluation_points(ctx, 2) if p.first_round]
    assert first == [Fraction(1), Fraction(1, 2), Fraction(4, 5), Fraction(0)]


def test_first_round_points_level_25(generators_25):
    ctx = build_context(25, generators_25)
    first = [p.point for p in evaluation_points(ctx, 2) if p.first_round]
    assert first == [Fraction(s) for s in ("1", "1/4", "2/7", "4/9", "9/14", "13/18", "16/19")]


def test_evaluation_points_are_distinct_and_bounded(generators_9):
    points = evaluation_points(build_context(9, generators_9), 3)
    values = [p.point for p in points]
    assert len(values) == len(set(values))
    assert all(1 <= p.power <= 5 for p in points)


def test_level_one_points_collapse_to_one():
    points = evaluation_points(build_context(1), 2)
    assert [p.point for p in points] == [Fraction(1)]
    assert points[0].first_round
    assert points[0].generator == -1


def test_evaluation_points_need_k_at_least_two():
    with pytest.raises(ValidationError):
        evaluation_points(build_context(9), 1)
