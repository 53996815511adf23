import cmath
import itertools
import math
import random

import pytest
from hypothesis import given, strategies as st

from pentaweights.errors import PreconditionError
from pentaweights.finite_field import (Character, DiscreteSide, check_prime, discrete_weight, gauss_sum, to_field,
                                       verify_33_discrete)
from pentaweights.one_boson import canonical_matrix
from pentaweights.scalars import exact


def brute_gauss_sum(F, p, c=1):
    half = pow(2, -1, p)
    total = 0j
    n = len(F)
    for x in itertools.product(range(p), repeat=n):
        q = sum(F[i][j] * x[i] * x[j] for i in range(n) for j in range(n))
        total += cmath.exp(2j * math.pi * c * (-q * half % p) / p)
    return total


def test_zero_form_has_unit_weight():
    zero = [[0] * 5 for _ in range(5)]
    assert discrete_weight(zero, [1, 2, 0, 1, 2], 3) == 1


def test_character_value():
    assert abs(Character(3)(1) - cmath.exp(2j * math.pi / 3)) < 1e-15


@given(st.integers(0, 2**20), st.integers(0, 2**20))
def test_character_is_additive(a, b):
    chi = Character(7, 3)
    assert abs(chi(a + b) - chi(a) * chi(b)) < 1e-12


def test_field_image_of_rational():
    assert to_field(exact(1) / 2, 5) == 3
    with pytest.raises(PreconditionError):
        to_field(exact(1) / 5, 5)


@pytest.mark.parametrize("p", [2, 1, 9, 17])
def test_bad_primes_rejected(p):
    with pytest.raises(PreconditionError):
        check_prime(p)


def test_gauss_sum_against_brute_force():
    r = random.Random(3)
    F = [[0] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(i, 3):
            F[i][j] = F[j][i] = r.randrange(5)
    assert abs(gauss_sum(F, 5) - brute_gauss_sum(F, 5)) < 1e-9


@pytest.mark.parametrize("p", [3, 5, 7])
def test_gauss_sum_modulus_is_power_of_p(p):
    F = canonical_matrix()
    g2 = abs(gauss_sum(F, p)) ** 2
    k = round(math.log(g2, p))
    assert abs(g2 - p**k) < 1e-6 * p**k


def test_sides_share_boundary():
    left, right = DiscreteSide("L", 3), DiscreteSide("R", 3)
    assert left.boundary == right.boundary
    assert len(left.boundary) == 9
    assert len(left.inner) == len(right.inner) == 3


def test_exhaustive_check_mod_3():
    report = verify_33_discrete(3)
    assert report.passed, report.failures()
    assert report.data["points"] == 3**9
    assert abs(report.data["ratio"]) > 0


@pytest.mark.parametrize("p,c", [(5, 1), (5, 2), (7, 1)])
def test_sampled_check(p, c):
    report = verify_33_discrete(p, c, samples=200)
    assert report.passed, report.failures()

