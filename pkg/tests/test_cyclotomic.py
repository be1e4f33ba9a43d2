import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cfspectra.cyclotomic import (
    Cyclo,
    abs_lower,
    abs_upper,
    cyclotomic_polynomial,
    sqrt_lower,
    sqrt_upper,
    zeta,
)

ORDERS = [1, 2, 3, 4, 5, 6, 8, 9, 12]


def test_cyclotomic_polynomials_known():
    assert cyclotomic_polynomial(1) == (-1, 1)
    assert cyclotomic_polynomial(2) == (1, 1)
    assert cyclotomic_polynomial(3) == (1, 1, 1)
    assert cyclotomic_polynomial(4) == (1, 0, 1)
    assert cyclotomic_polynomial(6) == (1, -1, 1)
    assert cyclotomic_polynomial(12) == (1, 0, -1, 0, 1)


@pytest.mark.parametrize("n", ORDERS)
def test_root_of_unity_has_order_n(n):
    z = zeta(n)
    p = Cyclo.from_fraction(1)
    for k in range(1, n):
        p = p * z
        if n > 1:
            assert p != 1
    assert p * z == 1


def test_known_identities():
    w = zeta(3)
    assert w * w + w + 1 == 0
    assert zeta(4) * zeta(4) == -1
    assert zeta(6) == 1 + zeta(3)
    # (z + z^4) for z = zeta_5 is the golden-ratio conjugate root of x^2+x-1
    t = zeta(5) + zeta(5, 4)
    assert t * t + t - 1 == 0


def test_mixed_order_equality():
    assert zeta(6, 3) == Cyclo.from_fraction(-1)
    assert zeta(12, 4) == zeta(3)
    assert zeta(8, 2) == zeta(4)


coeff_st = st.integers(min_value=-4, max_value=4)


@st.composite
def cyclo_values(draw):
    n = draw(st.sampled_from(ORDERS))
    counts = {draw(st.integers(0, n - 1)): draw(coeff_st) for _ in range(draw(st.integers(1, 3)))}
    return Cyclo.from_exponent_counts(n, counts)


@given(cyclo_values(), cyclo_values(), cyclo_values())
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a + b == b + a
    assert a * b == b * a
    assert a * (b + c) == a * b + a * c


@given(cyclo_values(), cyclo_values())
def test_conjugation_is_multiplicative(a, b):
    assert (a * b).conjugate() == a.conjugate() * b.conjugate()
    assert (a + b).conjugate() == a.conjugate() + b.conjugate()


@given(cyclo_values())
def test_abs_squared_is_real_nonnegative(a):
    s = a.abs_squared()
    assert s == s.conjugate()
    lo, hi = s.real_bounds(64)
    assert hi >= 0
    ref = abs(a.to_complex()) ** 2
    assert float(lo) - 1e-6 <= ref <= float(hi) + 1e-6


@given(st.fractions(min_value=0, max_value=1000))
def test_sqrt_bounds_bracket(q):
    lo = sqrt_lower(q, 64)
    hi = sqrt_upper(q, 64)
    assert lo * lo <= q <= hi * hi
    assert hi - lo <= Fraction(2, 1 << 64) * (1 + q)


def test_abs_bounds_match_float():
    z = 3 * zeta(5) - 2 * zeta(5, 3) + Fraction(1, 7)
    lo, hi = abs_lower(z, 80), abs_upper(z, 80)
    ref = abs(z.to_complex())
    assert float(lo) <= ref <= float(hi)
    assert float(hi - lo) < 1e-12


def test_abs_of_pure_root_is_exactly_one():
    for n in ORDERS:
        for k in range(n):
            z = zeta(n, k)
            assert z.abs_squared() == 1
            assert abs_upper(z) == 1 == abs_lower(z)


def test_real_enclosure_agrees_with_cos():
    for n in ORDERS:
        for j in range(n):
            v = zeta(n, j) + zeta(n, -j)
            lo, hi = v.real_bounds(64)
            ref = 2 * math.cos(2 * math.pi * j / n)
            assert float(lo) - 1e-10 <= ref <= float(hi) + 1e-10
            assert float(hi - lo) < 1e-15


def test_rationality_detection():
    z = zeta(3)
    assert not z.is_rational()
    assert (z + z.conjugate()).as_fraction() == -1
    assert (z * z.conjugate()).as_fraction() == 1
