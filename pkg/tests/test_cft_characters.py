from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from potts_chain.cft_characters import (
    ParityError, QSeries, central_charge, euler_product, full_trace_levels, full_trace_series,
    inverse_euler_squared, level_count_compare, series_inverse, series_mul, string_function,
    string_function_bruteforce, string_leading_exponent, two_color_partitions, z_m_series,
)


def test_eta_inverse_squared_is_two_color():
    assert inverse_euler_squared(15) == two_color_partitions(15)


@given(st.integers(1, 30))
def test_inverse_is_inverse(order):
    e = euler_product(order)
    one = series_mul(e, series_inverse(e, order), order)
    assert one == [1] + [0] * order


def test_z0_coefficients():
    assert z_m_series(5, 0, 10).coefficients == [1, 0, 1, 2, 4, 6, 11, 16, 27, 40, 63]
    assert z_m_series(5, 1, 10).coefficients == [1, 2, 3, 6, 10, 18, 29, 48, 75, 118, 179]


def test_z_leading_exponent():
    z = z_m_series(5, 1, 4)
    assert z.leading_exponent == Fraction(2, 5) - central_charge(5) / 24


@pytest.mark.parametrize("k", range(4, 9))
def test_z_nonnegative(k):
    for m in range(3):
        assert min(z_m_series(k, m, 10).coefficients) >= 0


def test_string_function_matches_bruteforce():
    for l, m in [(0, 0), (1, 1), (2, 0), (1, 3)]:
        a = string_function(5, l, m, 6)
        b = string_function_bruteforce(5, l, m, 6, cutoff=12)
        assert a.coefficients == b.coefficients and a.leading_exponent == b.leading_exponent


def test_string_function_vacuum_exponent():
    assert string_function(5, 0, 0, 4).leading_exponent == -central_charge(5) / 24 + Fraction(0)


def test_parity_error():
    with pytest.raises(ParityError):
        string_function(5, 0, 1)


def test_leading_exponent_any_parity():
    assert string_leading_exponent(5, 1, 0) - string_leading_exponent(5, 0, 0) == Fraction(3, 20)


def test_series_addition_grid_check():
    a = QSeries(Fraction(0), [1, 1], 1)
    b = QSeries(Fraction(1, 2), [1], 0)
    with pytest.raises(ValueError):
        a + b


def test_trace_levels_weighting():
    lv = dict(full_trace_levels(5, 3, "vertex"))
    assert lv[Fraction(0)] == 1
    assert lv[Fraction(2, 5)] == 3
    assert full_trace_series(5, 3, "loop").coefficients[0] == 1


def test_level_compare():
    rep = level_count_compare([2.01, 2.98, 3.02], z_m_series(5, 0, 6), 3)
    assert rep.ok
    assert [r["offset"] for r in rep.rows] == [2, 3, 3]
