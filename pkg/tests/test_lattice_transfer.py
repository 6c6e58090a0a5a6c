import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from potts_chain.lattice_transfer import (
    ASTERISK, VERTICES, block_R, block_R_derivative, compare_gauges, global_factor, periodic_transfer, swap16,
    table_deviation, weight_table, ybe_residual,
)
from potts_chain.operators import commutator_norm

ASTERISK_EXPECTED = {9, 10, 13, 14, 17, 18, 29, 30, 31, 32, 35, 36}


def test_vertex_count():
    assert len(VERTICES) == 38
    assert set(ASTERISK) == ASTERISK_EXPECTED


@pytest.mark.parametrize("gauge", ["stag", "d22"])
def test_weights_match_closed_form(pi5, gauge):
    wt = weight_table(pi5, 0.3, gauge)
    assert table_deviation(wt, pi5) < 1e-12


def test_gauge_signs_and_factor(pi5):
    wt = weight_table(pi5, 0.3, "d22")
    rep = compare_gauges(wt, pi5)
    assert rep.sign_flipped == ASTERISK_EXPECTED
    assert rep.parity_ok
    G = global_factor(pi5, 0.3)
    assert abs(wt.factor - G) / abs(G) < 1e-10


def test_regularity(pi5):
    R0 = block_R(pi5, 0.0)
    assert np.linalg.norm(R0 / R0[0, 0] - swap16()) < 1e-12


def test_derivative_matches_finite_difference(pi5):
    h = 1e-6
    fd = (block_R(pi5, 0.2 + h) - block_R(pi5, 0.2 - h)) / (2 * h)
    assert np.linalg.norm(fd - block_R_derivative(pi5, 0.2)) < 1e-6 * np.linalg.norm(fd)


@settings(max_examples=10, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0.2, 1.3))
def test_ybe_property(u, v, g):
    from potts_chain.core_params import coupling_from_gamma

    c = coupling_from_gamma(g)
    assert ybe_residual(c, u, v, "stag") < 1e-10
    assert ybe_residual(c, u, v, "d22") < 1e-10


def test_periodic_transfer_commutes(pi5):
    t1 = np.asarray(periodic_transfer(pi5, 0.2, 2))
    t2 = np.asarray(periodic_transfer(pi5, 0.55, 2))
    assert commutator_norm(t1, t2) < 1e-10
