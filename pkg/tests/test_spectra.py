import numpy as np
import pytest
from hypothesis import given, strategies as st

from potts_chain.core_params import coupling_from_gamma
from potts_chain.spectra import (
    cluster_spectrum, compare_loop_vertex, degeneracy_check, degeneracy_pattern, extrapolate, fit_ceff,
    parse_pattern, pattern_robust, rsos_exponents, xxx_decoupling_report, xxx_open_chain,
)


def test_pattern_roundtrip():
    p = "3[1]⊕[2]⊕3[3]"
    assert degeneracy_pattern([1, 1, 1, 2, 3, 3, 3]) == p
    assert parse_pattern(p) == {1: 3, 2: 1, 3: 3}


@given(st.lists(st.integers(1, 6), min_size=1, max_size=12))
def test_pattern_parse_inverse(mults):
    assert sum(k * v for k, v in parse_pattern(degeneracy_pattern(mults)).items()) == sum(mults)


def test_cluster_merges_close_levels():
    rec = cluster_spectrum(np.array([0.0, 1e-9, 1.0, 2.0, 2.0 + 1e-10]))
    assert sorted(rec.multiplicities) == [1, 2, 2]


def test_table_l2(pi5):
    d = degeneracy_check(pi5, 2)
    assert d["match"] and d["robust"]


def test_generic_gamma_l3():
    d = degeneracy_check(coupling_from_gamma(0.5), 3)
    assert d["match"]


def test_robustness_helper():
    ok, _ = pattern_robust(np.array([0.0, 0.0, 1.0]))
    assert ok


def test_xxx_chain_su2():
    ev = np.sort(np.linalg.eigvalsh(xxx_open_chain(2)))
    assert np.allclose(ev, [-0.5, -0.5, -0.5, 1.5]) or np.allclose(np.unique(np.round(ev, 9)).size, 2)


def test_xxx_decoupling_l2():
    rep = xxx_decoupling_report(coupling_from_gamma(1e-6), 2)
    assert rep.ok and rep.ed_pattern == [1, 6, 9]


def test_xxx_requires_small_gamma(pi5):
    with pytest.raises(ValueError):
        xxx_decoupling_report(pi5, 2)


def test_loop_matches_vertex_small(pi5):
    for r in compare_loop_vertex(pi5, 6):
        assert r.max_deviation < 1e-9


def test_extrapolate_exact_polynomial():
    L = np.array([8.0, 16, 32, 64])
    lim, _ = extrapolate(L, 0.4 + 1 / L - 2 / L ** 2)
    assert abs(lim - 0.4) < 1e-10


def test_fit_ceff_synthetic(pi5):
    from potts_chain.spectra import sound_velocity

    v = sound_velocity(pi5)
    L = np.array([8.0, 16, 32, 64])
    E = -1.3 * L + 0.2 - np.pi * v * 0.8 / 24 / L + 0.05 / L ** 2
    assert abs(fit_ceff(L, E, pi5).value - 0.8) < 1e-8


def test_rsos_exponent_l1(pi5):
    ex = rsos_exponents(pi5, range(8, 17), ls=(1,))
    assert abs(ex[1][0] - 1 / 15) < 0.01
