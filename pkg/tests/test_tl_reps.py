import numpy as np
import pytest

from potts_chain.core_params import coupling_from_gamma
from potts_chain.tl_reps import (
    EmptyBasisError, build_C_operator, build_loop_rep, build_rsos_rep, build_tilde_rep, build_vertex_rep,
    link_patterns, rsos_paths, sz_sector, tl_relation_defect,
)
from math import comb


@pytest.mark.parametrize("builder", [build_vertex_rep, build_tilde_rep])
def test_spin_reps_satisfy_relations(pi5, builder):
    rep = builder(pi5, 6)
    assert rep.dim == 64
    assert tl_relation_defect(rep) < 1e-12


@pytest.mark.parametrize("N,j", [(4, 0), (6, 1), (8, 2), (8, 0)])
def test_loop_dimensions(pi5, N, j):
    rep = build_loop_rep(pi5, N, j)
    assert rep.dim == comb(N, N // 2 - j) - comb(N, N // 2 - j - 1)
    assert tl_relation_defect(rep) < 1e-12


def test_link_pattern_sector():
    for p in link_patterns(6, 1):
        assert p.sector == 1


def test_rsos_paths_and_relations(pi5):
    paths = rsos_paths(6, 5, 1, 1)
    assert all(abs(a - b) == 1 for p in paths for a, b in zip(p.heights, p.heights[1:]))
    rep = build_rsos_rep(pi5, 6, 1, 1)
    assert tl_relation_defect(rep) < 1e-12


def test_rsos_empty(pi5):
    with pytest.raises(EmptyBasisError):
        build_rsos_rep(pi5, 3, 1, 1)


def test_rsos_needs_integer_k():
    with pytest.raises(ValueError):
        build_rsos_rep(coupling_from_gamma(0.5), 4, 1, 1)


def test_sz_sector_counts():
    assert len(sz_sector(6, 0)) == 20
    assert len(sz_sector(6, 2)) == 6


def test_C_is_involution(pi5):
    C = np.asarray(build_C_operator(build_vertex_rep(pi5, 4)))
    assert np.linalg.norm(C @ C - np.eye(16)) < 1e-12
