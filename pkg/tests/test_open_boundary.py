import numpy as np
import pytest

from potts_chain.core_params import coupling_from_gamma
from potts_chain.open_boundary import (
    IntegrabilityError, affine_match, boundary_ybe_residual, build_h_open, hamiltonian_from_transfer,
    hamiltonian_sklyanin, k_minus, k_minus_derivative, transfer_commutator,
)
from potts_chain.tl_reps import build_vertex_rep


@pytest.mark.parametrize("gauge", ["stag", "d22"])
def test_reflection_equation(pi5, gauge):
    for u, v in [(0.13, 0.41), (0.3 + 0.1j, -0.2)]:
        assert boundary_ybe_residual(pi5, u, v, gauge) < 1e-10


def test_k_minus_regular(pi5):
    K0 = k_minus(pi5, 0.0)
    assert np.linalg.norm(K0 / K0[0, 0] - np.eye(4)) < 1e-12


def test_k_minus_derivative(pi5):
    h = 1e-6
    fd = (k_minus(pi5, 0.3 + h) - k_minus(pi5, 0.3 - h)) / (2 * h)
    assert np.linalg.norm(fd - k_minus_derivative(pi5, 0.3)) < 1e-6 * np.linalg.norm(fd)


@pytest.mark.parametrize("L", [2, 3])
def test_transfer_commutes(pi7, L):
    assert transfer_commutator(pi7, 0.21, 0.57, L) < 1e-9


def test_sklyanin_matches_tl(pi5):
    b = hamiltonian_from_transfer(pi5, 3)
    assert b.max_deviation < 1e-8
    assert b.tilde_deviation < 1e-11


def test_numeric_derivative_agrees(pi5):
    Ha = hamiltonian_sklyanin(pi5, 2, derivative="analytic")
    Hn = hamiltonian_sklyanin(pi5, 2, derivative="numeric")
    assert np.linalg.norm(Ha - Hn) < 1e-7 * np.linalg.norm(Ha)


def test_affine_match_recovers_map():
    rng = np.random.default_rng(1)
    s = rng.normal(size=12)
    a, b, dev = affine_match(3.0 * s - 2.0, s)
    assert abs(a - 3) < 1e-12 and abs(b + 2) < 1e-12 and dev < 1e-12


def test_h_open_hermitian_generic():
    c = coupling_from_gamma(0.5)
    H = np.asarray(build_h_open(build_vertex_rep(c, 4)))
    ev = np.linalg.eigvals(H)
    assert np.max(np.abs(ev.imag)) < 1e-10
