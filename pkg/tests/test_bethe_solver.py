import numpy as np
import pytest

from potts_chain.bethe_solver import (
    ACCEPT_RESIDUAL, ConvergenceError, SingularRootsError, bae_residual, canonical_roots, check_distinct,
    classify_roots, exotic_seed, ground_numbers, polish_complex, predict_exponent, search_solutions,
    shifted_numbers, solve_state, state_from_roots, subset_alphas, sweep, xxz_bae_residual,
    xxz_subset_parameters,
)


def test_ground_numbers_counts():
    for L in range(2, 9):
        for n in range(L + 1):
            I0, I1, _ = ground_numbers(L, n)
            assert len(I0) + len(I1) == L - n


def test_shift_bounds():
    with pytest.raises(ValueError):
        shifted_numbers(4, 2, 5, 0)


@pytest.mark.parametrize("n", [0, 1, 2])
def test_ground_states_converge(pi5, n):
    st = solve_state(pi5, 12, n)
    assert st.residual < ACCEPT_RESIDUAL
    assert st.classification == ("XXZSubsetOdd" if (12 - n) % 2 else "XXZSubsetEven")


def test_xxz_subset_reduction(pi5):
    for n in (0, 1):
        st = solve_state(pi5, 10, n)
        p = xxz_subset_parameters(pi5, st.roots.size)
        mu = subset_alphas(st)
        assert xxz_bae_residual(pi5, 10, mu, p) < 1e-9


def test_exotic_seeds_polish(pi5):
    for kind, e in (("n1-axis", -1.0), ("n0-pair", -0.0770574296)):
        st = state_from_roots(pi5, 3, polish_complex(pi5, 3, exotic_seed(kind, 3, pi5)))
        assert st.residual < ACCEPT_RESIDUAL
        assert abs(st.energy - e) < 1e-7
        assert st.classification == "ExoticRealAxis"


def test_escaped_root_rejected(pi5):
    with pytest.raises(ConvergenceError):
        solve_state(pi5, 16, 0, 1, 0)


def test_residual_finite_for_large_roots(pi5):
    r = bae_residual(pi5, 8, np.array([400.0 + 1.5707963j, 0.3 - 1.5707963j]))
    assert np.all(np.isfinite(r))


def test_distinct_check():
    with pytest.raises(SingularRootsError):
        check_distinct(np.array([0.3 + 0.1j, -0.3 - 0.1j]))


def test_canonical_form_invariance():
    lam = np.array([0.4 + 1.2j, -0.7 - 0.5j])
    assert np.allclose(canonical_roots(lam), canonical_roots(-lam + 2j * np.pi))


def test_classification_labels():
    assert classify_roots(np.array([0.5 + 1.5707963j, 0.5 - 1.5707963j])) == "XXZSubsetEven"
    assert classify_roots(np.array([0.9, 0.1 + 1.5707963j])) == "ExoticRealAxis"


def test_search_finds_ground(pi5):
    sols = search_solutions(pi5, 3, 0, tries=60, seed=0)
    ground = solve_state(pi5, 3, 0).energy
    assert any(abs(s.energy - ground) < 1e-8 for s in sols)


def test_sweep_orders_sizes(pi5):
    res = sweep(pi5, [16, 8], 1)
    assert res.sizes == [8, 16] and len(res.energies) == 2


def test_predicted_exponent():
    assert predict_exponent(5, 1) == pytest.approx(0.4)
    assert predict_exponent(5, 2) == pytest.approx(1.2)


def test_gamma_continuation_matches_direct(pi5):
    from potts_chain.bethe_solver import continue_in_gamma
    from potts_chain.core_params import coupling_from_gamma

    for n in (0, 1):
        last, reached = continue_in_gamma(solve_state(pi5, 10, n), 0.8, 10)
        assert reached and reached[-1] == pytest.approx(0.8)
        direct = solve_state(coupling_from_gamma(0.8), 10, n)
        assert abs(last.energy - direct.energy) < 1e-10


def test_continuation_in_shift(pi5):
    # the direct Newton start fails here; the solver falls back to continuation
    st = solve_state(pi5, 16, 2, 3, 0)
    assert st.residual < ACCEPT_RESIDUAL
