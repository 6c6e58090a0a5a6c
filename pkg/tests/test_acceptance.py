"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``CRITERION n: PASS|FAIL ...`` line (also when run
as ``python tests/test_acceptance.py``) and then asserts the same outcome.
"""
from __future__ import annotations

import math
import sys

import numpy as np
import pytest

from potts_chain.bethe_solver import (
    ACCEPT_RESIDUAL, exotic_seed, polish_complex, solve_state, state_from_roots, sweep,
)
from potts_chain.cft_characters import (
    inverse_euler_squared, level_count_compare, string_function, string_leading_exponent,
    two_color_partitions, z_m_series,
)
from potts_chain.core_params import coupling_from_gamma, parse_angle
from potts_chain.lattice_transfer import ASTERISK, compare_gauges, global_factor, table_deviation, weight_table, ybe_residual
from potts_chain.open_boundary import boundary_ybe_residual, build_h_open, hamiltonian_from_transfer, transfer_commutator
from potts_chain.spectra import (
    compare_loop_vertex, degeneracy_check, extrapolate, fit_ceff, highest_weight_levels, loop_sector_gaps,
    rsos_exponents, scaled_gaps, sector_eigenvalues, xxx_decoupling_report,
)
from potts_chain.tl_reps import build_vertex_rep

PI5 = parse_angle("pi/5")
PI7 = parse_angle("pi/7")
EXPECTED_ASTERISK = frozenset({9, 10, 13, 14, 17, 18, 29, 30, 31, 32, 35, 36})
RESULTS: dict = {}


def report(n: int, ok: bool, detail: str, info: str = ""):
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    sys.__stdout__.write("\n" + line + "\n")
    if info:
        sys.__stdout__.write(f"    info: {info}\n")
    sys.__stdout__.flush()
    return ok


def rng_draws(n, seed):
    return np.random.default_rng(seed).uniform(size=(n, 2))


# 1. weight tables

def criterion_1():
    draws = [(PI5, 0.3)]
    for a, b in rng_draws(4, 11):
        draws.append((coupling_from_gamma(0.15 + 1.3 * a), -1.0 + 2.0 * b))
    worst_dev, worst_fac, signs_ok = 0.0, 0.0, True
    for c, u in draws:
        stag = weight_table(c, u, "stag")
        d22 = weight_table(c, u, "d22")
        worst_dev = max(worst_dev, table_deviation(stag, c), table_deviation(d22, c))
        rep = compare_gauges(d22, c)
        signs_ok &= rep.sign_flipped == EXPECTED_ASTERISK and set(ASTERISK) == EXPECTED_ASTERISK
        G = global_factor(c, u)
        worst_fac = max(worst_fac, abs(d22.factor - G) / abs(G))
    ok = worst_dev < 1e-12 and worst_fac < 1e-10 and signs_ok
    return report(1, ok, f"38 weights, 5 draws: max rel dev {worst_dev:.1e}; sign set exact={signs_ok}; "
                         f"global factor rel err {worst_fac:.1e}")


# 2. YBE and reflection equation

def criterion_2():
    ybe, bybe = 0.0, 0.0
    for a, b in rng_draws(5, 22):
        u, v = -1 + 2 * a + 0.2j * b, 0.7 * b - 0.3
        for gauge in ("stag", "d22"):
            ybe = max(ybe, ybe_residual(PI5, u, v, gauge))
            bybe = max(bybe, boundary_ybe_residual(PI5, u, v, gauge))
    ok = ybe < 1e-10 and bybe < 1e-10
    return report(2, ok, f"YBE max {ybe:.1e}; boundary YBE max {bybe:.1e} (5 pairs, both gauges)")


# 3. open transfer commutativity

def criterion_3():
    worst = 0.0
    for c in (PI5, PI7):
        for L in (2, 3):
            worst = max(worst, transfer_commutator(c, 0.23, 0.61 + 0.1j, L))
    return report(3, worst < 1e-9, f"max ||[t(u),t(v)]||/||t(u)t(v)|| = {worst:.1e} (L=2,3; pi/5, pi/7)")


# 4. Hamiltonian equivalence

def criterion_4():
    dev, tdev = 0.0, 0.0
    for L in (2, 3, 4):
        b = hamiltonian_from_transfer(PI5, L, tol=1.0)
        dev, tdev = max(dev, b.max_deviation), max(tdev, b.tilde_deviation)
    ok = dev < 1e-8 and tdev < 1e-11
    return report(4, ok, f"Sklyanin vs TL affine max dev {dev:.1e}; e vs tilde-e {tdev:.1e} (L=2,3,4)")


# 5. degeneracy tables

def criterion_5():
    rows = [degeneracy_check(PI5, L) for L in (2, 3, 4)]
    ok = all(r["match"] and r["robust"] for r in rows)
    detail = "; ".join(f"L={L}: {'match' if r['match'] else 'got ' + r['pattern']}"
                       f"{'' if r['robust'] else ' (not robust)'}" for L, r in zip((2, 3, 4), rows))
    generic = [degeneracy_check(coupling_from_gamma(0.5), L)["match"] for L in (2, 3, 4)]
    return report(5, ok, detail, f"generic gamma=0.5 patterns match for L=2,3,4: {all(generic)}")


# 6. gamma -> 0 decoupling

def criterion_6():
    c = coupling_from_gamma(1e-6)
    r2 = xxx_decoupling_report(c, 2)
    r4 = xxx_decoupling_report(c, 4)
    total4 = sum(d for *_, d in r4.bookkeeping)
    ok = (r2.max_deviation < 1e-4 and r2.ed_pattern == [1, 6, 9] and r2.predicted_pattern == [1, 6, 9]
          and total4 == 256 and r4.ok)
    return report(6, ok, f"L=2 dev {r2.max_deviation:.1e}, degeneracies {r2.ed_pattern}; "
                         f"L=4 table total {total4}, dev {r4.max_deviation:.1e}")


# 7. Bethe vs ED at L = 3

def _bethe_levels_l3():
    """Ground and first descendant of each sector, by construction family."""
    out = {}
    for n in range(4):
        out[(n, 0)] = solve_state(PI5, 3, n)
    out[(0, 1)] = state_from_roots(PI5, 3, polish_complex(PI5, 3, exotic_seed("n0-pair", 3, PI5)), 0)
    out[(1, 1)] = state_from_roots(PI5, 3, polish_complex(PI5, 3, exotic_seed("n1-axis", 3, PI5)), 1)
    out[(2, 1)] = solve_state(PI5, 3, 2, 1, 0)
    return out


def criterion_7():
    H = build_h_open(build_vertex_rep(PI5, 6, check=False))
    sect = sector_eigenvalues(H, 6, centroid_tol=1e-6)
    states = _bethe_levels_l3()
    ed, be, res = [], [], 0.0
    for (n, lvl), st in sorted(states.items()):
        hw = np.unique(np.round(np.sort(highest_weight_levels(sect, 2 * n).real), 9))
        ed.append(hw[lvl])
        be.append(st.energy)
        res = max(res, st.residual)
    ed, be = np.array(ed), np.array(be)
    a, b = np.polyfit(be, ed, 1)
    dev = float(np.max(np.abs(a * be + b - ed)))
    ok = res < ACCEPT_RESIDUAL and dev < 1e-7
    return report(7, ok, f"{len(ed)} levels (n=0..3 ground + n=0,1,2 first descendant): max residual {res:.1e}, "
                         f"energy dev {dev:.1e} after affine map a={a:.12f}, b={b:.1e}")


# 8. Bethe sweeps

SIZES = [8, 16, 32, 64]


def criterion_8():
    g0 = sweep(PI5, SIZES, 0)
    ceff = fit_ceff(SIZES, g0.energies, PI5).value
    ground = {n: sweep(PI5, SIZES, n).energies for n in (1, 2)}
    h1 = extrapolate(SIZES, scaled_gaps(SIZES, ground[1], g0.energies, PI5))[0]
    h2 = extrapolate(SIZES, scaled_gaps(SIZES, ground[2], g0.energies, PI5))[0]
    desc_ok, mult_ok, worst_desc = True, True, 0.0
    counts = {}
    for g in (1, 2, 3):
        found = 0
        for n0 in range(g + 1):
            try:
                st = sweep(PI5, SIZES, 2, n0, g - n0)
            except Exception:
                continue
            if max(s.residual for s in st.states) > ACCEPT_RESIDUAL:
                continue
            gap = extrapolate(SIZES, scaled_gaps(SIZES, st.energies, ground[2], PI5))[0]
            rel = abs(gap - g) / g
            worst_desc = max(worst_desc, rel)
            if rel < 0.05:
                found += 1
            else:
                desc_ok = False
        counts[g] = found
        mult_ok &= found == g + 1
    ok = (abs(ceff - 0.8) / 0.8 < 0.02 and abs(h1 - 0.4) / 0.4 < 0.02 and abs(h2 - 1.2) / 1.2 < 0.03
          and desc_ok and mult_ok)
    return report(8, ok, f"c_eff {ceff:.4f}; h1 {h1:.5f}; h2 {h2:.5f}; descendant max rel err {worst_desc:.3f}; "
                         f"n=2 multiplicities {counts} (expect g+1)")


# 9. representation cross-checks

def criterion_9():
    loop_dev = max(r.max_deviation for N in (8, 10, 12) for r in compare_loop_vertex(PI5, N))
    h = {j: loop_sector_gaps(PI5, [8, 10, 12], j, reference=0)[0][0] for j in (1, 2)}
    h_ok = all(abs(h[j] - j * (j + 1) / 5) / (j * (j + 1) / 5) < 0.05 for j in (1, 2))
    ex = rsos_exponents(PI5, range(8, 23), ls=(1,))[1][0]
    literal = float(string_leading_exponent(5, 1, 0) - string_leading_exponent(5, 0, 0))
    rsos_ok = abs(ex - literal) / literal < 0.10
    parity = float(string_function(5, 1, 1, 2).leading_exponent - string_function(5, 0, 0, 2).leading_exponent)
    ok = loop_dev < 1e-9 and h_ok and rsos_ok
    return report(9, ok, f"loop vs vertex max dev {loop_dev:.1e} (N=8,10,12); h1 {h[1]:.4f}, h2 {h[2]:.4f}; "
                         f"RSOS l=1 gap {ex:.5f} vs string-function (l=1,m=0) difference {literal:.5f}",
                  f"parity-compatible (l=1,m=1) difference is {parity:.5f}")


# 10. character series

def criterion_10():
    eta_ok = inverse_euler_squared(15) == two_color_partitions(15)
    z_ok = all(all(isinstance(x, int) and x >= 0 for x in z_m_series(k, m, 10).coefficients)
               for k in range(4, 9) for m in range(3))
    fits = loop_sector_gaps(PI5, [8, 10, 12], 0, 2)
    rep = level_count_compare([f[0] for f in fits], z_m_series(5, 0, 6), 2)
    ok = eta_ok and z_ok and rep.ok and [r["offset"] for r in rep.rows] == [2, 3]
    gaps = ", ".join(f"{f[0]:.4f}" for f in fits)
    return report(10, ok, f"eta^-2 = two-colour partitions to order 15: {eta_ok}; Z_m integer, non-negative: {z_ok}; "
                          f"n=0 gaps [{gaps}] vs offsets [2, 3] max rel dev {rep.max_relative_deviation:.3f}")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


@pytest.mark.parametrize("crit", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 11)])
def test_criterion(crit):
    assert crit(), RESULTS.get(CRITERIA.index(crit) + 1)


if __name__ == "__main__":
    results = [crit() for crit in CRITERIA]
    print(f"\n{sum(results)}/{len(results)} criteria pass")
    sys.exit(0 if all(results) else 1)
