"""Bethe equations of the open chain: two-line real solver, complex polishing, energies.

Roots on the two lines are written lambda = alpha + i pi/2 (line 0) and
lambda = alpha - i pi/2 (line 1).  Sector n (total S_z) has m = L - n roots.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import root

from .core_params import Coupling

ACCEPT_RESIDUAL = 1e-10
LINE_BAND = 0.15
MIN_SEPARATION = 1e-8
# real parts beyond this are treated as roots at infinity
MAX_ALPHA = 30.0


class ConvergenceError(RuntimeError):
    pass


class SingularRootsError(ValueError):
    """Coincident roots or roots on a pole of the equations."""


@dataclass
class BetheState:
    roots: np.ndarray
    bethe_numbers: tuple
    sector: int
    L: int
    residual: float
    energy: float
    classification: str = "Unclassified"
    gamma: float = 0.0
    shifts: tuple = (0, 0)

    @property
    def m(self) -> int:
        return len(self.roots)

    def to_json(self) -> dict:
        return {
            "L": self.L,
            "sector": self.sector,
            "gamma": self.gamma,
            "energy": self.energy,
            "residual": self.residual,
            "classification": self.classification,
            "bethe_numbers": [list(map(float, b)) for b in self.bethe_numbers],
            "shifts": list(self.shifts),
            "roots": [[float(r.real), float(r.imag)] for r in self.roots],
        }


# counting functions of the two-line equations

def k_fun(alpha, g):
    return 2 * np.arctan(np.tanh(alpha) * np.tan(g))


def k_der(alpha, g):
    t = np.tanh(alpha)
    return 2 * np.tan(g) * (1 - t ** 2) / (1 + (t * np.tan(g)) ** 2)


def theta0(x, g):
    return -2 * np.arctan(np.tanh(x / 2) / np.tan(g))


def theta0_der(x, g):
    t = np.tanh(x / 2)
    c = 1 / np.tan(g)
    return -c * (1 - t ** 2) / (1 + (t * c) ** 2)


def theta1(x, g):
    return 2 * np.arctan(np.tanh(x / 2) * np.tan(g))


def theta1_der(x, g):
    t = np.tanh(x / 2)
    c = np.tan(g)
    return c * (1 - t ** 2) / (1 + (t * c) ** 2)


def _line_equations(a0, a1, I0, I1, L, g):
    """Residuals of the logarithmic equations on both lines and their Jacobian."""
    lines = (np.asarray(a0, float), np.asarray(a1, float))
    nums = (np.asarray(I0, float), np.asarray(I1, float))
    m0, m1 = len(lines[0]), len(lines[1])
    F = np.zeros(m0 + m1)
    J = np.zeros((m0 + m1, m0 + m1))
    offs = (0, m0)
    for s in (0, 1):
        A, B, I = lines[s], lines[1 - s], nums[s]
        oa, ob = offs[s], offs[1 - s]
        for j in range(len(A)):
            r = oa + j
            F[r] = 2 * L * k_fun(A[j], g) - 2 * math.pi * I[j]
            J[r, r] += 2 * L * k_der(A[j], g)
            for k in range(len(A)):
                if k == j:
                    continue
                d, p = A[j] - A[k], A[j] + A[k]
                F[r] -= theta0(d, g) + theta1(p, g)
                J[r, r] -= theta0_der(d, g) + theta1_der(p, g)
                J[r, oa + k] -= -theta0_der(d, g) + theta1_der(p, g)
            for k in range(len(B)):
                d, p = A[j] - B[k], A[j] + B[k]
                F[r] -= theta1(d, g) + theta0(p, g)
                J[r, r] -= theta1_der(d, g) + theta0_der(p, g)
                J[r, ob + k] -= -theta1_der(d, g) + theta0_der(p, g)
    return F, J


def line_roots(a0, a1) -> np.ndarray:
    return np.concatenate([np.asarray(a0) + 0.5j * math.pi, np.asarray(a1) - 0.5j * math.pi])


# seeds

def ground_numbers(L: int, n: int):
    """Bethe numbers of the lowest state in sector n; returns (I0, I1, fixed_zero_root)."""
    m = L - n
    if m < 0:
        raise ValueError(f"sector n={n} needs n <= L={L}")
    if m % 2 == 0:
        I0 = [j - 0.5 for j in range(1, m // 2 + 1)]
        return I0, list(I0), False
    I0 = [float(j) for j in range(0, (m + 1) // 2)]
    I1 = [float(j) for j in range(1, (m - 1) // 2 + 1)]
    return I0, I1, True


def shifted_numbers(L: int, n: int, n0: int = 0, n1: int = 0):
    """Shift the largest n0 numbers on line 0 and the largest n1 on line 1 by one."""
    I0, I1, fixed = ground_numbers(L, n)
    if n0 > len(I0) or n1 > len(I1):
        raise ValueError("more shifts than roots on a line")
    for t in range(n0):
        I0[-1 - t] += 1
    for t in range(n1):
        I1[-1 - t] += 1
    if fixed and n0 >= len(I0):
        fixed = False
    return I0, I1, fixed


def _initial_guess(I, L, g):
    # invert the bare counting function, clipped inside its range
    target = np.clip(np.pi * np.asarray(I, float) / L, -1.98 * g, 1.98 * g)
    return np.arctanh(np.clip(np.tan(target / 2) / np.tan(g), -0.999, 0.999))


def solve_lines(coupling: Coupling, L: int, I0, I1, fixed_zero: bool = False, tol=1e-13, x0=None):
    """Real solution (alpha0, alpha1) of the two-line logarithmic equations.

    With ``fixed_zero`` the first line-0 root is pinned at alpha = 0 and its
    equation is dropped; its validity is checked afterwards through the full
    multiplicative residual.
    """
    g = coupling.gamma
    m0, m1 = len(I0), len(I1)
    skip = 1 if fixed_zero else 0

    def unpack(x):
        a0 = np.concatenate([[0.0] * skip, x[: m0 - skip]])
        return a0, x[m0 - skip:]

    def fun(x):
        F, J = _line_equations(*unpack(x), I0, I1, L, g)
        keep = np.arange(skip, m0 + m1)
        return F[keep], J[np.ix_(keep, keep)]

    if x0 is None:
        x0 = np.concatenate([_initial_guess(I0[skip:], L, g), _initial_guess(I1, L, g)])
    else:
        x0 = np.concatenate([np.asarray(x0[0], float)[skip:], np.asarray(x0[1], float)])
    if x0.size == 0:
        return unpack(x0)
    sol = root(fun, x0, jac=True, method="hybr", tol=tol)
    if not sol.success or np.max(np.abs(sol.fun)) > 1e-9:
        sol2 = root(fun, x0, jac=True, method="lm", tol=tol)
        if np.max(np.abs(sol2.fun)) < np.max(np.abs(sol.fun)):
            sol = sol2
    if np.max(np.abs(sol.fun)) > 1e-9:
        raise ConvergenceError(f"two-line equations did not converge (max |F| = {np.max(np.abs(sol.fun)):.2e})")
    if np.max(np.abs(sol.x), initial=0.0) > MAX_ALPHA:
        raise ConvergenceError("a root escaped to infinity: Bethe numbers outside the admissible range")
    return unpack(sol.x)


# multiplicative equations

def _mult_sides(lam, L, g):
    lam = np.asarray(lam, dtype=complex)
    m = lam.size
    a = np.sinh(lam + 1j * g) ** (2 * L)
    b = np.sinh(lam - 1j * g) ** (2 * L)
    for j in range(m):
        for k in range(m):
            if k == j:
                continue
            d = (lam[j] - lam[k]) / 2
            s = (lam[j] + lam[k]) / 2
            a[j] *= np.sinh(d - 1j * g) * np.sinh(s - 1j * g)
            b[j] *= np.sinh(d + 1j * g) * np.sinh(s + 1j * g)
    return a, b


def _sinh_ratio(z, a, b):
    """sinh(z + a) / sinh(z + b) without overflow for large |Re z|."""
    z = np.asarray(z, dtype=complex)
    flip = z.real < 0
    w = np.where(flip, -z, z)
    # for Re w >= 0: sinh(w + c) = e^{w} (e^{c} - e^{-2w - c}) / 2
    pa, pb = np.where(flip, -a, a), np.where(flip, -b, b)
    return (np.exp(pa) - np.exp(-2 * w - pa)) / (np.exp(pb) - np.exp(-2 * w - pb))


def bae_ratio(coupling: Coupling, L: int, roots) -> np.ndarray:
    """B_j / A_j of the cleared product equations, computed from bounded ratios."""
    lam = np.asarray(roots, dtype=complex)
    g = coupling.gamma
    r = _sinh_ratio(lam, -1j * g, 1j * g) ** (2 * L)
    for j in range(lam.size):
        for k in range(lam.size):
            if k != j:
                d = (lam[j] - lam[k]) / 2
                s = (lam[j] + lam[k]) / 2
                r[j] *= _sinh_ratio(d, 1j * g, -1j * g) * _sinh_ratio(s, 1j * g, -1j * g)
    return r


def bae_residual(coupling: Coupling, L: int, roots) -> np.ndarray:
    """Per-root normalized residual (A - B)/(|A| + |B|) of the cleared product equations."""
    lam = np.asarray(roots, dtype=complex)
    if lam.size == 0:
        return np.zeros(0)
    check_distinct(lam)
    r = bae_ratio(coupling, L, lam)
    out = np.abs(1 - r) / (1 + np.abs(r))
    if not np.all(np.isfinite(out)):
        raise SingularRootsError("product equations are singular at these roots")
    return out


def check_distinct(lam, sep=MIN_SEPARATION):
    lam = np.asarray(lam, dtype=complex)
    for j in range(lam.size):
        for k in range(j + 1, lam.size):
            # roots are defined modulo 2 pi i and up to sign
            for other in (lam[k], -lam[k]):
                d = lam[j] - other
                d = complex(d.real, (d.imag + math.pi) % (2 * math.pi) - math.pi)
                if abs(d) < sep:
                    raise SingularRootsError(f"roots {lam[j]:.6g} and {lam[k]:.6g} coincide")


def energy(coupling: Coupling, roots) -> float:
    g = coupling.gamma
    lam = np.asarray(roots, dtype=complex)
    e = np.sum(2 * math.sin(2 * g) ** 2 / (np.cosh(2 * lam) - math.cos(2 * g)))
    return float(e.real)


def energy_imag(coupling: Coupling, roots) -> float:
    g = coupling.gamma
    lam = np.asarray(roots, dtype=complex)
    return float(np.sum(2 * math.sin(2 * g) ** 2 / (np.cosh(2 * lam) - math.cos(2 * g))).imag)


def canonical_roots(roots, decimals: int = 8) -> np.ndarray:
    """Fix Im in (-pi, pi], then Re >= 0 (Im >= 0 on ties), sorted."""
    out = []
    for x in np.asarray(roots, dtype=complex):
        x = complex(x.real, (x.imag + math.pi) % (2 * math.pi) - math.pi)
        if x.real < -1e-9 or (abs(x.real) <= 1e-9 and x.imag < 0):
            x = -x
            x = complex(x.real, (x.imag + math.pi) % (2 * math.pi) - math.pi)
        if abs(x.imag + math.pi) < 1e-9:
            x = complex(x.real, math.pi)
        out.append(x)
    return np.sort_complex(np.round(np.array(out, dtype=complex), decimals))


def classify_roots(roots, band: float = LINE_BAND) -> str:
    lam = canonical_roots(roots)
    if lam.size == 0:
        return "XXZSubsetEven"
    im = np.abs(lam.imag)
    on_line = np.abs(im - math.pi / 2) < band
    on_axis = (im < band) | (np.abs(im - math.pi) < band)
    if np.all(on_line):
        up = np.sort(lam.real[lam.imag > 0])
        dn = np.sort(lam.real[lam.imag < 0])
        zero = up[np.abs(up) < 1e-7]
        if len(zero) == 1 and len(up) - 1 == len(dn) and np.allclose(up[np.abs(up) >= 1e-7], dn, atol=1e-7):
            return "XXZSubsetOdd"
        if len(up) == len(dn) and np.allclose(up, dn, atol=1e-7):
            return "XXZSubsetEven"
        return "ShiftedDescendant"
    if np.any(on_axis):
        return "ExoticRealAxis"
    if np.all(on_line | (np.abs(lam.real) < 1e-7)):
        return "ConjugatePairSea"
    return "Unclassified"


def solve_state(coupling: Coupling, L: int, n: int, n0: int = 0, n1: int = 0) -> BetheState:
    """Two-line state of sector n with (n0, n1) shifted Bethe numbers."""
    I0, I1, fixed = shifted_numbers(L, n, n0, n1)
    try:
        a0, a1 = solve_lines(coupling, L, I0, I1, fixed)
    except ConvergenceError:
        if not (n0 or n1):
            raise
        a0, a1 = _continue_from_ground(coupling, L, n, I0, I1, fixed)
    lam = line_roots(a0, a1)
    res = float(np.max(bae_residual(coupling, L, lam))) if lam.size else 0.0
    label = classify_roots(lam)
    if label in ("XXZSubsetEven", "XXZSubsetOdd") and (n0 or n1):
        label = "ShiftedDescendant"
    return BetheState(lam, (tuple(I0), tuple(I1)), n, L, res, energy(coupling, lam), label,
                      coupling.gamma, (n0, n1))


def _continue_from_ground(coupling, L, n, I0, I1, fixed, steps: int = 20):
    """Move the Bethe numbers from the sector ground state to (I0, I1) in small steps."""
    G0, G1, gfixed = ground_numbers(L, n)
    if gfixed != fixed:
        raise ConvergenceError("continuation needs the same pinned-root structure")
    x = solve_lines(coupling, L, G0, G1, fixed)
    for t in np.linspace(0, 1, steps + 1)[1:]:
        J0 = [a + t * (b - a) for a, b in zip(G0, I0)]
        J1 = [a + t * (b - a) for a, b in zip(G1, I1)]
        x = solve_lines(coupling, L, J0, J1, fixed, x0=x)
    return x


def continue_in_gamma(state: BetheState, gamma_target: float, steps: int = 40):
    """Follow a two-line state to another gamma with its Bethe numbers held fixed.

    Returns (state at the last gamma reached, list of gammas that converged).
    The list ends early when Newton fails, which marks the empirical edge of
    validity for this configuration.
    """
    from .core_params import coupling_from_gamma

    I0, I1 = (list(x) for x in state.bethe_numbers)
    fixed = bool(np.any(np.abs(state.roots.real[state.roots.imag > 0]) < 1e-9)) and len(I0) > len(I1)
    up = np.sort(state.roots[state.roots.imag > 0].real)
    dn = np.sort(state.roots[state.roots.imag < 0].real)
    x = (up, dn)
    reached, last = [], state
    for g in np.linspace(state.gamma, gamma_target, steps + 1)[1:]:
        c = coupling_from_gamma(g)
        try:
            x = solve_lines(c, state.L, I0, I1, fixed, x0=x)
        except ConvergenceError:
            break
        lam = line_roots(*x)
        res = float(np.max(bae_residual(c, state.L, lam))) if lam.size else 0.0
        if res > ACCEPT_RESIDUAL:
            break
        last = BetheState(lam, (tuple(I0), tuple(I1)), state.sector, state.L, res, energy(c, lam),
                          classify_roots(lam), g, state.shifts)
        reached.append(float(g))
    return last, reached


def polish_complex(coupling: Coupling, L: int, seed, tol=1e-14) -> np.ndarray:
    """Newton-type refinement of arbitrary complex roots on the product equations."""
    seed = np.asarray(seed, dtype=complex)
    m = seed.size
    g = coupling.gamma

    def f(v):
        lam = v[:m] + 1j * v[m:]
        a, b = _mult_sides(lam, L, g)
        r = (a - b) / (np.abs(a) + np.abs(b))
        return np.concatenate([r.real, r.imag])

    sol = root(f, np.concatenate([seed.real, seed.imag]), method="hybr", tol=tol)
    return sol.x[:m] + 1j * sol.x[m:]


def state_from_roots(coupling: Coupling, L: int, roots, n: int | None = None) -> BetheState:
    lam = canonical_roots(roots, 14)
    res = float(np.max(bae_residual(coupling, L, lam))) if lam.size else 0.0
    n = L - lam.size if n is None else n
    return BetheState(lam, ((), ()), n, L, res, energy(coupling, lam), classify_roots(lam), coupling.gamma)


def _admissible(coupling, lam, L):
    g = coupling.gamma
    try:
        check_distinct(lam, 1e-5)
    except SingularRootsError:
        return False
    if np.any(np.abs(np.cosh(2 * lam) - math.cos(2 * g)) < 1e-6):
        return False
    if np.any(np.abs(np.sinh(lam - 1j * g)) < 1e-6) or np.any(np.abs(np.sinh(lam + 1j * g)) < 1e-6):
        return False
    return True


def search_solutions(coupling: Coupling, L: int, n: int, tries: int = 400, seed: int = 0) -> list:
    """Random complex search for all admissible solutions in sector n (small L only)."""
    m = L - n
    if m == 0:
        return [state_from_roots(coupling, L, [], n)]
    rng = np.random.default_rng(seed)
    found = {}
    lines = np.array([0.0, math.pi / 2, -math.pi / 2, math.pi])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for _ in range(tries):
            x0 = rng.normal(size=m) + 1j * rng.choice(lines, size=m) + 0.3j * rng.normal(size=m)
            lam = polish_complex(coupling, L, x0)
            if not np.all(np.isfinite(lam)) or not _admissible(coupling, lam, L):
                continue
            st = state_from_roots(coupling, L, lam, n)
            if st.residual < ACCEPT_RESIDUAL:
                found.setdefault(tuple(canonical_roots(lam, 6)), st)
    return sorted(found.values(), key=lambda s: s.energy)


# families of states outside the two-line form, as seeds for polishing

def exotic_seed(kind: str, L: int, coupling: Coupling) -> np.ndarray:
    """Seeds for states with roots off the two lines.

    ``"n1-axis"``: one root on the real axis, one on the imaginary axis, the
    rest two-line pairs.  ``"n0-pair"``: a pair beta, beta + i pi plus a root
    at i pi/2 and two-line pairs.
    """
    if kind == "n1-axis":
        m = L - 1
        base = solve_state(coupling, L, 1)
        rest = np.sort_complex(base.roots)[: max(m - 2, 0)]
        return np.concatenate([[1.42j, 1.09], rest])[:m]
    if kind == "n0-pair":
        m = L
        base = solve_state(coupling, L, 0)
        rest = [r for r in base.roots if abs(r.real) > 1e-7][: max(m - 3, 0)]
        return np.concatenate([[0.5j * math.pi, 0.9, 0.9 + 1j * math.pi], rest])[:m]
    raise ValueError(f"unknown family {kind!r}")


# XXZ subset bookkeeping

@dataclass
class XXZSubset:
    gamma0: float
    Lambda: float
    Lambda_prime: float
    m_prime: int
    odd: bool


def xxz_subset_parameters(coupling: Coupling, m: int) -> XXZSubset:
    g0 = coupling.gamma0
    if m % 2 == 0:
        return XXZSubset(g0, math.pi / 2 - g0 / 2, 0.0, m // 2, False)
    return XXZSubset(g0, math.pi / 2 - g0 / 2, math.pi - g0, (m - 1) // 2, True)


def xxz_bae_residual(coupling: Coupling, L: int, mu, params: XXZSubset) -> float:
    """Residual of the open XXZ equations with boundary angles Lambda, Lambda'."""
    mu = np.asarray(mu, dtype=complex)
    g0 = params.gamma0
    worst = 0.0
    for j in range(mu.size):
        lhs = (np.sinh(mu[j] + 0.5j * g0) / np.sinh(mu[j] - 0.5j * g0)) ** (2 * L)
        for lam_b in (params.Lambda, params.Lambda_prime):
            lhs *= np.sinh(mu[j] + 1j * lam_b) / np.sinh(mu[j] - 1j * lam_b)
        rhs = 1.0
        for k in range(mu.size):
            if k != j:
                rhs *= np.sinh(mu[j] - mu[k] + 1j * g0) / np.sinh(mu[j] - mu[k] - 1j * g0)
                rhs *= np.sinh(mu[j] + mu[k] + 1j * g0) / np.sinh(mu[j] + mu[k] - 1j * g0)
        worst = max(worst, abs(lhs - rhs) / (abs(lhs) + abs(rhs)))
    return float(worst)


def subset_alphas(state: BetheState) -> np.ndarray:
    """Common real parts of the paired two-line roots (the zero root excluded)."""
    up = np.sort(state.roots.real[(state.roots.imag > 0) & (np.abs(state.roots.real) > 1e-7)])
    return up


def predict_exponent(k_int: int, n: int) -> float:
    """Exponent n(n+1)/k of the lowest state in sector n."""
    return n * (n + 1) / k_int


def effective_central_charge(k_int: int, S: float, odd: bool) -> float:
    """Twice the XXZ effective central charge with the subset boundary angles."""
    x = (4 * S - 1) if odd else (1 + 4 * S)
    return 2 - 6 / k_int * x ** 2


# sweeps

@dataclass
class SweepResult:
    sizes: list
    sector: int
    shifts: tuple
    states: list = field(default_factory=list)

    @property
    def energies(self) -> list:
        return [s.energy for s in self.states]


def sweep(coupling: Coupling, sizes, n: int, n0: int = 0, n1: int = 0, workers: int = 1) -> SweepResult:
    """Solve the same (n, n0, n1) family for each size; results ordered by size."""
    sizes = sorted(int(s) for s in sizes)
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as ex:
            states = list(ex.map(solve_state, [coupling] * len(sizes), sizes, [n] * len(sizes),
                                 [n0] * len(sizes), [n1] * len(sizes)))
    else:
        states = [solve_state(coupling, L, n, n0, n1) for L in sizes]
    return SweepResult(sizes, n, (n0, n1), states)
