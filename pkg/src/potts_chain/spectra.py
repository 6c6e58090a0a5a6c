"""Diagonalization, degeneracy patterns, sector bookkeeping and finite-size fits."""
from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .core_params import Coupling
from .operators import DENSE_LIMIT, cluster_centroids, cluster_labels, match_multisets, remove_multiset
from .tl_reps import TLRepresentation, build_loop_rep, build_rsos_rep, build_vertex_rep, sz_sector

N_ITERATIVE = 32
IMAG_TOL = 1e-9
# Near-defective clusters at q a root of unity split by ~1e-7 in double
# precision, while distinct levels stay >1e-3 apart for the sizes used here.
CLUSTER_REL_TOL = 1e-6

# expected degeneracy patterns of the open chain for N = 2L sites (generic gamma)
DEGENERACY_TABLE = {
    2: "2[1]⊕[3]⊕[5]⊕[6]",
    3: "3[1]⊕[2]⊕3[3]⊕[5]⊕3[6]⊕[7]⊕2[10]",
    4: "6[1]⊕4[2]⊕4[3]⊕4[5]⊕12[6]⊕[7]⊕[9]⊕8[10]⊕3[14]",
}


class IterationError(RuntimeError):
    pass


class FitWarning(UserWarning):
    pass


@dataclass
class Level:
    energy: complex
    multiplicity: int
    sector: object = None


@dataclass
class SpectrumRecord:
    """Clustered eigenvalues sorted by real part."""

    levels: list
    eigenvalues: np.ndarray
    threshold: float
    L: int | None = None
    coupling: Coupling | None = None
    kind: str = ""
    max_imag: float = 0.0

    @property
    def multiplicities(self) -> list:
        return [lv.multiplicity for lv in self.levels]

    @property
    def energies(self) -> np.ndarray:
        return np.array([lv.energy for lv in self.levels])

    @property
    def is_real(self) -> bool:
        return self.max_imag < IMAG_TOL

    def pattern(self) -> str:
        return degeneracy_pattern(self.multiplicities)


def _eigs(H, k=None, dense_limit=DENSE_LIMIT):
    """All eigenvalues for dense-size input, otherwise the ``k`` of smallest real part."""
    n = H.shape[0]
    if n == 0:
        return np.zeros(0, dtype=complex)
    if n <= dense_limit:
        M = H.toarray() if sp.issparse(H) else np.asarray(H)
        return np.linalg.eigvals(M)
    k = min(k or N_ITERATIVE, n - 2)
    try:
        vals = spla.eigs(sp.csr_matrix(H), k=k, which="SR", return_eigenvectors=False, tol=1e-12, maxiter=20 * n)
    except spla.ArpackNoConvergence as exc:
        raise IterationError(f"ARPACK did not converge ({len(exc.eigenvalues)} of {k} values)") from exc
    return np.asarray(vals)


def cluster_spectrum(vals, rel_tol=CLUSTER_REL_TOL, sector=None) -> SpectrumRecord:
    vals = np.asarray(vals, dtype=complex)
    span = float(np.ptp(vals.real)) if vals.size else 0.0
    thr = rel_tol * max(1.0, span)
    lab = cluster_labels(vals, thr)
    levels = []
    for l in np.unique(lab):
        sel = vals[lab == l]
        levels.append(Level(complex(sel.mean()), int(sel.size), sector))
    levels.sort(key=lambda lv: (round(lv.energy.real, 9), lv.energy.imag))
    order = np.lexsort((vals.imag, vals.real))
    return SpectrumRecord(levels, vals[order], thr, max_imag=float(np.abs(vals.imag).max()) if vals.size else 0.0)


def diagonalize(H, rel_tol=CLUSTER_REL_TOL, k=None, sector=None) -> SpectrumRecord:
    """Eigenvalues of a dense or sparse operator, clustered into degenerate levels."""
    M = H.data if hasattr(H, "basis_tag") else H
    return cluster_spectrum(_eigs(M, k), rel_tol, sector)


def sector_eigenvalues(H, N: int, k=None, centroid_tol=None) -> dict:
    """Eigenvalues per total S_z (keys are 2 S_z) for an S_z-conserving spin operator.

    With ``centroid_tol`` each block's eigenvalues are replaced by their
    cluster centroids, which removes the splitting of defective blocks.
    """
    out = {}
    for twice in range(-N, N + 1, 2):
        idx = sz_sector(N, twice / 2)
        if sp.issparse(H):
            block = H[idx][:, idx]
        else:
            block = np.asarray(H)[np.ix_(idx, idx)]
        vals = _eigs(block, k)
        if centroid_tol is not None and vals.size:
            vals = cluster_centroids(vals, centroid_tol * max(1.0, float(np.abs(vals).max())))
        out[twice] = vals
    return out


def spin_spectrum(H, N: int, rel_tol=CLUSTER_REL_TOL) -> SpectrumRecord:
    """Full clustered spectrum assembled from S_z blocks (better conditioned than one dense solve)."""
    vals = np.concatenate(list(sector_eigenvalues(H, N).values()))
    return cluster_spectrum(vals, rel_tol)


def degeneracy_pattern(mults) -> str:
    """Format multiplicities like ``2[1]⊕[3]⊕[5]⊕[6]``."""
    cnt = Counter(mults)
    parts = []
    for m in sorted(cnt):
        parts.append(f"{cnt[m] if cnt[m] > 1 else ''}[{m}]")
    return "⊕".join(parts)


def parse_pattern(text: str) -> Counter:
    """Inverse of :func:`degeneracy_pattern`, returning {multiplicity: count}."""
    out = Counter()
    for part in text.replace(" ", "").split("⊕"):
        n, m = part.split("[")
        out[int(m.rstrip("]"))] += int(n) if n else 1
    return out


def degeneracy_check(coupling: Coupling, L: int, rel_tol=CLUSTER_REL_TOL) -> dict:
    """Clustered spectrum of the open chain on 2L sites against the expected pattern."""
    from .open_boundary import build_h_open

    N = 2 * L
    H = build_h_open(build_vertex_rep(coupling, N, check=False))
    vals = np.concatenate(list(sector_eigenvalues(H, N).values()))
    rec = cluster_spectrum(vals, rel_tol)
    robust, pats = pattern_robust(vals, rel_tol)
    expected = DEGENERACY_TABLE.get(L)
    match = expected is not None and parse_pattern(expected) == parse_pattern(rec.pattern())
    return {"L": L, "gamma": coupling.gamma, "pattern": rec.pattern(), "expected": expected,
            "match": bool(match), "robust": bool(robust), "max_imag": rec.max_imag, "record": rec}


def pattern_robust(vals, rel_tol=CLUSTER_REL_TOL) -> tuple[bool, list]:
    """Do thresholds rel_tol/2, rel_tol and 2 rel_tol give the same multiset?"""
    pats = [sorted(cluster_spectrum(vals, f * rel_tol).multiplicities) for f in (0.5, 1.0, 2.0)]
    return pats[0] == pats[1] == pats[2], pats


def highest_weight_levels(sectors: dict, twice_sz: int) -> np.ndarray:
    """Levels of sector S_z minus those of S_z + 1 (lowest member of each multiplet)."""
    upper = sectors.get(twice_sz + 2, np.zeros(0))
    rest, dev = remove_multiset(sectors[twice_sz], upper)
    return np.sort_complex(rest)


@dataclass
class LoopComparison:
    j: int
    n_levels: int
    max_deviation: float


def compare_loop_vertex(coupling: Coupling, N: int, js=None) -> list:
    """Loop sector j spectra against highest-weight vertex levels in S_z = j."""
    from .open_boundary import build_h_open

    rep = build_vertex_rep(coupling, N, check=False)
    rep.generators = [sp.csr_matrix(g) for g in rep.generators]
    Hv = sp.csr_matrix(build_h_open(rep))
    sect = sector_eigenvalues(Hv, N, centroid_tol=1e-6)
    out = []
    for j in js if js is not None else range(N // 2 + 1):
        hw = highest_weight_levels(sect, 2 * j)
        Hl = build_h_open(build_loop_rep(coupling, N, j, check=False))
        lv = _eigs(Hl) if Hl.shape[0] else np.zeros(0)
        if lv.size:
            lv = cluster_centroids(lv, 1e-6 * max(1.0, float(np.abs(lv).max())))
        dev, _ = match_multisets(hw, lv)
        out.append(LoopComparison(j, len(lv), dev))
    return out


# gamma -> 0

def xxx_open_chain(L: int) -> np.ndarray:
    """-1/2 sum sigma_i . sigma_{i+1} on L open sites."""
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]])
    sz = np.diag([1.0, -1.0]).astype(complex)
    H = np.zeros((2 ** L, 2 ** L), dtype=complex)
    for i in range(L - 1):
        for s in (sx, sy, sz):
            ops = [np.eye(2)] * L
            ops[i], ops[i + 1] = s, s
            term = ops[0]
            for o in ops[1:]:
                term = np.kron(term, o)
            H -= 0.5 * term
    return H


@dataclass
class XXXReport:
    L: int
    offset: float
    max_deviation: float
    ed_pattern: list
    predicted_pattern: list
    bookkeeping: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.max_deviation < 1e-4 and self.ed_pattern == self.predicted_pattern


def xxx_pair_table(L: int, tol=1e-9) -> list:
    """Rows (label_a, label_b, eigenvalue, degeneracy) for the sum of two XXX chains.

    Single-chain levels are labelled by their SU(2) multiplet size with a
    letter for repeats, e.g. ``1a``, ``3c``; degeneracy counts both orderings.
    """
    H = xxx_open_chain(L)
    w, v = np.linalg.eigh(H)
    # total spin of each level via S^2
    sx = np.array([[0, 1], [1, 0]]) / 2
    sy = np.array([[0, -1j], [1j, 0]]) / 2
    sz = np.diag([0.5, -0.5])
    S2 = np.zeros_like(H)
    for s in (sx, sy, sz):
        tot = sum(np.kron(np.kron(np.eye(2 ** i), s), np.eye(2 ** (L - i - 1))) for i in range(L))
        S2 += tot @ tot
    lab = cluster_labels(w + 0j, tol)
    levels = []
    for l in np.unique(lab):
        sel = np.nonzero(lab == l)[0]
        vec = v[:, sel]
        s2 = np.real(np.trace(vec.conj().T @ S2 @ vec)) / sel.size
        mult = int(round(math.sqrt(1 + 4 * s2)))
        levels.append((float(w[sel].mean()), mult, sel.size))
    # split accidental coincidences only by multiplet size; name repeats a, b, c
    levels.sort(key=lambda t: (t[1], t[0]))
    names, seen = [], Counter()
    for e, mult, size in levels:
        nrep = size // mult
        for _ in range(nrep):
            seen[mult] += 1
            names.append((f"{mult}{chr(96 + seen[mult])}", e, mult))
    counts = Counter(m for _, _, m in names)
    names = [(n if counts[m] > 1 else n[:-1], e, m) for n, e, m in names]
    rows = []
    for i, (na, ea, ma) in enumerate(names):
        for nb, eb, mb in names[i:]:
            deg = ma * mb * (1 if na == nb else 2)
            rows.append((na, nb, ea + eb, deg))
    return rows


def xxx_decoupling_report(coupling: Coupling, L: int) -> XXXReport:
    """Compare the open chain near gamma = 0 with pairwise sums of two XXX chains on L sites."""
    from .open_boundary import build_h_open

    if coupling.gamma > 1e-5:
        raise ValueError("decoupling check needs gamma <= 1e-5")
    N = 2 * L
    H = build_h_open(build_vertex_rep(coupling, N, check=False))
    ed = np.concatenate(list(sector_eigenvalues(H, N).values()))
    rows = xxx_pair_table(L)
    pred = np.concatenate([np.full(d, e, dtype=complex) for _, _, e, d in rows])
    offset = float(np.mean(ed.real) - np.mean(pred.real))
    dev, _ = match_multisets(ed, pred + offset)
    ed_pat = sorted(cluster_spectrum(ed, 1e-4).multiplicities)
    pr_pat = sorted(cluster_spectrum(pred, 1e-4).multiplicities)
    return XXXReport(L, offset, dev, ed_pat, pr_pat, rows)


# finite-size scaling

def fermi_velocity(coupling: Coupling) -> float:
    """2 pi sin(gamma0) / gamma0 with gamma0 = pi - 2 gamma."""
    g0 = coupling.gamma0
    return 2 * math.pi * math.sin(g0) / g0


def sound_velocity(coupling: Coupling) -> float:
    """Velocity entering the 1/L amplitudes when L counts two-site blocks."""
    return fermi_velocity(coupling) / 2


def central_charge(k_int: int) -> float:
    return 2 - 6 / k_int


def potts_exponent(k_int: int, l: int) -> float:
    return l * (l + 1) / k_int


@dataclass
class ScalingEstimate:
    sizes: list
    energies: list
    f0: float
    fs: float
    value: float
    uncertainty: float
    velocity: float
    kind: str
    residual: float = 0.0
    finite_size: list = field(default_factory=list)


def fit_ceff(sizes, energies, coupling: Coupling, correction: bool = True) -> ScalingEstimate:
    """Least squares E = f0 L + fs - A/L (+ B/L^2); c_eff = 24 A / (pi v).

    The uncertainty is the spread between fits with and without the 1/L^2
    term on the largest sizes.
    """
    L = np.asarray(sizes, dtype=float)
    E = np.real(np.asarray(energies, dtype=complex))
    v = sound_velocity(coupling)

    def solve(Ls, Es, corr):
        cols = [Ls, np.ones_like(Ls), -1 / Ls] + ([1 / Ls ** 2] if corr else [])
        A = np.vstack(cols).T
        cond = np.linalg.cond(A)
        if cond > 1e12:
            warnings.warn(f"ill-conditioned scaling fit (cond {cond:.1e})", FitWarning)
        p, res, *_ = np.linalg.lstsq(A, Es, rcond=None)
        return p, float(np.sqrt(res[0] / len(Es))) if res.size else 0.0

    use_corr = correction and L.size >= 4
    p, res = solve(L, E, use_corr)
    alt, _ = solve(L[-3:], E[-3:], False) if L.size >= 3 else (p, 0)
    c = 24 * p[2] / (math.pi * v)
    c_alt = 24 * alt[2] / (math.pi * v)
    return ScalingEstimate(list(sizes), list(E), float(p[0]), float(p[1]), float(c), float(abs(c - c_alt)), v, "ceff", res)


def scaled_gaps(sizes, energies, ground, coupling: Coupling) -> np.ndarray:
    """(E - E0) L / (pi v) per size."""
    L = np.asarray(sizes, dtype=float)
    d = np.real(np.asarray(energies, dtype=complex) - np.asarray(ground, dtype=complex))
    return d * L / (math.pi * sound_velocity(coupling))


def extrapolate(sizes, values, degree: int = 2) -> tuple[float, float]:
    """Polynomial in 1/L through the data; returns (limit, change from degree-1 fit)."""
    x = 1 / np.asarray(sizes, dtype=float)
    y = np.asarray(values, dtype=float)
    deg = min(degree, x.size - 1)
    hi = np.polyfit(x, y, deg)[-1]
    lo = np.polyfit(x, y, max(deg - 1, 0))[-1] if deg > 0 else hi
    return float(hi), float(abs(hi - lo))


def fit_exponent(sizes, energies, ground, coupling: Coupling, degree: int = 2) -> ScalingEstimate:
    """Gap exponent from scaled gaps extrapolated in 1/L."""
    h = scaled_gaps(sizes, energies, ground, coupling)
    val, err = extrapolate(sizes, h, degree)
    return ScalingEstimate(list(sizes), list(np.real(energies)), float("nan"), float("nan"), val, err,
                           sound_velocity(coupling), "exponent", 0.0, list(h))


def three_point_ceff(sizes, energies, coupling: Coupling) -> list:
    """Successive three-size fits of E = f0 L + fs - A/L, as finite-size estimates of c_eff."""
    out = []
    for i in range(len(sizes) - 2):
        out.append(fit_ceff(sizes[i:i + 3], energies[i:i + 3], coupling, correction=False).value)
    return out


# RSOS boundary sectors

def rsos_ground_energy(coupling: Coupling, N: int, h_left: int, h_right: int) -> float:
    from .open_boundary import build_h_open

    rep = build_rsos_rep(coupling, N, h_left, h_right, check=False)
    H = build_h_open(rep)
    return float(np.min(_eigs(H, 4, dense_limit=300).real))


def rsos_exponents(coupling: Coupling, sizes, ls=(1, 2), h_left: int = 1) -> dict:
    """Scaled lowest gap of height difference l relative to l = 0, extrapolated in 1/L.

    The l = 0 ground energies (even N) are fitted to f0 L + fs - A/L + B/L^2;
    each sector l is measured on sizes with the parity of l, as
    (E_l - fit(L)) L / (pi v) with L = N/2.  Returns {l: (limit, change)}.
    """
    k = coupling.k_int
    if k is None:
        raise ValueError("RSOS sectors need gamma = pi/k_int")
    v = sound_velocity(coupling)
    even = [N for N in sizes if N % 2 == 0]
    if len(even) < 4:
        raise ValueError("need at least four even sizes for the l = 0 fit")
    Le = np.array(even, float) / 2
    E0 = np.array([rsos_ground_energy(coupling, N, h_left, h_left) for N in even])
    A = np.vstack([Le, np.ones_like(Le), 1 / Le, 1 / Le ** 2]).T
    p = np.linalg.lstsq(A, E0, rcond=None)[0]

    def fit(L):
        return p[0] * L + p[1] + p[2] / L + p[3] / L ** 2

    out = {}
    for l in ls:
        hr = h_left + l
        if hr > k - 1:
            raise ValueError(f"height difference {l} impossible from h_left={h_left} at k={k}")
        Ns = [N for N in sizes if N % 2 == l % 2]
        Ls = np.array(Ns, float) / 2
        d = [(rsos_ground_energy(coupling, N, h_left, hr) - fit(L)) * L / (math.pi * v) for N, L in zip(Ns, Ls)]
        out[l] = extrapolate(Ls[-4:], d[-4:])
    return out


# loop-sector gaps

def loop_low_levels(coupling: Coupling, N: int, j: int, count: int) -> np.ndarray:
    """Lowest ``count`` real parts of the open loop Hamiltonian in sector j."""
    from .open_boundary import build_h_open

    H = build_h_open(build_loop_rep(coupling, N, j, check=False))
    vals = _eigs(H, max(count + 4, 6), dense_limit=600)
    return np.sort(vals.real)[:count]


def loop_sector_gaps(coupling: Coupling, sizes, j: int, n_levels: int = 1, reference: int | None = None):
    """Extrapolated scaled gaps with L = N/2.

    With ``reference=None`` the gaps are measured from the lowest level of
    sector j itself (levels 1..n_levels); otherwise the lowest level of sector
    j is measured from the lowest level of sector ``reference``.  Returns a
    list of (limit, change) pairs.
    """
    Ls = [N / 2 for N in sizes]
    if reference is not None:
        E = [loop_low_levels(coupling, N, j, 1)[0] for N in sizes]
        E0 = [loop_low_levels(coupling, N, reference, 1)[0] for N in sizes]
        return [extrapolate(Ls, scaled_gaps(Ls, E, E0, coupling))]
    lows = [loop_low_levels(coupling, N, j, n_levels + 1) for N in sizes]
    out = []
    for i in range(1, n_levels + 1):
        h = scaled_gaps(Ls, [s[i] for s in lows], [s[0] for s in lows], coupling)
        out.append(extrapolate(Ls, h))
    return out
