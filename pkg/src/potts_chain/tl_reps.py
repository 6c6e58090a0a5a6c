"""Temperley-Lieb generators in vertex, tilde-vertex, loop and RSOS bases."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np
import scipy.sparse as sp

from .core_params import Coupling, DomainError
from .operators import DENSE_LIMIT

TL_TOL = 1e-12


class EmptyBasisError(ValueError):
    """No basis state is compatible with the requested boundary data."""


class TLRelationError(RuntimeError):
    """A constructed representation violates a defining relation."""


@dataclass
class TLRepresentation:
    """Generators e_1..e_{N-1} stored 0-based: ``generators[m-1]`` is e_m."""

    kind: str
    n_sites: int
    basis: list
    generators: list
    coupling: Coupling
    params: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def sparse(self) -> bool:
        return sp.issparse(self.generators[0]) if self.generators else False

    def identity(self):
        if self.sparse:
            return sp.identity(self.dim, dtype=complex, format="csr")
        return np.eye(self.dim, dtype=complex)


@dataclass(frozen=True)
class LinkPattern:
    """Planar pairing of N points; ``partner[i] == -1`` marks a through-line."""

    partner: tuple

    @property
    def sector(self) -> int:
        return sum(1 for p in self.partner if p < 0) // 2

    def ballot(self) -> str:
        out = []
        for i, p in enumerate(self.partner):
            out.append("|" if p < 0 else ("(" if p > i else ")"))
        return "".join(out)


@dataclass(frozen=True)
class RSOSPath:
    heights: tuple


def _check_relations(rep: TLRepresentation, tol=TL_TOL):
    es = rep.generators
    q = rep.coupling.sqrtQ

    def nrm(x):
        return sp.linalg.norm(x) if sp.issparse(x) else np.linalg.norm(x)

    worst = 0.0
    for i, e in enumerate(es):
        worst = max(worst, nrm(e @ e - q * e))
        if i + 1 < len(es):
            f = es[i + 1]
            worst = max(worst, nrm(e @ f @ e - e), nrm(f @ e @ f - f))
        for j in range(i + 2, len(es)):
            worst = max(worst, nrm(e @ es[j] - es[j] @ e))
    scale = max(1.0, float(np.sqrt(rep.dim)))
    if worst > tol * scale * 10:
        raise TLRelationError(f"{rep.kind}: TL relations violated by {worst:.3e}")
    return worst


def tl_relation_defect(rep: TLRepresentation) -> float:
    """Largest Frobenius defect over the three defining relations."""
    return _check_relations(rep, tol=np.inf)


def vertex_block(coupling: Coupling) -> np.ndarray:
    z = np.exp(1j * coupling.gamma)
    return np.array([[0, 0, 0, 0], [0, 1 / z, 1, 0], [0, 1, z, 0], [0, 0, 0, 0]], dtype=complex)


def tilde_block(coupling: Coupling) -> np.ndarray:
    z = np.exp(1j * coupling.gamma)
    return np.array([[0, 0, 0, 0], [0, z, -1, 0], [0, -1, 1 / z, 0], [0, 0, 0, 0]], dtype=complex)


_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.diag([1.0, -1.0]).astype(complex)


def pauli_block(coupling: Coupling) -> np.ndarray:
    """Two-site generator assembled from Pauli matrices."""
    c, s = np.cos(coupling.gamma), np.sin(coupling.gamma)
    I2 = np.eye(2)
    out = np.kron(_SX, _SX) + np.kron(_SY, _SY) - c * np.kron(_SZ, _SZ) + c * np.eye(4)
    out = out - 1j * s * (np.kron(_SZ, I2) - np.kron(I2, _SZ))
    return 0.5 * out


def _spin_generators(block, N):
    dense = 2 ** N <= DENSE_LIMIT
    gens = []
    for i in range(N - 1):
        if dense:
            g = np.kron(np.kron(np.eye(2 ** i), block), np.eye(2 ** (N - i - 2)))
        else:
            g = sp.kron(sp.kron(sp.identity(2 ** i), sp.csr_matrix(block)),
                        sp.identity(2 ** (N - i - 2)), format="csr")
        gens.append(g)
    return gens


def spin_labels(N):
    return ["".join("ud"[(s >> (N - 1 - q)) & 1] for q in range(N)) for s in range(2 ** N)]


def build_vertex_rep(coupling: Coupling, N: int, check=True) -> TLRepresentation:
    """Usual spin-1/2 realization; basis states are strings of u/d, site 1 first."""
    if N < 2:
        raise DomainError("need at least two sites")
    rep = TLRepresentation("vertex", N, spin_labels(N), _spin_generators(vertex_block(coupling), N), coupling)
    if check and N <= 12:
        _check_relations(rep)
    return rep


def build_tilde_rep(coupling: Coupling, N: int, check=True) -> TLRepresentation:
    if N < 2:
        raise DomainError("need at least two sites")
    rep = TLRepresentation("tilde", N, spin_labels(N), _spin_generators(tilde_block(coupling), N), coupling)
    if check and N <= 12:
        _check_relations(rep)
    return rep


def sz_values(N: int) -> np.ndarray:
    """Twice the total S_z of every spin basis state (up counts +1)."""
    s = np.arange(2 ** N)
    downs = np.array([bin(x).count("1") for x in s])
    return N - 2 * downs


def sz_sector(N: int, sz: int) -> np.ndarray:
    """Indices of basis states with total S_z = sz (sz may be half-integer for odd N)."""
    return np.nonzero(sz_values(N) == int(round(2 * sz)))[0]


# link patterns

def _ballots(N, j):
    out = []

    def rec(prefix, depth, defects):
        pos = len(prefix)
        if pos == N:
            if depth == 0 and defects == 2 * j:
                out.append(prefix)
            return
        left = N - pos
        if depth + (2 * j - defects) > left:
            return
        rec(prefix + "(", depth + 1, defects)
        if depth > 0:
            rec(prefix + ")", depth - 1, defects)
        if depth == 0 and defects < 2 * j:
            rec(prefix + "|", depth, defects + 1)

    rec("", 0, 0)
    return sorted(out)


def _from_ballot(s):
    partner = [-1] * len(s)
    stack = []
    for i, ch in enumerate(s):
        if ch == "(":
            stack.append(i)
        elif ch == ")":
            a = stack.pop()
            partner[a], partner[i] = i, a
    return LinkPattern(tuple(partner))


def link_patterns(N: int, j: int) -> list[LinkPattern]:
    """All planar link patterns with 2j through-lines, in ballot lexicographic order."""
    if N % 2 or not 0 <= j <= N // 2:
        raise DomainError(f"invalid sector j={j} for N={N}")
    return [_from_ballot(s) for s in _ballots(N, j)]


def _loop_action(p, i, sqrtQ):
    """Image of pattern ``p`` under e_{i+1}: (weight, new pattern) or None."""
    a, b = p[i], p[i + 1]
    if a == i + 1:
        return sqrtQ, p
    if a < 0 and b < 0:
        return None
    new = list(p)
    new[i], new[i + 1] = i + 1, i
    if a >= 0 and b >= 0:
        new[a], new[b] = b, a
    elif a < 0:
        new[b] = -1
    else:
        new[a] = -1
    return 1.0, tuple(new)


def build_loop_rep(coupling: Coupling, N: int, j: int, check=True) -> TLRepresentation:
    """Standard module with 2j through-lines; contracting two through-lines gives zero."""
    pats = link_patterns(N, j)
    index = {p.partner: n for n, p in enumerate(pats)}
    dim = len(pats)
    gens = []
    for i in range(N - 1):
        rows, cols, vals = [], [], []
        for n, p in enumerate(pats):
            img = _loop_action(p.partner, i, coupling.sqrtQ)
            if img is None:
                continue
            w, q = img
            rows.append(index[q])
            cols.append(n)
            vals.append(w)
        m = sp.csr_matrix((np.array(vals, dtype=complex), (rows, cols)), shape=(dim, dim))
        gens.append(m if dim > DENSE_LIMIT else m.toarray())
    rep = TLRepresentation("loop", N, pats, gens, coupling, {"j": j})
    if check and dim <= 2000:
        _check_relations(rep)
    return rep


# RSOS

def rsos_weight(k_int: int, a: int) -> float:
    return np.sin(a * np.pi / k_int) / np.sin(np.pi / k_int)


def rsos_paths(N: int, k_int: int, h_left: int, h_right: int) -> list[RSOSPath]:
    """Height paths h_1..h_{N+1} with unit steps and heights in 1..k_int-1."""
    top = k_int - 1
    frontier = [(h_left,)]
    for _ in range(N):
        frontier = [p + (p[-1] + d,) for p in frontier for d in (-1, 1) if 1 <= p[-1] + d <= top]
    return [RSOSPath(p) for p in sorted(frontier) if p[-1] == h_right]


def build_rsos_rep(coupling: Coupling, N: int, h_left: int, h_right: int, check=True) -> TLRepresentation:
    """A-type RSOS realization; e_m moves the height between strands m and m+1."""
    k = coupling.k_int
    if k is None:
        raise DomainError("RSOS representation needs gamma = pi/k_int")
    if not (1 <= h_left <= k - 1 and 1 <= h_right <= k - 1):
        raise DomainError(f"boundary heights must lie in 1..{k - 1}")
    paths = rsos_paths(N, k, h_left, h_right)
    if not paths:
        raise EmptyBasisError(f"no path from {h_left} to {h_right} in {N} steps at k={k}")
    index = {p.heights: n for n, p in enumerate(paths)}
    S = [0.0] + [rsos_weight(k, a) for a in range(1, k)]
    dim = len(paths)
    gens = []
    for m in range(N - 1):
        rows, cols, vals = [], [], []
        for n, p in enumerate(paths):
            h = p.heights
            if h[m] != h[m + 2]:
                continue
            for hp in (h[m] - 1, h[m] + 1):
                if not 1 <= hp <= k - 1:
                    continue
                q = h[: m + 1] + (hp,) + h[m + 2:]
                rows.append(index[q])
                cols.append(n)
                vals.append(np.sqrt(S[h[m + 1]] * S[hp]) / S[h[m]])
        mat = sp.csr_matrix((np.array(vals, dtype=complex), (rows, cols)), shape=(dim, dim))
        gens.append(mat if dim > DENSE_LIMIT else mat.toarray())
    rep = TLRepresentation("rsos", N, paths, gens, coupling, {"h_left": h_left, "h_right": h_right})
    if check and dim <= 2000:
        _check_relations(rep)
    return rep


def build_C_operator(rep: TLRepresentation):
    """Product of (1 - e_i / cos gamma) over odd i; an involution."""
    if rep.n_sites % 2:
        raise DomainError("C needs an even number of sites")
    c = np.cos(rep.coupling.gamma)
    one = rep.identity()
    factors = [one - rep.generators[i] / c for i in range(0, rep.n_sites - 1, 2)]
    return reduce(lambda a, b: a @ b, factors)
