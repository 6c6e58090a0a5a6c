"""K-matrices, reflection equation, double-row transfer matrix and open Hamiltonians.

The K-matrix is written in the D22 edge-label basis (1, 2, 3, 4), where label 1
is down-down and label 4 is up-up; labels 2 and 3 are the symmetric and
antisymmetric combinations of the thin and thick states.  Its multiplicative
parameter is lambda = 2iu.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .core_params import Coupling
from .lattice_transfer import block_R, block_R_derivative, c_basis_matrix, swap16
from .operators import (
    CapacityError,
    OperatorMatrix,
    cluster_centroids,
    embed_one,
    embed_two,
    match_multisets,
)
from .tl_reps import TLRepresentation, build_tilde_rep, build_vertex_rep

_S2 = 1 / np.sqrt(2)
# label basis (1,2,3,4) -> (1, 2~, 3~, 4) with 2~,3~ = (2 +- 3)/sqrt2
_SYM = np.array([[1, 0, 0, 0], [0, _S2, _S2, 0], [0, _S2, -_S2, 0], [0, 0, 0, 1]])
# label order (1,2,3,4) inside the C-basis order (up-up, |0>, |0bar>, down-down)
_LABEL_PERM = [3, 1, 2, 0]


# above this dimension the open Hamiltonian is assembled as a sparse matrix
SPARSE_H_DIM = 512


class IntegrabilityError(RuntimeError):
    """Spectra that should agree up to an affine map do not."""


def _y_functions(k, lam):
    e = np.exp
    y1 = -e(-lam) * (e(2 * lam) + k)
    y4 = -e(3 * lam) * (e(2 * lam) + k)
    y2 = -0.5 * (1 + e(2 * lam)) * e(lam) * (1 + k)
    y5 = 0.5 * (e(2 * lam) - 1) * (1 - k) * e(lam)
    return y1, y2, y2, y4, y5, y5


def _y_derivatives(k, lam):
    e = np.exp
    d1 = -(e(lam) - k * e(-lam))
    d4 = -(5 * e(5 * lam) + 3 * k * e(3 * lam))
    d2 = -0.5 * (1 + k) * (e(lam) + 3 * e(3 * lam))
    d5 = 0.5 * (1 - k) * (3 * e(3 * lam) - e(lam))
    return d1, d2, d2, d4, d5, d5


def k_minus_labels(coupling: Coupling, lam) -> np.ndarray:
    """4x4 K-matrix in the label basis (1,2,3,4) at multiplicative parameter lam."""
    y1, y2, y3, y4, y5, y6 = _y_functions(coupling.jimbo_k, lam)
    return np.array([[y1, 0, 0, 0], [0, y2, y5, 0], [0, y6, y3, 0], [0, 0, 0, y4]], dtype=complex)


def labels_to_spin(K, coupling: Coupling) -> np.ndarray:
    """Map a label-basis 4x4 matrix onto the two-qubit spin basis."""
    Kc = (_SYM @ K @ _SYM)[np.ix_(_LABEL_PERM, _LABEL_PERM)]
    U = c_basis_matrix(coupling)
    return U @ Kc @ np.linalg.inv(U)


def spin_to_C_labels(K, coupling: Coupling) -> np.ndarray:
    """Spin-basis 4x4 matrix in the C-basis, rows/cols ordered by label 1,2,3,4."""
    U = c_basis_matrix(coupling)
    Kc = np.linalg.inv(U) @ K @ U
    inv = np.argsort(_LABEL_PERM)
    return Kc[np.ix_(inv, inv)]


def rho(coupling: Coupling) -> complex:
    """-log k on the principal branch."""
    return complex(-np.log(coupling.jimbo_k))


def m_matrix(coupling: Coupling) -> np.ndarray:
    k = coupling.jimbo_k
    return np.diag([k, 1, 1, 1 / k]).astype(complex)


def k_minus(coupling: Coupling, u) -> np.ndarray:
    """Left K-matrix in the spin basis at lambda = 2iu."""
    return labels_to_spin(k_minus_labels(coupling, 2j * u), coupling)


def k_minus_derivative(coupling: Coupling, u) -> np.ndarray:
    d1, d2, d3, d4, d5, d6 = _y_derivatives(coupling.jimbo_k, 2j * u)
    dK = np.array([[d1, 0, 0, 0], [0, d2, d5, 0], [0, d6, d3, 0], [0, 0, 0, d4]], dtype=complex)
    return 2j * labels_to_spin(dK, coupling)


def k_plus(coupling: Coupling, u) -> np.ndarray:
    """Right K-matrix: transpose (label basis) of K-(-rho - lambda) times M."""
    lam = 2j * u
    K = k_minus_labels(coupling, -rho(coupling) - lam).T @ m_matrix(coupling)
    return labels_to_spin(K, coupling)


def k_plus_derivative(coupling: Coupling, u) -> np.ndarray:
    lam = 2j * u
    d1, d2, d3, d4, d5, d6 = _y_derivatives(coupling.jimbo_k, -rho(coupling) - lam)
    dK = np.array([[d1, 0, 0, 0], [0, d2, d5, 0], [0, d6, d3, 0], [0, 0, 0, d4]], dtype=complex)
    return -2j * labels_to_spin(dK.T @ m_matrix(coupling), coupling)


@dataclass
class BoundaryPair:
    coupling: Coupling

    @property
    def rho(self) -> complex:
        return rho(self.coupling)

    @property
    def m_matrix(self) -> np.ndarray:
        return m_matrix(self.coupling)

    def k_minus(self, u):
        return k_minus(self.coupling, u)

    def k_plus(self, u):
        return k_plus(self.coupling, u)


def boundary_ybe_residual(coupling: Coupling, u, v, gauge: str = "stag") -> float:
    """Relative residual of R12(u-v) K1(u) R21(u+v) K2(v) = K2(v) R12(u+v) K1(u) R21(u-v)."""
    P = swap16()
    I4 = np.eye(4)

    def R12(z):
        return block_R(coupling, z, gauge)

    def R21(z):
        return P @ block_R(coupling, z, gauge) @ P

    Ku, Kv = k_minus(coupling, u), k_minus(coupling, v)
    lhs = R12(u - v) @ np.kron(Ku, I4) @ R21(u + v) @ np.kron(I4, Kv)
    rhs = np.kron(I4, Kv) @ R12(u + v) @ np.kron(Ku, I4) @ R21(u - v)
    return float(np.linalg.norm(lhs - rhs) / np.linalg.norm(lhs))


def transfer_commutator(coupling: Coupling, u, v, L: int, gauge: str = "stag") -> float:
    """Relative norm of [t(u), t(v)] for the open transfer matrix."""
    a = open_transfer(coupling, u, L, gauge).dense()
    b = open_transfer(coupling, v, L, gauge).dense()
    ab = a @ b
    return float(np.linalg.norm(ab - b @ a) / np.linalg.norm(ab))


def open_transfer(coupling: Coupling, u, L: int, gauge: str = "stag", max_L: int = 5) -> OperatorMatrix:
    """Double-row transfer matrix Tr_a K+_a T_a K-_a That_a on (C^4)^L.

    T_a = R_aL ... R_a1 and That_a = R_1a ... R_La, where the first tensor
    factor of each block R-matrix is the one named first in the subscript.
    """
    if L > max_L:
        raise CapacityError(f"L={L} exceeds dense limit {max_L}")
    n = L + 1
    R = block_R(coupling, u, gauge)
    M = embed_one(k_plus(coupling, u), 0, n)
    for j in range(L, 0, -1):
        M = M @ embed_two(R, 0, j, n)
    M = M @ embed_one(k_minus(coupling, u), 0, n)
    for j in range(1, n):
        M = M @ embed_two(R, j, 0, n)
    M = M.reshape(4, 4 ** L, 4, 4 ** L)
    return OperatorMatrix(np.einsum("aiaj->ij", M), ("spin", 2 * L))


def build_h_open(rep: TLRepresentation):
    """-(e_1 + e_{N-1})/cos g + 2 cos g sum e_m - sum (e_m e_{m+1} + e_{m+1} e_m)."""
    es = rep.generators
    if rep.dim > SPARSE_H_DIM:
        # products of dense generators dominate the cost at this size
        es = [sp.csr_matrix(e) for e in es]
    c = np.cos(rep.coupling.gamma)
    H = -(es[0] + es[-1]) / c
    for e in es:
        H = H + 2 * c * e
    for m in range(len(es) - 1):
        H = H - (es[m] @ es[m + 1] + es[m + 1] @ es[m])
    return H


def periodic_generators(rep: TLRepresentation):
    """Vertex-type generators plus the wrap-around generator on sites (N, 1)."""
    N = rep.n_sites
    if rep.kind not in ("vertex", "tilde"):
        raise ValueError("periodic generator only available for spin representations")
    from .tl_reps import tilde_block, vertex_block
    blk = vertex_block(rep.coupling) if rep.kind == "vertex" else tilde_block(rep.coupling)
    # cyclic shift by one site, then the ordinary e on the first two sites
    dim = 2 ** N
    idx = np.arange(dim)
    rolled = ((idx << 1) & (dim - 1)) | (idx >> (N - 1))
    T = sp.csr_matrix((np.ones(dim), (rolled, idx)), shape=(dim, dim))
    first = sp.kron(sp.csr_matrix(blk), sp.identity(2 ** (N - 2)), format="csr")
    wrap = T.T @ first @ T
    gens = list(rep.generators)
    if not sp.issparse(gens[0]):
        wrap = wrap.toarray()
    return gens + [wrap]


def build_h_periodic(rep: TLRepresentation):
    """2 cos g sum_m e_m - sum (e_m e_{m+1} + e_{m+1} e_m), indices mod N."""
    es = periodic_generators(rep)
    N = rep.n_sites
    c = np.cos(rep.coupling.gamma)
    H = 2 * c * es[0]
    for e in es[1:]:
        H = H + 2 * c * e
    for m in range(N):
        a, b = es[m], es[(m + 1) % N]
        H = H - (a @ b + b @ a)
    return H


def _normalized(coupling, gauge):
    R0 = block_R(coupling, 0.0, gauge)
    r0 = R0[0, 0]
    k0 = k_minus(coupling, 0.0)[0, 0]
    return r0, k0


def hamiltonian_sklyanin(coupling: Coupling, L: int, gauge: str = "stag", derivative: str = "analytic") -> np.ndarray:
    """Sum of bulk densities P R'(0) plus the two boundary terms.

    R is normalized to R(0) = P and K- to K-(0) = 1.  Only the staggered gauge
    is regular, so that is the default.
    """
    r0, k0 = _normalized(coupling, gauge)
    P = swap16()
    if derivative == "analytic":
        dR = block_R_derivative(coupling, 0.0, gauge) / r0
        dK = k_minus_derivative(coupling, 0.0) / k0
    else:
        dR = richardson_derivative(lambda z: block_R(coupling, z, gauge), 0.0) / r0
        dK = richardson_derivative(lambda z: k_minus(coupling, z), 0.0) / k0
    h2 = P @ dR
    H = np.zeros((4 ** L, 4 ** L), dtype=complex)
    for n in range(L - 1):
        H += embed_two(h2, n, n + 1, L)
    H += 0.5 * embed_one(dK, 0, L)
    # right boundary: Tr_0 K+_0(0) H_{L0} / Tr K+(0) with an auxiliary copy
    Kp = k_plus(coupling, 0.0)
    n = L + 1
    big = embed_one(Kp, L, n) @ embed_two(h2, L - 1, L, n)
    big = big.reshape(4 ** L, 4, 4 ** L, 4)
    H += np.einsum("iaja->ij", big) / np.trace(Kp)
    return H


def richardson_derivative(f, x, h=1e-4):
    """Central difference with one Richardson step (h and h/2)."""
    d1 = (f(x + h) - f(x - h)) / (2 * h)
    d2 = (f(x + h / 2) - f(x - h / 2)) / h
    return (4 * d2 - d1) / 3


@dataclass
class HamiltonianBundle:
    h_sklyanin: np.ndarray
    h_tl: object
    h_tilde: object
    normalization: tuple
    max_deviation: float
    tilde_deviation: float
    notes: list = field(default_factory=list)


def affine_match(target, source, cluster_tol=1e-6):
    """Fit target ~ a*source + b using the extreme levels, then check all levels.

    Both orientations (a > 0 and a < 0) are tried; returns (a, b, deviation).
    Eigenvalues are first replaced by their cluster centroids.
    """
    t = cluster_centroids(target, cluster_tol * max(1.0, np.abs(target).max()))
    s = cluster_centroids(source, cluster_tol * max(1.0, np.abs(source).max()))
    ts = t[np.argsort(t.real)]
    ss = s[np.argsort(s.real)]
    best = None
    for lo, hi in ((ss[0], ss[-1]), (ss[-1], ss[0])):
        a = (ts[-1] - ts[0]) / (hi - lo)
        b = ts[0] - a * lo
        dev, _ = match_multisets(t, a * s + b)
        if best is None or dev < best[2]:
            best = (a, b, dev)
    return best


def hamiltonian_from_transfer(coupling: Coupling, L: int, tol: float = 1e-8, gauge: str = "stag") -> HamiltonianBundle:
    if L > 4:
        raise CapacityError("dense Sklyanin construction limited to L <= 4")
    Hs = hamiltonian_sklyanin(coupling, L, gauge)
    rep = build_vertex_rep(coupling, 2 * L)
    Ht = build_h_open(rep)
    Htil = build_h_open(build_tilde_rep(coupling, 2 * L))
    es = np.linalg.eigvals(Hs)
    et = np.linalg.eigvals(np.asarray(Ht))
    ett = np.linalg.eigvals(np.asarray(Htil))
    a, b, dev = affine_match(et, es)
    tol_c = 1e-6 * max(1.0, float(np.abs(et).max()))
    tdev, _ = match_multisets(cluster_centroids(et, tol_c), cluster_centroids(ett, tol_c))
    scale = max(1.0, float(np.max(np.abs(et))))
    bundle = HamiltonianBundle(Hs, Ht, Htil, (complex(a), complex(b)), dev / scale, tdev / scale)
    if bundle.max_deviation > tol:
        raise IntegrabilityError(f"Sklyanin and TL spectra differ by {bundle.max_deviation:.2e}")
    return bundle
