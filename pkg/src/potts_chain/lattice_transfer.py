"""Six-vertex and staggered block R-matrices, weight extraction and gauges.

Index conventions
-----------------
A block acts on (C^2 (x) C^2) (x) (C^2 (x) C^2).  The first pair of qubits is
the horizontal (auxiliary) line pair ordered (top, bottom), the second pair is
the vertical line pair ordered (left, right).  Within a pair the C-basis is
(up-up, |0>, |0bar>, down-down) and the edge labels used by the vertex table
are 4, 2, 3, 1 respectively (2 = thin, 3 = thick).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core_params import Coupling
from .operators import OperatorMatrix, embed_two, swap_two

NONZERO_TOL = 1e-10
ASTERISK = frozenset({9, 10, 13, 14, 17, 18, 29, 30, 31, 32, 35, 36})

# (right, left, top, bottom) edge labels of the 38 allowed vertices
VERTICES = {
    1: "4444", 2: "1111", 3: "4411", 4: "1144", 5: "1441", 6: "4114",
    7: "4224", 8: "2112", 9: "4334", 10: "3113", 11: "4212", 12: "2124",
    13: "4313", 14: "3134", 15: "2442", 16: "1221", 17: "3431", 18: "1343",
    19: "4422", 20: "3311", 21: "2244", 22: "2211", 23: "1133", 24: "1122",
    25: "4433", 26: "3344", 27: "2421", 28: "1242", 29: "3443", 30: "1331",
    31: "3232", 32: "2323", 33: "2233", 34: "3322", 35: "3223", 36: "2332",
    37: "2222", 38: "3333",
}
LABEL_TO_C = {"4": 0, "2": 1, "3": 2, "1": 3}


class StructureError(RuntimeError):
    """Unexpected non-zero entry in a C-basis block matrix."""


class GaugeError(RuntimeError):
    """Weight ratios are not a single global factor times the sign pattern."""


def vertex_position(index: int) -> tuple[int, int]:
    """(row, col) of a vertex weight inside the 16x16 C-basis matrix."""
    r, l, t, b = (LABEL_TO_C[c] for c in VERTICES[index])
    return r * 4 + t, l * 4 + b


def six_vertex_R(coupling: Coupling, u) -> np.ndarray:
    """Check-form six-vertex matrix; equals sin(gamma-u) + sin(u) e."""
    g = coupling.gamma
    a = np.sin(g - u)
    b = np.sin(u)
    return np.array([
        [a, 0, 0, 0],
        [0, np.exp(-1j * u) * np.sin(g), b, 0],
        [0, b, np.exp(1j * u) * np.sin(g), 0],
        [0, 0, 0, a],
    ], dtype=complex)


def six_vertex_R_derivative(coupling: Coupling, u) -> np.ndarray:
    g = coupling.gamma
    a = -np.cos(g - u)
    b = np.cos(u)
    return np.array([
        [a, 0, 0, 0],
        [0, -1j * np.exp(-1j * u) * np.sin(g), b, 0],
        [0, b, 1j * np.exp(1j * u) * np.sin(g), 0],
        [0, 0, 0, a],
    ], dtype=complex)


_P4 = swap_two(2)
_P16 = swap_two(4)

# qubit slots inside a block: horizontal pair (top, bottom), vertical pair (left, right)
_H_TOP, _H_BOT, _V_LEFT, _V_RIGHT = 0, 1, 2, 3
# (horizontal qubit, vertical qubit, spectral shift) for the four crossings, leftmost factor first
_CROSSINGS = (
    (_H_TOP, _V_RIGHT, 0.0),
    (_H_TOP, _V_LEFT, np.pi / 2),
    (_H_BOT, _V_RIGHT, -np.pi / 2),
    (_H_BOT, _V_LEFT, 0.0),
)


def _qubit_op(M, i, j):
    return embed_two(M, i, j, 4)


def c_basis_matrix(coupling: Coupling) -> np.ndarray:
    """Columns up-up, |0>, |0bar>, down-down (not unitary in general)."""
    g = coupling.gamma
    s = 1.0 / np.sqrt(2 * np.cos(g))
    z = np.exp(0.5j * g)
    U = np.zeros((4, 4), dtype=complex)
    U[0, 0] = 1
    U[1, 1], U[2, 1] = s * z, -s / z
    U[1, 2], U[2, 2] = s / z, s * z
    U[3, 3] = 1
    return U


def horizontal_twist(coupling: Coupling) -> np.ndarray:
    """Involution flipping the sign of |0bar> on the horizontal pair."""
    U = c_basis_matrix(coupling)
    D = U @ np.diag([1, 1, -1, 1]) @ np.linalg.inv(U)
    return np.kron(D, np.eye(4))


def block_product(coupling: Coupling, u) -> np.ndarray:
    """Plain product of the four six-vertex crossings of a 2x2 block."""
    out = np.eye(16, dtype=complex)
    for h, v, shift in _CROSSINGS:
        out = out @ _qubit_op(_P4 @ six_vertex_R(coupling, u + shift), h, v)
    return out


def block_product_derivative(coupling: Coupling, u) -> np.ndarray:
    mats = [_qubit_op(_P4 @ six_vertex_R(coupling, u + s), h, v) for h, v, s in _CROSSINGS]
    ders = [_qubit_op(_P4 @ six_vertex_R_derivative(coupling, u + s), h, v) for h, v, s in _CROSSINGS]
    total = np.zeros((16, 16), dtype=complex)
    for n in range(4):
        term = np.eye(16, dtype=complex)
        for m in range(4):
            term = term @ (ders[m] if m == n else mats[m])
        total += term
    return total


def block_R(coupling: Coupling, u, gauge: str = "stag") -> np.ndarray:
    """16x16 block R-matrix in the spin basis.

    ``stag``: twisted product D_h B(u) D_h, regular (proportional to the swap at
    u=0) and a solution of the standard Yang-Baxter equation.
    ``d22``: the plain product B(u), whose C-basis weights are the D22 table
    up to the global factor 16 k^2 x^2.
    """
    B = block_product(coupling, u)
    if gauge == "d22":
        return B
    if gauge != "stag":
        raise ValueError(f"unknown gauge {gauge!r}")
    D = horizontal_twist(coupling)
    return D @ B @ D


def block_R_derivative(coupling: Coupling, u, gauge: str = "stag") -> np.ndarray:
    dB = block_product_derivative(coupling, u)
    if gauge == "d22":
        return dB
    D = horizontal_twist(coupling)
    return D @ dB @ D


def to_C_basis(m, coupling: Coupling, inverse: bool = False) -> np.ndarray:
    """Similarity transform of a 16x16 block into (or back from) the C-basis."""
    U = np.kron(c_basis_matrix(coupling), c_basis_matrix(coupling))
    Ui = np.linalg.inv(U)
    m = np.asarray(m)
    if m.shape != (16, 16):
        raise ValueError("expected a 16x16 two-pair block")
    return U @ m @ Ui if inverse else Ui @ m @ U


@dataclass
class WeightTable:
    weights: dict
    gauge: str
    u: complex = 0.0
    factor: complex = 1.0

    def __post_init__(self):
        if len(self.weights) != 38:
            raise StructureError(f"weight table needs 38 entries, got {len(self.weights)}")


@dataclass
class GaugeReport:
    g: complex
    ratios: dict
    sign_flipped: frozenset
    max_deviation: float
    expected_g: complex | None = None
    parity_ok: bool = True
    notes: list = field(default_factory=list)


def nonzero_positions(Wc, tol=NONZERO_TOL):
    scale = np.max(np.abs(Wc))
    return {tuple(p) for p in np.argwhere(np.abs(Wc) > tol * scale)}


def extract_weights(Wc, gauge: str = "stag", u=0.0, tol=NONZERO_TOL) -> WeightTable:
    """Read the 38 vertex weights from a C-basis block matrix."""
    Wc = np.asarray(Wc)
    allowed = {vertex_position(i) for i in VERTICES}
    stray = nonzero_positions(Wc, tol) - allowed
    if stray:
        inv = {0: "4", 1: "2", 2: "3", 3: "1"}
        desc = [f"{inv[r // 4]}{inv[c // 4]}{inv[r % 4]}{inv[c % 4]}" for r, c in sorted(stray)]
        raise StructureError("unexpected non-zero vertices (R L T B): " + ", ".join(desc))
    return WeightTable({i: complex(Wc[vertex_position(i)]) for i in VERTICES}, gauge, u)


def reference_weights(coupling: Coupling, u, gauge: str = "stag") -> dict:
    """Closed-form vertex weights in the staggered or D22 gauge."""
    s = np.sin
    g = coupling.gamma
    g0 = coupling.gamma0
    u0 = -2 * u
    a = s(g0 - u0)
    b = s(u0)
    c = s(g0)
    w = {1: -a * a / 4, 2: -a * a / 4, 3: -b * b / 4, 4: -b * b / 4,
         5: np.exp(-2j * u) * c * (b - a) / 4, 6: np.exp(2j * u) * c * (b - a) / 4}
    for i in (7, 8):
        w[i] = -np.exp(2j * u) * a * c / 4
    for i in (9, 10, 29, 30, 35, 36):
        w[i] = -a * c / 4
    for i in (11, 12):
        w[i] = np.exp(-1j * (g - 2 * u)) * b * c / 4
    for i in (13, 14):
        w[i] = -np.exp(1j * g) * b * c / 4
    for i in (15, 16):
        w[i] = -np.exp(-2j * u) * a * c / 4
    for i in (17, 18):
        w[i] = -np.exp(-1j * g) * b * c / 4
    for i in list(range(19, 27)) + [33, 34]:
        w[i] = -a * b / 4
    for i in (27, 28):
        w[i] = np.exp(1j * (g - 2 * u)) * b * c / 4
    for i in (31, 32):
        w[i] = -b * c / 4
    for i in (37, 38):
        w[i] = -(c * c + a * b) / 4
    w = {i: complex(v) for i, v in w.items()}
    if gauge == "stag":
        return w
    if gauge != "d22":
        raise ValueError(f"unknown gauge {gauge!r}")
    G = global_factor(coupling, u)
    return {i: G * v * (-1 if i in ASTERISK else 1) for i, v in w.items()}


def global_factor(coupling: Coupling, u) -> complex:
    """16 k^2 x^2 with k = exp(2i gamma) and x = exp(2iu)."""
    return complex(16 * coupling.jimbo_k ** 2 * np.exp(4j * u))


def weight_table(coupling: Coupling, u, gauge: str = "stag") -> WeightTable:
    """Extracted weights; the D22 table is rescaled by a factor fitted on vertex 1."""
    Wc = to_C_basis(block_R(coupling, u, gauge), coupling)
    wt = extract_weights(Wc, gauge, u)
    if gauge == "d22":
        ref = reference_weights(coupling, u, "d22")
        fac = ref[1] / wt.weights[1]
        wt = WeightTable({i: fac * v for i, v in wt.weights.items()}, gauge, u, fac)
    return wt


def table_deviation(wt: WeightTable, coupling: Coupling) -> float:
    """Max relative deviation from the closed-form table of the same gauge."""
    ref = reference_weights(coupling, wt.u, wt.gauge)
    scale = max(abs(v) for v in ref.values())
    return max(abs(wt.weights[i] - ref[i]) for i in VERTICES) / scale


def thick_parity_ok(index: int) -> bool:
    """Thick edges come in pairs: horizontal count and vertical count match mod 2."""
    r, l, t, b = VERTICES[index]
    return ((r == "3") + (l == "3")) % 2 == ((t == "3") + (b == "3")) % 2


def compare_gauges(wt: WeightTable, coupling: Coupling, tol=1e-10) -> GaugeReport:
    """Ratio of each weight to the staggered reference; must be +g or -g."""
    ref = reference_weights(coupling, wt.u, "stag")
    ratios = {}
    for i in VERTICES:
        if abs(ref[i]) > 1e-12:
            ratios[i] = wt.weights[i] / ref[i]
    g = ratios[1]
    flipped = frozenset(i for i, r in ratios.items() if abs(r + g) < abs(r - g))
    dev = max(abs(r - (-g if i in flipped else g)) for i, r in ratios.items()) / abs(g)
    rep = GaugeReport(g, ratios, flipped, dev, global_factor(coupling, wt.u),
                      all(thick_parity_ok(i) for i in VERTICES))
    if dev > tol:
        raise GaugeError(f"weights are not +-g times the staggered table (deviation {dev:.2e})")
    return rep


def ybe_residual(coupling: Coupling, u, v, gauge: str = "stag", shift: float | None = None) -> float:
    """Relative residual of R12(u-v+s) R13(u) R23(v) = R23(v) R13(u) R12(u-v+s).

    The staggered gauge satisfies it with s = 0.  The plain product satisfies it
    with s = -pi/2 (default for ``d22``).
    """
    if shift is None:
        shift = 0.0 if gauge == "stag" else -np.pi / 2

    def R(z):
        return block_R(coupling, z, gauge)

    r12 = embed_two(R(u - v + shift), 0, 1, 3)
    r13 = embed_two(R(u), 0, 2, 3)
    r23 = embed_two(R(v), 1, 2, 3)
    lhs = r12 @ r13 @ r23
    rhs = r23 @ r13 @ r12
    return float(np.linalg.norm(lhs - rhs) / np.linalg.norm(lhs))


def periodic_transfer(coupling: Coupling, u, L: int, gauge: str = "stag", max_L: int = 6) -> OperatorMatrix:
    """Row-to-row transfer matrix t(u) = Tr_a R_a1 R_a2 ... R_aL on (C^4)^L."""
    if L > max_L:
        from .operators import CapacityError
        raise CapacityError(f"L={L} exceeds dense limit {max_L}")
    R = block_R(coupling, u, gauge)
    n = L + 1
    M = np.eye(4 ** n, dtype=complex)
    for j in range(1, n):
        M = M @ embed_two(R, 0, j, n)
    M = M.reshape(4, 4 ** L, 4, 4 ** L)
    return OperatorMatrix(np.einsum("aiaj->ij", M), ("cbasis", L))


def block_sz(coupling=None) -> np.ndarray:
    """Twice S_z of every 4-dim site state (spin product basis)."""
    return np.array([2, 0, 0, -2])


def swap16() -> np.ndarray:
    return _P16.copy()
