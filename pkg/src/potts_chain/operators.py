"""Operator container and small linear-algebra helpers shared by all modules."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linear_sum_assignment

DENSE_LIMIT = 4096


class CapacityError(RuntimeError):
    """Requested dense object exceeds the configured size limit."""


@dataclass
class OperatorMatrix:
    """Dense or sparse complex operator with a tag describing its basis.

    ``basis_tag`` is one of ``("spin", N)``, ``("cbasis", L)`` or
    ``("diagram", rep_id)``.
    """

    data: object
    basis_tag: tuple = ("spin", 0)
    labels: list | None = field(default=None, repr=False)

    def __post_init__(self):
        if not sp.issparse(self.data):
            self.data = np.asarray(self.data, dtype=complex)
        if self.data.ndim != 2:
            raise ValueError("operator must be two-dimensional")
        if sp.issparse(self.data):
            vals = self.data.data
        else:
            vals = self.data
        if not np.all(np.isfinite(vals)):
            raise ValueError("operator has non-finite entries")

    @property
    def shape(self):
        return self.data.shape

    @property
    def dim_row(self) -> int:
        return self.data.shape[0]

    @property
    def dim_col(self) -> int:
        return self.data.shape[1]

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.data)

    def dense(self) -> np.ndarray:
        if self.is_sparse:
            if self.dim_row > DENSE_LIMIT:
                raise CapacityError(f"dimension {self.dim_row} exceeds dense limit {DENSE_LIMIT}")
            return self.data.toarray()
        return self.data

    def __array__(self, dtype=None, copy=None):
        out = self.dense()
        return out.astype(dtype) if dtype is not None else out


def as_array(m) -> np.ndarray:
    if isinstance(m, OperatorMatrix):
        return m.dense()
    if sp.issparse(m):
        return m.toarray()
    return np.asarray(m)


def swap_two(dim: int) -> np.ndarray:
    """Permutation operator on C^dim (x) C^dim."""
    P = np.zeros((dim * dim, dim * dim))
    for a in range(dim):
        for b in range(dim):
            P[b * dim + a, a * dim + b] = 1.0
    return P


def embed_one(op: np.ndarray, site: int, n: int) -> np.ndarray:
    """Place a single-site operator at ``site`` of ``n`` equal factors."""
    d = op.shape[0]
    left = np.eye(d ** site)
    right = np.eye(d ** (n - site - 1))
    return np.kron(np.kron(left, op), right)


def embed_two(op: np.ndarray, i: int, j: int, n: int) -> np.ndarray:
    """Place a two-site operator on factors (i, j) of ``n`` equal factors.

    The first tensor factor of ``op`` acts on site ``i``; the sites need not be
    adjacent or ordered.
    """
    d = int(round(np.sqrt(op.shape[0])))
    T = np.asarray(op).reshape(d, d, d, d)
    full = np.zeros((d ** n, d ** n), dtype=complex)
    dims = [d] * n
    for idx in itertools.product(range(d), repeat=n):
        col = np.ravel_multi_index(idx, dims)
        block = T[:, :, idx[i], idx[j]]
        for o1, o2 in zip(*np.nonzero(block)):
            out = list(idx)
            out[i], out[j] = o1, o2
            full[np.ravel_multi_index(out, dims), col] += block[o1, o2]
    return full


def commutator_norm(a, b) -> float:
    a, b = as_array(a), as_array(b)
    return float(np.linalg.norm(a @ b - b @ a))


def match_multisets(a, b):
    """Optimal one-to-one pairing of two complex multisets.

    Returns (max deviation, permutation of ``b`` aligned to sorted ``a``).
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.size != b.size:
        raise ValueError(f"multiset sizes differ: {a.size} vs {b.size}")
    if a.size == 0:
        return 0.0, b
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max()), b[c[np.argsort(r)]]


def remove_multiset(big, small, tol=1e-6):
    """Remove the elements of ``small`` from ``big`` by optimal pairing."""
    big = np.asarray(big, dtype=complex)
    small = np.asarray(small, dtype=complex)
    if small.size == 0:
        return big, 0.0
    cost = np.abs(small[:, None] - big[None, :])
    r, c = linear_sum_assignment(cost)
    dev = float(cost[r, c].max())
    keep = np.ones(big.size, bool)
    keep[c] = False
    return big[keep], dev


def cluster_labels(vals, tol):
    """Single-linkage cluster labels of complex numbers at distance ``tol``."""
    from scipy.cluster.hierarchy import fcluster, linkage

    vals = np.asarray(vals, dtype=complex)
    if vals.size < 2:
        return np.ones(vals.size, dtype=int)
    pts = np.column_stack([vals.real, vals.imag])
    return fcluster(linkage(pts, method="single"), t=tol, criterion="distance")


def cluster_centroids(vals, tol=1e-6):
    """Replace each eigenvalue by the mean of its cluster.

    Nearly defective clusters split as eps**(1/size), but their mean is as
    accurate as the trace, so centroids compare well across constructions.
    """
    vals = np.asarray(vals, dtype=complex)
    lab = cluster_labels(vals, tol)
    out = vals.copy()
    for l in np.unique(lab):
        sel = lab == l
        out[sel] = vals[sel].mean()
    return out
