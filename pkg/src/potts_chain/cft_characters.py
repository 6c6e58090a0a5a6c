"""Exact integer q-series for sector generating functions and parafermion string functions."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np


class ParityError(ValueError):
    """l and m of a string function have different parity."""


class SeriesError(ValueError):
    pass


@dataclass
class QSeries:
    """q^leading_exponent * sum_n coefficients[n] q^n, known through q^order."""

    leading_exponent: Fraction
    coefficients: list
    order: int

    def __post_init__(self):
        for c in self.coefficients:
            if int(c) != c:
                raise SeriesError(f"non-integer coefficient {c}")
        self.coefficients = [int(c) for c in self.coefficients[: self.order + 1]]
        self.coefficients += [0] * (self.order + 1 - len(self.coefficients))

    def __add__(self, other: "QSeries") -> "QSeries":
        shift = other.leading_exponent - self.leading_exponent
        if shift.denominator != 1:
            raise SeriesError("series live on incommensurate q-grids")
        lo = min(self.leading_exponent, other.leading_exponent)
        a0 = int(self.leading_exponent - lo)
        b0 = int(other.leading_exponent - lo)
        order = min(self.order + a0, other.order + b0)
        out = [0] * (order + 1)
        for i, c in enumerate(self.coefficients):
            if i + a0 <= order:
                out[i + a0] += c
        for i, c in enumerate(other.coefficients):
            if i + b0 <= order:
                out[i + b0] += c
        return QSeries(lo, out, order)

    def scaled(self, factor: int) -> "QSeries":
        return QSeries(self.leading_exponent, [factor * c for c in self.coefficients], self.order)

    def levels(self) -> list:
        """Offsets above the leading exponent, each repeated by its coefficient."""
        out = []
        for n, c in enumerate(self.coefficients):
            if c < 0:
                raise SeriesError("negative coefficient has no level interpretation")
            out += [n] * c
        return out

    def to_json(self) -> dict:
        le = self.leading_exponent
        return {"leading_exponent": float(le), "leading_exponent_exact": f"{le.numerator}/{le.denominator}",
                "coefficients": list(self.coefficients), "order": self.order}


# basic products, kept in exact integers

def euler_product(order: int) -> list:
    """prod_{n>=1} (1 - q^n) from the pentagonal number theorem."""
    c = [0] * (order + 1)
    k = 0
    while True:
        hit = False
        for kk in ((k,) if k == 0 else (k, -k)):
            e = kk * (3 * kk - 1) // 2
            if e <= order:
                c[e] += -1 if kk % 2 else 1
                hit = True
        if not hit and k > 0:
            break
        k += 1
    return c


def series_mul(a, b, order: int) -> list:
    out = [0] * (order + 1)
    for i, x in enumerate(a[: order + 1]):
        if x:
            for j, y in enumerate(b[: order + 1 - i]):
                out[i + j] += x * y
    return out


def series_inverse(a, order: int) -> list:
    if a[0] not in (1, -1):
        raise SeriesError("inverse needs a unit constant term")
    inv = [0] * (order + 1)
    inv[0] = a[0]
    for n in range(1, order + 1):
        s = sum(a[i] * inv[n - i] for i in range(1, min(n, len(a) - 1) + 1))
        inv[n] = -s * a[0]
    return inv


def inverse_euler_squared(order: int) -> list:
    """Coefficients of prod (1 - q^n)^{-2}."""
    inv = series_inverse(euler_product(order), order)
    return series_mul(inv, inv, order)


def two_color_partitions(order: int) -> list:
    """Number of pairs of partitions with total size n, by explicit enumeration."""

    def partitions(n, largest=None):
        if n == 0:
            yield ()
            return
        largest = n if largest is None else largest
        for first in range(min(n, largest), 0, -1):
            for rest in partitions(n - first, first):
                yield (first,) + rest

    counts = [sum(1 for _ in partitions(n)) for n in range(order + 1)]
    return [sum(counts[i] * counts[n - i] for i in range(n + 1)) for n in range(order + 1)]


# sector generating functions

def central_charge(k_int: int) -> Fraction:
    return 2 - Fraction(6, k_int)


def h_m(k_int: int, m: int) -> Fraction:
    return Fraction(m * (m + 1), k_int)


def z_bracket(m: int, order: int) -> list:
    """1 + 2 sum_{n>=1} (-1)^n q^{n(n+2m+1)/2}."""
    c = [0] * (order + 1)
    c[0] = 1
    n = 1
    while n * (n + 2 * m + 1) // 2 <= order:
        c[n * (n + 2 * m + 1) // 2] += 2 * (-1) ** n
        n += 1
    return c


def z_m_series(k_int: int, m: int, order: int = 10) -> QSeries:
    """Sector generating function q^{h_m - c/24} (bracket) / prod (1 - q^n)^2."""
    if k_int < 3 or m < 0:
        raise ValueError("need k_int >= 3 and m >= 0")
    if order > 40:
        raise ValueError("order limited to 40")
    coeffs = series_mul(z_bracket(m, order), inverse_euler_squared(order), order)
    return QSeries(h_m(k_int, m) - central_charge(k_int) / 24, coeffs, order)


def full_trace_series(k_int: int, order: int = 10, weighting: str = "vertex") -> QSeries:
    """Sum over sectors with weight 2m+1 (vertex) or 1 (loop), on the m = 0 grid.

    Sectors whose offset h_m is not an integer are kept on their own grid only
    when commensurate; otherwise the sum is reported in floating offsets via
    :func:`full_trace_levels`.
    """
    if weighting not in ("vertex", "loop"):
        raise ValueError("weighting must be 'vertex' or 'loop'")
    total = None
    m = 0
    base = h_m(k_int, 0)
    while h_m(k_int, m) - base <= order:
        z = z_m_series(k_int, m, order)
        if (z.leading_exponent - (base - central_charge(k_int) / 24)).denominator == 1:
            w = 2 * m + 1 if weighting == "vertex" else 1
            z = z.scaled(w)
            total = z if total is None else total + z
        m += 1
    return total


def full_trace_levels(k_int: int, order: int = 10, weighting: str = "vertex") -> list:
    """All (exponent, degeneracy) pairs of the weighted trace up to offset ``order``."""
    out = {}
    m = 0
    c24 = central_charge(k_int) / 24
    while h_m(k_int, m) <= order:
        z = z_m_series(k_int, m, order)
        w = 2 * m + 1 if weighting == "vertex" else 1
        for n, c in enumerate(z.coefficients):
            e = z.leading_exponent + n + c24
            if e <= order and c:
                out[e] = out.get(e, 0) + w * c
        m += 1
    return sorted(out.items())


# string functions

def _string_terms(k: int, l: int, m: int, order: int):
    """Lattice terms (weight, exponent) of the double sum with exponent <= base + order."""
    kp = k - 2
    base = Fraction((l + 1) ** 2, 4 * k) - Fraction(m * m, 4 * kp)
    terms = []
    # exponent grows at least like 2 n1^2, so this bound is safe
    nmax = int(np.sqrt(order + 4)) + 4
    for t1 in range(-2 * nmax, 2 * nmax + 1):
        for t2 in range(-2 * nmax, 2 * nmax + 1):
            n1, n2 = Fraction(t1, 2), Fraction(t2, 2)
            if (n1 - n2).denominator != 1:
                continue
            if not (n1 >= abs(n2) or -n1 > abs(n2)):
                continue
            sign = 1 if n1 >= 0 else -1
            weight = (-1) ** (t1 % 2) * sign
            e = Fraction((l + 1 + 2 * n1 * k) ** 2, 4 * k) - Fraction((m + 2 * n2 * kp) ** 2, 4 * kp)
            if e - base <= order:
                terms.append((weight, e))
    return base, terms


def string_leading_exponent(k_int: int, l: int, m: int) -> Fraction:
    """Lowest exponent of the signed double sum before the eta factor (any parity)."""
    base, terms = _string_terms(k_int, l, m, 2)
    acc = {}
    for w, e in terms:
        acc[e] = acc.get(e, 0) + w
    return min(e for e, w in acc.items() if w)


def string_function(k_int: int, l: int, m: int, order: int = 8) -> QSeries:
    """Signed double sum over the two-branch region times eta(q)^{-2}."""
    if not 0 <= l <= k_int - 2:
        raise ValueError(f"l must lie in 0..{k_int - 2}")
    if (l - m) % 2:
        raise ParityError(f"l={l} and m={m} have different parity: empty sector")
    base, terms = _string_terms(k_int, l, m, order + 2)
    acc = {}
    for w, e in terms:
        acc[e] = acc.get(e, 0) + w
    lead = min(e for e, w in acc.items() if w)
    theta = [0] * (order + 1)
    for e, w in acc.items():
        d = e - lead
        if d.denominator != 1:
            raise SeriesError("string-function exponents off the integer grid")
        if d <= order:
            theta[int(d)] += w
    coeffs = series_mul(theta, inverse_euler_squared(order), order)
    return QSeries(lead - Fraction(1, 12), coeffs, order)


def string_function_bruteforce(k_int: int, l: int, m: int, order: int = 8, cutoff: int = 30) -> QSeries:
    """Same sum with a wide integer cutoff and a float-free but naive product expansion."""
    kp = k_int - 2
    acc = {}
    for a in range(-2 * cutoff, 2 * cutoff + 1):
        for b in range(-2 * cutoff, 2 * cutoff + 1):
            if (a - b) % 2:
                continue
            # a = 2 n1, b = 2 n2
            if not (a >= abs(b) or -a > abs(b)):
                continue
            w = (-1) ** (a % 2) * (1 if a >= 0 else -1)
            e = Fraction((l + 1 + a * k_int) ** 2, 4 * k_int) - Fraction((m + b * kp) ** 2, 4 * kp)
            acc[e] = acc.get(e, 0) + w
    lead = min(e for e, w in acc.items() if w)
    theta = [0] * (order + 1)
    for e, w in acc.items():
        d = e - lead
        if d <= order:
            theta[int(d)] += w
    # 1/prod(1-q^n)^2 by repeated geometric factors
    inv = [1] + [0] * order
    for n in range(1, order + 1):
        for _ in range(2):
            for i in range(n, order + 1):
                inv[i] += inv[i - n]
    return QSeries(lead - Fraction(1, 12), series_mul(theta, inv, order), order)


# comparison with lattice gaps

@dataclass
class LevelReport:
    rows: list = field(default_factory=list)
    max_relative_deviation: float = 0.0

    @property
    def ok(self) -> bool:
        return all(r["ok"] for r in self.rows)


def level_count_compare(gaps, series: QSeries, n_levels: int, tol: float = 0.05, uncertainties=None) -> LevelReport:
    """Pair the lowest lattice gaps (above the sector's lowest level) with series offsets."""
    offsets = [o for o in series.levels() if o > 0][:n_levels]
    gaps = sorted(float(g) for g in gaps)[:n_levels]
    rep = LevelReport()
    for i, off in enumerate(offsets):
        if i >= len(gaps):
            rep.rows.append({"offset": off, "gap": None, "deviation": None, "ok": False})
            continue
        dev = abs(gaps[i] - off) / off
        err = uncertainties[i] if uncertainties is not None else None
        rep.rows.append({"offset": off, "gap": gaps[i], "deviation": dev, "uncertainty": err, "ok": dev < tol})
        rep.max_relative_deviation = max(rep.max_relative_deviation, dev)
    return rep
