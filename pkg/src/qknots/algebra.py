"""Exact arithmetic over small prime fields, dense linear algebra, and
group-ring values used to express state sums.

Moduli are restricted to the primes {2, 3, 5, 7}.  All values are immutable
after construction and safe to share between threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

SUPPORTED_MODULI = (2, 3, 5, 7)


class ModulusError(ValueError):
    """Raised for unsupported moduli or modulus mismatches."""


def check_modulus(p: int) -> int:
    if p not in SUPPORTED_MODULI:
        raise ModulusError(f"modulus must be one of {SUPPORTED_MODULI}, got {p}")
    return p


def _same_modulus(a, b) -> int:
    if a.p != b.p:
        raise ModulusError(f"modulus mismatch: {a.p} vs {b.p}")
    return a.p


@dataclass(frozen=True)
class FieldScalar:
    """An element of GF(p), always reduced modulo p."""

    value: int
    p: int

    def __post_init__(self):
        check_modulus(self.p)
        object.__setattr__(self, "value", self.value % self.p)

    def __add__(self, other: "FieldScalar") -> "FieldScalar":
        return FieldScalar(self.value + other.value, _same_modulus(self, other))

    def __sub__(self, other: "FieldScalar") -> "FieldScalar":
        return FieldScalar(self.value - other.value, _same_modulus(self, other))

    def __mul__(self, other: "FieldScalar") -> "FieldScalar":
        return FieldScalar(self.value * other.value, _same_modulus(self, other))

    def __neg__(self) -> "FieldScalar":
        return FieldScalar(-self.value, self.p)

    def inverse(self) -> "FieldScalar":
        if self.value == 0:
            raise ZeroDivisionError(f"0 has no inverse in GF({self.p})")
        return FieldScalar(pow(self.value, self.p - 2, self.p), self.p)


def field_add(a: FieldScalar, b: FieldScalar) -> FieldScalar:
    return a + b


def field_mul(a: FieldScalar, b: FieldScalar) -> FieldScalar:
    return a * b


def field_neg(a: FieldScalar) -> FieldScalar:
    return -a


def field_inv(a: FieldScalar) -> FieldScalar:
    return a.inverse()


class FieldMatrix:
    """Dense matrix over GF(p) with exact elimination.

    The reduced row echelon form is canonical (pivot search: first nonzero
    entry scanning columns left-to-right, rows top-to-bottom), so ranks,
    pivot columns and nullspace bases are reproducible.
    """

    def __init__(self, entries, p: int):
        check_modulus(p)
        arr = np.asarray(entries, dtype=np.int64)
        if arr.ndim != 2:
            raise ValueError("FieldMatrix requires a 2-d array")
        self.p = p
        self.array = arr % p
        self.array.setflags(write=False)

    @property
    def rows(self) -> int:
        return self.array.shape[0]

    @property
    def cols(self) -> int:
        return self.array.shape[1]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FieldMatrix)
            and self.p == other.p
            and self.array.shape == other.array.shape
            and bool(np.all(self.array == other.array))
        )

    def __repr__(self) -> str:
        return f"FieldMatrix({self.array.tolist()}, p={self.p})"

    def rref(self) -> tuple["FieldMatrix", int, tuple[int, ...]]:
        """Return (reduced row echelon form, rank, pivot columns)."""
        R = self.array.copy()
        p = self.p
        m, n = R.shape
        pivots: list[int] = []
        pr = 0
        for col in range(n):
            if pr >= m:
                break
            nz = np.nonzero(R[pr:, col])[0]
            if nz.size == 0:
                continue
            row = pr + int(nz[0])
            if row != pr:
                R[[pr, row]] = R[[row, pr]]
            inv = pow(int(R[pr, col]), p - 2, p)
            R[pr] = (R[pr] * inv) % p
            other = np.nonzero(R[:, col])[0]
            for r in other:
                if r != pr:
                    R[r] = (R[r] - R[r, col] * R[pr]) % p
            pivots.append(col)
            pr += 1
        return FieldMatrix(R, p), len(pivots), tuple(pivots)

    def rank(self) -> int:
        return self.rref()[1]

    def nullspace_basis(self) -> list[np.ndarray]:
        """Deterministic basis of {v : Mv = 0}, one vector per free column."""
        R, _, pivots = self.rref()
        p = self.p
        pivot_set = set(pivots)
        free = [c for c in range(self.cols) if c not in pivot_set]
        basis = []
        for f in free:
            v = np.zeros(self.cols, dtype=np.int64)
            v[f] = 1
            for i, c in enumerate(pivots):
                v[c] = (-int(R.array[i, f])) % p
            basis.append(v)
        return basis

    def mul_vector(self, v) -> np.ndarray:
        return (self.array @ (np.asarray(v, dtype=np.int64) % self.p)) % self.p


# ---------------------------------------------------------------------------
# Packed GF(2) elimination.  Rows are Python ints; bit i is column i.  Used by
# the cohomology solver, where systems reach ~10^5 rows x 2304 columns.
# ---------------------------------------------------------------------------


def gf2_rref(rows: Iterable[int]) -> dict[int, int]:
    """Reduced row echelon form over GF(2) of packed integer rows.

    Returns {pivot column: row} with every row fully reduced against the
    others.  The result is the canonical RREF of the row space.
    """
    pivots: dict[int, int] = {}
    for r in rows:
        while r:
            c = (r & -r).bit_length() - 1
            if c in pivots:
                r ^= pivots[c]
            else:
                pivots[c] = r
                break
    for c in sorted(pivots, reverse=True):
        r = pivots[c]
        rest = r & ~(1 << c)
        while rest:
            d = (rest & -rest).bit_length() - 1
            if d in pivots:
                r ^= pivots[d]
            rest &= rest - 1
        pivots[c] = r
    return pivots


def gf2_nullspace(pivots: dict[int, int], ncols: int) -> list[int]:
    """Basis of the nullspace given an RREF pivot map, one packed vector per
    free column, in ascending free-column order."""
    basis = []
    for f in range(ncols):
        if f in pivots:
            continue
        v = 1 << f
        for c, row in pivots.items():
            if (row >> f) & 1:
                v |= 1 << c
        basis.append(v)
    return basis


def gf2_reduce(vec: int, pivots: dict[int, int]) -> int:
    """Reduce a packed vector against an RREF basis; 0 iff in the row span."""
    r = vec
    while r:
        c = (r & -r).bit_length() - 1
        if c not in pivots:
            return r
        r ^= pivots[c]
    return 0


# ---------------------------------------------------------------------------
# State sums: elements of the integral group ring of Z_p, written
# c0 + c1*u + c2*u^2 + ...  with u the formal generator.
# ---------------------------------------------------------------------------

_TERM_RE = re.compile(r"^(?:(\d+)\*?)?(u(?:\^(\d+))?)?$")


@dataclass(frozen=True)
class StateSumValue:
    """A length-p vector of non-negative counts; counts[k] is the number of
    colorings of total weight k.  Comparison is on coefficient vectors, never
    on rendered strings."""

    p: int
    counts: tuple[int, ...]

    def __post_init__(self):
        check_modulus(self.p)
        if len(self.counts) != self.p:
            raise ValueError(f"need {self.p} counts, got {len(self.counts)}")
        if any(c < 0 for c in self.counts):
            raise ValueError("state sum counts must be non-negative")
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))

    @classmethod
    def zero(cls, p: int) -> "StateSumValue":
        return cls(p, (0,) * p)

    @classmethod
    def constant(cls, p: int, count: int) -> "StateSumValue":
        return cls(p, (count,) + (0,) * (p - 1))

    def insert(self, weight: int) -> "StateSumValue":
        """Return a new value with counts[weight mod p] incremented."""
        w = weight % self.p
        counts = list(self.counts)
        counts[w] += 1
        return StateSumValue(self.p, tuple(counts))

    def __add__(self, other: "StateSumValue") -> "StateSumValue":
        _same_modulus(self, other)
        return StateSumValue(self.p, tuple(a + b for a, b in zip(self.counts, other.counts)))

    @property
    def total(self) -> int:
        """Sum of coefficients; equals the number of contributing colorings."""
        return sum(self.counts)

    def render(self) -> str:
        """Canonical text form: ascending powers, zero terms omitted,
        constant term first, e.g. ``52+42u+11u^2``."""
        terms = []
        for k, c in enumerate(self.counts):
            if c == 0:
                continue
            if k == 0:
                terms.append(str(c))
            elif k == 1:
                terms.append("u" if c == 1 else f"{c}u")
            else:
                terms.append(f"u^{k}" if c == 1 else f"{c}u^{k}")
        return "+".join(terms) if terms else "0"

    def __str__(self) -> str:
        return self.render()

    @classmethod
    def parse(cls, text: str, p: int) -> "StateSumValue":
        """Parse a rendered value.  Accepts terms in any order, so the mixed
        orders seen in published tables (``11u^2+42u+52``) load fine."""
        counts = [0] * p
        s = text.replace(" ", "")
        if s == "" or s == "0":
            return cls(p, tuple(counts))
        for term in s.split("+"):
            m = _TERM_RE.match(term)
            if not m or (m.group(1) is None and m.group(2) is None):
                raise ValueError(f"bad state-sum term {term!r} in {text!r}")
            coeff = int(m.group(1)) if m.group(1) else 1
            if m.group(2) is None:
                k = 0
            elif m.group(3) is None:
                k = 1
            else:
                k = int(m.group(3))
            if k >= p:
                raise ValueError(f"power u^{k} out of range for modulus {p}")
            counts[k] += coeff
        return cls(p, tuple(counts))


def statesum_add(a: StateSumValue, b: StateSumValue) -> StateSumValue:
    return a + b


def statesum_insert(a: StateSumValue, weight: FieldScalar | int) -> StateSumValue:
    w = weight.value if isinstance(weight, FieldScalar) else int(weight)
    return a.insert(w)
