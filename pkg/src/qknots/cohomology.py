"""Quandle 2-cocycles over GF(p): verification, cocycle/coboundary spaces,
coboundary membership, and low-degree boundary matrices of the quandle
chain complex.

Cochain coordinates are row-major pairs (x, y) with 1-based labels, fixing
basis determinism.  Large GF(2) systems go through the packed-integer
elimination in :mod:`qknots.algebra`; odd moduli use dense elimination.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .algebra import (
    FieldMatrix,
    check_modulus,
    gf2_nullspace,
    gf2_reduce,
    gf2_rref,
)
from .quandle import Quandle, QuandleError


class CocycleError(ValueError):
    """Raised when a claimed cocycle fails verification or does not match
    its quandle."""


@dataclass(frozen=True)
class CocycleViolation:
    """Witness against the 2-cocycle conditions: either a nonzero diagonal
    value (kind "diagonal", witness (x,)) or a failing triple (kind
    "triple", witness (x, y, z)); 1-based labels."""

    kind: str
    witness: tuple[int, ...]

    def __str__(self) -> str:
        if self.kind == "diagonal":
            return f"phi({self.witness[0]},{self.witness[0]}) != 0"
        x, y, z = self.witness
        return (
            f"cocycle condition fails at (x,y,z)=({x},{y},{z}): "
            f"phi(x,y)-phi(x,z)+phi(x*y,z)-phi(x*z,y*z) != 0"
        )


class Cocycle:
    """A GF(p)-valued function on ordered pairs of quandle elements,
    values[x][y] = phi(x, y) (0-based internally)."""

    def __init__(self, quandle: Quandle, p: int, values, name: str = ""):
        check_modulus(p)
        arr = np.asarray(values, dtype=np.int64) % p
        if arr.shape != (quandle.n, quandle.n):
            raise CocycleError(
                f"cocycle shape {arr.shape} does not match quandle order {quandle.n}"
            )
        self.quandle = quandle
        self.p = p
        self.values = arr
        self.values.setflags(write=False)
        self.name = name

    @classmethod
    def zero(cls, quandle: Quandle, p: int) -> "Cocycle":
        return cls(quandle, p, np.zeros((quandle.n, quandle.n), dtype=np.int64))

    @classmethod
    def from_entries(
        cls, quandle: Quandle, p: int, entries: dict[tuple[int, int], int], name: str = ""
    ) -> "Cocycle":
        """Build from sparse 1-based entries; omitted pairs are zero."""
        arr = np.zeros((quandle.n, quandle.n), dtype=np.int64)
        for (x, y), v in entries.items():
            arr[x - 1, y - 1] = v % p
        return cls(quandle, p, arr, name=name)

    def value(self, x: int, y: int) -> int:
        return int(self.values[x, y])

    def entries(self) -> dict[tuple[int, int], int]:
        """Nonzero entries as a 1-based sparse dict."""
        out = {}
        for x, y in zip(*np.nonzero(self.values)):
            out[(int(x) + 1, int(y) + 1)] = int(self.values[x, y])
        return out

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def packed(self) -> int:
        """GF(2) row-major packed form."""
        if self.p != 2:
            raise CocycleError("packed form only applies over GF(2)")
        m = 0
        for i, v in enumerate(self.flat()):
            if v:
                m |= 1 << i
        return m

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Cocycle)
            and self.p == other.p
            and self.quandle.key() == other.quandle.key()
            and bool(np.all(self.values == other.values))
        )

    def __add__(self, other: "Cocycle") -> "Cocycle":
        if self.p != other.p or self.quandle.key() != other.quandle.key():
            raise CocycleError("cannot add cocycles over different quandles/moduli")
        return Cocycle(self.quandle, self.p, (self.values + other.values) % self.p)


def verify_cocycle(q: Quandle, phi: Cocycle) -> Optional[CocycleViolation]:
    """Check phi(x,x) = 0 and the triple condition
    phi(x,y) - phi(x,z) + phi(x*y,z) - phi(x*z,y*z) = 0 over all n^3
    triples; return None if both hold, else the first witness."""
    if phi.quandle.key() != q.key():
        raise CocycleError("cocycle does not belong to this quandle")
    n = q.n
    vals = phi.values
    diag = np.diagonal(vals)
    bad = np.nonzero(diag)[0]
    if bad.size:
        return CocycleViolation("diagonal", (int(bad[0]) + 1,))

    t = q.table
    idx = np.arange(n)
    t1 = vals[:, :, None]
    t2 = vals[:, None, :]
    xy = t[:, :, None]
    xz = t[:, None, :]
    yz = np.broadcast_to(t[None, :, :], (n, n, n))
    t3 = vals[xy, np.broadcast_to(idx[None, None, :], (n, n, n))]
    t4 = vals[np.broadcast_to(xz, (n, n, n)), yz]
    total = (t1 - t2 + t3 - t4) % phi.p
    if np.any(total):
        x, y, z = (int(v) for v in np.argwhere(total)[0])
        return CocycleViolation("triple", (x + 1, y + 1, z + 1))
    return None


def ensure_cocycle(q: Quandle, phi: Cocycle) -> Cocycle:
    witness = verify_cocycle(q, phi)
    if witness is not None:
        raise CocycleError(f"not a 2-cocycle: {witness}")
    return phi


# ---------------------------------------------------------------------------
# Cocycle and coboundary spaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CochainSpace:
    """Deterministic bases for the 2-cocycles Z^2 and 2-coboundaries B^2 of
    a quandle with GF(p) coefficients, as flattened n^2 vectors (row-major
    (x, y) coordinates).  B^2 is contained in Z^2 and
    dim H^2 = dim_z2 - dim_b2 >= 0."""

    quandle: Quandle
    p: int
    z2_basis: tuple
    b2_basis: tuple

    @property
    def dim_z2(self) -> int:
        return len(self.z2_basis)

    @property
    def dim_b2(self) -> int:
        return len(self.b2_basis)

    @property
    def dim_h2(self) -> int:
        return self.dim_z2 - self.dim_b2

    def z2_cocycles(self) -> list[Cocycle]:
        n = self.quandle.n
        return [
            Cocycle(self.quandle, self.p, np.asarray(v).reshape(n, n))
            for v in self.z2_basis
        ]


def _cocycle_constraint_rows_gf2(q: Quandle) -> list[int]:
    n = q.n
    t = q.table
    rows = set()
    for x in range(n):
        rows.add(1 << (x * n + x))
    for x in range(n):
        tx = t[x]
        for y in range(n):
            xy = int(tx[y])
            for z in range(n):
                r = (1 << (x * n + y)) ^ (1 << (x * n + z))
                r ^= 1 << (xy * n + z)
                r ^= 1 << (int(tx[z]) * n + int(t[y, z]))
                if r:
                    rows.add(r)
    return sorted(rows)


def _cocycle_constraint_rows_dense(q: Quandle, p: int) -> np.ndarray:
    n = q.n
    t = q.table
    rows = []
    for x in range(n):
        r = np.zeros(n * n, dtype=np.int64)
        r[x * n + x] = 1
        rows.append(r)
    for x in range(n):
        for y in range(n):
            xy = int(t[x, y])
            for z in range(n):
                r = np.zeros(n * n, dtype=np.int64)
                r[x * n + y] += 1
                r[x * n + z] -= 1
                r[xy * n + z] += 1
                r[int(t[x, z]) * n + int(t[y, z])] -= 1
                r %= p
                if r.any():
                    rows.append(r)
    return np.array(rows, dtype=np.int64)


def _coboundary_generators(q: Quandle, p: int) -> list[np.ndarray]:
    """delta(f)(x,y) = f(x) - f(x*y) for f the indicator of each element."""
    n = q.n
    t = q.table
    gens = []
    for e in range(n):
        vec = np.zeros(n * n, dtype=np.int64)
        for x in range(n):
            for y in range(n):
                v = (1 if x == e else 0) - (1 if int(t[x, y]) == e else 0)
                vec[x * n + y] = v % p
        gens.append(vec)
    return gens


def coboundary_of(q: Quandle, f: Sequence[int], p: int) -> Cocycle:
    """The 2-coboundary of a 1-cochain f (length-n vector)."""
    n = q.n
    if len(f) != n:
        raise CocycleError("1-cochain length must match quandle order")
    t = q.table
    vals = np.zeros((n, n), dtype=np.int64)
    for x in range(n):
        for y in range(n):
            vals[x, y] = (f[x] - f[int(t[x, y])]) % p
    return Cocycle(q, p, vals)


def _unpack(vec: int, ncols: int) -> np.ndarray:
    return np.array([(vec >> i) & 1 for i in range(ncols)], dtype=np.int64)


def cochain_spaces(q: Quandle, p: int) -> CochainSpace:
    """Compute deterministic bases of Z^2 and B^2 from the conditions as
    linear constraints, via nullspace under the fixed pivot rule."""
    check_modulus(p)
    n = q.n
    ncols = n * n
    if p == 2:
        rows = _cocycle_constraint_rows_gf2(q)
        pivots = gf2_rref(rows)
        z2 = tuple(_unpack(v, ncols) for v in gf2_nullspace(pivots, ncols))
        gen_packed = []
        for g in _coboundary_generators(q, 2):
            m = 0
            for i, v in enumerate(g):
                if v:
                    m |= 1 << i
            gen_packed.append(m)
        bpiv = gf2_rref(gen_packed)
        b2 = tuple(_unpack(bpiv[c], ncols) for c in sorted(bpiv))
    else:
        mat = FieldMatrix(_cocycle_constraint_rows_dense(q, p), p)
        z2 = tuple(mat.nullspace_basis())
        gens = FieldMatrix(np.array(_coboundary_generators(q, p)), p)
        rref, rank, _ = gens.rref()
        b2 = tuple(np.array(rref.array[i]) for i in range(rank))
    return CochainSpace(q, p, z2, b2)


def cocycle_space(q: Quandle, p: int) -> CochainSpace:
    return cochain_spaces(q, p)


def coboundary_space(q: Quandle, p: int) -> CochainSpace:
    return cochain_spaces(q, p)


def is_coboundary(q: Quandle, phi: Cocycle) -> bool:
    """Membership of a verified cocycle in B^2, by solving the linear
    system over the coboundary generators."""
    ensure_cocycle(q, phi)
    p = phi.p
    if p == 2:
        gens = []
        for g in _coboundary_generators(q, 2):
            m = 0
            for i, v in enumerate(g):
                if v:
                    m |= 1 << i
            gens.append(m)
        pivots = gf2_rref(gens)
        return gf2_reduce(phi.packed(), pivots) == 0
    gens = np.array(_coboundary_generators(q, p))
    aug = np.concatenate([gens.T, phi.flat()[:, None]], axis=1)
    _, _, pivots = FieldMatrix(aug, p).rref()
    return gens.shape[0] not in pivots


# ---------------------------------------------------------------------------
# Boundary matrices of the quotient (quandle) chain complex in degrees 2, 3.
# Basis tuples exclude adjacent equal entries; the boundary preserves the
# degenerate subcomplex so it restricts to the quotient.
# ---------------------------------------------------------------------------


def _pair_basis(n: int) -> list[tuple[int, int]]:
    return [(x, y) for x in range(n) for y in range(n) if x != y]


def _triple_basis(n: int) -> list[tuple[int, int, int]]:
    return [
        (x, y, z)
        for x in range(n)
        for y in range(n)
        for z in range(n)
        if x != y and y != z
    ]


def boundary_matrix(q: Quandle, degree: int, p: int) -> FieldMatrix:
    """Matrix of the boundary map in the given degree (2 or 3) on the
    quotient complex, columns indexed by the non-degenerate tuple basis."""
    check_modulus(p)
    n = q.n
    t = q.table
    if degree == 2:
        pairs = _pair_basis(n)
        mat = np.zeros((n, len(pairs)), dtype=np.int64)
        for j, (x, y) in enumerate(pairs):
            mat[x, j] += 1
            mat[int(t[x, y]), j] -= 1
        return FieldMatrix(mat, p)
    if degree == 3:
        pairs = _pair_basis(n)
        pair_idx = {pq: i for i, pq in enumerate(pairs)}
        triples = _triple_basis(n)
        mat = np.zeros((len(pairs), len(triples)), dtype=np.int64)
        for j, (x, y, z) in enumerate(triples):
            for target, sign in (
                ((x, z), 1),
                ((int(t[x, y]), z), -1),
                ((x, y), -1),
                ((int(t[x, z]), int(t[y, z])), 1),
            ):
                if target[0] != target[1]:
                    mat[pair_idx[target], j] += sign
        return FieldMatrix(mat, p)
    raise ValueError(f"unsupported degree {degree}; only 2 and 3")


def h2_dimension_via_boundaries(q: Quandle, p: int) -> int:
    """dim H^2 computed from ranks of the degree-2/3 boundary matrices on
    the quotient complex; cross-checks the direct constraint solver."""
    n = q.n
    d2 = boundary_matrix(q, 2, p)
    d3 = boundary_matrix(q, 3, p)
    dim_c2 = n * (n - 1)
    dim_z2 = dim_c2 - d3.rank()
    dim_b2 = d2.rank()
    return dim_z2 - dim_b2


# ---------------------------------------------------------------------------
# Cocycle file format: line 1 "cocycle <n> <p>", then lines "<x> <y> <v>"
# for nonzero entries (1-based); omitted pairs are zero; "#" comments.
# ---------------------------------------------------------------------------


def parse_cocycle_text(text: str, quandle: Quandle, name: str = "") -> Cocycle:
    n = None
    p = None
    entries: dict[tuple[int, int], int] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 3 or parts[0] != "cocycle":
                raise CocycleError(f"expected header 'cocycle <n> <p>', got {line!r}")
            n, p = int(parts[1]), int(parts[2])
            if n != quandle.n:
                raise CocycleError(
                    f"cocycle is on {n} elements but quandle has {quandle.n}"
                )
            continue
        if len(parts) != 3:
            raise CocycleError(f"expected '<x> <y> <value>', got {line!r}")
        x, y, v = (int(s) for s in parts)
        if not (1 <= x <= n and 1 <= y <= n):
            raise CocycleError(f"entry ({x},{y}) out of range 1..{n}")
        if (x, y) in entries:
            raise CocycleError(f"duplicate entry for ({x},{y})")
        entries[(x, y)] = v
    if n is None:
        raise CocycleError("missing 'cocycle <n> <p>' header")
    return Cocycle.from_entries(quandle, p, entries, name=name)


def render_cocycle_text(phi: Cocycle, comment: str = "") -> str:
    lines = []
    if comment:
        for c in comment.splitlines():
            lines.append(f"# {c}")
    lines.append(f"cocycle {phi.quandle.n} {phi.p}")
    for (x, y), v in sorted(phi.entries().items()):
        lines.append(f"{x} {y} {v}")
    return "\n".join(lines) + "\n"


def load_cocycle(path: str | Path, quandle: Quandle) -> Cocycle:
    path = Path(path)
    return parse_cocycle_text(path.read_text(), quandle, name=path.stem)


def save_cocycle(phi: Cocycle, path: str | Path, comment: str = "") -> None:
    Path(path).write_text(render_cocycle_text(phi, comment))
