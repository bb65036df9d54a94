"""Quandle rings over GF(p), exhaustive idempotent enumeration, the
idempotent-quandle test, and its iteration.

GF(2) ring elements are carried as machine-word bit-vectors (bit x-1 set
means e_x has coefficient 1).  The 2^n idempotent scan never materializes
candidate subsets: it evaluates the quadratic closure condition for every
bitmask with a doubling recurrence, block by block, so the bitmask range
partitions into contiguous blocks processed independently and merged in
order.  Output is independent of block size and worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .algebra import ModulusError, check_modulus
from .quandle import AxiomFailure, Quandle, quandle_check

GF2_SCAN_MAX_ORDER = 26
ODD_P_SCAN_MAX_CANDIDATES = 1 << 22


class CapacityError(ValueError):
    """The requested exhaustive scan exceeds the supported size."""


@dataclass(frozen=True)
class RingElement:
    """An element sum(a_x e_x) of the quandle ring k[X] over GF(p).

    ``coeffs`` has length n; over GF(2) the element is equivalently the
    subset of X where the coefficient is 1.
    """

    quandle: Quandle
    p: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        check_modulus(self.p)
        if len(self.coeffs) != self.quandle.n:
            raise ValueError("coefficient vector length must match quandle order")
        object.__setattr__(self, "coeffs", tuple(c % self.p for c in self.coeffs))

    @classmethod
    def from_support(cls, quandle: Quandle, support: Iterable[int]) -> "RingElement":
        """GF(2) element from 1-based support labels."""
        coeffs = [0] * quandle.n
        for x in support:
            coeffs[x - 1] = 1
        return cls(quandle, 2, tuple(coeffs))

    @classmethod
    def from_mask(cls, quandle: Quandle, mask: int) -> "RingElement":
        return cls(quandle, 2, tuple((mask >> i) & 1 for i in range(quandle.n)))

    @classmethod
    def basis(cls, quandle: Quandle, x: int, p: int = 2) -> "RingElement":
        """The trivial idempotent e_x (1-based x)."""
        coeffs = [0] * quandle.n
        coeffs[x - 1] = 1
        return cls(quandle, p, tuple(coeffs))

    @property
    def mask(self) -> int:
        """Support bitmask (little-endian: bit x-1 is element x); GF(2) only."""
        if self.p != 2:
            raise ModulusError("support masks only apply over GF(2)")
        m = 0
        for i, c in enumerate(self.coeffs):
            if c:
                m |= 1 << i
        return m

    @property
    def support(self) -> tuple[int, ...]:
        """1-based labels with nonzero coefficient."""
        return tuple(i + 1 for i, c in enumerate(self.coeffs) if c)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def render(self) -> str:
        if self.is_zero():
            return "0"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            terms.append(f"e{i+1}" if c == 1 else f"{c}e{i+1}")
        return "+".join(terms)

    def __str__(self) -> str:
        return self.render()


def _check_compatible(u: RingElement, v: RingElement) -> None:
    if u.quandle.key() != v.quandle.key():
        raise ValueError("ring elements live over different quandles")
    if u.p != v.p:
        raise ModulusError(f"modulus mismatch: {u.p} vs {v.p}")


def ring_multiply(u: RingElement, v: RingElement) -> RingElement:
    """(sum a_x e_x)(sum b_y e_y) = sum a_x b_y e_{x*y}, reduced mod p."""
    _check_compatible(u, v)
    q, p = u.quandle, u.p
    out = [0] * q.n
    table = q.table
    for x, a in enumerate(u.coeffs):
        if a == 0:
            continue
        for y, b in enumerate(v.coeffs):
            if b == 0:
                continue
            z = table[x, y]
            out[z] = (out[z] + a * b) % p
    return RingElement(q, p, tuple(out))


def mask_multiply(q: Quandle, u: int, v: int) -> int:
    """GF(2) product of two support masks."""
    out = 0
    table = q.table
    uu = u
    while uu:
        x = (uu & -uu).bit_length() - 1
        uu &= uu - 1
        vv = v
        while vv:
            y = (vv & -vv).bit_length() - 1
            vv &= vv - 1
            out ^= 1 << int(table[x, y])
    return out


@dataclass(frozen=True)
class IdempotentSet:
    """All non-zero v with v*v = v, in canonical order: the trivial
    idempotents e_1..e_n first, then nontrivial idempotents sorted by
    support bitmask as a little-endian integer."""

    quandle: Quandle
    p: int
    elements: tuple[RingElement, ...]

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def masks(self) -> tuple[int, ...]:
        return tuple(e.mask for e in self.elements)

    def nontrivial(self) -> tuple[RingElement, ...]:
        return tuple(e for e in self.elements if len(e.support) != 1)


def _pair_masks(q: Quandle) -> list[tuple[int, int, int]]:
    """(x, y, bit(x*y) ^ bit(y*x)) for x < y where the product pair does not
    cancel; these drive the GF(2) closure condition v^2 = v + sum pairs."""
    out = []
    t = q.table
    for x in range(q.n):
        for y in range(x + 1, q.n):
            m = (1 << int(t[x, y])) ^ (1 << int(t[y, x]))
            if m:
                out.append((x, y, m))
    return out


def _scan_block(n: int, pair_matrix: np.ndarray, high: int, block_bits: int) -> np.ndarray:
    """Idempotent masks among {high | u : u < 2^block_bits}, ascending.

    Uses F(v) = XOR over pairs {x<y} in v of P[x][y]; v is idempotent iff
    F(v) == 0.  F restricted to the block obeys the doubling recurrence
    F(high|u|2^t) = F(high|u) ^ L_t(u) ^ Lh[t], with L_t linear, so each
    block costs O(2^block_bits) vector operations.
    """
    base = 0
    hbits = [i for i in range(n) if (high >> i) & 1]
    for i, x in enumerate(hbits):
        for y in hbits[i + 1:]:
            base ^= int(pair_matrix[x, y])
    lh = np.zeros(block_bits, dtype=np.uint32)
    for t in range(block_bits):
        acc = 0
        for y in hbits:
            acc ^= int(pair_matrix[t, y])
        lh[t] = acc

    size = 1 << block_bits
    g = np.zeros(size, dtype=np.uint32)
    g[0] = base
    lt = np.zeros(size >> 1 if size > 1 else 1, dtype=np.uint32)
    for t in range(block_bits):
        half = 1 << t
        lt[:half] = 0
        for s in range(t):
            step = 1 << s
            lt[step : 2 * step] = lt[:step] ^ np.uint32(int(pair_matrix[s, t]))
        g[half : 2 * half] = g[:half] ^ lt[:half] ^ lh[t]

    hits = np.nonzero(g == 0)[0]
    return hits.astype(np.int64) + high


def enumerate_idempotent_masks(
    q: Quandle, workers: int = 1, block_bits: int = 20
) -> list[int]:
    """All non-zero GF(2) idempotent support masks, ascending."""
    n = q.n
    if n > GF2_SCAN_MAX_ORDER:
        raise CapacityError(
            f"GF(2) idempotent scan supports order <= {GF2_SCAN_MAX_ORDER}, got {n}"
        )
    pair_matrix = np.zeros((n, n), dtype=np.uint32)
    for x, y, m in _pair_masks(q):
        pair_matrix[x, y] = m
        pair_matrix[y, x] = m

    block_bits = max(1, min(block_bits, n))
    nblocks = 1 << (n - block_bits)
    highs = [h << block_bits for h in range(nblocks)]
    if workers > 1 and nblocks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(
                lambda h: _scan_block(n, pair_matrix, h, block_bits), highs
            ))
    else:
        chunks = [_scan_block(n, pair_matrix, h, block_bits) for h in highs]
    masks: list[int] = []
    for c in chunks:
        masks.extend(int(v) for v in c)
    if masks and masks[0] == 0:
        masks.pop(0)
    return masks


def _canonical_mask_order(n: int, masks: Sequence[int]) -> list[int]:
    trivial = [m for m in masks if m & (m - 1) == 0]
    nontrivial = [m for m in masks if m & (m - 1) != 0]
    return sorted(trivial) + sorted(nontrivial)


def enumerate_idempotents(
    q: Quandle, p: int = 2, workers: int = 1, block_bits: int = 20
) -> IdempotentSet:
    """Exhaustively enumerate the non-zero idempotents of GF(p)[X].

    p = 2 scans all 2^n support masks (order <= 26).  Odd p is supported
    for exploratory use while p^n stays small; quandle construction only
    ever uses p = 2.
    """
    check_modulus(p)
    if p == 2:
        masks = enumerate_idempotent_masks(q, workers=workers, block_bits=block_bits)
        ordered = _canonical_mask_order(q.n, masks)
        elements = tuple(RingElement.from_mask(q, m) for m in ordered)
        return IdempotentSet(q, 2, elements)

    n = q.n
    if p**n > ODD_P_SCAN_MAX_CANDIDATES:
        raise CapacityError(
            f"GF({p}) idempotent scan needs {p}^{n} candidates; "
            f"supported only up to {ODD_P_SCAN_MAX_CANDIDATES}"
        )
    total = p**n
    t = q.table
    found: list[tuple[int, ...]] = []
    batch = 1 << 16
    powers = [p**i for i in range(n)]
    for start in range(0, total, batch):
        idx = np.arange(start, min(start + batch, total), dtype=np.int64)
        digits = np.empty((len(idx), n), dtype=np.int64)
        rem = idx.copy()
        for i in range(n):
            digits[:, i] = rem % p
            rem //= p
        sq = np.zeros_like(digits)
        for x in range(n):
            for y in range(n):
                z = int(t[x, y])
                sq[:, z] += digits[:, x] * digits[:, y]
        ok = np.all(sq % p == digits, axis=1)
        for row in digits[ok]:
            if row.any():
                found.append(tuple(int(c) for c in row))
    trivial = [c for c in found if sum(1 for v in c if v) == 1 and max(c) == 1]
    nontrivial = [c for c in found if c not in trivial]
    keyfn = lambda c: sum(v * powers[i] for i, v in enumerate(c))
    ordered = sorted(trivial, key=keyfn) + sorted(nontrivial, key=keyfn)
    return IdempotentSet(q, p, tuple(RingElement(q, p, c) for c in ordered))


def enumerate_idempotents_naive(q: Quandle, p: int = 2) -> list[RingElement]:
    """Reference double-loop enumeration (v*v == v for every non-zero v),
    used as an independent oracle in tests; practical only for tiny orders."""
    check_modulus(p)
    n = q.n
    if p**n > 1 << 16:
        raise CapacityError("naive enumeration is for tiny quandles only")
    out = []
    for idx in range(1, p**n):
        coeffs = []
        rem = idx
        for _ in range(n):
            coeffs.append(rem % p)
            rem //= p
        v = RingElement(q, p, tuple(coeffs))
        if ring_multiply(v, v) == v:
            out.append(v)
    return out


class IdempotentQuandleFailure(Exception):
    """Certificate that (I(Z2[X]), *) is not a quandle.

    kind is one of "closure", "idempotency", "right-injectivity",
    "distributivity"; witnesses are ring elements.  For right-injectivity
    every failing column is recorded in ``failures`` as
    (column, u1, u2) with u1 * column == u2 * column.
    """

    def __init__(self, kind: str, message: str, failures=None):
        super().__init__(message)
        self.kind = kind
        self.failures = failures or []


def idempotent_quandle(idem: IdempotentSet, name: str = "") -> Quandle:
    """Check whether the idempotent set is closed and satisfies the quandle
    axioms under ring multiplication; return its Cayley table over the
    canonical ordering, or raise an IdempotentQuandleFailure certificate."""
    if idem.p != 2:
        raise ModulusError("idempotent quandles are constructed over GF(2) only")
    q = idem.quandle
    masks = list(idem.masks)
    index = {m: i for i, m in enumerate(masks)}
    k = len(masks)
    elem = lambda i: RingElement.from_mask(q, masks[i])

    table = np.zeros((k, k), dtype=np.int64)
    for i, u in enumerate(masks):
        for j, v in enumerate(masks):
            prod = mask_multiply(q, u, v)
            if prod not in index:
                raise IdempotentQuandleFailure(
                    "closure",
                    f"({elem(i)})*({elem(j)}) = "
                    f"{RingElement.from_mask(q, prod)} is not an idempotent",
                )
            table[i, j] = index[prod]

    for i in range(k):
        if table[i, i] != i:
            raise IdempotentQuandleFailure(
                "idempotency", f"({elem(i)})^2 != {elem(i)}"
            )

    injective_failures = []
    for j in range(k):
        seen: dict[int, int] = {}
        for i in range(k):
            img = int(table[i, j])
            if img in seen:
                injective_failures.append((elem(j), elem(seen[img]), elem(i)))
                break
            seen[img] = i
    if injective_failures:
        col, u1, u2 = injective_failures[0]
        raise IdempotentQuandleFailure(
            "right-injectivity",
            f"right multiplication by {col} fails to be injective: "
            f"({u1})*({col}) = ({u2})*({col})",
            failures=injective_failures,
        )

    try:
        return quandle_check(table + 1, name=name or f"I(Z2[{q.name or 'X'}])")
    except AxiomFailure as exc:
        witnesses = tuple(elem(w - 1) for w in exc.witness)
        kind = "distributivity" if exc.axiom == 3 else "axiom"
        raise IdempotentQuandleFailure(
            kind,
            f"idempotent set fails quandle axiom {exc.axiom} at "
            + ", ".join(str(w) for w in witnesses),
        ) from exc


def iterate_idempotent_quandle(
    q: Quandle, depth: int, workers: int = 1, block_bits: int = 20
) -> Quandle:
    """Apply enumerate_idempotents + idempotent_quandle ``depth`` times.

    Raises the intermediate certificate or capacity error as soon as a
    stage fails; each intermediate set must form a quandle.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    cur = q
    for step in range(depth):
        idem = enumerate_idempotents(cur, 2, workers=workers, block_bits=block_bits)
        cur = idempotent_quandle(idem, name=f"I(Z2[{cur.name or 'X'}])")
    return cur
