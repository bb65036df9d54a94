"""Finite quandles: representation, axiom verification, connectedness,
constructors, cycle-notation parsing, and isomorphism testing.

External element labels are 1-based (files, certificates, cycle notation);
the internal representation is 0-based numpy.  Quandle values are immutable
after verification and freely shareable.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np


class QuandleError(ValueError):
    """Raised when a table or file cannot produce a verified quandle."""


@dataclass(frozen=True)
class AxiomFailure(Exception):
    """Certificate naming the violated axiom with 1-based witness elements.

    axiom 1: idempotency x*x = x          witness = (x,)
    axiom 2: column y not a permutation   witness = (x1, x2, y) with x1*y = x2*y
    axiom 3: self-distributivity          witness = (x, y, z)
    """

    axiom: int
    witness: tuple[int, ...]
    message: str

    def __str__(self) -> str:
        return self.message


class Quandle:
    """A verified finite quandle given by its Cayley table.

    ``table[x][y]`` is x*y and ``inv_table[x][y]`` is the unique z with
    z*y = x (written x op-bar y), both 0-based internally.
    """

    def __init__(self, table: np.ndarray, inv_table: np.ndarray, name: str = ""):
        self.n = int(table.shape[0])
        self.table = table
        self.inv_table = inv_table
        self.name = name
        self.table.setflags(write=False)
        self.inv_table.setflags(write=False)
        self._connected: Optional[bool] = None

    def op(self, x: int, y: int) -> int:
        return int(self.table[x, y])

    def inv_op(self, x: int, y: int) -> int:
        return int(self.inv_table[x, y])

    def right_multiplication(self, y: int) -> np.ndarray:
        """The permutation S_y, as the 0-based array x -> x*y."""
        return self.table[:, y]

    def key(self) -> bytes:
        return self.table.tobytes()

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Quandle)
            and self.n == other.n
            and bool(np.all(self.table == other.table))
        )

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        label = self.name or f"order {self.n}"
        return f"Quandle({label})"


def quandle_check(table, name: str = "") -> Quandle:
    """Verify the three quandle axioms and return a Quandle.

    ``table`` holds 1-based entries as read from files (an n x n nested
    sequence or array).  Raises AxiomFailure with 1-based witnesses, or
    QuandleError for malformed input.
    """
    arr = np.asarray(table, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise QuandleError(f"table must be square, got shape {arr.shape}")
    n = arr.shape[0]
    if n == 0:
        raise QuandleError("empty table")
    if arr.min() < 1 or arr.max() > n:
        bad = np.argwhere((arr < 1) | (arr > n))[0]
        raise QuandleError(
            f"entry out of range 1..{n} at row {bad[0]+1}, column {bad[1]+1}"
        )
    t = arr - 1

    diag = np.diagonal(t)
    bad = np.nonzero(diag != np.arange(n))[0]
    if bad.size:
        x = int(bad[0])
        raise AxiomFailure(1, (x + 1,), f"axiom 1 fails: {x+1}*{x+1} = {diag[x]+1}")

    for y in range(n):
        col = t[:, y]
        counts = np.bincount(col, minlength=n)
        if counts.max() > 1:
            v = int(np.nonzero(counts > 1)[0][0])
            xs = np.nonzero(col == v)[0]
            x1, x2 = int(xs[0]), int(xs[1])
            raise AxiomFailure(
                2,
                (x1 + 1, x2 + 1, y + 1),
                f"axiom 2 fails: column {y+1} is not a permutation "
                f"({x1+1}*{y+1} = {x2+1}*{y+1} = {v+1})",
            )

    # (x*y)*z == (x*z)*(y*z), checked over all triples at once
    xy = t[:, :, None]
    xz = t[:, None, :]
    yz = t[None, :, :]
    lhs = t[xy, np.broadcast_to(np.arange(n)[None, None, :], (n, n, n))]
    rhs = t[xz, np.broadcast_to(yz, (n, n, n))]
    if not np.array_equal(lhs, rhs):
        x, y, z = (int(v) for v in np.argwhere(lhs != rhs)[0])
        raise AxiomFailure(
            3,
            (x + 1, y + 1, z + 1),
            f"axiom 3 fails: ({x+1}*{y+1})*{z+1} != ({x+1}*{z+1})*({y+1}*{z+1})",
        )

    inv = np.empty_like(t)
    for y in range(n):
        inv[t[:, y], y] = np.arange(n)
    return Quandle(t, inv, name=name)


def is_connected(q: Quandle) -> bool:
    """True iff the inner automorphism group acts transitively, i.e. the
    orbit of element 1 under all S_y and their inverses is everything."""
    if q._connected is not None:
        return q._connected
    n = q.n
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    frontier = [0]
    while frontier:
        nxt = []
        for x in frontier:
            for y in range(n):
                for img in (int(q.table[x, y]), int(q.inv_table[x, y])):
                    if not seen[img]:
                        seen[img] = True
                        nxt.append(img)
        frontier = nxt
    result = bool(seen.all())
    q._connected = result
    return result


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------


def trivial_quandle(n: int) -> Quandle:
    """x*y = x for all x, y."""
    col = np.arange(n, dtype=np.int64)
    table = np.repeat(col[:, None] + 1, n, axis=1)
    return quandle_check(table, name=f"trivial_{n}")


def alexander_quandle(k: int, t: int, name: str = "") -> Quandle:
    """The Alexander quandle x*y = T x + (1-T) y on Z_k; requires gcd(T,k)=1.
    T = -1 gives the dihedral quandle R_k."""
    t = t % k
    if math.gcd(t, k) != 1:
        raise QuandleError(f"T={t} is not invertible modulo {k}")
    xs = np.arange(k, dtype=np.int64)
    table = (t * xs[:, None] + (1 - t) * xs[None, :]) % k
    return quandle_check(table + 1, name=name or f"alexander_{k}_{t}")


def dihedral_quandle(k: int) -> Quandle:
    return alexander_quandle(k, -1, name=f"R_{k}")


# ---------------------------------------------------------------------------
# Cycle notation (the right-multiplication format used by quandle listings):
# lines "S_1 = (2 12 5)(3 8 6)", with "S_1=S_13= ..." sharing permitted and
# "~" accepted as a separator.  Unlisted elements are fixed points.
# ---------------------------------------------------------------------------

_CYCLE_RE = re.compile(r"\(([^()]*)\)")
_HEAD_RE = re.compile(r"^((?:S_?\{?\d+\}?\s*=\s*)+)(.*)$")
_SKIP_RE = re.compile(r"^S_?\{?(\d+)\}?$")


class CycleParseError(QuandleError):
    """A defective S_k definition; carries the 1-based column index."""

    def __init__(self, column: int, message: str):
        super().__init__(message)
        self.column = column


def _parse_cycle_body(k: int, body: str, n: int) -> np.ndarray:
    """Parse '(a b c)(d e)' into the permutation S_k on 1..n (0-based array)."""
    stripped = body.replace("~", " ").strip().rstrip(".")
    if stripped.count("(") != stripped.count(")"):
        raise CycleParseError(k, f"S_{k}: unbalanced parentheses in {body!r}")
    rebuilt = "".join(_CYCLE_RE.findall(stripped))
    leftover = _CYCLE_RE.sub("", stripped).strip()
    if leftover:
        raise CycleParseError(k, f"S_{k}: stray text {leftover!r} outside cycles")
    perm = np.arange(n, dtype=np.int64)
    seen: set[int] = set()
    for cyc in _CYCLE_RE.findall(stripped):
        elems = []
        for tok in cyc.replace("~", " ").split():
            if not tok.isdigit():
                raise CycleParseError(k, f"S_{k}: bad token {tok!r}")
            v = int(tok)
            if not 1 <= v <= n:
                raise CycleParseError(k, f"S_{k}: element {v} out of range 1..{n}")
            if v in seen:
                raise CycleParseError(k, f"S_{k}: element {v} repeated")
            seen.add(v)
            elems.append(v - 1)
        for i, e in enumerate(elems):
            perm[e] = elems[(i + 1) % len(elems)]
    return perm


def parse_cycle_lines(text: str, n: Optional[int] = None):
    """Parse cycle-notation text into per-column permutations.

    Returns (n, perms, defects) where perms maps 1-based k to the 0-based
    permutation array S_k, and defects maps k to the CycleParseError for
    columns that could not be parsed.  Every k in 1..n must be defined
    exactly once (shared "S_1=S_13=" definitions expand to both columns).
    """
    entries: list[tuple[list[int], str]] = []
    max_elem = 0
    for raw_line in text.splitlines():
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        m = _HEAD_RE.match(line)
        if not m:
            raise QuandleError(f"unrecognized cycle line {line!r}")
        ks = []
        for part in m.group(1).split("="):
            part = part.strip()
            if not part:
                continue
            km = _SKIP_RE.match(part)
            if not km:
                raise QuandleError(f"bad S_k name {part!r} in {line!r}")
            ks.append(int(km.group(1)))
        body = m.group(2)
        entries.append((ks, body))
        max_elem = max([max_elem] + ks + [int(t) for t in re.findall(r"\d+", body)])

    size = n if n is not None else max_elem
    if size < 1:
        raise QuandleError("no S_k definitions found")
    perms: dict[int, np.ndarray] = {}
    defects: dict[int, CycleParseError] = {}
    for ks, body in entries:
        for k in ks:
            if not 1 <= k <= size:
                raise QuandleError(f"S_{k} out of range 1..{size}")
            if k in perms or k in defects:
                raise QuandleError(f"S_{k} defined twice")
            try:
                perms[k] = _parse_cycle_body(k, body, size)
            except CycleParseError as exc:
                defects[k] = exc
    missing = [k for k in range(1, size + 1) if k not in perms and k not in defects]
    if missing:
        raise QuandleError(f"missing definitions for S_{missing}")
    return size, perms, defects


def table_from_columns(n: int, perms: dict[int, np.ndarray]) -> np.ndarray:
    """Assemble the 1-based Cayley table with table[x][k] = S_k(x)."""
    table = np.zeros((n, n), dtype=np.int64)
    for k, perm in perms.items():
        table[:, k - 1] = perm + 1
    return table


def parse_cycles(text: str, n: Optional[int] = None, name: str = "") -> Quandle:
    """Parse cycle-notation text and verify the result as a quandle.

    Raises CycleParseError on a defective column (repeated element, bad
    token) and AxiomFailure if the assembled table is not a quandle.
    """
    size, perms, defects = parse_cycle_lines(text, n)
    if defects:
        raise defects[min(defects)]
    return quandle_check(table_from_columns(size, perms), name=name)


def render_cycles(q: Quandle) -> str:
    """Write the right multiplications as cycle lines; parse_cycles of the
    output reproduces the quandle exactly."""
    lines = []
    for k in range(q.n):
        perm = q.table[:, k]
        seen = [False] * q.n
        cycles = []
        for start in range(q.n):
            if seen[start] or perm[start] == start:
                seen[start] = True
                continue
            cyc = [start]
            seen[start] = True
            cur = int(perm[start])
            while cur != start:
                cyc.append(cur)
                seen[cur] = True
                cur = int(perm[cur])
            cycles.append("(" + " ".join(str(e + 1) for e in cyc) + ")")
        body = "".join(cycles) if cycles else "()"
        lines.append(f"S_{k+1} = {body}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Quandle file format: line 1 "quandle <n>", then n lines of n space-separated
# 1-based integers (row x holds x*1 ... x*n); "#" begins a comment.
# ---------------------------------------------------------------------------


def parse_quandle_text(text: str, name: str = "") -> Quandle:
    rows = []
    n = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n is None:
            parts = line.split()
            if len(parts) != 2 or parts[0] != "quandle" or not parts[1].isdigit():
                raise QuandleError(f"expected header 'quandle <n>', got {line!r}")
            n = int(parts[1])
            continue
        try:
            rows.append([int(t) for t in line.split()])
        except ValueError as exc:
            raise QuandleError(f"bad table row {line!r}") from exc
    if n is None:
        raise QuandleError("missing 'quandle <n>' header")
    if len(rows) != n or any(len(r) != n for r in rows):
        raise QuandleError(f"expected {n} rows of {n} entries")
    return quandle_check(rows, name=name)


def render_quandle_text(q: Quandle, comment: str = "") -> str:
    lines = []
    if comment:
        for c in comment.splitlines():
            lines.append(f"# {c}")
    lines.append(f"quandle {q.n}")
    width = len(str(q.n))
    for x in range(q.n):
        lines.append(" ".join(str(int(v) + 1).rjust(width) for v in q.table[x]))
    return "\n".join(lines) + "\n"


def load_quandle(path: str | Path) -> Quandle:
    path = Path(path)
    return parse_quandle_text(path.read_text(), name=path.stem)


def save_quandle(q: Quandle, path: str | Path, comment: str = "") -> None:
    Path(path).write_text(render_quandle_text(q, comment))


# ---------------------------------------------------------------------------
# Isomorphism: backtracking on images with propagation, pruned by per-element
# profiles (cycle type of S_x, orbit sizes under refinement).
# ---------------------------------------------------------------------------


def _cycle_type(perm: np.ndarray) -> tuple[int, ...]:
    n = len(perm)
    seen = [False] * n
    lens = []
    for s in range(n):
        if seen[s]:
            continue
        length = 0
        cur = s
        while not seen[cur]:
            seen[cur] = True
            cur = int(perm[cur])
            length += 1
        lens.append(length)
    return tuple(sorted(lens))


def _profiles(q: Quandle) -> list:
    """Iterated refinement of per-element signatures, as in 1-dimensional
    Weisfeiler-Leman coloring; invariant under isomorphism."""
    sig = [( _cycle_type(q.table[:, y]),) for y in range(q.n)]
    for _ in range(q.n):
        classes = {s: i for i, s in enumerate(sorted(set(sig)))}
        cls = [classes[s] for s in sig]
        new_sig = []
        for x in range(q.n):
            row = tuple(sorted((cls[y], cls[q.table[x, y]], cls[q.table[y, x]]) for y in range(q.n)))
            new_sig.append((cls[x], row))
        if len(set(new_sig)) == len(set(sig)):
            sig = new_sig
            break
        sig = new_sig
    return sig


def quandles_isomorphic(q1: Quandle, q2: Quandle) -> Optional[dict[int, int]]:
    """Search for a bijection f with f(x*y) = f(x)*f(y).

    Returns the mapping as a 1-based dict, or None.  The negative answer is
    definitive: the backtracking is exhaustive up to profile pruning.
    """
    if q1.n != q2.n:
        return None
    n = q1.n
    p1, p2 = _profiles(q1), _profiles(q2)
    if sorted(p1) != sorted(p2):
        return None
    candidates = [[y for y in range(n) if p2[y] == p1[x]] for x in range(n)]

    f = [-1] * n
    used = [False] * n

    def extend(assigned: list[int]) -> bool:
        # propagate products of already-assigned elements
        queue = list(assigned)
        added = []
        ok = True
        while queue and ok:
            x = queue.pop()
            for y in range(n):
                if f[y] == -1:
                    continue
                for a, b in ((x, y), (y, x)):
                    src = int(q1.table[a, b])
                    img = int(q2.table[f[a], f[b]])
                    if f[src] == -1:
                        if used[img] or p2[img] != p1[src]:
                            ok = False
                            break
                        f[src] = img
                        used[img] = True
                        added.append(src)
                        queue.append(src)
                    elif f[src] != img:
                        ok = False
                        break
                if not ok:
                    break
        if ok:
            nxt = -1
            for x in range(n):
                if f[x] == -1:
                    nxt = x
                    break
            if nxt == -1:
                return True
            for img in candidates[nxt]:
                if used[img]:
                    continue
                f[nxt] = img
                used[img] = True
                if extend([nxt]):
                    return True
                f[nxt] = -1
                used[img] = False
        for src in added:
            used[f[src]] = False
            f[src] = -1
        return False

    if extend([]):
        return {x + 1: f[x] + 1 for x in range(n)}
    return None
