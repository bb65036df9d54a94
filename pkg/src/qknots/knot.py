"""Braid words, closures, mirror images, quandle coloring enumeration, and
the state-sum invariant.

Conventions (locked by the reference-value tests): at a positive letter i
the strand pair (x_i, x_{i+1}) becomes (x_{i+1}, x_i * x_{i+1}) and the
crossing contributes +phi(x_i, x_{i+1}); at a negative letter it becomes
(x_{i+1} op-bar x_i, x_i) contributing -phi(x_{i+1} op-bar x_i, x_i).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .algebra import StateSumValue, statesum_add
from .cohomology import Cocycle, CocycleError, ensure_cocycle
from .quandle import Quandle

DEFAULT_NODE_BUDGET = 10**9


class BudgetExceededError(RuntimeError):
    """The coloring search passed its node budget; never a silent truncation."""

    def __init__(self, budget: int, nodes: int):
        super().__init__(f"solver budget exceeded: {nodes} nodes > budget {budget}")
        self.budget = budget
        self.nodes = nodes


@dataclass(frozen=True)
class BraidWord:
    """A braid in B_m: braid index m plus signed generator letters, letter i
    (1 <= |i| < m) crossing strands |i| and |i|+1 with sign(i) the crossing
    sign."""

    m: int
    letters: tuple[int, ...]

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("braid index must be >= 1")
        object.__setattr__(self, "letters", tuple(int(l) for l in self.letters))
        for l in self.letters:
            if l == 0 or abs(l) >= self.m:
                raise ValueError(f"letter {l} out of range for braid index {self.m}")

    def __len__(self) -> int:
        return len(self.letters)

    def mirror(self) -> "BraidWord":
        """Negate every letter; the closure is the mirror image m(K)."""
        return BraidWord(self.m, tuple(-l for l in self.letters))

    def conjugate(self, g: int) -> "BraidWord":
        """g w g^-1; a Markov move, so the closure is unchanged."""
        return BraidWord(self.m, (g,) + self.letters + (-g,))

    def stabilize(self, sign: int = 1) -> "BraidWord":
        """Append letter +-m in B_{m+1}; a Markov move."""
        return BraidWord(self.m + 1, self.letters + (sign * self.m,))

    def permutation(self) -> tuple[int, ...]:
        """The underlying permutation top position -> bottom position."""
        perm = list(range(self.m))
        for l in self.letters:
            i = abs(l) - 1
            perm[i], perm[i + 1] = perm[i + 1], perm[i]
        return tuple(perm)


def mirror(w: BraidWord) -> BraidWord:
    return w.mirror()


def closure_components(w: BraidWord) -> int:
    """Number of link components of the braid closure = cycles of the
    underlying permutation."""
    perm = w.permutation()
    seen = [False] * w.m
    count = 0
    for s in range(w.m):
        if seen[s]:
            continue
        count += 1
        cur = s
        while not seen[cur]:
            seen[cur] = True
            cur = perm[cur]
    return count


def propagate(
    q: Quandle, top: Sequence[int], w: BraidWord, phi: Optional[Cocycle] = None
) -> tuple[tuple[int, ...], int]:
    """Push a top color vector (0-based) through the braid.

    Returns the bottom vector and the accumulated Boltzmann weight in Z_p
    (0 when no cocycle is given).
    """
    if len(top) != w.m:
        raise ValueError("top vector length must equal the braid index")
    x = list(top)
    weight = 0
    table = q.table
    inv = q.inv_table
    vals = phi.values if phi is not None else None
    p = phi.p if phi is not None else 1
    for l in w.letters:
        i = abs(l) - 1
        a, b = x[i], x[i + 1]
        if l > 0:
            x[i] = b
            x[i + 1] = int(table[a, b])
            if vals is not None:
                weight += int(vals[a, b])
        else:
            u = int(inv[b, a])
            x[i] = u
            x[i + 1] = a
            if vals is not None:
                weight -= int(vals[u, a])
    return tuple(x), weight % p if vals is not None else 0


@dataclass(frozen=True)
class Coloring:
    """A quandle coloring of the braid closure: the top vector (0-based)
    together with the induced colors of every arc segment, as rows of the
    strand-color grid after each letter."""

    top: tuple[int, ...]
    grid: tuple[tuple[int, ...], ...]

    def labels(self) -> tuple[int, ...]:
        """Top vector with 1-based element labels."""
        return tuple(c + 1 for c in self.top)


def _make_coloring(q: Quandle, top: Sequence[int], w: BraidWord) -> Coloring:
    rows = [tuple(top)]
    x = list(top)
    table = q.table
    inv = q.inv_table
    for l in w.letters:
        i = abs(l) - 1
        a, b = x[i], x[i + 1]
        if l > 0:
            x[i] = b
            x[i + 1] = int(table[a, b])
        else:
            x[i] = int(inv[b, a])
            x[i + 1] = a
        rows.append(tuple(x))
    return Coloring(tuple(top), tuple(rows))


def colorings_brute(q: Quandle, w: BraidWord) -> list[Coloring]:
    """Brute-force oracle: try all n^m top vectors and keep the fixed points
    of the braid action.  For testing the propagation solver."""
    out = []
    n = q.n
    m = w.m
    top = [0] * m
    while True:
        bottom, _ = propagate(q, top, w)
        if bottom == tuple(top):
            out.append(_make_coloring(q, tuple(top), w))
        i = m - 1
        while i >= 0 and top[i] == n - 1:
            top[i] = 0
            i -= 1
        if i < 0:
            return out
        top[i] += 1


# ---------------------------------------------------------------------------
# Constraint-propagation solver.  Arc variables are identified through the
# braid and its closure by union-find; each crossing leaves one ternary
# relation V = U * O (under-in U, over O, under-out V).  Unit propagation
# fires U,O -> V and V,O -> U; the pair U,V narrows O through the
# precomputed solution sets {b : U*b = V}; branching picks the
# most-constrained undetermined arc.
# ---------------------------------------------------------------------------


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def build_coloring_system(w: BraidWord):
    """Reduce the braid closure to variables and ternary relations.

    Returns (num_vars, top_vars, relations) with relations as (U, O, V)
    variable triples after closure identification and degenerate-case
    simplification.
    """
    m = w.m
    narcs = m + len(w.letters)
    uf = _UnionFind(narcs)
    pos = list(range(m))
    nxt = m
    raw_relations = []
    for l in w.letters:
        i = abs(l) - 1
        a, b = pos[i], pos[i + 1]
        c = nxt
        nxt += 1
        if l > 0:
            # under-in a, over b, under-out c
            raw_relations.append((a, b, c))
            pos[i], pos[i + 1] = b, c
        else:
            # under-in b, over a, under-out c;  c * a = b
            raw_relations.append((c, a, b))
            pos[i], pos[i + 1] = c, a
    for j in range(m):
        uf.union(j, pos[j])

    # U == O forces V == U (idempotency); iterate to a fixed point
    changed = True
    while changed:
        changed = False
        for u, o, v in raw_relations:
            ru, ro, rv = uf.find(u), uf.find(o), uf.find(v)
            if ru == ro and ru != rv:
                uf.union(ru, rv)
                changed = True

    roots = sorted({uf.find(a) for a in range(narcs)})
    index = {r: i for i, r in enumerate(roots)}
    relations = []
    seen = set()
    for u, o, v in raw_relations:
        ru, ro, rv = index[uf.find(u)], index[uf.find(o)], index[uf.find(v)]
        if ru == ro:
            continue
        key = (ru, ro, rv)
        if key not in seen:
            seen.add(key)
            relations.append(key)
    top_vars = tuple(index[uf.find(j)] for j in range(m))
    return len(roots), top_vars, relations


class _Solver:
    def __init__(self, q: Quandle, w: BraidWord, budget: Optional[int]):
        self.q = q
        self.w = w
        self.budget = DEFAULT_NODE_BUDGET if budget is None else budget
        self.nodes = 0
        n = q.n
        self.full = (1 << n) - 1
        self.bit_of = [1 << v for v in range(n)]
        t = q.table
        # solmask[u][v] = bitmask {b : u*b = v}
        self.solmask = [[0] * n for _ in range(n)]
        for u in range(n):
            row = t[u]
            for b in range(n):
                self.solmask[u][int(row[b])] |= 1 << b
        # fixmask[o] = {a : a*o = a}, colfix[u] = {b : u*b = b}
        self.fixmask = [0] * n
        self.colfix = [0] * n
        for a in range(n):
            for o in range(n):
                if int(t[a, o]) == a:
                    self.fixmask[o] |= 1 << a
                if int(t[a, o]) == o:
                    self.colfix[a] |= 1 << o

        self.nvars, self.top_vars, self.relations = build_coloring_system(w)
        self.var_rels: list[list[int]] = [[] for _ in range(self.nvars)]
        for ridx, (u, o, v) in enumerate(self.relations):
            for var in {u, o, v}:
                self.var_rels[var].append(ridx)

    def solve(self, seed_masks: Optional[dict[int, int]] = None) -> Iterator[tuple[int, ...]]:
        """Depth-first enumeration; yields one value tuple per solution, in
        deterministic ascending order."""
        domains = [self.full] * self.nvars
        if seed_masks:
            for var, mask in seed_masks.items():
                domains[var] &= mask
                if domains[var] == 0:
                    return
        trail: list[tuple[int, int]] = []
        table = self.q.table
        inv = self.q.inv_table

        def narrow(var: int, mask: int, queue: list[int]) -> bool:
            cur = domains[var]
            new = cur & mask
            if new == cur:
                return True
            if new == 0:
                return False
            trail.append((var, cur))
            domains[var] = new
            queue.append(var)
            return True

        def process(queue: list[int]) -> bool:
            while queue:
                var = queue.pop()
                for ridx in self.var_rels[var]:
                    u, o, v = self.relations[ridx]
                    du, do, dv = domains[u], domains[o], domains[v]
                    su = du & (du - 1) == 0
                    so = do & (do - 1) == 0
                    sv = dv & (dv - 1) == 0
                    if su and so:
                        uval = du.bit_length() - 1
                        oval = do.bit_length() - 1
                        if not narrow(v, self.bit_of[int(table[uval, oval])], queue):
                            return False
                    elif sv and so:
                        vval = dv.bit_length() - 1
                        oval = do.bit_length() - 1
                        if not narrow(u, self.bit_of[int(inv[vval, oval])], queue):
                            return False
                    elif su and sv:
                        uval = du.bit_length() - 1
                        vval = dv.bit_length() - 1
                        if not narrow(o, self.solmask[uval][vval], queue):
                            return False
                    elif so and u == v:
                        oval = do.bit_length() - 1
                        if not narrow(u, self.fixmask[oval], queue):
                            return False
                    elif su and o == v:
                        uval = du.bit_length() - 1
                        if not narrow(o, self.colfix[uval], queue):
                            return False
            return True

        def undo(mark: int) -> None:
            while len(trail) > mark:
                var, old = trail.pop()
                domains[var] = old

        def branch_var() -> int:
            best, best_size = -1, 1 << 62
            for var in range(self.nvars):
                d = domains[var]
                if d & (d - 1) == 0:
                    continue
                size = bin(d).count("1")
                if size < best_size:
                    best, best_size = var, size
            return best

        def dfs() -> Iterator[tuple[int, ...]]:
            var = branch_var()
            if var == -1:
                yield tuple(domains[t].bit_length() - 1 for t in self.top_vars)
                return
            d = domains[var]
            while d:
                bit = d & -d
                d ^= bit
                self.nodes += 1
                if self.nodes > self.budget:
                    raise BudgetExceededError(self.budget, self.nodes)
                mark = len(trail)
                queue: list[int] = []
                if narrow(var, bit, queue) and process(queue):
                    yield from dfs()
                undo(mark)

        queue = list(range(self.nvars))
        if process(queue):
            yield from dfs()
        undo(0)


def enumerate_colorings(
    q: Quandle, w: BraidWord, budget: Optional[int] = None
) -> Iterator[Coloring]:
    """Stream every coloring of the braid closure exactly once, in
    deterministic order (ascending top vectors)."""
    solver = _Solver(q, w, budget)
    for top in solver.solve():
        yield _make_coloring(q, top, w)


def count_colorings(q: Quandle, w: BraidWord, budget: Optional[int] = None) -> int:
    solver = _Solver(q, w, budget)
    return sum(1 for _ in solver.solve())


def state_sum(
    q: Quandle,
    phi: Cocycle,
    w: BraidWord,
    budget: Optional[int] = None,
    workers: int = 1,
) -> StateSumValue:
    """Sum u^(total Boltzmann weight) over all colorings of the closure.

    The sum of coefficients always equals the number of colorings.  With
    workers > 1 the root branching domain is partitioned; the merge is
    commutative so the result is independent of scheduling.
    """
    ensure_cocycle(q, phi)
    solver = _Solver(q, w, budget)
    if workers <= 1 or solver.nvars == 0:
        return _state_sum_partition(q, phi, w, solver, None)
    from concurrent.futures import ThreadPoolExecutor

    n = q.n
    root = 0
    chunks: list[int] = []
    per = max(1, n // workers)
    vals = list(range(n))
    for i in range(0, n, per):
        mask = 0
        for v in vals[i : i + per]:
            mask |= 1 << v
        chunks.append(mask)

    def run(mask: int) -> StateSumValue:
        sub = _Solver(q, w, budget)
        return _state_sum_partition(q, phi, w, sub, {root: mask})

    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(run, chunks))
    out = StateSumValue.zero(phi.p)
    for part in parts:
        out = statesum_add(out, part)
    return out


def _state_sum_partition(
    q: Quandle,
    phi: Cocycle,
    w: BraidWord,
    solver: _Solver,
    seed: Optional[dict[int, int]],
) -> StateSumValue:
    value = StateSumValue.zero(phi.p)
    for top in solver.solve(seed):
        _, weight = propagate(q, top, w, phi)
        value = value.insert(weight)
    return value


# ---------------------------------------------------------------------------
# Knot catalog: one record per line, "name<TAB>m<TAB>letters" with letters
# space-separated signed integers; "#" begins a comment.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KnotRecord:
    name: str
    braid: BraidWord

    @property
    def components(self) -> int:
        return closure_components(self.braid)


class CatalogError(ValueError):
    pass


def parse_catalog_text(text: str) -> dict[str, KnotRecord]:
    records: dict[str, KnotRecord] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise CatalogError(
                f"line {lineno}: expected 'name<TAB>m<TAB>letters', got {raw!r}"
            )
        name, m_str, letters_str = (s.strip() for s in parts)
        if name in records:
            raise CatalogError(f"line {lineno}: duplicate record for {name}")
        try:
            m = int(m_str)
            letters = tuple(int(t) for t in letters_str.split())
        except ValueError as exc:
            raise CatalogError(f"line {lineno}: bad numbers in {raw!r}") from exc
        records[name] = KnotRecord(name, BraidWord(m, letters))
    return records


def render_catalog_text(records: Iterable[KnotRecord]) -> str:
    lines = []
    for rec in records:
        letters = " ".join(str(l) for l in rec.braid.letters)
        lines.append(f"{rec.name}\t{rec.braid.m}\t{letters}")
    return "\n".join(lines) + "\n"


def load_catalog(path: str | Path) -> dict[str, KnotRecord]:
    return parse_catalog_text(Path(path).read_text())
