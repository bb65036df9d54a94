"""Batch driver: battery loading, invariant matrices over a quandle/cocycle
battery, distinguishing partitions, mirror reports, and similarity classes,
with a persisted, resumable results store.

The results store is a plain-text append-only file, one line per cell,
"knot<TAB>label<TAB>value", with last-write-wins on reload; budget failures
are stored as "!budget:<nodes>" markers and reload as holes.  Reports cite
battery labels and data-file hashes so runs are reproducible.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .algebra import StateSumValue
from .cohomology import Cocycle, CocycleError, load_cocycle, verify_cocycle
from .knot import (
    BraidWord,
    BudgetExceededError,
    KnotRecord,
    count_colorings,
    load_catalog,
    state_sum,
)
from .quandle import Quandle, load_quandle

Cell = object  # int | StateSumValue | BudgetHole


@dataclass(frozen=True)
class BudgetHole:
    """Marker for a cell whose computation exceeded the node budget."""

    nodes: int

    def render(self) -> str:
        return f"!budget:{self.nodes}"


@dataclass(frozen=True)
class BatteryEntry:
    """One (quandle, optional cocycle) column of the invariant battery."""

    label: str
    quandle: Quandle
    cocycle: Optional[Cocycle]
    quandle_path: str
    cocycle_path: Optional[str]
    sha256: str

    @property
    def is_counting(self) -> bool:
        return self.cocycle is None


@dataclass(frozen=True)
class Battery:
    entries: tuple[BatteryEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def labels(self) -> tuple[str, ...]:
        return tuple(e.label for e in self.entries)

    def __iter__(self):
        return iter(self.entries)


class BatteryError(ValueError):
    pass


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()[:16]


def load_battery(path: str | Path) -> Battery:
    """Battery file: one entry per line,
    "label<TAB>quandle-file[<TAB>cocycle-file]", paths relative to the
    battery file; every cocycle is verified against its quandle at load."""
    path = Path(path)
    base = path.parent
    entries = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        parts = [p.strip() for p in line.split("\t")]
        if len(parts) not in (2, 3):
            raise BatteryError(
                f"{path}:{lineno}: expected 'label<TAB>quandle[<TAB>cocycle]'"
            )
        label, qpath = parts[0], parts[1]
        cpath = parts[2] if len(parts) == 3 and parts[2] else None
        qfile = base / qpath
        try:
            q = load_quandle(qfile)
        except Exception as exc:
            raise BatteryError(f"{path}:{lineno}: cannot load quandle {qpath}: {exc}")
        digest = _sha256(qfile)
        phi = None
        if cpath:
            cfile = base / cpath
            try:
                phi = load_cocycle(cfile, q)
            except Exception as exc:
                raise BatteryError(
                    f"{path}:{lineno}: cannot load cocycle {cpath}: {exc}"
                )
            witness = verify_cocycle(q, phi)
            if witness is not None:
                raise BatteryError(
                    f"{path}:{lineno}: cocycle {cpath} fails verification: {witness}"
                )
            digest += "," + _sha256(cfile)
        entries.append(
            BatteryEntry(label, q, phi, qpath, cpath, digest)
        )
    return Battery(tuple(entries))


def battery_from_objects(pairs) -> Battery:
    """Build a battery from in-memory (label, quandle, cocycle|None) tuples;
    used by tests and scripts."""
    entries = []
    for label, q, phi in pairs:
        if phi is not None:
            witness = verify_cocycle(q, phi)
            if witness is not None:
                raise BatteryError(f"{label}: cocycle fails verification: {witness}")
        entries.append(BatteryEntry(label, q, phi, "", None, ""))
    return Battery(tuple(entries))


# ---------------------------------------------------------------------------
# Results store
# ---------------------------------------------------------------------------


class ResultsStore:
    """Append-only text store of computed cells, keyed by (knot, label)."""

    def __init__(self, path: Optional[str | Path] = None):
        self.path = Path(path) if path is not None else None
        self._cells: dict[tuple[str, str], str] = {}
        if self.path is not None and self.path.exists():
            for raw in self.path.read_text().splitlines():
                line = raw.rstrip("\n")
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    continue
                self._cells[(parts[0], parts[1])] = parts[2]

    def get_raw(self, knot: str, label: str) -> Optional[str]:
        return self._cells.get((knot, label))

    def put(self, knot: str, label: str, rendered: str) -> None:
        self._cells[(knot, label)] = rendered
        if self.path is not None:
            with self.path.open("a") as fh:
                fh.write(f"{knot}\t{label}\t{rendered}\n")

    def __len__(self) -> int:
        return len(self._cells)


def render_cell(cell) -> str:
    if isinstance(cell, BudgetHole):
        return cell.render()
    if isinstance(cell, StateSumValue):
        return cell.render()
    return str(cell)


def parse_cell(raw: str, entry: BatteryEntry):
    if raw.startswith("!budget"):
        nodes = int(raw.split(":", 1)[1]) if ":" in raw else 0
        return BudgetHole(nodes)
    if entry.is_counting:
        return int(raw)
    return StateSumValue.parse(raw, entry.cocycle.p)


def compute_cell(entry: BatteryEntry, braid: BraidWord, budget=None, workers: int = 1):
    """One invariant value: a coloring count for counting entries, otherwise
    a state sum.  Budget overruns come back as BudgetHole markers."""
    try:
        if entry.is_counting:
            return count_colorings(entry.quandle, braid, budget=budget)
        return state_sum(entry.quandle, entry.cocycle, braid, budget=budget, workers=workers)
    except BudgetExceededError as exc:
        return BudgetHole(exc.nodes)


@dataclass
class InvariantVector:
    knot: str
    cells: tuple  # one per battery entry, in battery order

    def complete(self) -> bool:
        return not any(isinstance(c, BudgetHole) for c in self.cells)

    def key(self) -> tuple:
        return tuple(render_cell(c) for c in self.cells)


def invariant_matrix(
    battery: Battery,
    catalog: dict[str, KnotRecord],
    knot_names: Optional[Sequence[str]] = None,
    store: Optional[ResultsStore] = None,
    budget: Optional[int] = None,
    workers: int = 1,
) -> list[InvariantVector]:
    """Rows = knots, columns = battery entries.  Previously persisted cells
    are reused; budget failures leave holes and the run continues."""
    names = list(knot_names) if knot_names is not None else list(catalog)
    missing = [n for n in names if n not in catalog]
    if missing:
        raise KeyError(f"knots missing from catalog: {', '.join(missing)}")
    store = store if store is not None else ResultsStore(None)

    jobs = []
    for name in names:
        for entry in battery:
            if store.get_raw(name, entry.label) is None:
                jobs.append((name, entry))

    def run(job):
        name, entry = job
        return render_cell(compute_cell(entry, catalog[name].braid, budget=budget))

    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rendered = list(pool.map(run, jobs))
    else:
        rendered = [run(j) for j in jobs]
    for (name, entry), value in zip(jobs, rendered):
        store.put(name, entry.label, value)

    rows = []
    for name in names:
        cells = tuple(
            parse_cell(store.get_raw(name, entry.label), entry) for entry in battery
        )
        rows.append(InvariantVector(name, cells))
    return rows


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


@dataclass
class DistinguishReport:
    classes: list[list[str]]        # grouped by equal invariant vectors
    incomplete: list[str]           # rows with budget holes: never grouped
    vectors: dict[str, InvariantVector]

    @property
    def fully_distinguished(self) -> bool:
        return not self.incomplete and all(len(c) == 1 for c in self.classes)


def distinguish_report(rows: Sequence[InvariantVector]) -> DistinguishReport:
    """Group knots by equal invariant vectors.  Rows with holes are listed
    as incomplete and never claimed equal to anything through a hole."""
    groups: dict[tuple, list[str]] = {}
    incomplete = []
    for row in rows:
        if not row.complete():
            incomplete.append(row.knot)
            continue
        groups.setdefault(row.key(), []).append(row.knot)
    classes = [sorted(v) for v in groups.values()]
    classes.sort(key=lambda c: (len(c) == 1, c[0]))
    return DistinguishReport(classes, sorted(incomplete), {r.knot: r for r in rows})


@dataclass
class MirrorVerdict:
    knot: str
    vector: InvariantVector
    mirror_vector: InvariantVector

    @property
    def distinguished(self) -> bool:
        if not (self.vector.complete() and self.mirror_vector.complete()):
            return False
        return self.vector.key() != self.mirror_vector.key()

    @property
    def decided(self) -> bool:
        return self.vector.complete() and self.mirror_vector.complete()


def mirror_report(
    battery: Battery,
    catalog: dict[str, KnotRecord],
    knot_names: Optional[Sequence[str]] = None,
    store: Optional[ResultsStore] = None,
    budget: Optional[int] = None,
    workers: int = 1,
) -> list[MirrorVerdict]:
    """Invariant vectors of K and of its mirror image, per knot."""
    names = list(knot_names) if knot_names is not None else list(catalog)
    mirror_catalog = {}
    for name in names:
        if name not in catalog:
            raise KeyError(f"knot missing from catalog: {name}")
        rec = catalog[name]
        mirror_catalog[name] = rec
        mirror_catalog[name + "!mirror"] = KnotRecord(
            name + "!mirror", rec.braid.mirror()
        )
    all_names = list(mirror_catalog)
    rows = invariant_matrix(
        battery, mirror_catalog, all_names, store=store, budget=budget, workers=workers
    )
    by_name = {r.knot: r for r in rows}
    return [
        MirrorVerdict(name, by_name[name], by_name[name + "!mirror"]) for name in names
    ]


@dataclass
class SimilarityClass:
    labels: list[str]


def similarity_classes(
    battery: Battery, rows: Sequence[InvariantVector]
) -> list[SimilarityClass]:
    """Partition battery entries by columnwise equality of their invariant
    values across the given knot family (equality on coefficient vectors)."""
    columns: dict[str, tuple] = {}
    for j, entry in enumerate(battery):
        col = []
        for row in rows:
            cell = row.cells[j]
            if isinstance(cell, BudgetHole):
                raise ValueError(
                    f"similarity needs a complete matrix; hole at "
                    f"({row.knot}, {entry.label})"
                )
            col.append(render_cell(cell))
        columns[entry.label] = tuple(col)
    groups: dict[tuple, list[str]] = {}
    for label in battery.labels():
        groups.setdefault(columns[label], []).append(label)
    out = [SimilarityClass(sorted(v)) for v in groups.values()]
    out.sort(key=lambda c: c.labels[0])
    return out


# ---------------------------------------------------------------------------
# Text report rendering
# ---------------------------------------------------------------------------


def battery_header(battery: Battery) -> list[str]:
    lines = ["# battery:"]
    for e in battery:
        src = e.quandle_path or e.quandle.name or "<memory>"
        if e.cocycle_path:
            src += f" + {e.cocycle_path}"
        digest = f" sha256:{e.sha256}" if e.sha256 else ""
        lines.append(f"#   {e.label}: {src}{digest}")
    return lines


def render_matrix_tsv(battery: Battery, rows: Sequence[InvariantVector]) -> str:
    lines = battery_header(battery)
    lines.append("knot\t" + "\t".join(battery.labels()))
    for row in rows:
        lines.append(row.knot + "\t" + "\t".join(row.key()))
    return "\n".join(lines) + "\n"


def render_distinguish_text(report: DistinguishReport) -> str:
    lines = []
    nonsingleton = [c for c in report.classes if len(c) > 1]
    if report.fully_distinguished:
        lines.append("fully distinguished: every knot is in its own class")
    else:
        lines.append(
            f"{len(report.classes)} classes, "
            f"{len(nonsingleton)} with more than one knot"
        )
    for c in report.classes:
        if len(c) > 1:
            shared = report.vectors[c[0]].key()
            lines.append("  { " + ", ".join(c) + " }  shared vector: " + ", ".join(shared))
    for name in report.incomplete:
        lines.append(f"  {name}: incomplete (budget hole); grouped with nothing")
    return "\n".join(lines) + "\n"


def render_mirror_tsv(battery: Battery, verdicts: Sequence[MirrorVerdict]) -> str:
    lines = battery_header(battery)
    lines.append("knot\tK\tmirror(K)\tverdict")
    for v in verdicts:
        verdict = (
            "distinguished"
            if v.distinguished
            else ("not distinguished" if v.decided else "undecided (hole)")
        )
        lines.append(
            v.knot
            + "\t"
            + ", ".join(v.vector.key())
            + "\t"
            + ", ".join(v.mirror_vector.key())
            + "\t"
            + verdict
        )
    return "\n".join(lines) + "\n"


def render_similarity_text(classes: Sequence[SimilarityClass]) -> str:
    lines = []
    for c in classes:
        if len(c.labels) > 1:
            lines.append("similar: " + " ~ ".join(c.labels))
        else:
            lines.append("singleton: " + c.labels[0])
    return "\n".join(lines) + "\n"
