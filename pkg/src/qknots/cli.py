"""Command-line interface.

Exit codes: 0 success, 1 data error, 2 budget exceeded, 3 axiom or
verification failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .algebra import ModulusError
from .cohomology import (
    CocycleError,
    cochain_spaces,
    is_coboundary,
    load_cocycle,
    render_cocycle_text,
    verify_cocycle,
    Cocycle,
)
from .knot import (
    BudgetExceededError,
    CatalogError,
    count_colorings,
    enumerate_colorings,
    load_catalog,
    state_sum,
)
from .pipeline import (
    BatteryError,
    ResultsStore,
    distinguish_report,
    invariant_matrix,
    load_battery,
    mirror_report,
    render_distinguish_text,
    render_matrix_tsv,
    render_mirror_tsv,
    render_similarity_text,
    similarity_classes,
)
from .quandle import (
    AxiomFailure,
    QuandleError,
    is_connected,
    load_quandle,
    parse_cycles,
    render_quandle_text,
    save_quandle,
)
from .ring import (
    CapacityError,
    IdempotentQuandleFailure,
    enumerate_idempotents,
    idempotent_quandle,
    iterate_idempotent_quandle,
)

EXIT_OK = 0
EXIT_DATA = 1
EXIT_BUDGET = 2
EXIT_VERIFY = 3


def _load_quandle_arg(args):
    path = Path(args.quandle)
    text = path.read_text()
    if args.cycles or path.suffix in (".cycles", ".sk"):
        return parse_cycles(text, name=path.stem)
    from .quandle import parse_quandle_text

    return parse_quandle_text(text, name=path.stem)


def cmd_check_quandle(args) -> int:
    q = _load_quandle_arg(args)
    conn = is_connected(q)
    print(f"ok: quandle of order {q.n}, connected={str(conn).lower()}")
    return EXIT_OK


def cmd_idempotents(args) -> int:
    q = _load_quandle_arg(args)
    idem = enumerate_idempotents(q, args.p, workers=args.threads)
    for e in idem.elements:
        print(" ".join(str(x) for x in e.support))
    print(f"# {len(idem)} idempotents over GF({args.p})", file=sys.stderr)
    return EXIT_OK


def cmd_idem_quandle(args) -> int:
    q = _load_quandle_arg(args)
    result = iterate_idempotent_quandle(q, args.depth, workers=args.threads)
    text = render_quandle_text(
        result, comment=f"I(Z2[.])^{args.depth} of {Path(args.quandle).name}"
    )
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        target = out / f"{Path(args.quandle).stem}_idem{args.depth}.quandle"
        target.write_text(text)
        print(f"wrote {target}")
    else:
        print(text, end="")
    return EXIT_OK


def cmd_cocycles(args) -> int:
    q = _load_quandle_arg(args)
    space = cochain_spaces(q, args.p)
    print(
        f"dim Z^2 = {space.dim_z2}, dim B^2 = {space.dim_b2}, "
        f"dim H^2 = {space.dim_h2} over GF({args.p})"
    )
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for i, phi in enumerate(space.z2_cocycles()):
            target = out / f"{Path(args.quandle).stem}_z2_{i}.cocycle"
            target.write_text(render_cocycle_text(phi))
        print(f"wrote {space.dim_z2} basis cocycles to {out}")
    return EXIT_OK


def cmd_verify_cocycle(args) -> int:
    q = _load_quandle_arg(args)
    phi = load_cocycle(args.cocycle, q)
    witness = verify_cocycle(q, phi)
    if witness is not None:
        print(f"FAIL: {witness}")
        return EXIT_VERIFY
    cob = is_coboundary(q, phi)
    print(f"ok: 2-cocycle over GF({phi.p}); coboundary={str(cob).lower()}")
    return EXIT_OK


def _knot_braid(args):
    catalog = load_catalog(args.catalog)
    if args.knot not in catalog:
        raise CatalogError(f"knot {args.knot} not in catalog {args.catalog}")
    return catalog[args.knot].braid


def cmd_colorings(args) -> int:
    q = _load_quandle_arg(args)
    braid = _knot_braid(args)
    if args.list:
        count = 0
        for col in enumerate_colorings(q, braid, budget=args.budget):
            print(" ".join(str(c) for c in col.labels()))
            count += 1
    else:
        count = count_colorings(q, braid, budget=args.budget)
    print(f"{count} colorings")
    return EXIT_OK


def cmd_statesum(args) -> int:
    q = _load_quandle_arg(args)
    phi = load_cocycle(args.cocycle, q)
    witness = verify_cocycle(q, phi)
    if witness is not None:
        print(f"FAIL: {witness}")
        return EXIT_VERIFY
    braid = _knot_braid(args)
    value = state_sum(q, phi, braid, budget=args.budget, workers=args.threads)
    print(value.render())
    return EXIT_OK


def _matrix_common(args):
    battery = load_battery(args.battery)
    catalog = load_catalog(args.catalog)
    store = None
    out = None
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        store = ResultsStore(out / "results.store")
    names = args.knots if args.knots else None
    return battery, catalog, store, out, names


def cmd_invariant_matrix(args) -> int:
    battery, catalog, store, out, names = _matrix_common(args)
    rows = invariant_matrix(
        battery, catalog, names, store=store, budget=args.budget, workers=args.threads
    )
    text = render_matrix_tsv(battery, rows)
    if out:
        (out / "invariant_matrix.tsv").write_text(text)
        print(f"wrote {out / 'invariant_matrix.tsv'}")
    else:
        print(text, end="")
    holes = [r.knot for r in rows if not r.complete()]
    if holes:
        print(f"budget holes: {', '.join(holes)}", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_OK


def cmd_distinguish(args) -> int:
    battery, catalog, store, out, names = _matrix_common(args)
    rows = invariant_matrix(
        battery, catalog, names, store=store, budget=args.budget, workers=args.threads
    )
    report = distinguish_report(rows)
    text = render_distinguish_text(report)
    if out:
        (out / "distinguish.txt").write_text(text)
        (out / "invariant_matrix.tsv").write_text(render_matrix_tsv(battery, rows))
    print(text, end="")
    return EXIT_OK


def cmd_mirror_report(args) -> int:
    battery, catalog, store, out, names = _matrix_common(args)
    verdicts = mirror_report(
        battery, catalog, names, store=store, budget=args.budget, workers=args.threads
    )
    text = render_mirror_tsv(battery, verdicts)
    if out:
        (out / "mirror.tsv").write_text(text)
    print(text, end="")
    return EXIT_OK


def cmd_similarity(args) -> int:
    battery, catalog, store, out, names = _matrix_common(args)
    rows = invariant_matrix(
        battery, catalog, names, store=store, budget=args.budget, workers=args.threads
    )
    classes = similarity_classes(battery, rows)
    text = render_similarity_text(classes)
    if out:
        (out / "similarity.txt").write_text(text)
    print(text, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qknots",
        description="Quandle cocycle state-sum invariants of braid closures "
        "and idempotent quandles of quandle rings over GF(2).",
    )
    parser.add_argument("--version", action="version", version=f"qknots {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(fn=fn)
        return p

    def quandle_opt(p):
        p.add_argument("--quandle", required=True, help="quandle file")
        p.add_argument(
            "--cycles", action="store_true",
            help="parse the quandle file as S_k cycle notation",
        )

    def common_opts(p):
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--budget", type=int, default=None, help="solver node budget")

    p = add("check-quandle", cmd_check_quandle, help="verify quandle axioms")
    quandle_opt(p)

    p = add("idempotents", cmd_idempotents, help="enumerate ring idempotents")
    quandle_opt(p)
    p.add_argument("-p", type=int, default=2, help="coefficient modulus")
    p.add_argument("--threads", type=int, default=1)

    p = add("idem-quandle", cmd_idem_quandle, help="construct I(Z2[X]) as a quandle")
    quandle_opt(p)
    p.add_argument("--depth", type=int, default=1)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", help="output directory")

    p = add("cocycles", cmd_cocycles, help="compute 2-cocycle/coboundary spaces")
    quandle_opt(p)
    p.add_argument("-p", type=int, default=2)
    p.add_argument("--out", help="directory for basis cocycle files")

    p = add("verify-cocycle", cmd_verify_cocycle, help="check the 2-cocycle conditions")
    quandle_opt(p)
    p.add_argument("--cocycle", required=True)

    p = add("colorings", cmd_colorings, help="enumerate quandle colorings of a knot")
    quandle_opt(p)
    p.add_argument("--catalog", required=True)
    p.add_argument("--knot", required=True)
    p.add_argument("--list", action="store_true", help="print each coloring")
    common_opts(p)

    p = add("statesum", cmd_statesum, help="compute the cocycle state-sum invariant")
    quandle_opt(p)
    p.add_argument("--cocycle", required=True)
    p.add_argument("--catalog", required=True)
    p.add_argument("--knot", required=True)
    common_opts(p)

    for name, fn, help_text in (
        ("invariant-matrix", cmd_invariant_matrix, "compute the knot x battery matrix"),
        ("distinguish", cmd_distinguish, "partition knots by invariant vectors"),
        ("mirror-report", cmd_mirror_report, "compare each knot with its mirror"),
        ("similarity", cmd_similarity, "partition battery entries by equal columns"),
    ):
        p = add(name, fn, help=help_text)
        p.add_argument("--battery", required=True)
        p.add_argument("--catalog", required=True)
        p.add_argument("--knots", nargs="*", help="restrict to these knots")
        p.add_argument("--out", help="output directory (enables the results store)")
        common_opts(p)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (AxiomFailure, IdempotentQuandleFailure, CocycleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (
        QuandleError,
        CatalogError,
        BatteryError,
        CapacityError,
        ModulusError,
        FileNotFoundError,
        KeyError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
