"""Quandle cocycle state-sum invariants of knots given as braid closures,
and idempotent quandles of quandle rings over GF(2)."""

__version__ = "0.1.0"

from .algebra import FieldMatrix, FieldScalar, StateSumValue
from .cohomology import (
    CochainSpace,
    Cocycle,
    cochain_spaces,
    coboundary_of,
    is_coboundary,
    load_cocycle,
    save_cocycle,
    verify_cocycle,
)
from .knot import (
    BraidWord,
    BudgetExceededError,
    Coloring,
    KnotRecord,
    closure_components,
    colorings_brute,
    count_colorings,
    enumerate_colorings,
    load_catalog,
    mirror,
    propagate,
    state_sum,
)
from .pipeline import (
    Battery,
    ResultsStore,
    distinguish_report,
    invariant_matrix,
    load_battery,
    mirror_report,
    similarity_classes,
)
from .quandle import (
    AxiomFailure,
    Quandle,
    QuandleError,
    alexander_quandle,
    dihedral_quandle,
    is_connected,
    load_quandle,
    parse_cycles,
    quandle_check,
    quandles_isomorphic,
    render_cycles,
    save_quandle,
    trivial_quandle,
)
from .repair import repair_cycle_text
from .ring import (
    IdempotentQuandleFailure,
    IdempotentSet,
    RingElement,
    enumerate_idempotents,
    idempotent_quandle,
    iterate_idempotent_quandle,
    ring_multiply,
)
