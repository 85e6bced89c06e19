"""Executable synthetic topology over represented spaces."""

from .fuel import FuelExhausted, FuelMeter, TraceLog
from .names import (
    HALT,
    REJECT,
    DialogMachine,
    DialogRun,
    Name,
    RunStatus,
    Word,
    apply_machine,
    cantor_pair,
    cantor_unpair,
    nd_advice_run,
    pair_names,
    run_dialog,
    unpair_names,
)
from .truth import (
    LimBool,
    MindchangeTable,
    NablaValue,
    Process,
    SierpValue,
    nabla_and,
    nabla_decode,
    nabla_encode,
    nabla_not,
    nabla_or,
    parse_table,
    serialize_table,
    sierp_and,
    sierp_or,
    sierp_to_nabla,
    table_and,
    table_not,
    table_or,
)

__version__ = "0.1.0"
