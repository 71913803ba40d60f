from .audit import audit_trace
from .history import (
    HistoryRecorder,
    build_operations,
    dump_history_lines,
    parse_history_lines,
    read_history,
    write_history,
)
from .linearizability import check_linearizable, check_sequential

__all__ = [
    "audit_trace",
    "HistoryRecorder",
    "build_operations",
    "dump_history_lines",
    "parse_history_lines",
    "read_history",
    "write_history",
    "check_linearizable",
    "check_sequential",
]
