"""Measurement-based quantum computing: patterns, transpilation, rewriting, execution."""

from .pattern import PLANES, Command, E, M, N, Pattern, X, Z, format_command, from_text
from .rewrite import original_outcomes, shift_signals, standardize
from .simulate import GraphStateResult, execute, measurement_basis
from .transpile import transpile, transpile_gates, zxz_angles, zyz_angles

__all__ = [
    "PLANES",
    "Command",
    "E",
    "GraphStateResult",
    "M",
    "N",
    "Pattern",
    "X",
    "Z",
    "execute",
    "format_command",
    "from_text",
    "measurement_basis",
    "original_outcomes",
    "shift_signals",
    "standardize",
    "transpile",
    "transpile_gates",
    "zxz_angles",
    "zyz_angles",
]
