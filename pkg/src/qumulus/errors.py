"""Exception hierarchy shared by every backend.

The CLI maps these onto process exit codes, so each class carries the code it
should produce.
"""

from __future__ import annotations


class QumulusError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class SchemaError(QumulusError, ValueError):
    """An input document or argument violates its declared schema."""

    exit_code = 2


class NumericalGuardError(QumulusError, ArithmeticError):
    """A numerical guard tripped (non-unitary input, overflow, infeasible parameters...)."""

    exit_code = 3


class TransportError(QumulusError, RuntimeError):
    """A distributed transport failed to deliver or receive a message."""

    exit_code = 4


class PatternError(QumulusError, ValueError):
    """A measurement pattern is malformed (reused node, missing dependency...)."""

    exit_code = 2


class UnsupportedGateError(QumulusError, NotImplementedError):
    """No decomposition is registered for the requested gate."""

    exit_code = 2
