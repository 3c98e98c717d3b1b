"""Circuit-file parsing and result-file serialisation.

Circuit files are JSON documents validated against ``circuit.schema.json``
(unknown fields are rejected).  Result files are written with sorted keys and
``repr``-exact floats so that identical inputs give byte-identical output.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from ..errors import SchemaError

RESULT_VERSION = 1


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    """One of the bundled schemas: ``"circuit"`` or ``"result"``."""
    text = resources.files("qumulus.cli").joinpath(f"{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def _validate(doc: Any, name: str) -> None:
    validator = jsonschema.Draft7Validator(load_schema(name))
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise SchemaError(f"{name} file invalid at {where}: {e.message}")


def validate_circuit(doc: Any) -> dict:
    _validate(doc, "circuit")
    return doc


def validate_result(doc: Any) -> dict:
    _validate(doc, "result")
    return doc


def read_circuit(path) -> dict:
    """Parse and validate a circuit file.

    Raises
    ------
    SchemaError
        On unreadable JSON or a schema violation.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from None
    return validate_circuit(doc)


# ------------------------------------------------------------ conversions
def complex_matrix(spec) -> np.ndarray:
    """Matrix from a plain nested list or ``{"re": ..., "im": ...}``."""
    if isinstance(spec, dict):
        re = np.asarray(spec["re"], dtype=float)
        im = np.asarray(spec.get("im", np.zeros_like(re)), dtype=float)
        if re.shape != im.shape:
            raise SchemaError("real and imaginary parts have different shapes")
        m = re + 1j * im
    else:
        m = np.asarray(spec, dtype=complex)
    if m.ndim != 2:
        raise SchemaError("expected a 2-D matrix")
    return m


def complex_vector(spec) -> np.ndarray:
    re = np.asarray(spec["re"], dtype=float)
    im = np.asarray(spec.get("im", np.zeros_like(re)), dtype=float)
    if re.shape != im.shape:
        raise SchemaError("real and imaginary parts have different shapes")
    return re + 1j * im


def encode_complex(arr) -> dict:
    """``{"re", "im", "shape"}`` with flat lists of Python floats."""
    a = np.asarray(arr, dtype=complex)
    return {
        "re": [float(x) for x in a.real.reshape(-1)],
        "im": [float(x) for x in a.imag.reshape(-1)],
        "shape": list(a.shape),
    }


def plain(obj):
    """Recursively convert numpy scalars and arrays to JSON-native values."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def dumps_result(doc: dict) -> str:
    """Canonical JSON text of a result document (validated first)."""
    doc = plain(doc)
    validate_result(doc)
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_result(doc: dict, path=None) -> str:
    """Serialise ``doc``; write it to ``path`` if given, and return the text."""
    text = dumps_result(doc)
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
