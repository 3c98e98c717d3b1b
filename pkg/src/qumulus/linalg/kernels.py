"""Permanent, hafnian and torontonian with input validation and batching.

The heavy loops live in a compiled extension (``qumulus.linalg._kernels``).
When that module cannot be imported -- or the environment variable
``QUMULUS_PURE_PYTHON`` is set to a truthy value -- the numpy implementations
in :mod:`qumulus.linalg._fallback` are used instead.  The active choice is
reported by :data:`BACKEND`.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

from . import _fallback

try:
    if os.environ.get("QUMULUS_PURE_PYTHON", "").lower() in ("1", "true", "yes"):
        raise ImportError("compiled kernels disabled by QUMULUS_PURE_PYTHON")
    from . import _kernels as _compiled  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - exercised when the extension is absent
    _compiled = None

BACKEND: str = "compiled" if _compiled is not None else "python"

#: Largest dimension accepted by :func:`permanent`.
MAX_PERMANENT_DIM = 30
#: Symmetry tolerance for :func:`hafnian` inputs.
SYMMETRY_TOL = 1e-10

_IMPLS = {
    "python": _fallback,
}
if _compiled is not None:
    _IMPLS["compiled"] = _compiled


def implementations() -> tuple[str, ...]:
    """Names of the kernel implementations available in this process."""
    return tuple(_IMPLS)


def _impl(name: str | None):
    key = BACKEND if name is None else name
    if key not in _IMPLS:
        raise ValueError(f"kernel implementation {key!r} is not available; have {implementations()}")
    return _IMPLS[key]


def _as_square(m, what: str) -> np.ndarray:
    arr = np.asarray(m)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{what} requires a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} input contains non-finite entries")
    return np.ascontiguousarray(arr, dtype=np.complex128)


def permanent(m, *, impl: str | None = None) -> complex:
    """Permanent of a square matrix.

    Uses Ryser's formula with Gray-code ordering of the column subsets, which
    costs ``O(2^n n)``.

    Parameters
    ----------
    m : array_like, shape (n, n)
        Real or complex matrix, ``n <= 30``.  ``n = 0`` returns 1.
    impl : {"compiled", "python"}, optional
        Force a particular implementation.  Defaults to :data:`BACKEND`.

    Returns
    -------
    complex
    """
    a = _as_square(m, "permanent")
    if a.shape[0] > MAX_PERMANENT_DIM:
        raise ValueError(f"permanent supports n <= {MAX_PERMANENT_DIM}, got n={a.shape[0]}")
    return _impl(impl).permanent(a)


def hafnian(m, *, impl: str | None = None) -> complex:
    """Hafnian of a symmetric matrix of even dimension.

    Evaluated with the power-trace formula: a signed sum over subsets of index
    pairs of the ``eta^(n/2)`` coefficient of ``exp(sum_k tr(C^k) eta^k / 2k)``.
    Odd dimension gives 0 and the empty matrix gives 1.

    Parameters
    ----------
    m : array_like, shape (n, n)
        Symmetric to within ``1e-10`` (relative to the largest entry); the
        input is symmetrised before evaluation.
    impl : {"compiled", "python"}, optional

    Returns
    -------
    complex
    """
    a = _as_square(m, "hafnian")
    n = a.shape[0]
    scale = max(1.0, float(np.max(np.abs(a)))) if n else 1.0
    if n and np.max(np.abs(a - a.T)) > SYMMETRY_TOL * scale:
        raise ValueError("hafnian requires a symmetric matrix")
    if n % 2:
        return 0j
    a = np.ascontiguousarray(0.5 * (a + a.T))
    return _impl(impl).hafnian(a)


def torontonian(m, *, impl: str | None = None) -> complex:
    """Torontonian of a ``2m x 2m`` matrix.

    ``Tor(O) = sum_S (-1)^(m-|S|) / sqrt(det(I - O_S))`` where ``O_S`` keeps
    rows and columns ``i`` and ``i + m`` for every mode ``i`` in ``S``.

    Parameters
    ----------
    m : array_like, shape (2m, 2m)
    impl : {"compiled", "python"}, optional

    Returns
    -------
    complex
    """
    o = _as_square(m, "torontonian")
    if o.shape[0] % 2:
        raise ValueError("torontonian requires an even-dimensional matrix")
    return _impl(impl).torontonian(o)


def batched(
    kernel: Callable[[np.ndarray], complex] | str,
    matrices: Sequence,
    *,
    workers: int = 1,
) -> list[complex]:
    """Evaluate a kernel on many matrices.

    Every input is validated before any evaluation starts, so a failure names
    the offending index and no partial work is returned.

    Parameters
    ----------
    kernel : callable or {"permanent", "hafnian", "torontonian"}
    matrices : sequence of array_like
    workers : int, optional
        Thread-pool size.  The compiled kernels release the GIL.

    Returns
    -------
    list of complex
    """
    if isinstance(kernel, str):
        kernel = {"permanent": permanent, "hafnian": hafnian, "torontonian": torontonian}[kernel]
    checked = []
    for i, mat in enumerate(matrices):
        arr = np.asarray(mat)
        try:
            _as_square(arr, getattr(kernel, "__name__", "kernel"))
        except ValueError as exc:
            raise ValueError(f"batched input {i}: {exc}") from None
        checked.append(arr)
    if workers <= 1:
        out = []
        for i, arr in enumerate(checked):
            try:
                out.append(kernel(arr))
            except ValueError as exc:
                raise ValueError(f"batched input {i}: {exc}") from None
        return out
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(kernel, arr) for arr in checked]
        out = []
        for i, fut in enumerate(futures):
            try:
                out.append(fut.result())
            except ValueError as exc:
                raise ValueError(f"batched input {i}: {exc}") from None
        return out
