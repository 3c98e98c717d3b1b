"""Seeded, splittable random streams.

Every subsystem draws from its own counter-based (Philox) generator whose key
is derived from the global seed and a stable hash of the subsystem name, so
adding draws in one subsystem never perturbs another.
"""

from __future__ import annotations

import hashlib
import os

import numpy as np

#: Environment variable consulted for the default seed.
SEED_ENV = "QUMULUS_SEED"
DEFAULT_SEED = 0


def default_seed() -> int:
    """The seed from ``$QUMULUS_SEED`` if set, else ``0``."""
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _name_key(name: str) -> int:
    return int.from_bytes(hashlib.sha256(name.encode("utf-8")).digest()[:8], "little")


def stream(name: str, seed: int | None = None) -> np.random.Generator:
    """Independent generator for subsystem ``name``.

    Parameters
    ----------
    name : str
        Subsystem label, e.g. ``"qubit.measure"``.
    seed : int, optional
        Global seed; defaults to :func:`default_seed`.
    """
    if seed is None:
        seed = default_seed()
    ss = np.random.SeedSequence([int(seed) & (2**63 - 1), _name_key(name)])
    return np.random.Generator(np.random.Philox(ss))


def as_generator(rng, name: str) -> np.random.Generator:
    """Accept ``None``, an ``int`` seed or a ``Generator`` and return a generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    return stream(name, rng)
