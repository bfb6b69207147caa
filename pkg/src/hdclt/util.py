"""Shared helpers: log convention, deterministic seeding, atomic file writes."""

from __future__ import annotations

import hashlib
import json
import math
import os
from typing import Iterable

import numpy as np

__all__ = [
    "ValidationError",
    "NumericalError",
    "clipped_log",
    "derive_seed_sequence",
    "derive_rng",
    "child_seed",
    "canonical_json",
    "sha256_hex",
    "atomic_write_text",
    "fsum",
]


class ValidationError(ValueError):
    """Bad inputs or configuration (CLI exit code 2)."""


class NumericalError(RuntimeError):
    """Numerical failure such as an indefinite matrix (CLI exit code 3)."""


def clipped_log(x: float) -> float:
    """log clipped below at 1: max(ln x, 1).

    Keeps logarithmic factors bounded away from zero so expressions like
    sqrt(log p) stay meaningful down to p = 1.
    """
    if x <= 0.0:
        raise ValidationError("clipped_log requires x > 0, got %r" % (x,))
    return max(math.log(x), 1.0)


def _key_to_int(key) -> int:
    if isinstance(key, (int, np.integer)):
        return int(key) & 0xFFFFFFFFFFFFFFFF
    if isinstance(key, str):
        digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "little")
    raise ValidationError("seed path entries must be int or str, got %r" % (key,))


def derive_seed_sequence(master_seed: int, *path) -> np.random.SeedSequence:
    """Deterministic child seed for a labeled stream.

    Replicate r of a run with master seed m always sees the same stream no
    matter how work is scheduled, which is what makes threaded runs
    bit-reproducible.
    """
    entropy = [_key_to_int(master_seed)] + [_key_to_int(k) for k in path]
    return np.random.SeedSequence(entropy)


def derive_rng(master_seed: int, *path) -> np.random.Generator:
    return np.random.default_rng(derive_seed_sequence(master_seed, *path))


def child_seed(master_seed: int, *path) -> int:
    """Deterministic integer seed for handing to APIs that take a plain seed."""
    return int(derive_seed_sequence(master_seed, *path).generate_state(1, np.uint64)[0])


def canonical_json(obj) -> str:
    """Stable JSON encoding: sorted keys, no whitespace."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def sha256_hex(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def atomic_write_text(path: str, text: str) -> None:
    """Write via a temp file and rename so readers never see partial output."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    tmp = os.path.join(directory, ".%s.tmp-%d" % (os.path.basename(path), os.getpid()))
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def fsum(values: Iterable[float]) -> float:
    """Exactly rounded sum; aggregation stays order-independent."""
    return math.fsum(values)
