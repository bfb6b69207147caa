"""Backend selection for the hot kernels.

The environment variable HDCLT_NUMBA controls which implementation of the
kernels in ``hdclt._kernels`` is active:

* unset, "1", "on", ... : numba-jitted kernels when numba imports cleanly
* "0", "false", "off", "no": pure numpy fallbacks

Selection happens once at import time. ``USING_NUMBA`` reports the outcome.
"""

from __future__ import annotations

import os

__all__ = ["HAVE_NUMBA", "USING_NUMBA", "maybe_jit"]

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba present in the supported envs
    HAVE_NUMBA = False


def _env_wants_numba() -> bool:
    value = os.environ.get("HDCLT_NUMBA", "1").strip().lower()
    return value not in ("0", "false", "off", "no")


USING_NUMBA = HAVE_NUMBA and _env_wants_numba()


def maybe_jit(**options):
    """@njit under the numba backend, identity decorator otherwise."""
    if USING_NUMBA:
        from numba import njit

        return njit(**options)

    def decorate(fn):
        return fn

    return decorate
