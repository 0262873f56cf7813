"""Batch kernels for the per-sample hot loops.

Two interchangeable backends: a Cython extension (built at install
time) and a pure-Python fallback. The compiled core is preferred;
set ANIMO_PURE_PYTHON=1 to force the fallback. Both produce
bit-identical output — tests assert exact equality between them.
"""

from __future__ import annotations

import os

from . import _pure

if os.environ.get("ANIMO_PURE_PYTHON") == "1":
    _impl = _pure
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pure

BACKEND: str = _impl.BACKEND
ema_filter = _impl.ema_filter
arousal_values = _impl.arousal_values
band_codes = _impl.band_codes
notify_points = _impl.notify_points


def available_backends() -> dict[str, object]:
    """Name -> module for every importable backend (for tests/benchmarks)."""
    backends: dict[str, object] = {"python": _pure}
    try:
        from . import _core

        backends["c"] = _core
    except ImportError:
        pass
    return backends
