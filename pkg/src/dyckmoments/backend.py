"""Kernel backend selection: compiled extension if built, numpy otherwise.

Set DYCKMOMENTS_BACKEND=compiled|fallback to force one (raises if the
compiled core was requested but is not available).
"""

from __future__ import annotations

import os

from ._kernels import fallback as _fallback

try:
    from ._kernels import _core as _compiled
except ImportError:
    _compiled = None

_FORCED = os.environ.get("DYCKMOMENTS_BACKEND")
if _FORCED == "compiled":
    if _compiled is None:
        raise ImportError("DYCKMOMENTS_BACKEND=compiled but the extension is not built")
    _active = _compiled
elif _FORCED == "fallback":
    _active = _fallback
else:
    _active = _compiled if _compiled is not None else _fallback


def backend_name() -> str:
    return _active.NAME


def available_backends() -> list[str]:
    return ["compiled", "fallback"] if _compiled is not None else ["fallback"]


def get_backend(name: str | None = None):
    """The active kernel module, or a specific one by name."""
    if name is None:
        return _active
    if name == "fallback":
        return _fallback
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def dp_moments(w, n_max, s_max, bridge=False, e_base=None):
    return _active.dp_moments(w, n_max, s_max, bridge, e_base)


def sample_paths(ensemble, size, count, seed):
    return _active.sample_paths(ensemble, size, count, seed)


def batch_statistic(steps, w):
    return _active.batch_statistic(steps, w)
