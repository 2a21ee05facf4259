"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy fallback.
Set ``COVERTIME_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _fallback

BACKEND = "python"
_impl = _fallback

if os.environ.get("COVERTIME_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        _impl = _fallback


def backend(name=None):
    """Kernel module by name (``"cython"`` or ``"python"``); default is the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _fallback
    if name == "cython":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")


def stream_keys(seed, reps):
    return _impl.stream_keys(seed, reps)


def uniforms(keys, step):
    return _impl.uniforms(keys, step)


def simulate_paths(*args):
    return _impl.simulate_paths(*args)


def cover_flags(*args):
    return _impl.cover_flags(*args)


def distinct_counts(*args):
    return _impl.distinct_counts(*args)


def cover_dp(*args):
    return _impl.cover_dp(*args)
