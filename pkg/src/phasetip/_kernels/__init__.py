"""Integrator kernel backends.

Two interchangeable implementations of the model-specific stepping
API exist: ``_fast`` (Cython) and ``_slow`` (pure Python).  The fast
one is preferred when importable; ``PHASETIP_BACKEND=python|fast``
overrides the choice, and :func:`set_default` switches it at runtime
(used by the benchmark and the equivalence tests).
"""

from __future__ import annotations

import os

from . import _slow

try:
    from . import _fast
except ImportError:  # extension not built
    _fast = None

_BACKENDS = {"python": _slow}
if _fast is not None:
    _BACKENDS["fast"] = _fast

_default = os.environ.get("PHASETIP_BACKEND", "")
if _default not in _BACKENDS:
    _default = "fast" if _fast is not None else "python"


def available() -> tuple[str, ...]:
    """Names of the importable backends."""
    return tuple(sorted(_BACKENDS))


def get(name: str | None = None):
    """Return a backend module by name (default backend when None)."""
    if name is None:
        return _BACKENDS[_default]
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"unknown backend {name!r}; available: {available()}"
        ) from None


def set_default(name: str) -> None:
    global _default
    if name not in _BACKENDS:
        raise ValueError(
            f"unknown backend {name!r}; available: {available()}"
        )
    _default = name


def default_name() -> str:
    return _default
