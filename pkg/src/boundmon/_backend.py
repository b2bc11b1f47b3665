"""Kernel backend selection: compiled extension when available, numpy otherwise.

The environment variable ``BOUNDMON_BACKEND`` forces a choice:

* ``compiled`` / ``c`` — require the compiled extension (ImportError if absent)
* ``python`` / ``py``  — force the numpy reference kernels
* unset / ``auto``     — compiled if importable, else numpy

``use()`` swaps the active backend at runtime, which the test suite uses to
exercise both implementations through the same call sites.
"""

from __future__ import annotations

import os
from contextlib import contextmanager

from . import _kernels_py

_FORCE_ENV_VAR = "BOUNDMON_BACKEND"


def _load_compiled():
    from . import _kernels  # noqa: PLC0415 - deliberate lazy import

    return _kernels


def _select_initial():
    requested = os.environ.get(_FORCE_ENV_VAR, "auto").strip().lower() or "auto"
    if requested in ("python", "py"):
        return _kernels_py
    if requested in ("compiled", "c"):
        return _load_compiled()
    if requested != "auto":
        raise ValueError(
            f"{_FORCE_ENV_VAR} must be 'auto', 'compiled', or 'python', got {requested!r}"
        )
    try:
        return _load_compiled()
    except ImportError:
        return _kernels_py


_active = _select_initial()


def active():
    """The currently selected kernel module."""
    return _active


def active_name() -> str:
    return _active.BACKEND_NAME


def available_names() -> list[str]:
    names = ["python"]
    try:
        _load_compiled()
    except ImportError:
        pass
    else:
        names.insert(0, "compiled")
    return names


def get(name: str):
    """Fetch a backend module by name ('compiled' or 'python')."""
    if name == "python":
        return _kernels_py
    if name == "compiled":
        return _load_compiled()
    raise ValueError(f"unknown backend {name!r}")


@contextmanager
def use(name: str):
    """Temporarily switch the active backend (used by tests and benchmarks)."""
    global _active
    previous = _active
    _active = get(name)
    try:
        yield _active
    finally:
        _active = previous
