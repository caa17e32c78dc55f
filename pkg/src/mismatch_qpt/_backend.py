"""Backend selection for the table-evaluation kernels.

The compiled extension (mismatch_qpt._core, Cython) is used when it
imported cleanly; otherwise the numpy fallback takes over.  Set
MISMATCH_QPT_PURE_PYTHON=1 to force the fallback regardless.  Both
backends implement the same two functions with identical semantics; the
benchmark suite and the equivalence tests switch between them with use().
"""

from __future__ import annotations

import os
from contextlib import contextmanager

from . import _core_py

_IMPLS = {"python": _core_py}

if os.environ.get("MISMATCH_QPT_PURE_PYTHON", "") != "1":
    try:
        from . import _core  # type: ignore[attr-defined]

        _IMPLS["cython"] = _core
    except ImportError:
        pass

_active = "cython" if "cython" in _IMPLS else "python"


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_IMPLS))


def backend_name() -> str:
    return _active


def use(name: str) -> str:
    """Select a backend by name; returns the previously active one."""
    global _active
    if name not in _IMPLS:
        raise ValueError(f"unknown backend {name!r} (have {available_backends()})")
    previous = _active
    _active = name
    return previous


@contextmanager
def using(name: str):
    previous = use(name)
    try:
        yield
    finally:
        use(previous)


def eval_cells_real(diffs, tau, u1, u2, w, cell, ncells):
    return _IMPLS[_active].eval_cells_real(diffs, tau, u1, u2, w, cell, ncells)


def eval_cells_complex(diffs, tau, u1, u2, w_re, w_im, cell, ncells):
    return _IMPLS[_active].eval_cells_complex(
        diffs, tau, u1, u2, w_re, w_im, cell, ncells
    )
