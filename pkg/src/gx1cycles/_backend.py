"""Backend selection: compiled kernel when available, pure Python otherwise.

The compiled kernel covers values up to ~2^126; anything beyond that (or
a mapping whose parameters are too large for it) transparently falls back
to the pure walkers, so results never depend on which backend ran.

Set GX1_BACKEND=pure or GX1_BACKEND=compiled to force a choice globally.
"""

from __future__ import annotations

import os

from . import _pykernel

try:
    from . import _kernel
except ImportError:  # extension not built
    _kernel = None

ENTERED = _pykernel.ENTERED
NEW_CYCLE = _pykernel.NEW_CYCLE
STEP_CUTOFF = _pykernel.STEP_CUTOFF
MAG_CUTOFF = _pykernel.MAG_CUTOFF
OVERFLOW = _pykernel.OVERFLOW

_KERNEL_MAX_STEPS = 1 << 59


def default_backend() -> str:
    env = os.environ.get("GX1_BACKEND")
    if env in ("pure", "compiled"):
        return env
    return "compiled" if _kernel is not None else "pure"


def available_backends() -> tuple[str, ...]:
    return ("compiled", "pure") if _kernel is not None else ("pure",)


class Engine:
    """Per-mapping walk executor with automatic overflow fallback."""

    def __init__(self, mapping, backend: str | None = None):
        name = backend or default_backend()
        if name not in ("pure", "compiled"):
            raise ValueError(f"unknown backend {name!r}")
        if name == "compiled" and _kernel is None:
            raise ValueError("compiled backend requested but the extension is not built")
        self.mapping = mapping
        self._pure_map = _pykernel.prepare(mapping.d, mapping.branches)
        self._kmap = None
        if name == "compiled":
            try:
                self._kmap = _kernel.prepare(mapping.d, mapping.branches)
            except ValueError:
                self._kmap = None  # parameters outside the native range
        self.backend_name = "compiled" if self._kmap is not None else "pure"

    def member_table(self, items):
        items = list(items)
        ktable = _kernel.MemberTable(items) if self._kmap is not None else None
        return (ktable, _pykernel.MemberTable(items))

    def walk_brent(self, start, max_steps, max_magnitude, tables):
        ktable, ptable = tables
        if self._kmap is not None and max_steps < _KERNEL_MAX_STEPS:
            res = _kernel.walk_brent(self._kmap, start, max_steps, max_magnitude, ktable)
            if res[0] != OVERFLOW:
                return res
        return _pykernel.walk_brent(self._pure_map, start, max_steps, max_magnitude, ptable)

    def walk_tally(self, start, max_steps, max_magnitude, tables):
        ktable, ptable = tables
        if self._kmap is not None and max_steps < _KERNEL_MAX_STEPS:
            res = _kernel.walk_tally(self._kmap, start, max_steps, max_magnitude, ktable)
            if res[0] != OVERFLOW:
                return res
        return _pykernel.walk_tally(self._pure_map, start, max_steps, max_magnitude, ptable)
