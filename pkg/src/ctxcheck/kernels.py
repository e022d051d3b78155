"""Kernel selection: compiled extension when available, pure Python otherwise."""

from __future__ import annotations

try:
    from ctxcheck import _kernels_c as _impl

    BACKEND = "compiled"
except ImportError:  # pragma: no cover - depends on build environment
    from ctxcheck import _kernels_py as _impl

    BACKEND = "python"

pivot = _impl.pivot
