"""Kernel backend selection: compiled extension when available, else Python.

Set GSQG_PURE_PYTHON=1 to force the fallback (useful for benchmarking and for
cross-checking the two implementations).
"""

import os

from . import _core_py

if os.environ.get("GSQG_PURE_PYTHON") == "1":
    _impl = _core_py
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _core_py

BACKEND = "compiled" if _impl is not _core_py else "python"

omega = _impl.omega
omega_dxi = _impl.omega_dxi
omega_dxixi = _impl.omega_dxixi
gamma_integral = _impl.gamma_integral
m_eval = _impl.m_eval
breakpoints = _impl.breakpoints
dissipation_parts = _impl.dissipation_parts
drift_tail = _impl.drift_tail
drift_local = _impl.drift_local
quadrature = _core_py.quadrature

PYTHON_IMPL = _core_py


def get_impl(name: str):
    """Return a named backend module ('compiled' or 'python')."""
    if name == "python":
        return _core_py
    if name == "compiled":
        from . import _core  # raises ImportError when the extension is absent

        return _core
    raise ValueError(f"unknown backend {name!r}")
