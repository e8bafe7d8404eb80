"""Hot numeric kernels with a compiled core and a pure-Python fallback.

The compiled extension (``_speedups``, built from Cython) is preferred
when importable; otherwise the NumPy/SciPy fallback is used. Set the
environment variable ``GEOKATZ_BACKEND`` to ``python`` or ``cython`` to
force one explicitly (forcing ``cython`` raises if the extension is not
built). ``BACKEND`` names the backend in use.
"""

import os

from . import _pybackend

_requested = os.environ.get("GEOKATZ_BACKEND", "").strip().lower()
if _requested not in ("", "cython", "python"):
    raise ImportError(
        f"GEOKATZ_BACKEND={_requested!r} not recognized; "
        "use 'cython' or 'python'")

if _requested == "python":
    _impl = _pybackend
    BACKEND = "python"
else:
    try:
        from . import _speedups as _impl
        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise
        _impl = _pybackend
        BACKEND = "python"

EARTH_RADIUS_KM = _pybackend.EARTH_RADIUS_KM

katz_series_rows = _impl.katz_series_rows
haversine_pairs = _impl.haversine_pairs


def get_backend(name=None):
    """Return (katz_series_rows, haversine_pairs) for a named backend.

    ``None`` returns the active default pair. Used by the benchmark and
    the backend-equivalence tests.
    """
    if name is None:
        return katz_series_rows, haversine_pairs
    if name == "python":
        return _pybackend.katz_series_rows, _pybackend.haversine_pairs
    if name == "cython":
        from . import _speedups
        return _speedups.katz_series_rows, _speedups.haversine_pairs
    raise ValueError(f"unknown backend {name!r}")
