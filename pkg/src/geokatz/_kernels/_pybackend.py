"""Pure NumPy/SciPy fallback implementations of the hot kernels.

Semantics mirror the compiled backend in ``_speedups.pyx`` exactly: the
same operations in the same order, so both backends agree to the last
ulp on the supported inputs (the tests pin this down). Keep the two
files in sync when changing either.
"""

import numpy as np
import scipy.sparse as sp

EARTH_RADIUS_KM = 6371.0


def katz_series_rows(at_indptr, at_indices, at_data, n, sources, beta,
                     max_len, tol):
    """Rows of the truncated Katz series for the given source nodes.

    Parameters are the CSR arrays of the *transposed* adjacency matrix
    (rows of A^T are columns of A), the matrix dimension ``n``, the
    source node indices, the damping factor, the maximum walk length and
    the early-stop tolerance: iteration ends once the current term's
    max-norm falls below ``tol`` (that final term is still included;
    an exactly-zero term always stops since no longer walk can exist).

    Returns a dense ``(len(sources), n)`` float64 array whose row ``i``
    holds ``sum_{l=1..L} beta^l (A^l)[sources[i], :]``.
    """
    at_beta = sp.csr_matrix(
        (np.asarray(at_data, dtype=np.float64) * beta,
         np.asarray(at_indices), np.asarray(at_indptr)),
        shape=(n, n))
    sources = np.asarray(sources)
    out = np.zeros((len(sources), n), dtype=np.float64)
    for i, u in enumerate(sources):
        term = np.zeros(n, dtype=np.float64)
        term[u] = 1.0
        acc = out[i]
        for _ in range(max_len):
            term = at_beta.dot(term)
            acc += term
            if np.max(np.abs(term), initial=0.0) < tol:
                break
    return out


def haversine_pairs(lat_rad, lon_rad, src, dst):
    """Great-circle distances in km for index pairs (src[i], dst[i]).

    ``lat_rad``/``lon_rad`` are per-node coordinates in radians.
    """
    lat1 = lat_rad[src]
    lat2 = lat_rad[dst]
    dlat = lat2 - lat1
    dlon = lon_rad[dst] - lon_rad[src]
    sin_dlat = np.sin(dlat * 0.5)
    sin_dlon = np.sin(dlon * 0.5)
    a = sin_dlat * sin_dlat + np.cos(lat1) * np.cos(lat2) * sin_dlon * sin_dlon
    return EARTH_RADIUS_KM * (2.0 * np.arctan2(np.sqrt(a), np.sqrt(1.0 - a)))
