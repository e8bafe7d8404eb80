# cython: language_level=3
"""Compiled implementations of the hot kernels.

Must stay semantically in lockstep with ``_pybackend.py``: same
operations in the same order so both backends agree on the supported
inputs. Keep the two files in sync when changing either.
"""

import numpy as np

cimport cython
cimport numpy as cnp
from libc.math cimport atan2, cos, fabs, sin, sqrt

cnp.import_array()

EARTH_RADIUS_KM = 6371.0
cdef double _RADIUS = 6371.0


@cython.boundscheck(False)
@cython.wraparound(False)
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
    cdef cnp.ndarray[cnp.int32_t, ndim=1] indptr = \
        np.ascontiguousarray(at_indptr, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] indices = \
        np.ascontiguousarray(at_indices, dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] data = \
        np.asarray(at_data, dtype=np.float64) * beta
    cdef cnp.ndarray[cnp.int64_t, ndim=1] src = \
        np.ascontiguousarray(sources, dtype=np.int64)
    cdef Py_ssize_t dim = n
    cdef Py_ssize_t nsrc = src.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = \
        np.zeros((nsrc, dim), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] term = \
        np.zeros(dim, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] nxt = \
        np.zeros(dim, dtype=np.float64)
    cdef double c_tol = tol
    cdef int c_max_len = max_len
    cdef Py_ssize_t i, j, jj, step
    cdef double acc_j, m, v

    for i in range(nsrc):
        term[:] = 0.0
        term[src[i]] = 1.0
        for step in range(c_max_len):
            m = 0.0
            for j in range(dim):
                acc_j = 0.0
                for jj in range(indptr[j], indptr[j + 1]):
                    acc_j = acc_j + data[jj] * term[indices[jj]]
                nxt[j] = acc_j
                out[i, j] += acc_j
                v = fabs(acc_j)
                if v > m:
                    m = v
            term[:] = nxt
            if m < c_tol:
                break
    return out


@cython.boundscheck(False)
@cython.wraparound(False)
def haversine_pairs(lat_rad, lon_rad, src, dst):
    """Great-circle distances in km for index pairs (src[i], dst[i]).

    ``lat_rad``/``lon_rad`` are per-node coordinates in radians.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] lat = \
        np.ascontiguousarray(lat_rad, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] lon = \
        np.ascontiguousarray(lon_rad, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] a_idx = \
        np.ascontiguousarray(src, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] b_idx = \
        np.ascontiguousarray(dst, dtype=np.int64)
    cdef Py_ssize_t m = a_idx.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = \
        np.empty(m, dtype=np.float64)
    cdef Py_ssize_t i
    cdef double lat1, lat2, sdlat, sdlon, h

    for i in range(m):
        lat1 = lat[a_idx[i]]
        lat2 = lat[b_idx[i]]
        sdlat = sin((lat2 - lat1) * 0.5)
        sdlon = sin((lon[b_idx[i]] - lon[a_idx[i]]) * 0.5)
        h = sdlat * sdlat + cos(lat1) * cos(lat2) * sdlon * sdlon
        out[i] = _RADIUS * (2.0 * atan2(sqrt(h), sqrt(1.0 - h)))
    return out
