"""Great-circle geometry and distance-based edge weighting.

All distances are haversine great-circle lengths in kilometers on a
sphere of radius 6371.0 km. Latitudes and longitudes are accepted in
degrees and converted once at the boundary.
"""

import numpy as np
import scipy.sparse as sp

from ._kernels import EARTH_RADIUS_KM, haversine_pairs
from .errors import DataError

WEIGHT_TRANSFORMS = ("raw", "inverse", "decay", "minmax")

# Dense k*k distance matrices above this node count are refused rather
# than silently allocating gigabytes.
DEFAULT_DENSE_LIMIT = 5000


def haversine_km(lat1, lon1, lat2, lon2):
    """Great-circle distance in km between two points given in degrees."""
    lat = np.radians(np.array([lat1, lat2], dtype=np.float64))
    lon = np.radians(np.array([lon1, lon2], dtype=np.float64))
    out = haversine_pairs(lat, lon, np.array([0]), np.array([1]))
    return float(out[0])


def pair_distances(lat_deg, lon_deg, src, dst):
    """Distances in km for node index pairs (src[i], dst[i]).

    ``lat_deg``/``lon_deg`` are per-node coordinate arrays in degrees.
    """
    lat = np.radians(np.asarray(lat_deg, dtype=np.float64))
    lon = np.radians(np.asarray(lon_deg, dtype=np.float64))
    return haversine_pairs(lat, lon,
                           np.ascontiguousarray(src, dtype=np.int64),
                           np.ascontiguousarray(dst, dtype=np.int64))


def distance_matrix(lat_deg, lon_deg, max_nodes=DEFAULT_DENSE_LIMIT):
    """Dense (k, k) matrix of pairwise great-circle distances in km.

    Coincident points produce an exact 0.0. Refuses to build matrices
    for more than ``max_nodes`` nodes; pairwise scoring only ever needs
    this for the (much smaller) evaluation node set.
    """
    lat = np.asarray(lat_deg, dtype=np.float64)
    k = lat.shape[0]
    if k > max_nodes:
        raise DataError(
            f"dense distance matrix for {k} nodes exceeds the "
            f"{max_nodes}-node limit")
    src = np.repeat(np.arange(k, dtype=np.int64), k)
    dst = np.tile(np.arange(k, dtype=np.int64), k)
    return pair_distances(lat, lon_deg, src, dst).reshape(k, k)


def decay_weights(dist, gamma):
    """Exponential distance decay exp(-gamma * dist).

    ``gamma`` is in 1/km and must be >= 0. At gamma == 0 every weight
    is exactly 1.0 (IEEE exp(-0.0)), so decay-weighted scores reduce
    bitwise to their unweighted counterparts.
    """
    if gamma < 0:
        raise ValueError(f"decay rate must be >= 0, got {gamma}")
    return np.exp(-gamma * np.asarray(dist, dtype=np.float64))


def transform_weights(dist, transform="raw", gamma=0.01):
    """Map edge distances (km) to edge weights.

    Transforms:
      raw      the distance itself
      inverse  1 / (1 + dist)
      decay    exp(-gamma * dist)
      minmax   rescale to [0, 1] over the given distances; if all
               distances are equal every weight is 1.0
    """
    dist = np.asarray(dist, dtype=np.float64)
    if transform == "raw":
        return dist.copy()
    if transform == "inverse":
        return 1.0 / (1.0 + dist)
    if transform == "decay":
        return decay_weights(dist, gamma)
    if transform == "minmax":
        if dist.size == 0:
            return dist.copy()
        lo = dist.min()
        span = dist.max() - lo
        if span == 0.0:
            return np.ones_like(dist)
        return (dist - lo) / span
    raise ValueError(
        f"unknown weight transform {transform!r}; "
        f"expected one of {WEIGHT_TRANSFORMS}")


def weighted_adjacency(adj, lat_deg, lon_deg, transform="raw", gamma=0.01):
    """Replace adjacency values with distance-derived edge weights.

    ``adj`` is a CSR adjacency matrix indexed by node position in the
    coordinate arrays. The sparsity pattern is preserved exactly: a
    stored entry whose weight comes out 0.0 (e.g. the raw transform on
    coincident endpoints) stays stored, so walk enumeration over the
    weighted matrix visits the same edges as over the binary one.
    """
    adj = sp.csr_matrix(adj)
    rows = np.repeat(np.arange(adj.shape[0], dtype=np.int64),
                     np.diff(adj.indptr))
    dist = pair_distances(lat_deg, lon_deg, rows,
                          adj.indices.astype(np.int64))
    weights = transform_weights(dist, transform, gamma)
    return sp.csr_matrix((weights, adj.indices.copy(), adj.indptr.copy()),
                         shape=adj.shape)
