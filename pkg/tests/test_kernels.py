"""Backend equivalence: compiled kernels against the pure-Python ones."""

import numpy as np
import pytest
import scipy.sparse as sp

from geokatz import _kernels
from geokatz._kernels import _pybackend

try:
    from geokatz._kernels import _speedups
    HAVE_CYTHON = True
except ImportError:
    HAVE_CYTHON = False

needs_cython = pytest.mark.skipif(not HAVE_CYTHON,
                                  reason="compiled extension not built")


def _random_case(seed, n=40, density=0.1):
    rng = np.random.default_rng(seed)
    adj = sp.random(n, n, density=density, random_state=rng,
                    format="csr", dtype=np.float64)
    adj.setdiag(0)
    adj.eliminate_zeros()
    at = sp.csr_matrix(adj.T)
    at.sort_indices()
    sources = np.sort(rng.choice(n, size=n // 2, replace=False)
                      ).astype(np.int64)
    return at, sources


def _run_series(impl, at, sources, beta=0.05, max_len=12, tol=1e-30):
    return impl(at.indptr.astype(np.int32), at.indices.astype(np.int32),
                at.data, at.shape[0], sources, beta, max_len, tol)


def test_active_backend_is_well_formed():
    assert _kernels.BACKEND in ("python", "cython")
    series, hav = _kernels.get_backend()
    assert callable(series) and callable(hav)


def test_get_backend_rejects_unknown_name():
    with pytest.raises(ValueError):
        _kernels.get_backend("fortran")


def test_python_series_matches_scipy_power_sum():
    at, sources = _random_case(seed=11)
    beta = 0.05
    got = _run_series(_pybackend.katz_series_rows, at, sources, beta=beta,
                      max_len=8, tol=1e-300)
    n = at.shape[0]
    # Reference: accumulate beta^l * (A^l)[u, :] == ((beta*A)^T)^l e_u.
    scaled = (at * beta).toarray()
    expected = np.zeros((len(sources), n))
    for i, u in enumerate(sources):
        vec = np.zeros(n)
        vec[u] = 1.0
        acc = np.zeros(n)
        for _ in range(8):
            vec = scaled @ vec
            acc += vec
        expected[i] = acc
    assert np.max(np.abs(got - expected)) < 1e-12


def test_python_series_early_stop_includes_final_term():
    at, sources = _random_case(seed=12)
    # A tolerance above every term magnitude stops after the first
    # multiplication, with that term already accumulated.
    got = _run_series(_pybackend.katz_series_rows, at, sources, beta=0.05,
                      max_len=50, tol=1e9)
    one_term = _run_series(_pybackend.katz_series_rows, at, sources,
                           beta=0.05, max_len=1, tol=1e-300)
    assert np.array_equal(got, one_term)


@needs_cython
@pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
def test_series_backends_bitwise_identical(seed):
    at, sources = _random_case(seed=seed)
    py = _run_series(_pybackend.katz_series_rows, at, sources)
    cy = _run_series(_speedups.katz_series_rows, at, sources)
    assert np.array_equal(py, cy)


@needs_cython
@pytest.mark.parametrize("seed", [1, 2, 3])
def test_haversine_backends_agree_to_sub_nanometer(seed):
    rng = np.random.default_rng(seed)
    n = 500
    lat = np.radians(rng.uniform(-90, 90, n))
    lon = np.radians(rng.uniform(-180, 180, n))
    src = rng.integers(0, n, 2000).astype(np.int64)
    dst = rng.integers(0, n, 2000).astype(np.int64)
    py = _pybackend.haversine_pairs(lat, lon, src, dst)
    cy = _speedups.haversine_pairs(lat, lon, src, dst)
    # The compiled loop uses libm scalars, NumPy uses vectorized math;
    # they agree far below any geographic significance but not bitwise.
    assert np.max(np.abs(py - cy)) < 1e-9


def test_haversine_pairs_zero_for_identical_indices():
    lat = np.radians(np.array([51.5, -33.9]))
    lon = np.radians(np.array([-0.1, 151.2]))
    idx = np.array([0, 1], dtype=np.int64)
    out = _kernels.haversine_pairs(lat, lon, idx, idx)
    assert np.array_equal(out, np.zeros(2))
