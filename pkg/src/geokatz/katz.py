"""Walk-counting similarity scores over sparse directed adjacency.

The base score for an ordered pair (u, v) is the damped walk count
sum_{l>=1} beta^l (A^l)[u, v], computed either in closed form as
((I - beta*A)^{-1} - I)[u, v] via one sparse factorization and one
solve per source node, or as an explicitly truncated series. Variants
swap in a distance-weighted adjacency or multiply each pair's score by
an exponential distance decay. Tables are min-max normalized over their
pair universe and can be fused pairwise into combined models.
"""

import csv
import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.csgraph as csgraph
from scipy.sparse.linalg import splu

from . import _kernels
from .errors import (BetaDomainError, ConfigError, DegenerateScoreTableWarning,
                     NumericError, UniverseMismatchError)
from .geo import WEIGHT_TRANSFORMS

log = logging.getLogger(__name__)

BETA_MODES = ("fraction-of-spectral-bound", "explicit")
METHODS = ("closed-form-solve", "truncated-series")
COMBINE_RULES = ("mean", "product", "max")

_BETA_MODE_ALIASES = {"fraction": "fraction-of-spectral-bound"}
_METHOD_ALIASES = {"solve": "closed-form-solve", "series": "truncated-series"}


@dataclass(frozen=True)
class KatzConfig:
    """Parameters controlling walk-count scoring.

    ``beta_mode`` picks the damping factor: ``explicit`` uses ``beta``
    as given (validated against the spectral bound), while
    ``fraction-of-spectral-bound`` sets beta = alpha / spectral_radius,
    which keeps the series convergent on any input graph (a graph with
    spectral radius 0 has a finite series for every beta, and alpha
    itself is used). ``gamma`` is the decay rate per km for the
    pairwise-decay variant and may be the string ``"tune"`` to request
    validation-split tuning upstream.
    """
    beta_mode: str = "fraction-of-spectral-bound"
    alpha: float = 0.5
    beta: Optional[float] = None
    method: str = "closed-form-solve"
    max_walk_length: int = 6
    series_tolerance: float = 1e-10
    gamma: object = 0.01
    wki_transform: str = "raw"
    spectral_tol: float = 1e-8
    spectral_max_iter: int = 1000
    solve_max_nodes: int = 20000

    def __post_init__(self):
        object.__setattr__(self, "beta_mode",
                           _BETA_MODE_ALIASES.get(self.beta_mode,
                                                  self.beta_mode))
        object.__setattr__(self, "method",
                           _METHOD_ALIASES.get(self.method, self.method))
        if self.beta_mode not in BETA_MODES:
            raise ConfigError(f"beta_mode must be one of {BETA_MODES}, "
                              f"got {self.beta_mode!r}")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, "
                              f"got {self.method!r}")
        if self.beta_mode == "explicit":
            if self.beta is None or not self.beta > 0:
                raise ConfigError(
                    "explicit beta_mode requires beta > 0, "
                    f"got {self.beta!r}")
        elif not 0 < self.alpha < 1:
            raise ConfigError(
                f"alpha must be in (0, 1), got {self.alpha!r}")
        if self.max_walk_length < 1:
            raise ConfigError("max_walk_length must be >= 1")
        if not self.series_tolerance > 0:
            raise ConfigError("series_tolerance must be > 0")
        if self.gamma != "tune":
            if not isinstance(self.gamma, (int, float)) or self.gamma < 0:
                raise ConfigError(
                    f"gamma must be >= 0 or 'tune', got {self.gamma!r}")
        if self.wki_transform not in WEIGHT_TRANSFORMS:
            raise ConfigError(
                f"wki_transform must be one of {WEIGHT_TRANSFORMS}, "
                f"got {self.wki_transform!r}")
        if not self.spectral_tol > 0 or self.spectral_max_iter < 1:
            raise ConfigError("invalid spectral iteration parameters")

    def resolved_gamma(self):
        if self.gamma == "tune":
            raise ConfigError("gamma is 'tune' but was never resolved")
        return float(self.gamma)


@dataclass(frozen=True)
class SpectralRadius:
    """Power-iteration estimate of a matrix's spectral radius."""
    value: float
    converged: bool
    iterations: int


def _structurally_acyclic(adj):
    """True when no directed cycle can carry a nonzero walk product."""
    if np.any(adj.diagonal() != 0):
        return False
    n_comp, _ = csgraph.connected_components(adj, directed=True,
                                             connection="strong")
    return n_comp == adj.shape[0]


def spectral_radius(adj, tol=1e-8, max_iter=1000):
    """Estimate the spectral radius of a non-negative sparse matrix.

    Power iteration from the all-ones direction, run on the shifted
    matrix A + I: for non-negative A the shift adds exactly 1 to the
    spectral radius while making every recurrent class aperiodic, so
    the norm-growth estimate cannot oscillate between walk parities.
    Zero and structurally acyclic (nilpotent) matrices return exactly
    0.0. The result reports whether the estimate change fell below
    ``tol`` (relative, floored at 1) within ``max_iter`` iterations.
    """
    adj = sp.csr_matrix(adj)
    if adj.shape[0] != adj.shape[1]:
        raise ValueError(f"matrix is not square: {adj.shape}")
    n = adj.shape[0]
    if n == 0 or adj.nnz == 0 or _structurally_acyclic(adj):
        return SpectralRadius(0.0, True, 0)
    x = np.full(n, 1.0 / np.sqrt(n))
    prev = np.inf
    estimate = 0.0
    for iteration in range(1, max_iter + 1):
        y = adj.dot(x) + x
        norm = float(np.linalg.norm(y))
        estimate = norm - 1.0
        x = y / norm
        if abs(estimate - prev) <= tol * max(estimate, 1.0):
            return SpectralRadius(estimate, True, iteration)
        prev = estimate
    return SpectralRadius(estimate, False, max_iter)


def resolve_beta(cfg, adj):
    """Effective damping factor for a matrix, with its spectral estimate.

    Explicit beta is validated against the estimated bound 1/radius;
    violation is a hard error because the walk series diverges there.
    """
    sr = spectral_radius(adj, cfg.spectral_tol, cfg.spectral_max_iter)
    if not sr.converged:
        log.warning(
            "spectral radius estimate %.6g did not converge in %d "
            "iterations; damping factor uses the last estimate",
            sr.value, sr.iterations)
    if cfg.beta_mode == "explicit":
        beta = float(cfg.beta)
        if sr.value > 0.0 and beta * sr.value >= 1.0:
            raise BetaDomainError(
                f"beta {beta:.6g} is not below 1/spectral_radius "
                f"({1.0 / sr.value:.6g}); the walk series diverges")
    elif sr.value == 0.0:
        # Nilpotent adjacency: the series is a finite sum for every
        # beta, so the fraction collapses to alpha itself.
        beta = float(cfg.alpha)
    else:
        beta = float(cfg.alpha) / sr.value
    return beta, sr


@dataclass
class ScoreTable:
    """Per-ordered-pair scores for one model over a pair universe.

    ``values`` is (k, k) with the diagonal fixed at 0 and excluded from
    every pair-level view. Normalized tables keep the pre-normalization
    matrix in ``raw_values`` so exports can carry both.
    """
    model: str
    universe: object
    values: np.ndarray
    normalized: bool = False
    raw_values: Optional[np.ndarray] = None
    info: dict = field(default_factory=dict)

    @property
    def score_vector(self):
        """Scores for all universe pairs in flattening order."""
        return self.universe.flatten(self.values)


def _solve_rows(adj, beta, sources):
    """Rows of (I - beta*A)^{-1} - I for the given source nodes.

    Solves (I - beta*A^T) x = e_u per source through one sparse LU
    factorization; x is then row u of the inverse.
    """
    n = adj.shape[0]
    system = (sp.identity(n, format="csc", dtype=np.float64)
              - beta * adj.T.tocsc())
    try:
        lu = splu(system.tocsc())
    except RuntimeError as exc:
        raise NumericError(
            f"closed-form factorization failed ({exc}); this indicates "
            "a damping factor at or beyond the spectral bound") from exc
    rhs = np.zeros((n, len(sources)), dtype=np.float64)
    rhs[sources, np.arange(len(sources))] = 1.0
    solved = lu.solve(rhs)
    values = solved[sources, :].T.copy()
    np.fill_diagonal(values, 0.0)
    # The exact inverse is entrywise non-negative below the spectral
    # bound; round-off may leave tiny negatives on zero entries.
    np.maximum(values, 0.0, out=values)
    return values


def _series_rows(adj, beta, sources, max_len, tol):
    """Truncated-series scores via the active kernel backend."""
    at = adj.T.tocsr()
    at.sort_indices()
    rows = _kernels.katz_series_rows(at.indptr, at.indices, at.data,
                                     adj.shape[0], sources, beta,
                                     max_len, tol)
    values = np.ascontiguousarray(rows[:, sources])
    np.fill_diagonal(values, 0.0)
    return values


def katz_scores(adj, cfg, universe, model="KI"):
    """Damped walk-count score table over a pair universe.

    ``adj`` is indexed by the universe's global node indices (absent
    nodes have zero rows/columns and score 0 everywhere). The method is
    the closed form by default, falling back to the truncated series
    above ``cfg.solve_max_nodes``.
    """
    adj = sp.csr_matrix(adj)
    if adj.dtype != np.float64:
        adj = adj.astype(np.float64)
    beta, sr = resolve_beta(cfg, adj)
    sources = np.ascontiguousarray(universe.node_indices, dtype=np.int64)
    method = cfg.method
    if method == "closed-form-solve" and adj.shape[0] > cfg.solve_max_nodes:
        log.info("%d nodes exceed solve_max_nodes=%d; using the "
                 "truncated series", adj.shape[0], cfg.solve_max_nodes)
        method = "truncated-series"
    if method == "closed-form-solve":
        values = _solve_rows(adj, beta, sources)
    else:
        values = _series_rows(adj, beta, sources, cfg.max_walk_length,
                              cfg.series_tolerance)
    info = {"beta": beta, "spectral_radius": sr.value,
            "spectral_converged": sr.converged, "method": method}
    return ScoreTable(model=model, universe=universe, values=values,
                      info=info)


def weighted_katz_scores(adj_weighted, cfg, universe, model="WKI"):
    """Walk-count scores over a distance-weighted adjacency.

    Identical machinery to :func:`katz_scores`; the damping factor is
    resolved against the weighted matrix's own spectral radius.
    """
    return katz_scores(adj_weighted, cfg, universe, model=model)


def edge_weighted_katz_scores(adj, distances, cfg, universe, model="EWKI",
                              ki_table=None):
    """Walk-count scores decayed pairwise by endpoint distance.

    score(u, v) = exp(-gamma * d(u, v)) * base(u, v), where
    ``distances`` is the (k, k) great-circle matrix aligned with the
    universe's node order. At gamma = 0 every weight is exactly 1.0 and
    the table equals the base table bitwise. Pass ``ki_table`` to reuse
    an already-computed base table instead of rescoring.
    """
    gamma = cfg.resolved_gamma()
    if ki_table is None:
        ki_table = katz_scores(adj, cfg, universe)
    elif ki_table.normalized or not ki_table.universe.same_universe(universe):
        raise UniverseMismatchError(
            "ki_table must be an unnormalized table on the same universe")
    distances = np.asarray(distances, dtype=np.float64)
    k = universe.k
    if distances.shape != (k, k):
        raise UniverseMismatchError(
            f"distance matrix shape {distances.shape} does not match "
            f"universe size {k}")
    values = ki_table.values * np.exp(-gamma * distances)
    np.fill_diagonal(values, 0.0)
    info = dict(ki_table.info, gamma=gamma)
    return ScoreTable(model=model, universe=universe, values=values,
                      info=info)


def normalize(table):
    """Min-max rescale a table's universe scores to [0, 1].

    A constant table maps to all zeros and raises
    :class:`DegenerateScoreTableWarning`, since a single value carries
    no ranking information. The input's values are kept as the
    normalized table's ``raw_values``.
    """
    if table.normalized:
        raise ValueError(f"table {table.model!r} is already normalized")
    mask = table.universe.offdiag_mask
    pair_scores = table.values[mask]
    lo = pair_scores.min()
    span = pair_scores.max() - lo
    out = np.zeros_like(table.values)
    if span == 0.0:
        warnings.warn(
            f"score table {table.model!r} is constant ({lo:.6g} "
            "everywhere); normalizing to all zeros",
            DegenerateScoreTableWarning, stacklevel=2)
    else:
        out[mask] = (pair_scores - lo) / span
    return ScoreTable(model=table.model, universe=table.universe,
                      values=out, normalized=True, raw_values=table.values,
                      info=dict(table.info))


def _combine_values(a_values, b_values, rule):
    if rule == "mean":
        return (a_values + b_values) / 2.0
    if rule == "product":
        return a_values * b_values
    if rule == "max":
        return np.maximum(a_values, b_values)
    raise ConfigError(f"combine rule must be one of {COMBINE_RULES}, "
                      f"got {rule!r}")


def combine(a, b, rule="mean"):
    """Fuse two normalized tables pairwise into a combined model.

    The combination is applied to the normalized scores and the result
    is re-normalized; the model name is the concatenation of the
    inputs' names. The pre-renormalization combination is kept as the
    output's ``raw_values``.
    """
    if not (a.normalized and b.normalized):
        raise ValueError("combine requires two normalized tables")
    if not a.universe.same_universe(b.universe):
        raise UniverseMismatchError(
            f"tables {a.model!r} and {b.model!r} cover different universes")
    fused = _combine_values(a.values, b.values, rule)
    np.fill_diagonal(fused, 0.0)
    raw_table = ScoreTable(model=a.model + b.model, universe=a.universe,
                           values=fused,
                           info={"rule": rule,
                                 "components": (a.model, b.model)})
    return normalize(raw_table)


def write_score_table(table, registry, dest):
    """Export a normalized table as delimited text.

    Columns are source_id, dest_id, model, score (pre-normalization)
    and score_norm; rows are ordered lexicographically by source id
    then dest id, and floats use 6 significant digits, so identical
    tables export byte-identically.
    """
    if not table.normalized or table.raw_values is None:
        raise ValueError("score export requires a normalized table")
    nodes = table.universe.node_indices
    ids = [registry.ids[i] for i in nodes]
    order = sorted(range(len(ids)), key=ids.__getitem__)

    def _write(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["source_id", "dest_id", "model", "score",
                         "score_norm"])
        raw = table.raw_values
        norm = table.values
        for i in order:
            for j in order:
                if i == j:
                    continue
                writer.writerow([ids[i], ids[j], table.model,
                                 f"{raw[i, j]:.6g}", f"{norm[i, j]:.6g}"])

    if hasattr(dest, "write"):
        _write(dest)
    else:
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            _write(fh)
    return dest
