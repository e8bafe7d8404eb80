"""End-to-end pipeline: ingest, split, score, tune, evaluate, export.

The flow mirrors a forward-in-time prediction protocol: scores are
computed from the training window (optionally train+val for the final
scores), decision thresholds are tuned by F1 on the tuning split, and
everything is evaluated on the candidate-pair universe of the test
split. All artifacts are written with fixed orderings and 6-significant
-digit floats so identical configs reproduce byte-identical outputs
regardless of worker count.
"""

import csv
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import _kernels, geo, metrics, synth
from .errors import ConfigError, DataError, UniverseMismatchError
from .graphs import build_adjacency, build_network, candidate_pairs, \
    ingest_movements, temporal_split
from .katz import ScoreTable, _combine_values, combine, \
    edge_weighted_katz_scores, katz_scores, normalize, \
    weighted_katz_scores, write_score_table

log = logging.getLogger(__name__)

GAMMA_GRID = tuple(np.logspace(-4, -1, 13))

MODEL_PARTS = {
    "KI": ("KI",),
    "WKI": ("WKI",),
    "EWKI": ("EWKI",),
    "KIWKI": ("KI", "WKI"),
    "KIEWKI": ("KI", "EWKI"),
    "WKIEWKI": ("WKI", "EWKI"),
}

SUMMARY_ROWS = ("Threshold", "Precision", "Recall", "F1-Score", "AUPR",
                "AUCROC")

INCOMPLETE_MARKER = "INCOMPLETE"


@dataclass
class PipelineResult:
    """Everything a run produced, keyed by model name."""
    reports: dict
    thresholds: dict
    tables: dict
    universe: object
    tune_universe: object
    summary: dict = field(default_factory=dict)
    out_dir: object = None


def _needed_bases(models):
    bases = []
    for model in models:
        for base in MODEL_PARTS[model]:
            if base not in bases:
                bases.append(base)
    return bases


def _universe_distances(universe, registry):
    nodes = universe.node_indices
    return geo.distance_matrix(registry.lat_array()[nodes],
                               registry.lon_array()[nodes])


class _UniverseScoring:
    """Score tables for one (universe, basis adjacency) combination."""

    def __init__(self, universe, adj, registry, cfg, katz_cfg,
                 ki_cache=None):
        self.universe = universe
        self.adj = adj
        self.registry = registry
        self.cfg = cfg
        self.katz_cfg = katz_cfg
        self.raw = {}
        if ki_cache is not None:
            self.raw["KI"] = ki_cache
        self.norm = {}
        self.tables = {}
        self.distances = None

    def _score_base(self, base):
        if base == "KI":
            return katz_scores(self.adj, self.katz_cfg, self.universe)
        if base == "WKI":
            weighted = geo.weighted_adjacency(
                self.adj, self.registry.lat_array(),
                self.registry.lon_array(),
                transform=self.katz_cfg.wki_transform,
                gamma=self.katz_cfg.resolved_gamma()
                if self.katz_cfg.wki_transform == "decay" else 0.0)
            return weighted_katz_scores(weighted, self.katz_cfg,
                                        self.universe)
        raise ValueError(base)

    def compute(self, bases):
        """Score the requested base models, then assemble combinations.

        KI and WKI run as independent tasks on the worker pool; the
        pairwise-decay table is an elementwise product on top of KI and
        is built after it. Results are keyed by name, so the artifact
        content is independent of completion order.
        """
        if "EWKI" in bases or self.katz_cfg.wki_transform == "decay":
            self.distances = _universe_distances(self.universe,
                                                 self.registry)
        heavy = [b for b in ("KI", "WKI")
                 if (b in bases or (b == "KI" and "EWKI" in bases))
                 and b not in self.raw]
        if len(heavy) > 1 and self.cfg.workers > 1:
            with ThreadPoolExecutor(
                    max_workers=min(self.cfg.workers, len(heavy))) as pool:
                futures = {b: pool.submit(self._score_base, b)
                           for b in heavy}
                for b in heavy:
                    self.raw[b] = futures[b].result()
        else:
            for b in heavy:
                self.raw[b] = self._score_base(b)
        if "EWKI" in bases:
            self.raw["EWKI"] = edge_weighted_katz_scores(
                self.adj, self.distances, self.katz_cfg, self.universe,
                ki_table=self.raw["KI"])
        for b in bases:
            self.norm[b] = normalize(self.raw[b])

    def table_for(self, model):
        """Normalized score table for a base or combined model."""
        table = self.tables.get(model)
        if table is not None:
            return table
        parts = MODEL_PARTS[model]
        if len(parts) == 1:
            table = self.norm[model]
        elif self.cfg.combine_on == "normalized":
            table = combine(self.norm[parts[0]], self.norm[parts[1]],
                            rule=self.cfg.combine_rule)
        else:
            a, b = self.raw[parts[0]], self.raw[parts[1]]
            fused = _combine_values(a.values, b.values,
                                    self.cfg.combine_rule)
            np.fill_diagonal(fused, 0.0)
            table = normalize(ScoreTable(
                model=parts[0] + parts[1], universe=self.universe,
                values=fused,
                info={"rule": self.cfg.combine_rule,
                      "components": parts, "combined_on": "raw"}))
        self.tables[model] = table
        return table


def _tune_gamma(katz_cfg, scoring):
    """Pick gamma from a log grid by tuning-split F1 of the decay model.

    Each candidate multiplies the cached base table by its decay
    weights, normalizes, and sweeps the optimal F1; ties keep the
    smaller gamma. Returns the resolved KatzConfig and the chosen value.
    """
    scoring.distances = _universe_distances(scoring.universe,
                                            scoring.registry)
    if "KI" not in scoring.raw:
        scoring.raw["KI"] = katz_scores(scoring.adj, katz_cfg,
                                        scoring.universe)
    ki = scoring.raw["KI"]
    labels = scoring.universe.label_vector
    best_gamma, best_f1 = None, -1.0
    for gamma in GAMMA_GRID:
        candidate = edge_weighted_katz_scores(
            scoring.adj, scoring.distances,
            replace(katz_cfg, gamma=float(gamma)),
            scoring.universe, ki_table=ki)
        _, f1 = metrics.optimal_threshold(
            normalize(candidate).score_vector, labels)
        if f1 > best_f1:
            best_gamma, best_f1 = float(gamma), f1
    log.info("gamma tuned to %.6g (tuning F1 %.6g)", best_gamma, best_f1)
    return replace(katz_cfg, gamma=best_gamma), best_gamma


def _build_data(cfg, out_dir):
    """Records to networks: synth-or-ingest, build, split."""
    if cfg.synth is not None:
        records, truth = synth.generate(cfg.synth)
        if out_dir is not None:
            movements_path = out_dir / "movements.csv"
            synth.write_movements(records, movements_path)
            synth.write_truth(truth, out_dir / "truth.json")
            report = ingest_movements(
                movements_path, schema=None, on_bad_rows="abort",
                year_range=cfg.year_range)
            records = report.records
    else:
        report = ingest_movements(
            cfg.input, schema=cfg.schema, on_bad_rows=cfg.on_bad_rows,
            delimiter=cfg.delimiter, year_range=cfg.year_range)
        records = report.records
    net = build_network(records)
    train, val, test = temporal_split(net, cfg.split)
    return net, train, val, test


def _with_marker(cfg, evaluate_models):
    """Prepare the output directory, run, and clear the marker on success.

    The INCOMPLETE marker file exists for exactly as long as the run is
    in flight, so an aborted run's partial artifacts are recognizable.
    """
    out_dir = Path(cfg.output_dir) if cfg.output_dir else None
    marker = None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        marker = out_dir / INCOMPLETE_MARKER
        marker.write_text("this run has not completed\n", encoding="utf-8")
        if cfg.source_text:
            (out_dir / "config.yaml").write_text(cfg.source_text,
                                                 encoding="utf-8")
    result = _run_steps(cfg, out_dir, evaluate_models)
    if marker is not None:
        marker.unlink()
    return result


def run(cfg):
    """Execute the full pipeline described by a RunConfig.

    With an output directory set, artifacts (score tables, per-model
    reports, curve points, the summary table, and the verbatim config)
    are written there. Returns a PipelineResult either way.
    """
    return _with_marker(cfg, evaluate_models=True)


def run_scores_only(cfg):
    """Score and export tables without tuning thresholds or evaluating."""
    return _with_marker(cfg, evaluate_models=False)


def _run_steps(cfg, out_dir, evaluate_models):
    net, train, val, test = _build_data(cfg, out_dir)
    registry = net.registry
    final_universe = candidate_pairs(test)
    tune_net = val if cfg.tune_on == "val" else test

    adj_train = build_adjacency(
        train, "binary-directed" if cfg.directed else "binary-undirected")
    if cfg.score_basis == "train+val":
        basis_net = train.merged_with(val)
        adj_basis = build_adjacency(
            basis_net,
            "binary-directed" if cfg.directed else "binary-undirected")
    else:
        adj_basis = adj_train

    katz_cfg = cfg.katz
    bases = _needed_bases(cfg.models)

    if cfg.tune_on == "test":
        tune_universe = final_universe
        tune_adj = adj_basis
    else:
        tune_universe = candidate_pairs(tune_net)
        tune_adj = adj_train

    tune_scoring = _UniverseScoring(tune_universe, tune_adj, registry,
                                    cfg, katz_cfg)
    gamma_tuned = None
    if katz_cfg.gamma == "tune":
        needs_gamma = ("EWKI" in bases
                       or katz_cfg.wki_transform == "decay")
        if needs_gamma:
            katz_cfg, gamma_tuned = _tune_gamma(katz_cfg, tune_scoring)
        else:
            katz_cfg = replace(katz_cfg, gamma=0.0)
        tune_scoring.katz_cfg = katz_cfg

    if cfg.tune_on == "test":
        final_scoring = tune_scoring
    else:
        final_scoring = _UniverseScoring(final_universe, adj_basis,
                                         registry, cfg, katz_cfg)

    final_scoring.compute(bases)
    if tune_scoring is not final_scoring and evaluate_models:
        tune_scoring.compute(bases)

    thresholds = {}
    tuning_f1 = {}
    reports = {}
    tables = {}
    for model in cfg.models:
        final_table = final_scoring.table_for(model)
        tables[model] = final_table
        if not evaluate_models:
            continue
        tune_table = tune_scoring.table_for(model)
        thr, tuned_f1 = metrics.optimal_threshold(tune_table)
        thresholds[model] = thr
        tuning_f1[model] = tuned_f1
        info = dict(final_table.info)
        info.update({"tuned_on": cfg.tune_on, "tuning_f1": tuned_f1,
                     "score_basis": cfg.score_basis})
        if gamma_tuned is not None:
            info["gamma_tuned"] = gamma_tuned
        reports[model] = metrics.evaluate(final_table, threshold=thr,
                                          model=model, info=info)

    summary = _run_summary(cfg, net, train, val, test, tune_universe,
                           final_universe, thresholds, tuning_f1,
                           katz_cfg, gamma_tuned)
    result = PipelineResult(reports=reports, thresholds=thresholds,
                            tables=tables, universe=final_universe,
                            tune_universe=tune_universe, summary=summary,
                            out_dir=out_dir)
    if out_dir is not None:
        _write_artifacts(cfg, result, registry)
    return result


def _split_stats(net):
    return {"nodes": int(net.n_nodes), "edges": int(net.n_edges),
            "links": int(net.n_links)}


def _universe_stats(universe):
    return {"nodes": int(universe.k), "pairs": int(universe.n_pairs),
            "positives": int(universe.n_positives)}


def _run_summary(cfg, net, train, val, test, tune_universe, final_universe,
                 thresholds, tuning_f1, katz_cfg, gamma_tuned):
    summary = {
        "models": list(cfg.models),
        "score_basis": cfg.score_basis,
        "tune_on": cfg.tune_on,
        "combine_rule": cfg.combine_rule,
        "combine_on": cfg.combine_on,
        "directed": cfg.directed,
        "kernel_backend": _kernels.BACKEND,
        "network": _split_stats(net),
        "splits": {"train": _split_stats(train),
                   "val": _split_stats(val),
                   "test": _split_stats(test)},
        "universes": {"tuning": _universe_stats(tune_universe),
                      "final": _universe_stats(final_universe)},
        "gamma": (katz_cfg.gamma if katz_cfg.gamma != "tune" else None),
    }
    if gamma_tuned is not None:
        summary["gamma_tuned"] = gamma_tuned
    if cfg.synth is not None:
        summary["synth_seed"] = cfg.synth.seed
    if thresholds:
        summary["thresholds"] = {m: metrics._round6(t)
                                 for m, t in thresholds.items()}
        summary["tuning_f1"] = {m: metrics._round6(v)
                                for m, v in tuning_f1.items()}
    return summary


def _write_artifacts(cfg, result, registry):
    out_dir = result.out_dir
    for model in cfg.models:
        write_score_table(result.tables[model], registry,
                          out_dir / f"scores_{model}.csv")
    for model in cfg.models:
        report = result.reports.get(model)
        if report is None:
            continue
        metrics.write_report(report, out_dir / f"report_{model}.json")
        metrics.write_curve(report.roc, out_dir / f"curve_roc_{model}.csv")
        metrics.write_curve(report.pr, out_dir / f"curve_pr_{model}.csv")
    if result.reports:
        _write_summary_table(cfg.models, result.reports,
                             out_dir / "summary.csv")
    payload = json.dumps(result.summary, indent=2, sort_keys=True)
    (out_dir / "run_summary.json").write_text(payload + "\n",
                                              encoding="utf-8")


def _summary_cell(report, row):
    if row == "Threshold":
        return report.threshold
    if row == "Precision":
        return report.precision
    if row == "Recall":
        return report.recall
    if row == "F1-Score":
        return report.f1
    if row == "AUPR":
        return report.aupr
    return report.auroc


def _write_summary_table(models, reports, dest):
    """Summary CSV: one metric per row, one model per column."""
    with open(dest, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("metric," + ",".join(models) + "\n")
        for row in SUMMARY_ROWS:
            cells = [f"{_summary_cell(reports[m], row):.6g}"
                     for m in models]
            fh.write(row + "," + ",".join(cells) + "\n")


def read_score_table(path, universe, registry):
    """Load an exported score table back onto a pair universe.

    The file must cover exactly the universe's off-diagonal pairs, each
    once, with ids resolvable in the registry. Returns a normalized
    ScoreTable carrying the file's raw scores as ``raw_values``.
    """
    k = universe.k
    position = {int(node): i for i, node in enumerate(universe.node_indices)}
    norm = np.zeros((k, k), dtype=np.float64)
    raw = np.zeros((k, k), dtype=np.float64)
    seen = np.zeros((k, k), dtype=bool)
    model = None
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"source_id", "dest_id", "model", "score", "score_norm"}
        if reader.fieldnames is None or not required.issubset(
                reader.fieldnames):
            raise DataError(
                f"score table {path} lacks required columns "
                f"{sorted(required)}")
        for line_no, row in enumerate(reader, start=2):
            if model is None:
                model = row["model"]
            elif row["model"] != model:
                raise DataError(
                    f"score table mixes models {model!r} and "
                    f"{row['model']!r} (line {line_no})")
            try:
                u = registry.index(row["source_id"])
                v = registry.index(row["dest_id"])
                i, j = position[u], position[v]
            except KeyError:
                raise UniverseMismatchError(
                    f"line {line_no}: pair ({row['source_id']}, "
                    f"{row['dest_id']}) is not in the evaluation universe")
            if i == j or seen[i, j]:
                raise UniverseMismatchError(
                    f"line {line_no}: duplicate or diagonal pair")
            seen[i, j] = True
            try:
                raw[i, j] = float(row["score"])
                norm[i, j] = float(row["score_norm"])
            except ValueError:
                raise DataError(f"line {line_no}: non-numeric score")
    expected = k * (k - 1)
    got = int(seen.sum())
    if got != expected:
        raise UniverseMismatchError(
            f"score table covers {got} pairs; the universe has {expected}")
    return ScoreTable(model=model or "", universe=universe, values=norm,
                      normalized=True, raw_values=raw)
