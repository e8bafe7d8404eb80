"""Binary-classification evaluation of pair score tables.

Scores become predictions via an inclusive threshold (predict positive
iff score >= threshold). Threshold sweeps visit every distinct score
once (ties form a single step), which makes the swept optimum exact
rather than grid-approximate. Curves and their areas are trapezoidal.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .errors import DegenerateLabelsError

ABOVE_MAX_STEP = 1.0


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts of a binary decision against ground-truth labels."""
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self):
        return self.tp + self.fp + self.fn + self.tn

    @property
    def positives(self):
        return self.tp + self.fn


@dataclass(frozen=True)
class Curve:
    """Threshold-parameterized curve points, threshold descending."""
    kind: str
    thresholds: np.ndarray
    x: np.ndarray
    y: np.ndarray


@dataclass
class EvaluationReport:
    """Everything measured about one model on one labeled universe."""
    model: str
    threshold: float
    confusion: ConfusionMatrix
    precision: float
    recall: float
    f1: float
    auroc: float
    aupr: float
    average_precision: float
    roc: Curve
    pr: Curve
    info: dict = field(default_factory=dict)


def _vectors(scores, labels):
    """Extract aligned 1-D score/label arrays.

    ``scores`` may be a ScoreTable (labels default to its universe's)
    or a plain array (labels required).
    """
    if hasattr(scores, "score_vector"):
        table = scores
        if labels is None:
            labels = table.universe.label_vector
        scores = table.score_vector
    elif labels is None:
        raise ValueError("labels are required when scores is a plain array")
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels).ravel()
    if scores.shape != labels.shape:
        raise ValueError(
            f"scores and labels differ in length: {scores.shape} "
            f"vs {labels.shape}")
    if scores.size == 0:
        raise ValueError("empty score vector")
    if not np.isfinite(scores).all():
        raise ValueError("scores contain non-finite values")
    return scores, (labels != 0)


def precision(cm):
    """tp / (tp + fp); 0 when nothing is predicted positive."""
    denom = cm.tp + cm.fp
    return cm.tp / denom if denom else 0.0


def recall(cm):
    """tp / (tp + fn); 0 when there are no positives."""
    denom = cm.tp + cm.fn
    return cm.tp / denom if denom else 0.0


def f1(cm):
    """Harmonic mean of precision and recall; 0 when both are 0."""
    p = precision(cm)
    r = recall(cm)
    denom = p + r
    return 2.0 * p * r / denom if denom else 0.0


def confusion_at(scores, labels=None, threshold=0.0):
    """Confusion counts for the decision rule score >= threshold."""
    s, y = _vectors(scores, labels)
    pred = s >= threshold
    tp = int(np.count_nonzero(pred & y))
    fp = int(np.count_nonzero(pred & ~y))
    fn = int(np.count_nonzero(~pred & y))
    tn = int(np.count_nonzero(~pred & ~y))
    return ConfusionMatrix(tp=tp, fp=fp, fn=fn, tn=tn)


def _sweep(s, y):
    """Cumulative counts at every distinct-score threshold.

    Returns (thresholds, tp, fp, n_pos, n_neg) with thresholds strictly
    descending; entry i counts predictions at threshold thresholds[i]
    (everything scoring >= it is positive). Tied scores collapse into
    one step.
    """
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    y_sorted = y[order].astype(np.int64)
    tp_cum = np.cumsum(y_sorted)
    fp_cum = np.cumsum(1 - y_sorted)
    ends = np.nonzero(np.diff(s_sorted) != 0.0)[0]
    ends = np.append(ends, len(s_sorted) - 1)
    return (s_sorted[ends], tp_cum[ends], fp_cum[ends],
            int(tp_cum[-1]), int(fp_cum[-1]))


def _f1_vector(tp, fp, n_pos):
    """Per-threshold F1 using the same formula chain as f1(cm)."""
    predicted = tp + fp
    p = np.divide(tp, predicted, out=np.zeros(len(tp)),
                  where=predicted > 0)
    r = tp / n_pos
    denom = p + r
    return np.divide(2.0 * p * r, denom, out=np.zeros(len(tp)),
                     where=denom > 0)


def optimal_threshold(scores, labels=None):
    """Threshold maximizing F1, swept over every distinct score.

    Candidates are all distinct score values plus one value above the
    maximum (predict nothing); ties go to the larger threshold, i.e.
    the more conservative decision rule. Returns (threshold, f1).
    """
    s, y = _vectors(scores, labels)
    thresholds, tp, fp, n_pos, _ = _sweep(s, y)
    if n_pos == 0:
        raise DegenerateLabelsError(
            "threshold tuning needs at least one positive label")
    thresholds = np.concatenate(
        [[thresholds[0] + ABOVE_MAX_STEP], thresholds])
    tp = np.concatenate([[0], tp])
    fp = np.concatenate([[0], fp])
    f1s = _f1_vector(tp, fp, n_pos)
    best = int(np.argmax(f1s))
    return float(thresholds[best]), float(f1s[best])


def roc_curve(scores, labels=None):
    """ROC points (FPR, TPR) at every distinct-score threshold.

    Anchored at (0, 0) with an infinite threshold; the lowest threshold
    predicts everything positive, so the curve ends at (1, 1).
    """
    s, y = _vectors(scores, labels)
    thresholds, tp, fp, n_pos, n_neg = _sweep(s, y)
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabelsError(
            "ROC needs at least one positive and one negative label")
    thresholds = np.concatenate([[math.inf], thresholds])
    tpr = np.concatenate([[0.0], tp / n_pos])
    fpr = np.concatenate([[0.0], fp / n_neg])
    return Curve(kind="roc", thresholds=thresholds, x=fpr, y=tpr)


def auroc(curve):
    """Trapezoidal area under a ROC curve."""
    return float(trapezoid(curve.y, curve.x))


def pr_curve(scores, labels=None):
    """PR points (recall, precision) at every distinct-score threshold.

    The curve starts at the lowest-recall point actually achieved (the
    highest threshold); no synthetic recall-0 anchor is added.
    """
    s, y = _vectors(scores, labels)
    thresholds, tp, fp, n_pos, _ = _sweep(s, y)
    if n_pos == 0:
        raise DegenerateLabelsError(
            "a PR curve needs at least one positive label")
    predicted = tp + fp
    prec = tp / predicted
    rec = tp / n_pos
    return Curve(kind="pr", thresholds=thresholds, x=rec, y=prec)


def aupr(curve):
    """Trapezoidal area under a PR curve, integrated over recall."""
    return float(trapezoid(curve.y, curve.x))


def average_precision(scores, labels=None):
    """Step-sum area: sum of precision * recall increments.

    The standard alternative to trapezoidal AUPR; reported alongside
    it because the two differ off tie plateaus.
    """
    s, y = _vectors(scores, labels)
    _, tp, fp, n_pos, _ = _sweep(s, y)
    if n_pos == 0:
        raise DegenerateLabelsError(
            "average precision needs at least one positive label")
    prec = tp / (tp + fp)
    rec = tp / n_pos
    steps = np.diff(np.concatenate([[0.0], rec]))
    return float(np.sum(prec * steps))


def evaluate(scores, labels=None, threshold=0.0, model="", info=None):
    """Assemble the full evaluation report at a fixed threshold."""
    s, y = _vectors(scores, labels)
    if hasattr(scores, "model") and not model:
        model = scores.model
    cm = confusion_at(s, y, threshold)
    roc = roc_curve(s, y)
    pr = pr_curve(s, y)
    return EvaluationReport(
        model=model,
        threshold=float(threshold),
        confusion=cm,
        precision=precision(cm),
        recall=recall(cm),
        f1=f1(cm),
        auroc=auroc(roc),
        aupr=aupr(pr),
        average_precision=average_precision(s, y),
        roc=roc,
        pr=pr,
        info=dict(info or {}))


def _round6(value):
    """Round floats to 6 significant digits for stable artifacts."""
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return value
    if isinstance(value, int):
        return value
    return float(f"{value:.6g}")


def report_dict(report):
    """JSON-ready dictionary form of an evaluation report."""
    cm = report.confusion
    return {
        "model": report.model,
        "threshold": _round6(report.threshold),
        "confusion": {"tp": cm.tp, "fp": cm.fp, "fn": cm.fn, "tn": cm.tn},
        "metrics": {
            "precision": _round6(report.precision),
            "recall": _round6(report.recall),
            "f1": _round6(report.f1),
            "auroc": _round6(report.auroc),
            "aupr": _round6(report.aupr),
            "average_precision": _round6(report.average_precision),
        },
        "info": {key: _round6(val) for key, val in sorted(report.info.items())},
    }


def write_report(report, dest):
    """Write one model's evaluation report as deterministic JSON."""
    payload = json.dumps(report_dict(report), indent=2, sort_keys=True)
    if hasattr(dest, "write"):
        dest.write(payload + "\n")
    else:
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(payload + "\n")
    return dest


def write_curve(curve, dest):
    """Write curve points as CSV with columns threshold, x, y."""

    def _write(fh):
        fh.write("threshold,x,y\n")
        for t, x, y in zip(curve.thresholds, curve.x, curve.y):
            fh.write(f"{t:.6g},{x:.6g},{y:.6g}\n")

    if hasattr(dest, "write"):
        _write(dest)
    else:
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            _write(fh)
    return dest
