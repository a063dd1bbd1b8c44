"""Between-subject correlation profiles and classification scores.

The four correlation statistics compare mapped subjects pairwise: whole
time series (``rho1``), matching stimulus instances (``rho2``), distinct
instances of the same class (``rho3``), and instances of different classes
(``rho4``).  A *stimulus instance* is a maximal run of consecutive time
points carrying the same class label; its block of mapped rows is flattened
before the correlation.  All statistics are reported as mean and standard
deviation over the enumerated comparisons, together with the comparison
count.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .data import LabelMatrix
from .errors import AdvisoryWarning, InvalidArgumentError, InvalidDataError, NumericError


def pearson(a, b) -> float:
    """Pearson correlation of two equally sized arrays, flattened."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size != b.size:
        raise InvalidDataError(f"size mismatch: {a.size} vs {b.size}")
    if a.size < 2:
        raise InvalidDataError("correlation needs at least 2 entries")
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise InvalidDataError("correlation input contains non-finite entries")
    a = a - a.mean()
    b = b - b.mean()
    na = float(np.sqrt(a @ a))
    nb = float(np.sqrt(b @ b))
    if na == 0.0 or nb == 0.0:
        raise NumericError("correlation undefined: an input has zero variance")
    return float(np.clip((a @ b) / (na * nb), -1.0, 1.0))


@dataclass(frozen=True)
class MetricSummary:
    """Mean and standard deviation over ``pairs`` enumerated comparisons."""

    mean: float | None
    std: float | None
    pairs: int

    def to_json_dict(self) -> dict:
        return {"mean": self.mean, "std": self.std, "pairs": self.pairs}


def _summarize(values: list[float]) -> MetricSummary:
    if not values:
        return MetricSummary(None, None, 0)
    arr = np.asarray(values, dtype=float)
    return MetricSummary(float(arr.mean()), float(arr.std()), int(arr.size))


@dataclass(frozen=True)
class InstanceRun:
    """A maximal run of consecutive time points sharing one class label."""

    class_index: int
    start: int
    stop: int  # half-open

    @property
    def length(self) -> int:
        return self.stop - self.start


def class_instances(labels: LabelMatrix) -> list[InstanceRun]:
    """Stimulus instances of a label matrix, in temporal order.

    Unlabeled (rest) points break runs: a class run cannot span a rest gap.
    """
    classes = labels.class_of()
    runs = []
    start = None
    current = -1
    for t, c in enumerate(classes):
        if c != current:
            if current >= 0:
                runs.append(InstanceRun(current, start, t))
            start = t if c >= 0 else None
            current = c
    if current >= 0:
        runs.append(InstanceRun(current, start, len(classes)))
    return runs


def _as_arrays(mapped) -> list[np.ndarray]:
    arrays = []
    for idx, z in enumerate(mapped):
        z = np.asarray(getattr(z, "features", z), dtype=float)
        if z.ndim != 2:
            raise InvalidDataError(f"mapped entry {idx} must be 2-D")
        arrays.append(z)
    if len(arrays) < 2:
        raise InvalidArgumentError("need at least two subjects to correlate")
    return arrays


def _shared_runs(labels, n_subjects: int) -> list[InstanceRun]:
    labels = list(labels)
    if len(labels) != n_subjects:
        raise InvalidDataError(f"{len(labels)} label matrices for {n_subjects} subjects")
    runs = class_instances(labels[0])
    for idx, lab in enumerate(labels[1:], start=1):
        if class_instances(lab) != runs:
            raise InvalidDataError(
                f"subject {idx} has a different stimulus-instance layout than "
                "subject 0; instance metrics need a shared layout"
            )
    if not runs:
        raise InvalidDataError("labels contain no stimulus instances")
    return runs


def _block(z: np.ndarray, run: InstanceRun, length: int | None = None) -> np.ndarray:
    stop = run.stop if length is None else run.start + length
    return z[run.start:stop]


def _pairs(n: int):
    for i in range(n):
        for j in range(i + 1, n):
            yield i, j


def rho1(mapped, mask=None) -> MetricSummary:
    """Whole-series correlation over unordered subject pairs.

    ``mask`` optionally restricts the rows entering the comparison (used to
    exclude unlabeled time points on request).
    """
    arrays = _as_arrays(mapped)
    if mask is not None:
        mask = np.asarray(mask)
        arrays = [z[mask] for z in arrays]
    values = [pearson(arrays[i], arrays[j]) for i, j in _pairs(len(arrays))]
    return _summarize(values)


def rho2(mapped, labels) -> MetricSummary:
    """Correlation of matching instances (same class, same position)."""
    arrays = _as_arrays(mapped)
    runs = _shared_runs(labels, len(arrays))
    values = []
    for i, j in _pairs(len(arrays)):
        for run in runs:
            values.append(pearson(_block(arrays[i], run), _block(arrays[j], run)))
    return _summarize(values)


def _runs_by_class(runs, n_classes: int) -> list[list[InstanceRun]]:
    by_class = [[] for _ in range(n_classes)]
    for run in runs:
        by_class[run.class_index].append(run)
    return by_class


def _truncation_advisory(emitted: list, run_a: InstanceRun, run_b: InstanceRun):
    if not emitted:
        warnings.warn(
            "comparing instances of unequal length; blocks truncated to the "
            f"shorter ({min(run_a.length, run_b.length)} time points)",
            AdvisoryWarning,
            stacklevel=4,
        )
        emitted.append(True)


def rho3(mapped, labels) -> MetricSummary:
    """Correlation of distinct same-class instances across subjects.

    Enumerates ordered pairs of distinct instances within each class; classes
    with a single instance contribute nothing.  Unequal-length instances are
    truncated to the shorter with an advisory.
    """
    arrays = _as_arrays(mapped)
    runs = _shared_runs(labels, len(arrays))
    by_class = _runs_by_class(runs, labels[0].n_classes)
    emitted: list = []
    values = []
    for i, j in _pairs(len(arrays)):
        for class_runs in by_class:
            for a, run_a in enumerate(class_runs):
                for b, run_b in enumerate(class_runs):
                    if a == b:
                        continue
                    length = min(run_a.length, run_b.length)
                    if run_a.length != run_b.length:
                        _truncation_advisory(emitted, run_a, run_b)
                    values.append(
                        pearson(_block(arrays[i], run_a, length),
                                _block(arrays[j], run_b, length))
                    )
    return _summarize(values)


def rho4(mapped, labels) -> MetricSummary:
    """Correlation of different-class instances across subjects.

    Enumerates ordered pairs of distinct classes; every instance of the first
    class (in the first subject of the pair) meets every instance of the
    second class (in the second subject).
    """
    arrays = _as_arrays(mapped)
    runs = _shared_runs(labels, len(arrays))
    by_class = _runs_by_class(runs, labels[0].n_classes)
    emitted: list = []
    values = []
    for i, j in _pairs(len(arrays)):
        for m, runs_m in enumerate(by_class):
            for n, runs_n in enumerate(by_class):
                if m == n:
                    continue
                for run_a in runs_m:
                    for run_b in runs_n:
                        length = min(run_a.length, run_b.length)
                        if run_a.length != run_b.length:
                            _truncation_advisory(emitted, run_a, run_b)
                        values.append(
                            pearson(_block(arrays[i], run_a, length),
                                    _block(arrays[j], run_b, length))
                        )
    return _summarize(values)


@dataclass(frozen=True)
class CorrelationReport:
    """The four correlation statistics for one set of mapped subjects."""

    rho1: MetricSummary
    rho2: MetricSummary
    rho3: MetricSummary
    rho4: MetricSummary
    advisories: tuple[str, ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "rho1": self.rho1.to_json_dict(),
            "rho2": self.rho2.to_json_dict(),
            "rho3": self.rho3.to_json_dict(),
            "rho4": self.rho4.to_json_dict(),
            "advisories": list(self.advisories),
        }


def correlation_report(mapped, labels, rho1_labeled_only: bool = False) -> CorrelationReport:
    """Compute all four correlation statistics.

    ``rho1`` uses every time point unless ``rho1_labeled_only`` restricts it
    to labeled ones; the instance statistics always use labeled points only
    (instances cannot span rest gaps).
    """
    labels = list(labels)
    mask = labels[0].labeled_mask if rho1_labeled_only else None
    advisories: list[str] = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", AdvisoryWarning)
        r1 = rho1(mapped, mask=mask)
        r2 = rho2(mapped, labels)
        r3 = rho3(mapped, labels)
        r4 = rho4(mapped, labels)
        advisories.extend(str(w.message) for w in caught
                          if issubclass(w.category, AdvisoryWarning))
    return CorrelationReport(r1, r2, r3, r4, tuple(dict.fromkeys(advisories)))


def accuracy(truth, predicted) -> float:
    """Fraction of predictions matching the truth."""
    truth = np.asarray(truth).ravel()
    predicted = np.asarray(predicted).ravel()
    if truth.size != predicted.size:
        raise InvalidDataError(f"size mismatch: {truth.size} vs {predicted.size}")
    if truth.size == 0:
        raise InvalidDataError("cannot score an empty prediction set")
    return float((truth == predicted).mean())


def _binary_auc(positive: np.ndarray, scores: np.ndarray) -> float:
    ranks = rankdata(scores)
    n_pos = int(positive.sum())
    n_neg = positive.size - n_pos
    rank_sum = float(ranks[positive].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def one_vs_rest_auc(truth, scores, classes=None) -> float:
    """Macro-averaged one-vs-rest area under the ROC curve.

    ``scores`` is (n, classes) of per-class decision values, or a length-n
    vector of positive-class scores for binary problems.  Ties receive the
    conventional rank-average treatment.  Classes absent from ``truth``
    contribute nothing; a single-class truth makes the AUC undefined.
    """
    truth = np.asarray(truth).ravel()
    scores = np.asarray(scores, dtype=float)
    present = np.unique(truth)
    if present.size < 2:
        raise NumericError("AUC undefined: truth contains a single class")
    if scores.ndim == 1:
        if scores.size != truth.size:
            raise InvalidDataError(f"size mismatch: {truth.size} vs {scores.size}")
        if present.size != 2:
            raise InvalidDataError(
                "a score vector implies a binary problem; got "
                f"{present.size} classes"
            )
        return _binary_auc(truth == present[1], scores)
    if scores.shape[0] != truth.size:
        raise InvalidDataError(
            f"scores have {scores.shape[0]} rows for {truth.size} truths"
        )
    if classes is None:
        classes = np.arange(scores.shape[1])
    classes = np.asarray(classes).ravel()
    if classes.size != scores.shape[1]:
        raise InvalidDataError(
            f"{classes.size} class ids for {scores.shape[1]} score columns"
        )
    aucs = [
        _binary_auc(truth == c, scores[:, col])
        for col, c in enumerate(classes)
        if c in present
    ]
    return float(np.mean(aucs))


@dataclass(frozen=True)
class ClassificationScores:
    """Accuracy plus (when defined) macro one-vs-rest AUC."""

    accuracy: float
    auc: float | None
    advisories: tuple[str, ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "auc": self.auc,
            "advisories": list(self.advisories),
        }


def classification_scores(truth, predicted, scores=None, classes=None) -> ClassificationScores:
    """Bundle accuracy and AUC for one evaluation.

    ``predicted`` holds hard labels; ``scores`` (optional) holds the graded
    decision values the AUC needs.  Without scores, binary 0/1 predictions
    are used as degenerate scores; otherwise — and whenever the truth has a
    single class — the AUC is reported as absent with an advisory rather
    than failing the whole evaluation.
    """
    acc = accuracy(truth, predicted)
    advisories = []
    auc = None
    truth_arr = np.asarray(truth).ravel()
    if np.unique(truth_arr).size < 2:
        advisories.append("AUC undefined: truth contains a single class")
    else:
        if scores is None:
            if np.unique(truth_arr).size == 2:
                scores = np.asarray(predicted, dtype=float)
            else:
                advisories.append("AUC unavailable: no decision scores provided")
        if scores is not None:
            auc = one_vs_rest_auc(truth, scores, classes=classes)
    return ClassificationScores(acc, auc, tuple(advisories))
