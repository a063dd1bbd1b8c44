"""Multi-subject functional alignment engines.

All methods place subjects into a common space by comparing, per subject,
the ridge-regularized projector onto the column space of the (optionally
label-coupled) response matrix.  The single-shot supervised path (``sha``)
solves one symmetric eigenproblem over the summed projector complements;
the iterative path (``sha_r``) alternates between per-subject ridge maps
and a shared template; the unsupervised path (``rha``) is the identical
pipeline with the trivial identity kernel.  ``none`` is the do-nothing
baseline.

Mapping a held-out subject never materializes the (voxels x voxels) ridge
system: everything is phrased through the thin SVD of the subject's data.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import Dataset, SubjectData, read_matrix_csv, write_matrix_csv
from .errors import AdvisoryWarning, InvalidArgumentError, InvalidDataError, NumericError
from .linalg import regularized_projector, symmetric_eig, truncated_svd
from .supervision import SupervisionKernel, identity_kernel

METHODS = ("none", "rha", "sha", "sha_r")

# Above this many coupled time points the unsupervised path materializes an
# uncomfortably large dense eigenproblem; warn rather than refuse.
_LARGE_EIG_SIZE = 2000


@dataclass(frozen=True)
class FitReport:
    """Diagnostics recorded while fitting an alignment model.

    ``trace_objective`` is ``tr(W^T U W)`` for the single-shot paths (the
    eigenvalue mass of the selected shared directions).  ``pairwise_objective``
    is the summed squared Frobenius distance between the subjects' projected
    shared spaces over unordered subject pairs.  ``residual_objective`` is
    ``sum_i ||P_i W - W||_F^2``; with no ridge it equals the trace objective
    exactly, with ridge the (non-negative) difference is ``projection_gap``.
    ``objective_history`` holds the per-iteration pairwise objective of the
    iterative path.
    """

    method: str
    trace_objective: float | None = None
    pairwise_objective: float | None = None
    residual_objective: float | None = None
    projection_gap: float | None = None
    eigenvalues: tuple[float, ...] | None = None
    objective_history: tuple[float, ...] | None = None
    advisories: tuple[str, ...] = ()


@dataclass(frozen=True)
class AlignmentModel:
    """A fitted alignment: shared space, time-point template, and mapping data.

    ``shared_space`` has orthonormal columns (one per shared dimension) and as
    many rows as the supervision kernel has classes (``sha``/``sha_r``) or
    coupled time points (``rha``).  ``template`` has one row per coupled time
    point; mapping regresses a subject's responses onto it.  ``labeled`` holds
    the indices of those time points in the full time axis.  For the ``none``
    baseline both factors are absent and mapping is the identity.
    """

    method: str
    shared_space: np.ndarray | None
    template: np.ndarray | None
    epsilon: float
    gamma: float | None
    k: int
    labeled: np.ndarray | None
    fit_report: FitReport | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidArgumentError(
                f"method must be one of {METHODS}, got {self.method!r}"
            )


@dataclass(frozen=True)
class MappedFeatures:
    """One subject's responses carried into the shared space (rows = time)."""

    subject_id: str
    features: np.ndarray


def pairwise_objective(mapped, kernels=None) -> float:
    """Summed squared distance between subjects over unordered pairs.

    ``sum_{i<j} ||M_i - M_j||_F^2`` where ``M_i`` is subject ``i``'s entry of
    ``mapped``; when ``kernels`` is given each entry is first restricted to
    its kernel's coupled time points and premultiplied by the kernel, so the
    comparison happens in label space.
    """
    mats = []
    for idx, z in enumerate(mapped):
        z = np.asarray(z, dtype=float)
        if z.ndim != 2:
            raise InvalidDataError(f"mapped entry {idx} must be 2-D, got ndim={z.ndim}")
        if kernels is not None:
            ker = kernels[idx]
            z = ker.matrix @ z[ker.labeled]
        mats.append(z)
    if len(mats) < 2:
        raise InvalidArgumentError("need at least two subjects to compare")
    shape = mats[0].shape
    for idx, m in enumerate(mats):
        if m.shape != shape:
            raise InvalidDataError(
                f"mapped entry {idx} has shape {m.shape}, expected {shape}"
            )
    total = 0.0
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            diff = mats[i] - mats[j]
            total += float((diff * diff).sum())
    return total


def _validate_kernels(train: Dataset, kernels) -> list[SupervisionKernel]:
    kernels = list(kernels)
    if len(kernels) != train.n_subjects:
        raise InvalidArgumentError(
            f"{len(kernels)} kernels for {train.n_subjects} subjects"
        )
    first = kernels[0]
    for idx, ker in enumerate(kernels):
        if ker.n_classes != first.n_classes or ker.n_points != first.n_points:
            raise InvalidArgumentError(
                f"kernel {idx} has shape {ker.matrix.shape}, expected "
                f"{first.matrix.shape}; all kernels must share classes and "
                "time points"
            )
        if not np.array_equal(ker.labeled, first.labeled):
            raise InvalidArgumentError(
                f"kernel {idx} couples different time points than kernel 0"
            )
        if ker.labeled.size and ker.labeled.max() >= train.n_timepoints:
            raise InvalidArgumentError(
                f"kernel {idx} indexes time point {int(ker.labeled.max())}, "
                f"but subjects have {train.n_timepoints}"
            )
        if abs(ker.gamma - first.gamma) > 0:
            raise InvalidArgumentError("kernels must share a single gamma")
    return kernels


def _resolve_k(k: int | None, limit: int, default: int) -> int:
    if k is None:
        k = default
    if not 1 <= k <= limit:
        raise InvalidArgumentError(f"k must be in [1, {limit}], got {k}")
    return int(k)


def _coupled_matrix(subject: SubjectData, kernel: SupervisionKernel) -> np.ndarray:
    x = subject.data[kernel.labeled]
    return x if kernel.is_identity else kernel.matrix @ x


def _template_from(shared: np.ndarray, kernels) -> np.ndarray:
    """Average back-projection of the shared space through every kernel."""
    acc = None
    for ker in kernels:
        contrib = shared.T if ker.is_identity else shared.T @ ker.matrix
        acc = contrib.copy() if acc is None else acc + contrib
    return (acc / len(kernels)).T


def _check_finite(name: str, *arrays) -> None:
    for a in arrays:
        if a is not None and not np.isfinite(a).all():
            raise NumericError(f"{name} produced non-finite values")


def _single_shot(train, kernels, epsilon, k, method, streaming):
    size = kernels[0].n_classes
    if size > _LARGE_EIG_SIZE:
        warnings.warn(
            f"assembling a {size} x {size} eigenproblem; this path is meant "
            "for moderate problem sizes",
            AdvisoryWarning,
            stacklevel=3,
        )
    k = _resolve_k(k, size, size if method == "sha" else min(train.n_voxels, size))

    def factor_of(idx):
        m = _coupled_matrix(train.subjects[idx], kernels[idx])
        return regularized_projector(m, epsilon, rank=min(m.shape))

    advisories = []
    u = np.zeros((size, size))
    factors = []
    for idx in range(train.n_subjects):
        proj = factor_of(idx)
        u += np.eye(size) - proj.matrix()
        if proj.rank_deficient:
            advisories.append(
                f"subject {train.subjects[idx].subject_id!r}: coupled matrix is "
                "rank deficient"
            )
        if streaming:
            del proj
        else:
            factors.append(proj.factor)

    eigenvalues, vectors = symmetric_eig(u)
    w = vectors[:, :k]

    # Diagnostics: where each subject's projector carries the shared space.
    projected = []
    for idx in range(train.n_subjects):
        f = factor_of(idx).factor if streaming else factors[idx]
        projected.append(f @ (f.T @ w))
    trace = float(np.trace(w.T @ (u @ w)))
    pairwise = pairwise_objective(projected)
    residual = float(sum(((p - w) ** 2).sum() for p in projected))
    report = FitReport(
        method=method,
        trace_objective=trace,
        pairwise_objective=pairwise,
        residual_objective=residual,
        projection_gap=trace - residual,
        eigenvalues=tuple(float(v) for v in eigenvalues),
        advisories=tuple(advisories),
    )
    template = _template_from(w, kernels)
    _check_finite("alignment fit", w, template)
    return w, template, k, report


def fit_sha(train: Dataset, kernels, epsilon: float = 1e-4, k: int | None = None,
            streaming: bool = False) -> AlignmentModel:
    """Single-shot supervised alignment.

    Per subject, the label-coupled responses ``K_i X_i`` define a
    ridge-regularized projector ``P_i``; the shared space ``W`` collects the
    ``k`` eigenvectors with smallest eigenvalue of ``U = sum_i (I - P_i)``,
    i.e. the directions of label space every subject's responses can express.
    The time-point template is the kernel-average back-projection of ``W``.

    Parameters
    ----------
    train : Dataset
        Normalized training subjects.
    kernels : sequence of SupervisionKernel
        One kernel per subject, sharing class count, coupled time points and
        gamma.
    epsilon : float
        Ridge term of the per-subject projectors.
    k : int, optional
        Shared-space dimension, ``1 <= k <= classes``; defaults to the class
        count.
    streaming : bool
        Accumulate ``U`` subject-by-subject without retaining per-subject
        projector factors (they are recomputed once for diagnostics).  Same
        result, smaller peak memory.
    """
    kernels = _validate_kernels(train, kernels)
    w, template, k, report = _single_shot(train, kernels, epsilon, k, "sha", streaming)
    return AlignmentModel(
        method="sha",
        shared_space=w,
        template=template,
        epsilon=float(epsilon),
        gamma=kernels[0].gamma,
        k=k,
        labeled=kernels[0].labeled.copy(),
        fit_report=report,
    )


def fit_rha(train: Dataset, epsilon: float = 1e-4, k: int | None = None,
            streaming: bool = False) -> AlignmentModel:
    """Unsupervised alignment: the identical pipeline under an identity kernel.

    Every time point acts as its own class, the summed projector complement
    is (time points x time points), and the template coincides with the
    shared space.  ``k`` defaults to ``min(voxels, time points)``.
    """
    kernels = [identity_kernel(train.n_timepoints) for _ in range(train.n_subjects)]
    w, template, k, report = _single_shot(train, kernels, epsilon, k, "rha", streaming)
    return AlignmentModel(
        method="rha",
        shared_space=w,
        template=template,
        epsilon=float(epsilon),
        gamma=None,
        k=k,
        labeled=kernels[0].labeled.copy(),
        fit_report=report,
    )


def fit_sha_r(train: Dataset, kernels, epsilon: float = 1e-4, k: int | None = None,
              iterations: int = 10, initial_shared=None) -> AlignmentModel:
    """Iterative supervised alignment by alternating minimization.

    Alternates between per-subject ridge maps onto the current template and
    re-averaging the template from the mapped responses.  After ``iterations``
    rounds the shared space is the top-``k`` left singular basis of the final
    template and the time-point template is rebuilt through the kernels, as
    in the single-shot path.

    ``initial_shared`` seeds the template (classes x columns); by default the
    mean coupled response is used.  The recorded ``objective_history`` holds
    the pairwise objective of the mapped responses after each round.
    """
    kernels = _validate_kernels(train, kernels)
    size = kernels[0].n_classes
    k = _resolve_k(k, size, size)
    if iterations < 1:
        raise InvalidArgumentError(f"iterations must be >= 1, got {iterations}")

    factors = []
    advisories = []
    coupled = []
    for idx in range(train.n_subjects):
        m = _coupled_matrix(train.subjects[idx], kernels[idx])
        proj = regularized_projector(m, epsilon, rank=min(m.shape))
        if proj.rank_deficient:
            advisories.append(
                f"subject {train.subjects[idx].subject_id!r}: coupled matrix is "
                "rank deficient"
            )
        factors.append(proj.factor)
        coupled.append(m)

    if initial_shared is None:
        template = sum(coupled) / len(coupled)
    else:
        template = np.asarray(initial_shared, dtype=float)
        if template.ndim != 2 or template.shape[0] != size:
            raise InvalidArgumentError(
                f"initial_shared must have {size} rows, got shape {template.shape}"
            )
    if template.shape[1] < k:
        raise InvalidArgumentError(
            f"initial template has {template.shape[1]} columns, cannot extract k={k}"
        )

    history = []
    for _ in range(iterations):
        mapped = [f @ (f.T @ template) for f in factors]
        history.append(pairwise_objective(mapped))
        template = sum(mapped) / len(mapped)

    w = truncated_svd(template, k).left
    projected = [f @ (f.T @ w) for f in factors]
    trace = None
    pairwise = pairwise_objective(projected)
    residual = float(sum(((p - w) ** 2).sum() for p in projected))
    report = FitReport(
        method="sha_r",
        trace_objective=trace,
        pairwise_objective=pairwise,
        residual_objective=residual,
        objective_history=tuple(history),
        advisories=tuple(advisories),
    )
    out_template = _template_from(w, kernels)
    _check_finite("alignment fit", w, out_template)
    return AlignmentModel(
        method="sha_r",
        shared_space=w,
        template=out_template,
        epsilon=float(epsilon),
        gamma=kernels[0].gamma,
        k=k,
        labeled=kernels[0].labeled.copy(),
        fit_report=report,
    )


def fit_none(train: Dataset) -> AlignmentModel:
    """The do-nothing baseline: mapping is the identity on raw responses."""
    return AlignmentModel(
        method="none",
        shared_space=None,
        template=None,
        epsilon=0.0,
        gamma=None,
        k=train.n_voxels,
        labeled=None,
        fit_report=FitReport(method="none"),
    )


def fit(method: str, train: Dataset, kernels=None, *, epsilon: float = 1e-4,
        k: int | None = None, iterations: int = 10) -> AlignmentModel:
    """Dispatch to the fit routine named by ``method``."""
    if method == "sha":
        return fit_sha(train, kernels, epsilon=epsilon, k=k)
    if method == "sha_r":
        return fit_sha_r(train, kernels, epsilon=epsilon, k=k, iterations=iterations)
    if method == "rha":
        return fit_rha(train, epsilon=epsilon, k=k)
    if method == "none":
        return fit_none(train)
    raise InvalidArgumentError(f"method must be one of {METHODS}, got {method!r}")


def map_subject(model: AlignmentModel, subject: SubjectData,
                epsilon: float | None = None) -> MappedFeatures:
    """Carry one subject's responses into the model's shared space.

    Solves the ridge regression of the subject's responses (at the template's
    time points) onto the template and applies the resulting voxel map to the
    full time series, all through the thin SVD of the data — the
    (voxels x voxels) system is never formed.  Mapping needs no labels.
    """
    x = subject.data
    if model.method == "none":
        return MappedFeatures(subject.subject_id, x.copy())
    if model.template is None or model.labeled is None:
        raise InvalidArgumentError(f"model for method {model.method!r} has no template")
    eps = model.epsilon if epsilon is None else float(epsilon)
    if not np.isfinite(eps) or eps < 0:
        raise InvalidArgumentError(f"epsilon must be a finite value >= 0, got {epsilon}")
    labeled = model.labeled
    if labeled.max() >= x.shape[0] or labeled.size != model.template.shape[0]:
        raise InvalidArgumentError(
            f"subject {subject.subject_id!r} has {x.shape[0]} time points; the "
            f"model's template expects {model.template.shape[0]} coupled points "
            f"within the time axis"
        )
    x_fit = x[labeled]
    svd = truncated_svd(x_fit, min(x_fit.shape))
    s = svd.singular_values
    if eps == 0.0 and (s <= 1e-12).any():
        raise NumericError(
            "mapping is singular: zero singular value with epsilon = 0"
        )
    coeff = svd.right * (s / (s * s + eps))
    z = x @ (coeff @ (svd.left.T @ model.template))
    _check_finite("mapping", z)
    return MappedFeatures(subject.subject_id, z)


def map_dataset(model: AlignmentModel, dataset: Dataset) -> list[MappedFeatures]:
    """Map every subject of a dataset; order follows the dataset."""
    return [map_subject(model, subj) for subj in dataset.subjects]


def save_model(model: AlignmentModel, out_dir) -> Path:
    """Serialize a model to a directory: model.json plus w.csv / g.csv."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dims = None
    if model.shared_space is not None:
        dims = {
            "shared_space": list(model.shared_space.shape),
            "template": list(model.template.shape),
        }
    meta = {
        "method": model.method,
        "epsilon": model.epsilon,
        "gamma": model.gamma,
        "k": model.k,
        "dims": dims,
        "labeled": None if model.labeled is None else [int(i) for i in model.labeled],
    }
    path = out_dir / "model.json"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if model.shared_space is not None:
        write_matrix_csv(out_dir / "w.csv", model.shared_space)
        write_matrix_csv(out_dir / "g.csv", model.template)
    return path


def load_model(model_dir) -> AlignmentModel:
    """Load a model serialized by :func:`save_model` (diagnostics not kept)."""
    model_dir = Path(model_dir)
    with open(model_dir / "model.json", "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    shared = template = labeled = None
    if meta.get("dims") is not None:
        shared = read_matrix_csv(model_dir / "w.csv")
        template = read_matrix_csv(model_dir / "g.csv")
        expected = meta["dims"]
        if list(shared.shape) != expected["shared_space"]:
            raise InvalidDataError(
                f"w.csv has shape {list(shared.shape)}, model.json says "
                f"{expected['shared_space']}"
            )
        if list(template.shape) != expected["template"]:
            raise InvalidDataError(
                f"g.csv has shape {list(template.shape)}, model.json says "
                f"{expected['template']}"
            )
        labeled = np.asarray(meta["labeled"], dtype=int)
    return AlignmentModel(
        method=meta["method"],
        shared_space=shared,
        template=template,
        epsilon=float(meta["epsilon"]),
        gamma=None if meta["gamma"] is None else float(meta["gamma"]),
        k=int(meta["k"]),
        labeled=labeled,
    )
