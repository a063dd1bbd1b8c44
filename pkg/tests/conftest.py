"""Shared helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from multialign import Dataset, LabelMatrix, SubjectData


def align_signs(reference: np.ndarray, other: np.ndarray) -> np.ndarray:
    """Flip columns of ``other`` so their dominant entries match ``reference``."""
    out = other.copy()
    for j in range(out.shape[1]):
        i = np.abs(reference[:, j]).argmax()
        if reference[i, j] * out[i, j] < 0:
            out[:, j] = -out[:, j]
    return out


def assert_close_up_to_sign(a: np.ndarray, b: np.ndarray, atol: float) -> None:
    np.testing.assert_allclose(a, align_signs(a, b), atol=atol, rtol=0)


def random_labels(rng: np.random.Generator, n_classes: int, n_timepoints: int,
                  rest_fraction: float = 0.0) -> LabelMatrix:
    """Random run-structured labels covering every class at least once."""
    classes = []
    while len(classes) < n_timepoints:
        c = int(rng.integers(n_classes))
        run = int(rng.integers(1, 4))
        classes.extend([c] * run)
    classes = classes[:n_timepoints]
    # make sure every class shows up
    for c in range(n_classes):
        if c not in classes:
            pos = int(rng.integers(n_timepoints))
            classes[pos] = c
    onehot = np.zeros((n_classes, n_timepoints))
    onehot[classes, np.arange(n_timepoints)] = 1.0
    if rest_fraction > 0:
        n_rest = int(rest_fraction * n_timepoints)
        rest = rng.choice(n_timepoints, size=n_rest, replace=False)
        onehot[:, rest] = 0.0
    return LabelMatrix(onehot)


def random_dataset(rng: np.random.Generator, n_subjects: int, n_timepoints: int,
                   n_voxels: int, n_classes: int,
                   rest_fraction: float = 0.0) -> Dataset:
    """Random dataset with one shared label layout across subjects."""
    labels = random_labels(rng, n_classes, n_timepoints, rest_fraction)
    subjects = tuple(
        SubjectData(f"s{i}", rng.standard_normal((n_timepoints, n_voxels)))
        for i in range(n_subjects)
    )
    return Dataset(subjects, tuple(labels for _ in subjects),
                   tuple(f"c{m}" for m in range(n_classes)))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260815)
