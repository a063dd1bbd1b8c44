"""Alignment engines: single-shot, iterative, unsupervised, and mapping."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multialign import (
    Dataset,
    InvalidArgumentError,
    LabelMatrix,
    NumericError,
    SubjectData,
    fit,
    fit_none,
    fit_rha,
    fit_sha,
    fit_sha_r,
    kernels_for,
    load_model,
    map_dataset,
    map_subject,
    normalize,
    pairwise_objective,
    rho1,
    save_model,
    supervision_kernel,
)
from conftest import assert_close_up_to_sign, random_dataset


def _fitted(rng, n_subjects=4, n_t=24, n_v=15, n_classes=3, **kw):
    ds = normalize(random_dataset(rng, n_subjects, n_t, n_v, n_classes))
    kernels = kernels_for(ds)
    return ds, kernels, fit_sha(ds, kernels, **kw)


class TestPairwiseObjective:
    def test_two_subjects_is_squared_distance(self, rng):
        a, b = rng.standard_normal((2, 5, 3))
        assert pairwise_objective([a, b]) == pytest.approx(((a - b) ** 2).sum())

    @given(s=st.integers(2, 6), n=st.integers(1, 5), m=st.integers(1, 4),
           seed=st.integers(0, 10_000))
    @settings(max_examples=50, deadline=None)
    def test_equals_scaled_deviation_from_mean(self, s, n, m, seed):
        # sum_{i<j} ||M_i - M_j||^2 == S * sum_i ||M_i - mean||^2
        mats = np.random.default_rng(seed).standard_normal((s, n, m))
        mean = mats.mean(axis=0)
        grouped = s * sum(((mi - mean) ** 2).sum() for mi in mats)
        assert pairwise_objective(list(mats)) == pytest.approx(grouped, abs=1e-8, rel=1e-10)

    def test_kernel_restriction(self, rng):
        ds = random_dataset(rng, 2, 10, 4, 2)
        kernels = kernels_for(ds, gamma=0.01)
        zs = [s.data for s in ds.subjects]
        expected = ((kernels[0].matrix @ zs[0][kernels[0].labeled]
                     - kernels[1].matrix @ zs[1][kernels[1].labeled]) ** 2).sum()
        assert pairwise_objective(zs, kernels) == pytest.approx(expected)

    def test_single_subject_rejected(self, rng):
        with pytest.raises(InvalidArgumentError):
            pairwise_objective([rng.standard_normal((3, 2))])


class TestFitSha:
    def test_shapes_and_orthonormality(self, rng):
        ds, kernels, model = _fitted(rng)
        assert model.shared_space.shape == (3, 3)
        assert model.template.shape == (24, 3)
        np.testing.assert_allclose(
            model.shared_space.T @ model.shared_space, np.eye(3), atol=1e-8
        )
        assert model.k == 3 and model.method == "sha"

    def test_trace_objective_matches_dense_assembly(self, rng):
        # oracle: assemble U densely via direct solves, eigendecompose it
        ds, kernels, model = _fitted(rng, n_subjects=3)
        eps = model.epsilon
        u = np.zeros((3, 3))
        for subj, ker in zip(ds.subjects, kernels):
            m = ker.matrix @ subj.data[ker.labeled]
            u += np.eye(3) - m @ np.linalg.solve(m.T @ m + eps * np.eye(m.shape[1]), m.T)
        values = np.linalg.eigvalsh(u)
        assert model.fit_report.trace_objective == pytest.approx(
            values.sum(), abs=1e-8
        )
        np.testing.assert_allclose(
            np.asarray(model.fit_report.eigenvalues), values, atol=1e-8
        )

    def test_k_selects_smallest_eigenvalues(self, rng):
        ds, kernels, full = _fitted(rng, n_classes=4)
        partial = fit_sha(ds, kernels, k=2)
        np.testing.assert_allclose(
            partial.shared_space, full.shared_space[:, :2], atol=1e-10
        )
        assert partial.fit_report.trace_objective <= full.fit_report.trace_objective + 1e-12

    def test_pairwise_objective_recorded_consistently(self, rng):
        ds, kernels, model = _fitted(rng)
        w = model.shared_space
        projected = []
        for subj, ker in zip(ds.subjects, kernels):
            m = ker.matrix @ subj.data[ker.labeled]
            p = m @ np.linalg.solve(m.T @ m + model.epsilon * np.eye(m.shape[1]), m.T)
            projected.append(p @ w)
        assert model.fit_report.pairwise_objective == pytest.approx(
            pairwise_objective(projected), abs=1e-8
        )

    def test_residual_equals_trace_without_ridge(self, rng):
        # with no ridge the projectors are exact and the quadratic forms agree
        ds = random_dataset(rng, 3, 12, 20, 3)  # raw data: full-rank coupled matrices
        kernels = kernels_for(ds, gamma=0.01)
        model = fit_sha(ds, kernels, epsilon=0.0)
        report = model.fit_report
        assert report.projection_gap == pytest.approx(0.0, abs=1e-8)
        assert report.residual_objective == pytest.approx(
            report.trace_objective, abs=1e-8
        )

    def test_gap_nonnegative_with_ridge(self, rng):
        _, _, model = _fitted(rng, epsilon=0.05)
        assert model.fit_report.projection_gap >= -1e-10

    def test_subject_order_invariance(self, rng):
        ds, kernels, model = _fitted(rng)
        perm = [2, 0, 3, 1]
        ds_perm = Dataset(
            tuple(ds.subjects[i] for i in perm),
            tuple(ds.labels[i] for i in perm),
            ds.class_names,
        )
        model_perm = fit_sha(ds_perm, [kernels[i] for i in perm])
        assert_close_up_to_sign(model.shared_space, model_perm.shared_space, 1e-9)
        z = map_subject(model, ds.subjects[0]).features
        z_perm = map_subject(model_perm, ds.subjects[0]).features
        assert_close_up_to_sign(z, z_perm, 1e-9)

    def test_streaming_matches_default(self, rng):
        ds, kernels, model = _fitted(rng)
        streamed = fit_sha(ds, kernels, streaming=True)
        np.testing.assert_array_equal(model.shared_space, streamed.shared_space)
        np.testing.assert_array_equal(model.template, streamed.template)
        assert model.fit_report.pairwise_objective == streamed.fit_report.pairwise_objective

    def test_identical_subjects_map_identically(self, rng):
        base = rng.standard_normal((20, 8))
        lab_classes = np.arange(20) % 2
        onehot = np.zeros((2, 20))
        onehot[lab_classes, np.arange(20)] = 1.0
        lab = LabelMatrix(onehot)
        ds = normalize(Dataset(
            tuple(SubjectData(f"s{i}", base.copy()) for i in range(4)),
            tuple(lab for _ in range(4)), ("a", "b"),
        ))
        kernels = kernels_for(ds)
        model = fit_sha(ds, kernels)
        mapped = [m.features for m in map_dataset(model, ds)]
        for z in mapped[1:]:
            np.testing.assert_allclose(mapped[0], z, atol=1e-8)
        assert rho1(mapped).mean == pytest.approx(1.0, abs=1e-10)

    def test_k_out_of_range(self, rng):
        ds = normalize(random_dataset(rng, 3, 18, 10, 3))
        kernels = kernels_for(ds)
        with pytest.raises(InvalidArgumentError):
            fit_sha(ds, kernels, k=4)
        with pytest.raises(InvalidArgumentError):
            fit_sha(ds, kernels, k=0)

    def test_kernel_count_mismatch(self, rng):
        ds = normalize(random_dataset(rng, 3, 18, 10, 3))
        kernels = kernels_for(ds)
        with pytest.raises(InvalidArgumentError):
            fit_sha(ds, kernels[:2])

    def test_mismatched_gammas_rejected(self, rng):
        ds = normalize(random_dataset(rng, 2, 18, 10, 3))
        kernels = [supervision_kernel(ds.labels[0], 0.01),
                   supervision_kernel(ds.labels[1], 0.02)]
        with pytest.raises(InvalidArgumentError):
            fit_sha(ds, kernels)


class TestFitRha:
    def test_reduces_from_identity_supervision(self, rng):
        # supervised path under an identity kernel == unsupervised path
        for _ in range(3):
            t, v = 10, 16
            subs = tuple(
                SubjectData(f"s{i}", rng.standard_normal((t, v))) for i in range(3)
            )
            ident = LabelMatrix(np.eye(t))
            ds = Dataset(subs, tuple(ident for _ in subs),
                         tuple(f"c{i}" for i in range(t)))
            kernels = [supervision_kernel(lab, gamma=0.0) for lab in ds.labels]
            supervised = fit_sha(ds, kernels, k=t)
            unsupervised = fit_rha(ds, k=t)
            assert_close_up_to_sign(supervised.shared_space,
                                    unsupervised.shared_space, 1e-8)
            assert_close_up_to_sign(supervised.template, unsupervised.template, 1e-8)

    def test_template_equals_shared_space(self, rng):
        # back-projecting through identity kernels averages S copies of the
        # shared space, identical up to the rounding of that mean
        ds = normalize(random_dataset(rng, 3, 14, 20, 2))
        model = fit_rha(ds)
        np.testing.assert_allclose(model.template, model.shared_space,
                                   atol=1e-14, rtol=0)
        assert model.k == 14  # min(voxels=20, t=14)

    def test_trace_matches_dense_assembly(self, rng):
        ds = normalize(random_dataset(rng, 3, 12, 9, 2))
        model = fit_rha(ds, epsilon=1e-4)
        u = np.zeros((12, 12))
        for subj in ds.subjects:
            x = subj.data
            u += np.eye(12) - x @ np.linalg.solve(
                x.T @ x + 1e-4 * np.eye(x.shape[1]), x.T
            )
        values = np.linalg.eigvalsh(u)
        assert model.fit_report.trace_objective == pytest.approx(
            values[: model.k].sum(), abs=1e-8
        )


class TestFitShaR:
    def test_history_non_increasing(self, rng):
        for seed in range(4):
            ds = normalize(random_dataset(np.random.default_rng(seed), 4, 24, 15, 3))
            kernels = kernels_for(ds)
            model = fit_sha_r(ds, kernels, iterations=10)
            history = np.asarray(model.fit_report.objective_history)
            assert history.size == 10
            assert (np.diff(history) <= 1e-10).all()

    def test_single_iteration_from_single_shot_solution(self, rng):
        ds, kernels, single = _fitted(rng)
        iterative = fit_sha_r(ds, kernels, iterations=1,
                              initial_shared=single.shared_space)
        start = iterative.fit_report.objective_history[0]
        target = single.fit_report.pairwise_objective
        # seeding with the single-shot solution starts at its objective value
        assert start == pytest.approx(target, rel=1e-9, abs=1e-12)

    def test_identical_subjects_converge_immediately(self, rng):
        base = rng.standard_normal((12, 6))
        onehot = np.zeros((2, 12))
        onehot[np.arange(12) % 2, np.arange(12)] = 1.0
        lab = LabelMatrix(onehot)
        ds = Dataset(
            tuple(SubjectData(f"s{i}", base.copy()) for i in range(3)),
            tuple(lab for _ in range(3)), ("a", "b"),
        )
        kernels = kernels_for(ds)
        model = fit_sha_r(ds, kernels, iterations=1)
        assert model.fit_report.objective_history[0] == pytest.approx(0.0, abs=1e-12)

    def test_shared_space_orthonormal(self, rng):
        ds = normalize(random_dataset(rng, 3, 20, 12, 3))
        kernels = kernels_for(ds)
        model = fit_sha_r(ds, kernels)
        np.testing.assert_allclose(
            model.shared_space.T @ model.shared_space, np.eye(3), atol=1e-8
        )
        assert model.template.shape == (20, 3)

    def test_iterations_validated(self, rng):
        ds = normalize(random_dataset(rng, 2, 10, 6, 2))
        kernels = kernels_for(ds)
        with pytest.raises(InvalidArgumentError):
            fit_sha_r(ds, kernels, iterations=0)

    def test_bad_initial_shape_rejected(self, rng):
        ds = normalize(random_dataset(rng, 2, 10, 6, 2))
        kernels = kernels_for(ds)
        with pytest.raises(InvalidArgumentError):
            fit_sha_r(ds, kernels, initial_shared=np.ones((3, 6)))


class TestMapSubject:
    def test_matches_dense_ridge_solution(self, rng):
        # oracle: z = x (x^T x + eps I)^{-1} x^T g by direct solve, voxels <= 30
        ds, kernels, model = _fitted(rng, n_v=25)
        for subj in ds.subjects:
            x = subj.data
            dense = x @ np.linalg.solve(
                x.T @ x + model.epsilon * np.eye(x.shape[1]), x.T @ model.template
            )
            z = map_subject(model, subj).features
            np.testing.assert_allclose(z, dense, atol=1e-8, rtol=0)

    def test_epsilon_override(self, rng):
        ds, kernels, model = _fitted(rng, n_v=10)
        x = ds.subjects[0].data
        dense = x @ np.linalg.solve(x.T @ x + 0.5 * np.eye(x.shape[1]),
                                    x.T @ model.template)
        z = map_subject(model, ds.subjects[0], epsilon=0.5).features
        np.testing.assert_allclose(z, dense, atol=1e-8, rtol=0)

    def test_none_method_is_identity(self, rng):
        ds = normalize(random_dataset(rng, 2, 10, 6, 2))
        model = fit_none(ds)
        z = map_subject(model, ds.subjects[0]).features
        np.testing.assert_array_equal(z, ds.subjects[0].data)

    def test_timepoint_mismatch_rejected(self, rng):
        ds, kernels, model = _fitted(rng, n_t=24)
        short = SubjectData("odd", rng.standard_normal((12, 15)))
        with pytest.raises(InvalidArgumentError):
            map_subject(model, short)

    def test_rest_points_are_mapped_but_not_fit(self, rng):
        # a subject with rest points: the ridge fit sees labeled rows only,
        # yet every row is carried into the shared space
        onehot = np.zeros((2, 12))
        onehot[np.arange(12) % 2, np.arange(12)] = 1.0
        onehot[:, [3, 7]] = 0.0
        lab = LabelMatrix(onehot)
        subs = tuple(SubjectData(f"s{i}", rng.standard_normal((12, 8)))
                     for i in range(3))
        ds = normalize(Dataset(subs, tuple(lab for _ in subs), ("a", "b")))
        kernels = kernels_for(ds)
        model = fit_sha(ds, kernels)
        assert model.template.shape[0] == 10
        z = map_subject(model, ds.subjects[0]).features
        assert z.shape == (12, model.k)
        x = ds.subjects[0].data
        x_fit = x[lab.labeled_indices]
        dense = x @ np.linalg.solve(
            x_fit.T @ x_fit + model.epsilon * np.eye(x.shape[1]),
            x_fit.T @ model.template,
        )
        np.testing.assert_allclose(z, dense, atol=1e-8, rtol=0)

    def test_zero_epsilon_with_singular_data_rejected(self, rng):
        ds, kernels, model = _fitted(rng, n_t=24, n_v=10)
        dup = ds.subjects[0].data.copy()
        dup[:, 1] = dup[:, 0]  # exactly collinear voxels
        with pytest.raises(NumericError):
            map_subject(model, SubjectData("dup", dup), epsilon=0.0)


class TestModelSerialization:
    def test_round_trip_preserves_mapping(self, tmp_path, rng):
        ds, kernels, model = _fitted(rng)
        save_model(model, tmp_path)
        back = load_model(tmp_path)
        assert back.method == model.method
        assert back.epsilon == model.epsilon
        assert back.gamma == model.gamma
        assert back.k == model.k
        np.testing.assert_array_equal(back.shared_space, model.shared_space)
        np.testing.assert_array_equal(back.template, model.template)
        z0 = map_subject(model, ds.subjects[0]).features
        z1 = map_subject(back, ds.subjects[0]).features
        np.testing.assert_array_equal(z0, z1)

    def test_files_written(self, tmp_path, rng):
        _, _, model = _fitted(rng)
        save_model(model, tmp_path)
        assert (tmp_path / "model.json").exists()
        assert (tmp_path / "w.csv").exists()
        assert (tmp_path / "g.csv").exists()

    def test_none_model_has_no_factors(self, tmp_path, rng):
        ds = normalize(random_dataset(rng, 2, 10, 6, 2))
        save_model(fit_none(ds), tmp_path)
        assert not (tmp_path / "w.csv").exists()
        back = load_model(tmp_path)
        assert back.method == "none" and back.shared_space is None


class TestDispatcher:
    def test_all_methods(self, rng):
        ds = normalize(random_dataset(rng, 3, 16, 10, 2))
        kernels = kernels_for(ds)
        for method in ("sha", "sha_r", "rha", "none"):
            model = fit(method, ds, kernels)
            assert model.method == method

    def test_unknown_method(self, rng):
        ds = normalize(random_dataset(rng, 2, 10, 6, 2))
        with pytest.raises(InvalidArgumentError):
            fit("procrustes", ds, None)
