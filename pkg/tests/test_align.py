import math

import numpy as np
import pytest

from strokecoach import _kernels
from strokecoach.align import (
    BodyCostTensor,
    PaddleCostMatrix,
    aggregate_alignment_path,
    classify,
    dtw_body,
    dtw_paddle,
    window_compare,
)
from strokecoach.errors import EmptySequence, JointSetMismatch, WindowUnderfilled
from strokecoach.quat import from_axis_angle, multiply, quaternion_dissimilarity

from helpers import brute_force_dtw, random_unit_quats

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])


def diss_tensor(u, e):
    n, m = u.shape[0], e.shape[0]
    j = u.shape[1]
    out = np.empty((n, m, j))
    for i in range(n):
        for k in range(m):
            for a in range(j):
                out[i, k, a] = quaternion_dissimilarity(u[i, a], e[k, a])
    return out


class TestDtwBody:
    def test_self_comparison_is_zero(self):
        rng = np.random.default_rng(1)
        seq = random_unit_quats(rng, 12, 4)
        out = dtw_body(seq, seq)
        np.testing.assert_allclose(out.terminal(), 0.0, atol=1e-12)

    def test_single_cell(self):
        rng = np.random.default_rng(2)
        u = random_unit_quats(rng, 1, 3)
        e = random_unit_quats(rng, 1, 3)
        out = dtw_body(u, e, filter_inputs=False)
        expected = [quaternion_dissimilarity(u[0, k], e[0, k]) for k in range(3)]
        np.testing.assert_allclose(out.terminal(), expected, atol=1e-12)

    def test_matches_brute_force_enumeration(self):
        rng = np.random.default_rng(3)
        u = random_unit_quats(rng, 5, 3)
        e = random_unit_quats(rng, 6, 3)
        out = dtw_body(u, e, filter_inputs=False)
        local = diss_tensor(u, e)
        for k in range(3):
            assert out.terminal()[k] == pytest.approx(
                brute_force_dtw(local[:, :, k]), abs=1e-9
            )

    def test_filtered_matches_prefiltered_composition(self):
        from strokecoach.quat import kalman_filter_joints

        rng = np.random.default_rng(4)
        u = random_unit_quats(rng, 8, 2)
        e = random_unit_quats(rng, 9, 2)
        direct = dtw_body(u, e)
        composed = dtw_body(
            kalman_filter_joints(u), kalman_filter_joints(e), filter_inputs=False
        )
        np.testing.assert_allclose(direct.terminal(), composed.terminal(), atol=1e-12)

    def test_monotone_along_fill(self):
        rng = np.random.default_rng(5)
        u = random_unit_quats(rng, 6, 2)
        e = random_unit_quats(rng, 7, 2)
        c = dtw_body(u, e, filter_inputs=False).costs
        for i in range(1, 7):
            for j in range(1, 8):
                pred = np.minimum(
                    np.minimum(c[i - 1, j], c[i, j - 1]), c[i - 1, j - 1]
                )
                assert np.all(c[i, j] >= pred - 1e-12)

    def test_joint_permutation_permutes_scores(self):
        rng = np.random.default_rng(6)
        u = random_unit_quats(rng, 5, 4)
        e = random_unit_quats(rng, 5, 4)
        perm = [2, 0, 3, 1]
        base = dtw_body(u, e, filter_inputs=False).terminal()
        permuted = dtw_body(u[:, perm], e[:, perm], filter_inputs=False).terminal()
        np.testing.assert_allclose(permuted, base[perm], atol=1e-12)

    def test_duplicated_frames_keep_self_cost_zero(self):
        # the warp property is a DTW-layer fact: a zero-cost path exists
        # whenever one side is a frame-duplicated copy of the other
        rng = np.random.default_rng(7)
        seq = random_unit_quats(rng, 9, 3)
        doubled = np.repeat(seq, 2, axis=0)
        out = dtw_body(seq, doubled, filter_inputs=False)
        np.testing.assert_allclose(out.terminal(), 0.0, atol=1e-12)

    def test_duplication_after_filtering_keeps_cost_zero(self):
        from strokecoach.quat import kalman_filter_joints

        rng = np.random.default_rng(19)
        filtered = kalman_filter_joints(random_unit_quats(rng, 9, 3))
        doubled = np.repeat(filtered, 2, axis=0)
        out = dtw_body(filtered, doubled, filter_inputs=False)
        np.testing.assert_allclose(out.terminal(), 0.0, atol=1e-12)

    def test_empty_raises(self):
        with pytest.raises(EmptySequence):
            dtw_body([], [])

    def test_joint_set_mismatch(self):
        rng = np.random.default_rng(8)
        with pytest.raises(JointSetMismatch):
            dtw_body(
                random_unit_quats(rng, 4, 3),
                random_unit_quats(rng, 4, 5),
                filter_inputs=False,
            )


class TestDtwPaddle:
    def test_identical_sequences(self):
        rng = np.random.default_rng(9)
        seq = random_unit_quats(rng, 8)
        assert dtw_paddle(seq, seq).terminal() == pytest.approx(0.0, abs=1e-12)

    def test_constant_opposed_rotations(self):
        user = np.tile(IDENTITY, (4, 1))
        expert = np.tile(from_axis_angle([0, 0, 1], math.pi), (4, 1))
        assert dtw_paddle(user, expert).terminal() == pytest.approx(4.0, abs=1e-9)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(10)
        u = random_unit_quats(rng, 6)
        e = random_unit_quats(rng, 4)
        local = np.array(
            [[quaternion_dissimilarity(a, b) for b in e] for a in u]
        )
        assert dtw_paddle(u, e, filter_inputs=False).terminal() == pytest.approx(
            brute_force_dtw(local), abs=1e-9
        )


class TestClassify:
    def zero_tensors(self, n=10, j=3):
        body = BodyCostTensor(costs=np.zeros((n + 1, n + 1, j)), n=n, m=n, j_count=j)
        paddle = PaddleCostMatrix(costs=np.zeros((n + 1, n + 1)), n=n, m=n)
        return body, paddle

    def test_perfect_match_no_flags(self):
        body, paddle = self.zero_tensors()
        result = classify(body, paddle, 0.1, 0.1, joint_names=("a", "b", "c"))
        assert result.joint_errors == ()
        assert not result.paddle_error
        np.testing.assert_allclose(result.per_joint_score, 0.0)

    def test_sixty_degree_offset_flagged_thirty_not(self):
        # one joint offset by a constant rotation while the others match:
        # per-step dissimilarity is 1 - cos(theta/2) exactly
        rng = np.random.default_rng(11)
        base = random_unit_quats(rng, 10, 3)
        offset60 = from_axis_angle([0.3, 0.8, 0.1], math.radians(60))
        offset30 = from_axis_angle([0.3, 0.8, 0.1], math.radians(30))
        for offset, should_flag in ((offset60, True), (offset30, False)):
            user = base.copy()
            user[:, 1] = np.array([multiply(offset, q) for q in base[:, 1]])
            body = dtw_body(user, base, filter_inputs=False)
            paddle = dtw_paddle(base[:, 0], base[:, 0], filter_inputs=False)
            result = classify(body, paddle, 0.1, 0.1, joint_names=("a", "b", "c"))
            if should_flag:
                assert result.joint_errors == ("b",)
                assert result.per_joint_score[1] == pytest.approx(
                    1 - math.cos(math.radians(30)), abs=1e-9
                )
            else:
                assert result.joint_errors == ()
                assert result.per_joint_score[1] == pytest.approx(
                    1 - math.cos(math.radians(15)), abs=1e-9
                )
            assert not result.paddle_error

    def test_paddle_sixty_degree_offset(self):
        rng = np.random.default_rng(12)
        base = random_unit_quats(rng, 10)
        offset = from_axis_angle([1, 0, 0], math.radians(60))
        user = np.array([multiply(offset, q) for q in base])
        body = dtw_body(base[:, None, :], base[:, None, :], filter_inputs=False)
        paddle = dtw_paddle(user, base, filter_inputs=False)
        result = classify(body, paddle, 0.1, 0.1, joint_names=("j",))
        assert result.paddle_error
        assert result.paddle_score == pytest.approx(
            1 - math.cos(math.radians(30)), abs=1e-9
        )

    def test_threshold_boundary_is_strict(self):
        n, j = 10, 2
        costs = np.zeros((n + 1, n + 1, j))
        costs[n, n, 0] = 0.1 * n  # lands exactly on the threshold
        costs[n, n, 1] = 0.1 * n + 1e-9
        body = BodyCostTensor(costs=costs, n=n, m=n, j_count=j)
        pcosts = np.zeros((n + 1, n + 1))
        pcosts[n, n] = 0.1 * n
        paddle = PaddleCostMatrix(costs=pcosts, n=n, m=n)
        result = classify(body, paddle, 0.1, 0.1, joint_names=("at", "above"))
        assert result.joint_errors == ("above",)
        assert not result.paddle_error


class TestWindowCompare:
    def make_windows(self, seed=13, w=10, j=11):
        rng = np.random.default_rng(seed)
        angles = random_unit_quats(rng, w, j)
        paddle = random_unit_quats(rng, w)
        return angles, paddle

    def test_self_window_zero(self):
        angles, paddle = self.make_windows()
        result = window_compare(angles, paddle, angles, paddle)
        np.testing.assert_allclose(result.per_joint_score, 0.0, atol=1e-12)
        assert result.joint_errors == ()
        assert not result.paddle_error

    def test_equals_full_pipeline_composition(self):
        ua, up = self.make_windows(seed=14)
        ea, ep = self.make_windows(seed=15)
        result = window_compare(ua, up, ea, ep)
        body = dtw_body(ua, ea)
        paddle = dtw_paddle(up, ep)
        composed = classify(body, paddle, 0.1, 0.1)
        np.testing.assert_allclose(
            result.per_joint_score, composed.per_joint_score, atol=1e-12
        )
        assert result.paddle_score == pytest.approx(composed.paddle_score, abs=1e-12)

    def test_underfilled_raises(self):
        angles, paddle = self.make_windows()
        with pytest.raises(WindowUnderfilled):
            window_compare(angles[:9], paddle[:9], angles, paddle)

    def test_time_shift_beats_no_warp(self):
        # same smooth motion, user two frames late: DTW must do strictly
        # better than the rigid frame-by-frame pairing
        j = 4
        motion = np.stack(
            [
                np.stack(
                    [
                        from_axis_angle([1, 0.2 * k, 0.1], 0.12 * (i + k))
                        for k in range(j)
                    ]
                )
                for i in range(12)
            ]
        )
        user = motion[2:12]
        expert = motion[0:10]
        result = window_compare(
            user,
            np.tile(IDENTITY, (10, 1)),
            expert,
            np.tile(IDENTITY, (10, 1)),
        )
        from strokecoach.quat import kalman_filter_joints

        uf = kalman_filter_joints(user)
        ef = kalman_filter_joints(expert)
        for k in range(j):
            no_warp = np.mean(
                [quaternion_dissimilarity(uf[i, k], ef[i, k]) for i in range(10)]
            )
            assert result.per_joint_score[k] < no_warp


class TestAggregateAlignmentPath:
    def test_identity_alignment_is_diagonal(self):
        rng = np.random.default_rng(16)
        seq = random_unit_quats(rng, 8, 3)
        path = aggregate_alignment_path(seq, seq)
        assert path == [(i, i) for i in range(8)]

    def test_path_is_monotone_and_complete(self):
        rng = np.random.default_rng(17)
        u = random_unit_quats(rng, 7, 2)
        e = random_unit_quats(rng, 5, 2)
        path = aggregate_alignment_path(u, e)
        assert path[0] == (0, 0)
        assert path[-1] == (6, 4)
        for (i0, j0), (i1, j1) in zip(path, path[1:]):
            assert (i1 - i0, j1 - j0) in {(1, 0), (0, 1), (1, 1)}


class TestBackendEquivalence:
    def test_kernels_agree(self):
        rng = np.random.default_rng(18)
        q1 = random_unit_quats(rng, 9, 5)
        q2 = random_unit_quats(rng, 7, 5)
        d_np = _kernels.diss_matrix_numpy(q1, q2)
        d_active = _kernels.diss_matrix(q1, q2)
        np.testing.assert_allclose(d_active, d_np, atol=1e-12)
        np.testing.assert_allclose(
            _kernels.dtw_fill(np.ascontiguousarray(d_np)),
            _kernels.dtw_fill_numpy(d_np),
            atol=1e-12,
        )
        z = rng.normal(size=(30, 8))
        np.testing.assert_allclose(
            _kernels.kalman_smooth(z, 1e-3, 1e-2, 1.0),
            _kernels.kalman_smooth_numpy(z, 1e-3, 1e-2, 1.0),
            atol=1e-12,
        )
