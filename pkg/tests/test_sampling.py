"""Sampling schemes: partitions, structured products, and bound quantities."""

from itertools import combinations

import numpy as np
import pytest

from conftest import dense_sketch
from momsolve.errors import InvalidBlockSizeError, UnsupportedError
from momsolve.linalg import Matrix
from momsolve.sampling import (
    FixedIdentity,
    PartitionBlock,
    SampleOp,
    SchemeSpec,
    SingleRowWeighted,
    UniformBlock,
    apply_sample_transpose,
    block_spectral_norm_sq,
    build_partition,
    draw_sample,
    expected_gram,
    lambda_max_sup,
    make_sampler,
    parse_scheme,
    pullback,
)


class TestBuildPartition:
    def test_even_split(self):
        blocks = build_partition(4, 2, seed=0)
        assert len(blocks) == 2
        assert sorted(len(b) for b in blocks) == [2, 2]
        np.testing.assert_array_equal(np.sort(np.concatenate(blocks)), np.arange(4))

    def test_ragged_last_block(self):
        blocks = build_partition(5, 2, seed=0)
        assert [len(b) for b in blocks] == [2, 2, 1]

    def test_large_ragged(self):
        blocks = build_partition(958, 30, seed=3)
        sizes = [len(b) for b in blocks]
        assert len(blocks) == 32
        assert sizes.count(30) == 31
        assert sizes.count(28) == 1

    def test_determinism_and_blocks_sorted(self):
        a = build_partition(20, 6, seed=5)
        b = build_partition(20, 6, seed=5)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)
            np.testing.assert_array_equal(x, np.sort(x))

    def test_invalid_block_size(self):
        with pytest.raises(InvalidBlockSizeError):
            build_partition(4, 0, seed=0)
        with pytest.raises(InvalidBlockSizeError):
            build_partition(4, 5, seed=0)


class TestDraw:
    def test_fixed_identity(self, rng):
        A = Matrix.from_dense(np.eye(3))
        for _ in range(3):
            op = draw_sample(FixedIdentity(), A, rng)
            assert op.is_identity
            assert op.scale == 1.0

    def test_uniform_block_shape_and_scale(self, rng):
        A = Matrix.from_dense(rng.standard_normal((12, 4)))
        op = draw_sample(UniformBlock(p=3), A, rng)
        assert len(op.indices) == 3
        assert len(set(op.indices.tolist())) == 3
        expected = np.sqrt(12 / 3) / np.sqrt(A.fro_norm_sq)
        assert op.scale == pytest.approx(expected)

    def test_single_row_scale(self, rng):
        A = Matrix.from_dense(rng.standard_normal((6, 4)))
        op = draw_sample(SingleRowWeighted(), A, rng)
        i = int(op.indices[0])
        assert op.scale == pytest.approx(1.0 / np.sqrt(A.row_norms_sq[i]))

    def test_partition_op_is_a_block(self, rng):
        A = Matrix.from_dense(rng.standard_normal((10, 5)))
        scheme = PartitionBlock.from_permutation(10, 4, seed=1)
        op = draw_sample(scheme, A, rng)
        assert any(np.array_equal(op.indices, blk) for blk in scheme.blocks)
        fro = np.sqrt(A.row_norms_sq[op.indices].sum())
        assert op.scale == pytest.approx(1.0 / fro)

    def test_row_probabilities_proportional_to_norms(self, rng):
        A = Matrix.from_dense(np.diag([1.0, 2.0, 3.0]))
        probs = make_sampler(SingleRowWeighted(), A).probabilities()
        np.testing.assert_allclose(probs, np.array([1.0, 4.0, 9.0]) / 14.0)

    def test_partition_must_cover_rows(self, rng):
        A = Matrix.from_dense(rng.standard_normal((6, 3)))
        bad = PartitionBlock(blocks=(np.array([0, 1]), np.array([2, 3])))
        with pytest.raises(ValueError):
            make_sampler(bad, A)


class TestStructuredProducts:
    def test_transpose_single_row(self):
        op = SampleOp(indices=np.array([1]), scale=1.0)
        np.testing.assert_allclose(apply_sample_transpose(op, [3.0, 5.0]), [5.0])

    def test_transpose_identity(self):
        op = SampleOp(indices=None)
        np.testing.assert_allclose(apply_sample_transpose(op, [3.0, 5.0]), [3.0, 5.0])

    def test_matches_dense_sketch(self, rng):
        A = Matrix.from_dense(rng.standard_normal((15, 8)))
        v = rng.standard_normal(15)
        w = rng.standard_normal(3)
        op = draw_sample(UniformBlock(p=3), A, rng)
        S = dense_sketch(op, 15)
        np.testing.assert_allclose(apply_sample_transpose(op, v), S.T @ v, atol=1e-13)
        np.testing.assert_allclose(pullback(op, A, w), A.toarray().T @ (S @ w),
                                   atol=1e-13)

    def test_identity_pullback(self, rng):
        A = Matrix.from_dense(rng.standard_normal((5, 4)))
        w = rng.standard_normal(5)
        op = SampleOp(indices=None)
        np.testing.assert_allclose(pullback(op, A, w), A.toarray().T @ w, atol=1e-13)


class TestExpectedGram:
    def test_uniform_block(self, rng):
        A = Matrix.from_dense(rng.standard_normal((7, 4)))
        np.testing.assert_allclose(expected_gram(UniformBlock(p=3), A),
                                   np.eye(7) / A.fro_norm_sq)

    def test_fixed_identity(self, rng):
        A = Matrix.from_dense(rng.standard_normal((4, 4)))
        np.testing.assert_allclose(expected_gram(FixedIdentity(), A), np.eye(4))

    def test_partition_monte_carlo(self, rng):
        A = Matrix.from_dense(rng.standard_normal((30, 10)))
        scheme = PartitionBlock.from_permutation(30, 7, seed=2)
        sampler = make_sampler(scheme, A)
        acc = np.zeros((30, 30))
        n_draws = 20000
        for _ in range(n_draws):
            op = sampler.draw(rng)
            S = dense_sketch(op, 30)
            acc += S @ S.T
        np.testing.assert_allclose(acc / n_draws, expected_gram(scheme, A), atol=5e-3)

    def test_single_row_closed_form_is_exact_average(self, rng):
        # sum over the support, weighted by probabilities, equals I/||A||_F^2
        A = Matrix.from_dense(rng.standard_normal((6, 3)))
        sampler = make_sampler(SingleRowWeighted(), A)
        probs = sampler.probabilities()
        acc = np.zeros((6, 6))
        for i, q in enumerate(probs):
            acc[i, i] = q / A.row_norms_sq[i]
        np.testing.assert_allclose(acc, expected_gram(SingleRowWeighted(), A),
                                   atol=1e-13)


class TestLambdaMaxSup:
    def test_single_row_is_one(self, rng):
        A = Matrix.from_dense(rng.standard_normal((5, 3)))
        res = lambda_max_sup(SingleRowWeighted(), A)
        assert res.value == 1.0
        assert not res.is_estimate

    def test_identity_is_sigma_max_sq(self):
        A = Matrix.from_dense(np.diag([3.0, 1.0]))
        assert lambda_max_sup(FixedIdentity(), A).value == pytest.approx(9.0)

    def test_uniform_matches_brute_force(self, rng):
        A = Matrix.from_dense(rng.standard_normal((5, 3)))
        res = lambda_max_sup(UniformBlock(p=2), A)
        dense = A.toarray()
        scale = np.sqrt(5 / 2) / np.sqrt(A.fro_norm_sq)
        worst = 0.0
        for J in combinations(range(5), 2):
            S = dense_sketch(SampleOp(np.array(J), scale), 5)
            M = dense.T @ S @ S.T @ dense
            worst = max(worst, float(np.linalg.eigvalsh(M)[-1]))
        assert res.value == pytest.approx(worst, rel=1e-10)
        assert not res.is_estimate

    def test_partition_matches_dense_evaluation(self, rng):
        A = Matrix.from_dense(rng.standard_normal((12, 5)))
        scheme = PartitionBlock.from_permutation(12, 4, seed=0)
        res = lambda_max_sup(scheme, A)
        dense = A.toarray()
        worst = 0.0
        for blk in scheme.blocks:
            scale = 1.0 / np.sqrt(A.row_norms_sq[blk].sum())
            S = dense_sketch(SampleOp(blk, scale), 12)
            M = dense.T @ S @ S.T @ dense
            worst = max(worst, float(np.linalg.eigvalsh(M)[-1]))
        assert res.value == pytest.approx(worst, rel=1e-10)

    def test_large_uniform_support_is_estimate(self, rng):
        A = Matrix.from_dense(rng.standard_normal((60, 5)))
        res = lambda_max_sup(UniformBlock(p=10), A)
        assert res.is_estimate
        assert res.value > 0.0

    def test_block_spectral_norm_power_iteration_path(self, rng):
        # blocks larger than the eigvalsh cutoff go through power iteration
        A = Matrix.from_dense(rng.standard_normal((100, 20)))
        idx = np.arange(80)
        direct = float(np.linalg.norm(A.toarray()[idx], 2) ** 2)
        assert block_spectral_norm_sq(A, idx) == pytest.approx(direct, rel=1e-8)


class TestSchemeSpec:
    @pytest.mark.parametrize("text,variant,p", [
        ("row", "row", None),
        ("identity", "identity", None),
        ("uniform:4", "uniform", 4),
        ("partition:8", "partition", 8),
    ])
    def test_parse(self, text, variant, p):
        spec = parse_scheme(text)
        assert spec == SchemeSpec(variant=variant, p=p)
        assert str(spec) == text

    def test_parse_errors(self):
        with pytest.raises(UnsupportedError):
            parse_scheme("bogus")
        with pytest.raises(UnsupportedError):
            parse_scheme("uniform:x")
        with pytest.raises(InvalidBlockSizeError):
            parse_scheme("partition:0")

    def test_materialize(self, rng):
        A = Matrix.from_dense(rng.standard_normal((10, 4)))
        assert isinstance(parse_scheme("row").materialize(A, 0), SingleRowWeighted)
        assert isinstance(parse_scheme("identity").materialize(A, 0), FixedIdentity)
        assert parse_scheme("uniform:3").materialize(A, 0) == UniformBlock(p=3)
        part = parse_scheme("partition:4").materialize(A, 7)
        again = parse_scheme("partition:4").materialize(A, 7)
        assert isinstance(part, PartitionBlock)
        for x, y in zip(part.blocks, again.blocks):
            np.testing.assert_array_equal(x, y)
