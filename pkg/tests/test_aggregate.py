import numpy as np
import pytest

from oracles import jacobi_oracle, projector
from vfrkit.aggregate import (AggregateConfig, exemplar_mean, exemplar_quality,
                              learn_subspace, learn_subspace_quality)
from vfrkit.errors import ValidationError
from vfrkit.quality import QualityConfig, quality_weights
from vfrkit.types import Template


def random_template(rng, dim, n, label=None):
    return Template(rng.standard_normal((n, dim)), rng.uniform(0.3, 0.99, n), label)


def weighted_reconstruction_error(tpl, basis, cfg=QualityConfig()):
    w = quality_weights(tpl.qualities, cfg)
    resid = tpl.samples - tpl.samples @ basis @ basis.T
    return float(np.sum(w * np.sum(resid**2, axis=1)))


class TestExemplars:
    def test_single_sample(self):
        y = np.array([1.0, -2.0, 3.0])
        tpl = Template([y], [0.8])
        assert np.allclose(exemplar_mean(tpl).vector, y)
        assert np.allclose(exemplar_quality(tpl).vector, y)

    def test_opposite_pair_degenerate(self):
        v = np.array([1.0, 2.0])
        ex = exemplar_mean(Template([v, -v], [0.5, 0.5]))
        assert np.allclose(ex.vector, 0.0)
        assert ex.degenerate

    def test_plain_mean(self):
        tpl = Template([[1.0, 0.0], [0.0, 1.0]], [0.5, 0.5])
        assert np.allclose(exemplar_mean(tpl).vector, [0.5, 0.5])

    def test_equal_quality_collinear_with_mean(self):
        rng = np.random.default_rng(5)
        tpl = Template(rng.standard_normal((4, 6)), [0.7] * 4)
        plain = exemplar_mean(tpl).vector
        qual = exemplar_quality(tpl).vector
        # uniform softmax: quality exemplar = mean / L
        assert np.allclose(qual, plain / 4)

    def test_two_sample_quality_values(self):
        import math
        d1 = math.exp(2) / (1 + math.exp(2))  # logit 1
        tpl = Template([[1.0, 0.0], [0.0, 1.0]], [0.5, d1])
        ex = exemplar_quality(tpl)
        assert np.allclose(ex.vector, [0.212779, 0.287221], atol=1e-6)


class TestSubspace:
    def test_rank_one(self):
        u = np.array([3.0, 4.0])
        tpl = Template([u, 2 * u, -0.5 * u], [0.5] * 3)
        sub = learn_subspace(tpl, 1)
        assert np.allclose(np.abs(sub.basis[:, 0]), np.abs(u) / 5.0)
        norms_sq = sum(np.sum((k * u) ** 2) for k in (1, 2, -0.5))
        assert np.isclose(sub.spectrum[0], norms_sq)

    def test_full_basis_zero_reconstruction(self):
        rng = np.random.default_rng(1)
        tpl = random_template(rng, 4, 10)
        sub = learn_subspace(tpl, 4)
        resid = tpl.samples - tpl.samples @ sub.basis @ sub.basis.T
        assert np.linalg.norm(resid) < 1e-8

    def test_matches_scatter_oracle(self):
        rng = np.random.default_rng(2)
        tpl = random_template(rng, 8, 20)
        sub = learn_subspace(tpl, 3)
        scatter = tpl.samples.T @ tpl.samples
        _, ovecs = jacobi_oracle(scatter)
        diff = projector(sub.basis) - projector(ovecs[:, :3])
        assert np.linalg.norm(diff) < 1e-8

    def test_quality_uniform_equals_plain(self):
        rng = np.random.default_rng(3)
        tpl = Template(rng.standard_normal((12, 6)), [0.8] * 12)
        plain = learn_subspace(tpl, 3)
        qual = learn_subspace_quality(tpl, AggregateConfig(subspace_dim=3))
        assert np.linalg.norm(projector(plain.basis) - projector(qual.basis)) < 1e-8

    def test_concentrated_weight_rank_one_limit(self):
        rng = np.random.default_rng(4)
        samples = rng.standard_normal((5, 8))
        # one score at the clamp, the rest tiny: weight mass on sample 0
        tpl = Template(samples, [0.9999999] + [1e-6] * 4)
        cfg = AggregateConfig(subspace_dim=1, quality=QualityConfig(t=7.0, q=5.0))
        sub = learn_subspace_quality(tpl, cfg)
        direction = samples[0] / np.linalg.norm(samples[0])
        assert abs(abs(sub.basis[:, 0] @ direction) - 1.0) < 1e-3

    def test_quality_subspace_optimality(self):
        rng = np.random.default_rng(5)
        tpl = random_template(rng, 6, 15)
        cfg = AggregateConfig(subspace_dim=2)
        sub = learn_subspace_quality(tpl, cfg)
        base = weighted_reconstruction_error(tpl, sub.basis)
        for _ in range(1000):
            perturbed, _ = np.linalg.qr(sub.basis + 0.05 * rng.standard_normal(sub.basis.shape))
            assert weighted_reconstruction_error(tpl, perturbed) >= base - 1e-10

    def test_orthonormal_basis(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            tpl = random_template(rng, 7, int(rng.integers(2, 12)))
            d = int(rng.integers(1, min(7, len(tpl)) + 1))
            sub = learn_subspace(tpl, d)
            assert np.max(np.abs(sub.basis.T @ sub.basis - np.eye(d))) < 1e-8
            assert np.all(np.diff(sub.spectrum) <= 1e-12)
            assert np.all(sub.spectrum >= 0)

    def test_monotone_objective_in_d(self):
        rng = np.random.default_rng(7)
        tpl = random_template(rng, 6, 20)
        errors = [weighted_reconstruction_error(
            tpl, learn_subspace_quality(tpl, AggregateConfig(subspace_dim=d)).basis)
            for d in range(1, 7)]
        assert np.all(np.diff(errors) <= 1e-10)

    def test_rotation_equivariance(self):
        rng = np.random.default_rng(8)
        tpl = random_template(rng, 5, 12)
        r, _ = np.linalg.qr(rng.standard_normal((5, 5)))
        rotated = Template(tpl.samples @ r.T, tpl.qualities)
        p1 = projector(learn_subspace(tpl, 2).basis)
        p2 = projector(learn_subspace(rotated, 2).basis)
        assert np.linalg.norm(r @ p1 @ r.T - p2) < 1e-8

    def test_dimension_validation(self):
        tpl = Template([[1.0, 0.0], [0.0, 1.0]], [0.5, 0.5])
        with pytest.raises(ValidationError):
            learn_subspace(tpl, 3)
        with pytest.raises(ValidationError):
            learn_subspace(tpl, 0)

    def test_truncation_in_pipeline_mode(self):
        tpl = Template([[1.0, 0.0, 0.0]], [0.5])
        with pytest.warns(UserWarning):
            sub = learn_subspace(tpl, 3, strict=False)
        assert sub.dim == 1
