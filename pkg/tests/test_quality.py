import math

import numpy as np
import pytest

from vfrkit.errors import ValidationError
from vfrkit.quality import QualityConfig, clamp_logit, clip_score, quality_weights


class TestClampLogit:
    def test_symmetric_point(self):
        assert clamp_logit(0.5, 7.0) == 0.0

    def test_unit_logit(self):
        # d = e^2 / (1 + e^2) inverts 0.5*ln(d/(1-d)) = 1
        d = math.exp(2) / (1 + math.exp(2))
        assert abs(clamp_logit(d, 7.0) - 1.0) < 1e-12

    def test_clamp_engages(self):
        d = 0.9999999
        raw = 0.5 * math.log(d / (1 - d))
        assert raw > 8.0
        assert clamp_logit(d, 7.0) == 7.0

    @pytest.mark.parametrize("bad", [0.0, 1.0, -0.5, 1.5])
    def test_rejects_out_of_range(self, bad):
        with pytest.raises(ValidationError):
            clamp_logit(bad)

    def test_clip_score(self):
        assert clip_score(1.0) == 1.0 - 1e-6
        assert clip_score(0.0) == 1e-6
        assert clip_score(0.7) == 0.7


class TestQualityWeights:
    def test_equal_scores_uniform(self):
        w = quality_weights([0.8] * 5)
        assert np.allclose(w, 0.2)

    def test_zero_temperature_uniform(self):
        w = quality_weights([0.4, 0.7, 0.99], QualityConfig(q=0.0))
        assert np.allclose(w, 1 / 3)

    def test_two_element_softmax(self):
        # scores with logits (0, 1) at q = 0.3
        d1 = math.exp(2) / (1 + math.exp(2))
        w = quality_weights([0.5, d1], QualityConfig(t=7.0, q=0.3))
        assert np.allclose(w, [0.425557, 0.574443], atol=1e-6)

    def test_sums_to_one(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            w = quality_weights(rng.uniform(0.01, 0.99, rng.integers(1, 30)))
            assert abs(w.sum() - 1.0) < 1e-12
            assert np.all(w > 0) and np.all(w <= 1)

    def test_monotone_in_score(self):
        scores = [0.2, 0.5, 0.9, 0.97]
        w = quality_weights(scores)
        assert np.all(np.diff(w) > 0)

    def test_clamped_scores_tie(self):
        # both logits hit the clamp: equal weights despite different scores
        w = quality_weights([0.9999999, 0.99999999])
        assert w[0] == w[1]

    def test_no_overflow_at_clamp(self):
        w = quality_weights([1 - 1e-9] * 3 + [0.5])
        assert np.all(np.isfinite(w))

    def test_permutation_equivariance(self):
        scores = [0.3, 0.8, 0.55, 0.91]
        w = quality_weights(scores)
        perm = [2, 0, 3, 1]
        w_perm = quality_weights([scores[i] for i in perm])
        assert np.allclose(w_perm, w[perm])

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            quality_weights([])
