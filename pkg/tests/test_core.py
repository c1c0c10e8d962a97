import numpy as np
import pytest

from oracles import brute_force_assignment, jacobi_oracle, projector
from vfrkit import _kernels_py
from vfrkit.core import hungarian_assignment, symmetric_eigendecomposition
from vfrkit.errors import ValidationError


def random_symmetric(rng, n):
    a = rng.standard_normal((n, n))
    return (a + a.T) / 2.0


class TestEigendecomposition:
    def test_identity(self):
        vals, vecs = symmetric_eigendecomposition(np.eye(3))
        assert np.allclose(vals, [1, 1, 1])
        assert np.allclose(vecs.T @ vecs, np.eye(3), atol=1e-12)

    def test_diagonal(self):
        vals, vecs = symmetric_eigendecomposition(np.diag([3.0, 1.0]))
        assert np.allclose(vals, [3.0, 1.0])
        assert np.allclose(np.abs(vecs), np.eye(2), atol=1e-12)
        # sign convention: largest component non-negative
        assert vecs[0, 0] > 0 and vecs[1, 1] > 0

    def test_matches_jacobi_oracle(self):
        rng = np.random.default_rng(42)
        a = random_symmetric(rng, 6)
        vals, vecs = symmetric_eigendecomposition(a)
        ovals, ovecs = jacobi_oracle(a)
        assert np.allclose(vals, ovals, atol=1e-8)
        # subspaces compared via projectors (sign/degeneracy agnostic)
        assert np.linalg.norm(projector(vecs) - projector(ovecs)) < 1e-8
        top = projector(vecs[:, :1]) - projector(ovecs[:, :1])
        assert np.linalg.norm(top) < 1e-8

    @pytest.mark.parametrize("n", [2, 5, 16, 33, 64])
    def test_reconstruction_and_orthonormality(self, n):
        rng = np.random.default_rng(n)
        for _ in range(5):
            a = random_symmetric(rng, n)
            vals, vecs = symmetric_eigendecomposition(a)
            recon = vecs @ np.diag(vals) @ vecs.T
            assert np.linalg.norm(a - recon) <= 1e-8 * np.linalg.norm(a)
            assert np.max(np.abs(vecs.T @ vecs - np.eye(n))) <= 1e-10
            assert np.all(np.diff(vals) <= 1e-12)

    def test_degenerate_eigenvalues_projector(self):
        # repeated eigenvalue: any orthonormal basis of the eigenspace is fine
        q, _ = np.linalg.qr(np.random.default_rng(7).standard_normal((4, 4)))
        a = q @ np.diag([5.0, 5.0, 1.0, 0.5]) @ q.T
        vals, vecs = symmetric_eigendecomposition((a + a.T) / 2)
        assert np.allclose(vals[:2], 5.0, atol=1e-9)
        true_proj = q[:, :2] @ q[:, :2].T
        assert np.linalg.norm(projector(vecs[:, :2]) - true_proj) < 1e-8

    def test_rejects_bad_input(self):
        with pytest.raises(ValidationError):
            symmetric_eigendecomposition(np.arange(9.0).reshape(3, 3))
        with pytest.raises(ValidationError):
            symmetric_eigendecomposition(np.array([[np.nan, 0], [0, 1.0]]))
        with pytest.raises(ValidationError):
            symmetric_eigendecomposition(np.zeros((2, 3)))

    def test_backends_agree(self):
        rng = np.random.default_rng(11)
        a = random_symmetric(rng, 12)
        vals_py, vecs_py = _kernels_py.jacobi_eigh(a)
        vals2, vecs2 = symmetric_eigendecomposition(a)
        order = np.argsort(-vals_py)
        assert np.allclose(np.sort(vals_py), np.sort(vals2), atol=1e-12)
        assert np.linalg.norm(projector(vecs_py[:, order]) - projector(vecs2)) < 1e-10


class TestHungarian:
    def test_single_cell(self):
        assert hungarian_assignment([[5.0]]) == [(0, 0)]

    def test_zero_diagonal(self):
        cost = np.ones((3, 3)) - np.eye(3)
        pairs = hungarian_assignment(cost)
        assert pairs == [(0, 0), (1, 1), (2, 2)]
        assert sum(cost[r, c] for r, c in pairs) == 0.0

    @pytest.mark.parametrize("shape", [(2, 2), (4, 4), (5, 5), (6, 6), (3, 5), (5, 3)])
    def test_matches_brute_force(self, shape):
        rng = np.random.default_rng(shape[0] * 10 + shape[1])
        for _ in range(20):
            cost = rng.random(shape)
            pairs = hungarian_assignment(cost)
            best, _ = brute_force_assignment(cost)
            total = sum(cost[r, c] for r, c in pairs)
            assert abs(total - best) < 1e-12
            rows = [r for r, _ in pairs]
            cols = [c for _, c in pairs]
            assert len(set(rows)) == len(rows) and len(set(cols)) == len(cols)
            assert len(pairs) == min(shape)

    def test_rejects_bad_input(self):
        with pytest.raises(ValidationError):
            hungarian_assignment(np.array([[np.inf, 1.0]]))
        with pytest.raises(ValidationError):
            hungarian_assignment(np.zeros((0, 3)))

    def test_backends_agree(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            cost = rng.random((4, 6))
            pairs = hungarian_assignment(cost)
            cols = _kernels_py.hungarian(cost)
            assert pairs == [(i, int(cols[i])) for i in range(4)]
