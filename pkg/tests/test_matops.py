import numpy as np
import pytest

from cancorr.errors import InvalidInput, NotPositiveSemidefinite
from cancorr.matops import center_columns, pinv_times, sym_eig, thin_svd


class TestThinSvd:
    def test_identity(self):
        svd = thin_svd(np.eye(3), rank_tol=1e-12)
        np.testing.assert_allclose(svd.singular_values, [1.0, 1.0, 1.0])
        assert svd.numeric_rank == 3

    def test_rank_one_symmetric(self):
        svd = thin_svd(np.array([[1.0, 1.0], [1.0, 1.0]]), rank_tol=1e-10)
        assert svd.numeric_rank == 1
        np.testing.assert_allclose(svd.singular_values, [2.0])

    def test_duplicated_rows_vs_gram_eigen_oracle(self):
        rng = np.random.default_rng(7)
        a = rng.standard_normal((5, 8))
        a[3] = a[0]
        a[4] = a[1]
        svd = thin_svd(a)
        # oracle: eigenvalues of A'A give the squared singular values
        evals = np.sort(np.linalg.eigh(a.T @ a)[0])[::-1]
        assert svd.numeric_rank == np.count_nonzero(evals > 1e-10 * evals[0])
        np.testing.assert_allclose(
            svd.singular_values**2, evals[: svd.numeric_rank], rtol=1e-8, atol=1e-10
        )
        recon = svd.left @ np.diag(svd.singular_values) @ svd.right.T
        assert np.linalg.norm(recon - a) <= 1e-8 * np.linalg.norm(a)

    def test_zero_matrix_rank_zero(self):
        svd = thin_svd(np.zeros((3, 4)))
        assert svd.numeric_rank == 0
        assert svd.left.shape == (3, 0)
        assert svd.right.shape == (4, 0)
        assert svd.singular_values.size == 0

    def test_factor_orthonormality(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal((6, 4))
        svd = thin_svd(a)
        k = svd.numeric_rank
        assert np.linalg.norm(svd.left.T @ svd.left - np.eye(k)) < 1e-10
        assert np.linalg.norm(svd.right.T @ svd.right - np.eye(k)) < 1e-10

    def test_sign_convention_largest_left_entry_positive(self):
        rng = np.random.default_rng(11)
        a = rng.standard_normal((5, 5))
        svd = thin_svd(a)
        anchors = np.abs(svd.left).argmax(axis=0)
        assert np.all(svd.left[anchors, np.arange(svd.numeric_rank)] > 0)

    def test_deterministic_bitwise(self):
        rng = np.random.default_rng(5)
        a = rng.standard_normal((7, 4))
        s1, s2 = thin_svd(a), thin_svd(a)
        assert np.array_equal(s1.left, s2.left)
        assert np.array_equal(s1.singular_values, s2.singular_values)
        assert np.array_equal(s1.right, s2.right)

    def test_nonfinite_rejected(self):
        with pytest.raises(InvalidInput):
            thin_svd(np.array([[1.0, np.nan]]))

    def test_bad_tolerance_rejected(self):
        with pytest.raises(InvalidInput):
            thin_svd(np.eye(2), rank_tol=0.0)


class TestSymEig:
    def test_diagonal(self):
        eig = sym_eig(np.diag([4.0, 1.0, 0.0]), rank_tol=1e-10)
        np.testing.assert_allclose(eig.values, [4.0, 1.0, 0.0])
        assert eig.numeric_rank == 2

    def test_centering_projector_spectrum(self):
        n = 4
        p = np.eye(n) - np.ones((n, n)) / n
        eig = sym_eig(p)
        np.testing.assert_allclose(eig.values, [1.0, 1.0, 1.0, 0.0], atol=1e-12)

    def test_gram_matches_svd_oracle(self):
        rng = np.random.default_rng(13)
        g = rng.standard_normal((6, 5))
        eig = sym_eig(g.T @ g)
        svd = thin_svd(g)
        np.testing.assert_allclose(
            eig.values[: svd.numeric_rank], svd.singular_values**2, rtol=1e-8, atol=1e-8
        )

    def test_eigenvector_residual(self):
        rng = np.random.default_rng(17)
        g = rng.standard_normal((5, 5))
        k = g @ g.T
        eig = sym_eig(k)
        resid = k @ eig.vectors - eig.vectors * eig.values[None, :]
        assert np.abs(resid).max() <= 1e-8 * np.abs(k).max()
        assert np.linalg.norm(eig.vectors.T @ eig.vectors - np.eye(5)) < 1e-10

    def test_tiny_negative_clamped(self):
        a = np.diag([1.0, -1e-12])
        eig = sym_eig(a)
        assert eig.values[-1] == 0.0

    def test_significantly_negative_rejected(self):
        with pytest.raises(NotPositiveSemidefinite):
            sym_eig(np.diag([1.0, -0.5]))

    def test_asymmetric_rejected(self):
        with pytest.raises(InvalidInput):
            sym_eig(np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_nonsquare_rejected(self):
        with pytest.raises(InvalidInput):
            sym_eig(np.ones((2, 3)))


class TestPinvTimes:
    def test_diagonal(self):
        svd = thin_svd(np.diag([2.0, 0.0]))
        out = pinv_times(svd, np.array([[4.0], [3.0]]))
        np.testing.assert_allclose(out, [[2.0], [0.0]])

    def test_orthogonal_is_transpose(self):
        rng = np.random.default_rng(19)
        q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        b = rng.standard_normal((4, 2))
        np.testing.assert_allclose(pinv_times(thin_svd(q), b), q.T @ b, atol=1e-12)

    def test_penrose_identities(self):
        rng = np.random.default_rng(23)
        a = rng.standard_normal((6, 2)) @ rng.standard_normal((2, 4))  # rank 2
        svd = thin_svd(a)
        pinv = pinv_times(svd, np.eye(6))
        assert np.abs(a @ pinv @ a - a).max() < 1e-8
        assert np.abs(pinv @ a @ pinv - pinv).max() < 1e-8
        assert np.abs((a @ pinv).T - a @ pinv).max() < 1e-8
        assert np.abs((pinv @ a).T - pinv @ a).max() < 1e-8

    def test_row_space_roundtrip(self):
        rng = np.random.default_rng(29)
        a = rng.standard_normal((4, 7))
        x = a.T @ rng.standard_normal((4, 3))  # columns in the row space
        out = pinv_times(thin_svd(a), a @ x)
        assert np.abs(out - x).max() < 1e-8

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInput):
            pinv_times(thin_svd(np.eye(3)), np.ones((2, 1)))


class TestCenterColumns:
    def test_single_row(self):
        np.testing.assert_allclose(center_columns([[1.0, 3.0]]), [[-1.0, 1.0]])

    def test_idempotent(self):
        rng = np.random.default_rng(31)
        a = center_columns(rng.standard_normal((3, 6)))
        np.testing.assert_allclose(center_columns(a), a, atol=1e-13)

    def test_row_means_zero(self):
        rng = np.random.default_rng(37)
        a = center_columns(rng.standard_normal((4, 7)))
        assert np.abs(a.sum(axis=1)).max() < 1e-12 * 7 * max(np.abs(a).max(), 1)
