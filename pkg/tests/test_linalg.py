import numpy as np
import pytest

from damc import nuclear_norm, svt, svt_with_info, thin_svd


def frob(A):
    return float(np.linalg.norm(A))


def test_thin_svd_diagonal():
    out = thin_svd(np.diag([3.0, 1.0]))
    assert np.allclose(out.sigma, [3.0, 1.0])


def test_thin_svd_zero_matrix():
    out = thin_svd(np.zeros((3, 4)))
    assert np.allclose(out.sigma, 0.0)


def test_thin_svd_reconstruction_oracle():
    # reconstruction residual is the oracle for a correct decomposition
    rng = np.random.default_rng(0)
    A = rng.standard_normal((8, 5))
    out = thin_svd(A)
    recon = out.U @ (out.sigma[:, None] * out.V.T)
    assert frob(recon - A) <= 1e-10 * max(1.0, frob(A))


def test_thin_svd_factors_orthonormal():
    rng = np.random.default_rng(1)
    for _ in range(10):
        A = rng.standard_normal((7, 9))
        out = thin_svd(A)
        r = out.sigma.size
        assert frob(out.U.T @ out.U - np.eye(r)) <= 1e-10
        assert frob(out.V.T @ out.V - np.eye(r)) <= 1e-10
        assert np.all(np.diff(out.sigma) <= 0) and np.all(out.sigma >= 0)


def test_thin_svd_rank_cap():
    rng = np.random.default_rng(2)
    A = rng.standard_normal((6, 6))
    out = thin_svd(A, rank_cap=3)
    assert out.sigma.size == 3
    assert out.U.shape == (6, 3) and out.V.shape == (6, 3)


def test_svt_diagonal_soft_threshold():
    out = svt(np.diag([3.0, 1.0]), 2.0)
    assert np.allclose(out, np.diag([1.0, 0.0]), atol=1e-12)


def test_svt_lambda_zero_is_identity():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((5, 8))
    assert frob(svt(A, 0.0) - A) <= 1e-10 * max(1.0, frob(A))


def test_svt_huge_lambda_gives_zero():
    rng = np.random.default_rng(4)
    A = rng.standard_normal((6, 6))
    out = svt_with_info(A, 1e6)
    assert out.rank == 0 and np.array_equal(out.X, np.zeros((6, 6)))


def test_svt_prox_local_non_improvement():
    # svt minimizes 0.5||Z - A||_F^2 + lam ||Z||_*; random small perturbations
    # around the output must not improve the objective
    rng = np.random.default_rng(5)
    lam = 1.0

    def objective(Z, A):
        return 0.5 * frob(Z - A) ** 2 + lam * nuclear_norm(Z)

    A = rng.standard_normal((6, 6))
    Z = svt(A, lam)
    base = objective(Z, A)
    for _ in range(100):
        E = rng.standard_normal((6, 6))
        E *= 1e-2 / frob(E)
        assert objective(Z + E, A) >= base - 1e-12


def test_svt_nuclear_norm_identity():
    rng = np.random.default_rng(6)
    for _ in range(10):
        A = rng.standard_normal((7, 5))
        lam = float(rng.uniform(0.1, 3.0))
        sig = np.linalg.svd(A, compute_uv=False)
        out = svt_with_info(A, lam)
        expected = np.maximum(sig - lam, 0.0)
        expected = expected[expected > 1e-12]
        assert np.allclose(out.sigma, expected, atol=1e-10)
        assert out.rank == expected.size
        assert abs(out.nuclear_norm - expected.sum()) <= 1e-10


def test_svt_non_expansive():
    rng = np.random.default_rng(7)
    for _ in range(20):
        A = rng.standard_normal((6, 8))
        B = rng.standard_normal((6, 8))
        lam = float(rng.uniform(0.0, 2.0))
        assert frob(svt(A, lam) - svt(B, lam)) <= frob(A - B) + 1e-12


def test_svt_rejects_negative_lambda():
    with pytest.raises(ValueError):
        svt(np.eye(2), -1.0)


def test_svt_randomized_path_matches_exact():
    # force the partial-SVD route with a rank hint on a matrix big enough to
    # use it, and compare against the exact path
    rng = np.random.default_rng(8)
    m, n, r = 450, 520, 6
    A = rng.standard_normal((m, r)) @ rng.standard_normal((r, n))
    A += 1e-3 * rng.standard_normal((m, n))
    lam = 5.0
    exact = svt_with_info(A, lam)
    approx = svt_with_info(A, lam, rank_hint=4)
    assert approx.rank == exact.rank
    assert frob(approx.X - exact.X) <= 1e-6 * max(1.0, frob(exact.X))


def test_svt_randomized_path_deterministic():
    rng = np.random.default_rng(9)
    A = rng.standard_normal((450, 460))
    one = svt_with_info(A, 30.0, rank_hint=8)
    two = svt_with_info(A, 30.0, rank_hint=8)
    assert np.array_equal(one.X, two.X)
    assert np.array_equal(one.sigma, two.sigma)
