import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.integrate import solve_ivp

from netfail.graph_core import adjacency_matrix, complete_graph, cycle_graph, path_graph, star_graph
from netfail.spectral import (
    ConvergenceError,
    dominant_eigenvalue,
    eig_symmetric,
    matrix_exponential,
    spectral_power,
)


def random_symmetric(n, seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(n, n))
    return m + m.T


def ode_expm(m, t):
    """exp(M t) by integrating X' = X M from X(0) = I."""
    n = m.shape[0]
    sol = solve_ivp(
        lambda _, x: (x.reshape(n, n) @ m).ravel(),
        (0.0, t), np.eye(n).ravel(), method="DOP853", rtol=1e-13, atol=1e-15,
    )
    return sol.y[:, -1].reshape(n, n)


class TestEigSymmetric:
    def test_identity(self):
        np.testing.assert_allclose(eig_symmetric(np.eye(3)).eigenvalues, [1, 1, 1])

    def test_swap(self):
        # lambda^2 - 1 = 0
        np.testing.assert_allclose(eig_symmetric([[0, 1], [1, 0]]).eigenvalues, [1, -1], atol=1e-12)

    def test_triangle(self):
        # det(J - I - lambda I) = (2 - lambda)(-1 - lambda)^2
        dec = eig_symmetric(adjacency_matrix(complete_graph(3)))
        np.testing.assert_allclose(dec.eigenvalues, [2, -1, -1], atol=1e-12)

    def test_rejects_nonsymmetric(self):
        with pytest.raises(ValueError):
            eig_symmetric([[0, 1], [0, 0]])

    def test_iteration_cap(self):
        with pytest.raises(ConvergenceError):
            eig_symmetric(random_symmetric(6, 0), max_sweeps=1)

    def test_empty(self):
        dec = eig_symmetric(np.zeros((0, 0)))
        assert dec.eigenvalues.shape == (0,)

    @pytest.mark.parametrize("seed", range(10))
    def test_reconstruction_and_orthogonality(self, seed):
        n = 5 + 5 * (seed % 10)
        m = random_symmetric(n, seed)
        dec = eig_symmetric(m)
        assert np.max(np.abs(dec.reconstruct() - m)) <= 1e-8
        assert np.max(np.abs(dec.basis @ dec.basis.T - np.eye(n))) <= 1e-8
        off = dec.basis.T @ m @ dec.basis
        off -= np.diag(np.diag(off))
        assert np.linalg.norm(off) <= 1e-8
        assert np.all(np.diff(dec.eigenvalues) <= 0)
        np.testing.assert_allclose(dec.eigenvalues, np.linalg.eigvalsh(m)[::-1], atol=1e-9)


class TestSpectralPower:
    def test_zero_power(self):
        np.testing.assert_array_equal(spectral_power(random_symmetric(4, 1), 0), np.eye(4))

    def test_triangle_squared(self):
        c2 = spectral_power(adjacency_matrix(complete_graph(3)), 2)
        np.testing.assert_allclose(c2, [[2, 1, 1], [1, 2, 1], [1, 1, 2]], atol=1e-12)

    def test_path_squared(self):
        assert spectral_power(adjacency_matrix(path_graph(3)), 2)[0, 2] == pytest.approx(1.0)

    def test_negative_power(self):
        with pytest.raises(ValueError):
            spectral_power(np.eye(2), -1)

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_repeated_product(self, seed):
        n = 5 * (seed + 1)
        m = random_symmetric(n, seed) / math.sqrt(n)
        for t in range(11):
            ref = np.linalg.matrix_power(m, t)
            got = spectral_power(m, t)
            assert np.max(np.abs(got - ref)) <= 1e-6 * max(1.0, np.max(np.abs(ref)))


class TestDominantEigenvalue:
    @pytest.mark.parametrize("n", [2, 3, 5, 10])
    def test_complete(self, n):
        assert dominant_eigenvalue(adjacency_matrix(complete_graph(n))) == pytest.approx(n - 1, abs=1e-10)

    def test_cycle4(self):
        # 2 cos(2 pi k / 4) = 2, 0, -2, 0: a +/- pair that must resolve to +2
        assert dominant_eigenvalue(adjacency_matrix(cycle_graph(4))) == pytest.approx(2.0, abs=1e-10)

    def test_star(self):
        assert dominant_eigenvalue(adjacency_matrix(star_graph(3))) == pytest.approx(math.sqrt(3), abs=1e-10)

    def test_negative_dominant(self):
        assert dominant_eigenvalue(np.diag([-3.0, 1.0, 2.0])) == pytest.approx(-3.0, abs=1e-10)

    def test_zero_matrix_rejected(self):
        with pytest.raises(ValueError):
            dominant_eigenvalue(np.zeros((3, 3)))

    @pytest.mark.parametrize("seed", range(8))
    def test_symmetric_oracle(self, seed):
        m = random_symmetric(12, seed)
        vals = np.linalg.eigvalsh(m)
        ref = vals[np.argmax(np.abs(vals))]
        assert dominant_eigenvalue(m) == pytest.approx(ref, abs=1e-9)

    @settings(max_examples=30, deadline=None)
    @given(arrays(np.float64, (6, 6), elements=st.floats(0, 1)))
    def test_perron_bound(self, m):
        m = m + m.T
        if not np.any(m):
            return
        assert dominant_eigenvalue(m) <= np.max(m.sum(axis=1)) + 1e-9


class TestMatrixExponential:
    def test_zero(self):
        np.testing.assert_array_equal(matrix_exponential(np.zeros((3, 3)), 5.0), np.eye(3))

    def test_diagonal(self):
        got = matrix_exponential(np.diag([-1.0, 0.5]), 2.0)
        np.testing.assert_allclose(got, np.diag([math.exp(-2.0), math.exp(1.0)]), rtol=1e-14)

    def test_two_state_chain(self):
        got = matrix_exponential([[-1.0, 1.0], [0.0, 0.0]], math.log(2))
        np.testing.assert_allclose(got[0], [0.5, 0.5], atol=1e-14)

    def test_overflow_reported(self):
        with pytest.raises(OverflowError):
            matrix_exponential(np.array([[800.0]]), 1.0)

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            matrix_exponential(np.array([[np.nan]]))

    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("t", [0.1, 1.0, 3.0])
    def test_ode_oracle(self, seed, t):
        rng = np.random.default_rng(seed)
        m = rng.normal(size=(6, 6))
        ref = ode_expm(m, t)
        got = matrix_exponential(m, t)
        assert np.linalg.norm(got - ref) / np.linalg.norm(ref) <= 1e-8

    @pytest.mark.parametrize("seed", range(10))
    def test_semigroup(self, seed):
        rng = np.random.default_rng(seed)
        n = 1 + seed
        m = rng.normal(size=(n, n))
        m /= max(1.0, np.linalg.norm(m, 2))
        s, t = rng.random(2) * 3
        lhs = matrix_exponential(m, s + t)
        rhs = matrix_exponential(m, s) @ matrix_exponential(m, t)
        assert np.max(np.abs(lhs - rhs)) <= 1e-8
