import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wsim.linalg import (
    ModeLayout,
    dagger,
    dump_matrix_csv,
    eig_nonhermitian,
    embed,
    kron,
    matrix_exponential,
)

I2 = np.eye(2, dtype=complex)


def _random_matrix(rng, n, scale=1.0):
    return scale * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))


class TestModeLayout:
    def test_dims_and_total(self):
        layout = ModeLayout.for_n_max(2)
        assert layout.dims == (2, 3, 3)
        assert layout.dim == 18

    def test_rejects_non_qubit_first_mode(self):
        with pytest.raises(ValueError):
            ModeLayout((3, 3, 3))

    def test_rejects_tiny_bosonic_mode(self):
        with pytest.raises(ValueError):
            ModeLayout((2, 1, 3))

    def test_basis_index_ordering(self):
        layout = ModeLayout.for_n_max(2)
        assert layout.basis_index(0, 0, 0) == 0
        assert layout.basis_index(1, 0, 0) == 9
        assert layout.basis_index(0, 2, 1) == 7


class TestKron:
    def test_identity_left(self):
        a = np.array([[1, 2], [3, 4]], dtype=complex)
        out = kron(I2, a)
        assert np.array_equal(out[:2, :2], a)
        assert np.array_equal(out[2:, 2:], a)
        assert np.all(out[:2, 2:] == 0)

    def test_index_algebra(self):
        # standard Kronecker indexing: K[i*3 + k, j*3 + l] = A[i, j] B[k, l]
        rng = np.random.default_rng(0)
        a = _random_matrix(rng, 2)
        b = _random_matrix(rng, 3)
        out = kron(a, b)
        assert out.shape == (6, 6)
        assert out[0, 4] == pytest.approx(a[0, 1] * b[0, 1])
        assert out[1, 4] == pytest.approx(a[0, 1] * b[1, 1])

    def test_scalar_identity_right(self):
        a = np.array([[1j, 2], [0, 1]], dtype=complex)
        assert np.array_equal(kron(a, np.eye(1)), a)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2 ** 31 - 1))
    def test_associativity(self, seed):
        rng = np.random.default_rng(seed)
        a, b, c = (_random_matrix(rng, n) for n in (2, 3, 2))
        left = kron(kron(a, b), c)
        right = kron(a, kron(b, c))
        assert np.max(np.abs(left - right)) < 1e-12


class TestDagger:
    def test_identity(self):
        assert np.array_equal(dagger(I2), I2)

    def test_ladder(self):
        sigma = np.array([[0, 1], [0, 0]], dtype=complex)
        assert np.array_equal(dagger(sigma), np.array([[0, 0], [1, 0]]))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2 ** 31 - 1))
    def test_involution(self, seed):
        a = _random_matrix(np.random.default_rng(seed), 4)
        assert np.array_equal(dagger(dagger(a)), a)


class TestEmbed:
    layout = ModeLayout.for_n_max(2)

    def test_qubit_site(self):
        sigma = np.array([[0, 1], [0, 0]], dtype=complex)
        out = embed(sigma, 0, self.layout)
        assert out.shape == (18, 18)
        assert np.array_equal(out, np.kron(sigma, np.eye(9)))

    def test_identity_embeds_to_identity(self):
        assert np.array_equal(embed(I2, 0, self.layout), np.eye(18))

    def test_ladder_action(self):
        a_local = np.diag(np.sqrt([1.0, 2.0]), 1).astype(complex)
        a = embed(a_local, 1, self.layout)
        g10 = self.layout.basis_state(0, 1, 0)
        g00 = self.layout.basis_state(0, 0, 0)
        assert np.allclose(a @ g10, g00)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            embed(np.eye(3, dtype=complex), 0, self.layout)


class TestMatrixExponential:
    def test_zero(self):
        assert np.allclose(matrix_exponential(np.zeros((3, 3))), np.eye(3))

    def test_diagonal_phases(self):
        th1, th2 = 0.3, -1.2
        out = matrix_exponential(np.diag([1j * th1, 1j * th2]))
        assert np.allclose(out, np.diag([np.exp(1j * th1), np.exp(1j * th2)]), atol=1e-14)

    def test_nilpotent(self):
        out = matrix_exponential(np.array([[0, 1], [0, 0]], dtype=complex))
        assert np.allclose(out, np.array([[1, 1], [0, 1]]), atol=1e-15)

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            matrix_exponential(np.zeros((2, 3)))

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2 ** 31 - 1))
    def test_inverse_product(self, seed):
        rng = np.random.default_rng(seed)
        a = _random_matrix(rng, 5)
        a *= 10.0 / max(np.linalg.norm(a, 2), 1e-12)
        prod = matrix_exponential(a) @ matrix_exponential(-a)
        assert np.max(np.abs(prod - np.eye(5))) < 1e-9


class TestEig:
    def test_diagonal(self):
        pairs = eig_nonhermitian(np.diag([1.0, 2.0]).astype(complex))
        values = sorted(p.value.real for p in pairs)
        assert values == pytest.approx([1.0, 2.0])
        for p in pairs:
            assert p.residual < 1e-12
            assert np.linalg.norm(p.vector) == pytest.approx(1.0)

    def test_jordan_block_reports_residuals(self):
        pairs = eig_nonhermitian(np.array([[0, 1], [0, 0]], dtype=complex))
        assert all(abs(p.value) < 1e-12 for p in pairs)
        assert all(np.isfinite(p.residual) for p in pairs)

    def test_one_excitation_collective_decay(self):
        # -i tau o^+o restricted to the one-excitation subspace with unit
        # weights is -i tau times the all-ones matrix; its characteristic
        # polynomial l^2 (l - 3) = 0 gives eigenvalues {0, 0, -3i tau}.
        tau = 1.0
        m = -1j * tau * np.ones((3, 3), dtype=complex)
        values = sorted((p.value for p in eig_nonhermitian(m)), key=lambda z: z.imag)
        assert values[0] == pytest.approx(-3j * tau, abs=1e-12)
        assert values[1] == pytest.approx(0.0, abs=1e-12)
        assert values[2] == pytest.approx(0.0, abs=1e-12)

    def test_dimension_limit(self):
        with pytest.raises(ValueError):
            eig_nonhermitian(np.zeros((1001, 1001)))

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2 ** 31 - 1))
    def test_hermitian_spectrum_real(self, seed):
        a = _random_matrix(np.random.default_rng(seed), 6)
        h = 0.5 * (a + dagger(a))
        for p in eig_nonhermitian(h):
            assert abs(p.value.imag) < 1e-10


def test_dump_matrix_csv(tmp_path):
    a = np.array([[1 + 2j, 0], [0, -1j]])
    path = tmp_path / "m.csv"
    dump_matrix_csv(a, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "row,col,re,im"
    assert len(lines) == 5
    assert lines[1].startswith("0,0,1,2")
